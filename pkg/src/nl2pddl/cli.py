"""Command-line entry point: ``nl2pddl <subcommand> ...``.

Exit codes: 0 success, 1 failure (bad input, errors found, stage failed),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .pddl.errors import PDDLError
from .pddl.formatter import format_domain, format_problem
from .pddl.model import Domain
from .pddl.parser import parse_domain, parse_problem
from .pddl.sexpr import SList, read
from .pipeline import ConfigError, PipelineConfig, run
from .planning import (
    PlanningError, ResourceExhausted, Unsolvable, operational_equivalence, solve, validate_plan,
)
from .validation import check_domain, has_errors, validate_pair

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def load_pddl(path: str):
    """Parse a file as a domain or a problem, whichever it declares."""
    text = _read(path)
    nodes, _ = read(text)
    for node in nodes:
        if isinstance(node, SList) and len(node.items) > 1 and isinstance(node.items[1], SList):
            head = node.items[1].items[0] if node.items[1].items else None
            if getattr(head, "value", None) == "problem":
                return parse_problem(text)
            break
    return parse_domain(text)


def _summary(model) -> dict:
    if isinstance(model, Domain):
        return {"kind": "domain", "name": model.name, "requirements": list(model.requirements),
                "types": model.types, "predicates": [p.as_record() for p in model.predicates],
                "actions": [a.name for a in model.actions]}
    return {"kind": "problem", "name": model.name, "domain": model.domain_name, "objects": model.objects,
            "init": [str(a) for a in model.init], "goal": [str(l) for l in model.goal]}


def cmd_parse(args) -> int:
    print(json.dumps(_summary(load_pddl(args.file)), indent=2))
    return EXIT_OK


def cmd_fmt(args) -> int:
    model = load_pddl(args.file)
    text = format_domain(model) if isinstance(model, Domain) else format_problem(model)
    if args.check:
        same = _read(args.file) == text
        if not same:
            print(f"{args.file} is not in canonical form", file=sys.stderr)
        return EXIT_OK if same else EXIT_FAIL
    if args.in_place:
        Path(args.file).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args) -> int:
    domain = parse_domain(_read(args.domain))
    if args.problem:
        found = validate_pair(domain, parse_problem(_read(args.problem)), domain_file=args.domain,
                              problem_file=args.problem, strict=args.strict)
    else:
        found = check_domain(domain, file=args.domain, strict=args.strict)
    if args.json:
        print(json.dumps([d.to_dict() for d in found], indent=2))
    else:
        for d in found:
            print(d)
    return EXIT_FAIL if has_errors(found) else EXIT_OK


def cmd_plan(args) -> int:
    domain, problem = parse_domain(_read(args.domain)), parse_problem(_read(args.problem))
    try:
        plan = solve(domain, problem, max_expansions=args.max_expansions, timeout=args.timeout, mode=args.mode)
    except (Unsolvable, ResourceExhausted) as exc:
        print(f"no plan: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = plan.to_text()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    print(f"; cost {plan.cost}, {plan.expansions} expansions", file=sys.stderr)
    return EXIT_OK


def cmd_validate_plan(args) -> int:
    domain, problem = parse_domain(_read(args.domain)), parse_problem(_read(args.problem))
    report = validate_plan(domain, problem, _read(args.plan))
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK if report.valid else EXIT_FAIL


def cmd_compare(args) -> int:
    a, b = parse_domain(_read(args.domain_a)), parse_domain(_read(args.domain_b))
    problem = parse_problem(_read(args.problem))
    report = operational_equivalence(a, b, problem, n_walks=args.walks, max_len=args.max_len,
                                     seed=args.seed, check_goal=not args.no_goal)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK if report.agree else EXIT_FAIL


def _pipeline(args, stages=None) -> int:
    cfg = PipelineConfig.load(args.config, backend=args.backend, out=args.out, seed=args.seed, stages=stages)
    report = run(cfg, keep_going=args.keep_going)
    for stage in report.stages:
        line = f"{stage.name}: {stage.status}"
        if stage.error:
            line += f" ({stage.error})"
        print(line)
    print(f"output: {cfg.output}")
    return report.exit_code


def cmd_run(args) -> int:
    return _pipeline(args)


def _stage_command(stage: str):
    def command(args) -> int:
        return _pipeline(args, stages=[stage])
    return command


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nl2pddl", description="Build, check and solve PDDL models.")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a domain or problem and print a JSON summary")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("fmt", help="print the canonical form of a PDDL file")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--check", action="store_true", help="exit 1 if the file is not canonical")
    g.add_argument("-i", "--in-place", action="store_true")
    p.set_defaults(func=cmd_fmt)

    p = sub.add_parser("check", help="static diagnostics for a domain, or a domain/problem pair")
    p.add_argument("domain")
    p.add_argument("problem", nargs="?")
    p.add_argument("--strict", action="store_true", help="report every finding as an error")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("plan", help="search for a plan")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("--mode", choices=("bfs", "gbfs"), default="bfs")
    p.add_argument("--max-expansions", type=int, default=1_000_000)
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate-plan", help="simulate a plan and report the first failure")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("plan")
    p.set_defaults(func=cmd_validate_plan)

    p = sub.add_parser("compare", help="sample action sequences to compare two domains")
    p.add_argument("domain_a")
    p.add_argument("domain_b")
    p.add_argument("problem")
    p.add_argument("--walks", type=int, default=200)
    p.add_argument("--max-len", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-goal", action="store_true", help="ignore goal agreement")
    p.set_defaults(func=cmd_compare)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True)
    common.add_argument("--backend", choices=("live", "fixture"))
    common.add_argument("--seed", type=int)
    common.add_argument("--keep-going", action="store_true", help="run later stages after a failure")
    common.add_argument("--out", help="output directory (overrides the config)")
    for stage, help_text in (("build-domain", "build the domain action by action"),
                             ("build-task", "extract the problem file"),
                             ("feedback", "run critique rounds on the problem")):
        p = sub.add_parser(stage, parents=[common], help=help_text)
        p.set_defaults(func=_stage_command(stage))
    p = sub.add_parser("run", parents=[common], help="run every configured stage")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PDDLError, PlanningError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
