"""End-to-end acceptance checks, one test per criterion, each under its time budget.

Every test prints a single PASS/FAIL line; the lines are also collected in the
terminal summary.
"""

import filecmp
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from dataclasses import replace

from conftest import ACCEPTANCE, DATA, FIXTURES, data_text, frozen, load_domain, load_problem, template
from mutations import MUTATIONS, clean_pair, codes_found, mutated_pair
from nl2pddl.builders import (
    LLM, TypeHierarchy, assemble_domain, build_domain_action_by_action, extract_task, generate_task,
    load_action_model, task_feedback,
)
from nl2pddl.llm import LLMClient
from nl2pddl.pddl import Atom, format_domain, format_problem, parse_domain, parse_problem, tokens_of
from nl2pddl.planning import apply, ground, operational_equivalence, solve, validate_plan
from nl2pddl.validation import ERROR, validate_pair
from oracles import blocks_instance, naive_apply, naive_ground, shortest_plan_length


@contextmanager
def criterion(number: int, title: str, budget: float):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
    except BaseException as exc:
        line = f"criterion {number} FAIL  {title} ({time.perf_counter() - start:.2f}s): {exc}"
        ACCEPTANCE.append(line)
        print(line)
        raise
    line = f"criterion {number} PASS  {title} ({elapsed:.2f}s < {budget:g}s)"
    ACCEPTANCE.append(line)
    print(line)


def drop_pickup_precondition(domain, predicate):
    pickup = domain.action("pickup")
    mutant = replace(pickup, preconditions=tuple(l for l in pickup.preconditions if l.predicate != predicate))
    return replace(domain, actions=tuple(mutant if a.name == "pickup" else a for a in domain.actions))


def test_criterion_1_round_trip():
    with criterion(1, "round trip of blocksworld and logistics fixtures", 1.0):
        for rel, parse, fmt in (("blocksworld/pickup_domain.pddl", parse_domain, format_domain),
                                ("blocksworld/three_blocks_listing.pddl", parse_problem, format_problem),
                                ("logistics/domain.pddl", parse_domain, format_domain),
                                ("logistics/problem.pddl", parse_problem, format_problem)):
            model = parse(data_text(rel))
            text = fmt(model)
            assert parse(text) == model, rel
            assert fmt(parse(text)) == text, rel


def test_criterion_2_planner_correctness():
    with criterion(2, "six-step plan and 20 instances equal the exhaustive oracle", 10.0):
        domain, problem = load_domain("blocksworld/domain.pddl"), load_problem("blocksworld/problem.pddl")
        plan = solve(domain, problem)
        assert len(plan.steps) == 6
        assert validate_plan(domain, problem, plan).valid
        expected = frozen("blocks_optimal.json")
        for seed in range(20):
            instance = parse_problem(blocks_instance(seed, 3 + seed % 2))
            optimal = shortest_plan_length(domain, instance)
            assert optimal == expected[str(seed)]["optimal"], seed
            assert solve(domain, instance).cost == optimal, seed


def test_criterion_3_logistics_predicates():
    with criterion(3, "action-by-action build yields the 7 logistics predicates verbatim", 1.0):
        llm = LLMClient(fixtures=FIXTURES)
        logistics = DATA / "logistics"
        draft = build_domain_action_by_action(
            llm, load_action_model(logistics / "action_model.json"), data_text("logistics/domain_desc.txt"),
            TypeHierarchy.load(logistics / "hierarchy.json"), template("pddl_prompt.txt"), max_iter=2,
            key_prefix="logistics")
        expected = frozen("logistics_predicates.json")
        assert len(draft.predicates) == len(expected) == 7
        for built, record in zip(draft.predicates, expected):
            assert built.name == record["name"]
            assert [list(p) for p in built.param_map.items()] == record["params"]
            assert built.raw == record["raw"]
            assert built.clean == record["clean"]
        assert assemble_domain("logistics", [":strips"], TypeHierarchy.load(logistics / "hierarchy.json"),
                               draft.predicates, draft.actions).diagnostics == []


def test_criterion_4_task_and_feedback():
    with criterion(4, "generated task matches the listing and feedback removes (clear red_block)", 1.0):
        llm = LLMClient(fixtures=FIXTURES)
        types = TypeHierarchy.load(DATA / "blocksworld" / "types.json")
        predicates = [p for p in load_domain("blocksworld/typed_domain.pddl").predicates]
        listing = data_text("blocksworld/colored_blocks_problem.pddl")
        objects, init, goal, _ = extract_task(llm, data_text("blocksworld/problem_desc.txt"),
                                              template("extract_task.txt"), types, predicates,
                                              key="blocksworld/task/round1")
        text = generate_task("blocksworld", "blocksworld_problem", objects, init, goal)
        assert tokens_of(text) == tokens_of(listing)

        spurious = Atom("clear", ("red_block",))
        candidate = (objects, init + (spurious,), goal)
        (objects2, init2, goal2), report = task_feedback(
            llm, data_text("blocksworld/problem_desc.txt"), template("feedback_task.txt"), LLM, predicates,
            types, candidate, key="blocksworld/task_feedback/round1", domain_name="blocksworld",
            problem_name="blocksworld_problem")
        assert [str(s) for s in report.suggestions] == ["remove init (clear red_block)"]
        assert spurious not in init2
        revised = generate_task("blocksworld", "blocksworld_problem", objects2, init2, goal2)
        assert tokens_of(revised) == tokens_of(listing)


def test_criterion_5_diagnostic_soundness():
    with criterion(5, "10 single-fault mutations give exactly their code; clean fixtures give none", 2.0):
        assert len(MUTATIONS) == 10
        for code in MUTATIONS:
            assert codes_found(*mutated_pair(code)) == [(code, ERROR)], code
            assert codes_found(*clean_pair(code)) == [], code
        for rel in ("blocksworld", "logistics"):
            found = validate_pair(load_domain(f"{rel}/domain.pddl"), load_problem(f"{rel}/problem.pddl"))
            assert [d for d in found if d.severity == ERROR] == []


def test_criterion_6_operational_equivalence():
    with criterion(6, "identical domains agree; pickup mutant caught within 200 walks on 50 seeds", 30.0):
        domain, problem = load_domain("blocksworld/domain.pddl"), load_problem("blocksworld/problem.pddl")
        for seed in range(50):
            assert operational_equivalence(domain, domain, problem, n_walks=200, seed=seed).agree
        # whichever pickup precondition is dropped, every seed must catch it
        for predicate in ("clear", "on-table", "arm-empty"):
            mutant = drop_pickup_precondition(domain, predicate)
            caught = sum(not operational_equivalence(domain, mutant, problem, n_walks=200, seed=seed).agree
                         for seed in range(50))
            assert caught == 50, f"dropping ({predicate} ...) caught on {caught}/50 seeds"


def test_criterion_7_transition_semantics():
    with criterion(7, "1,000 randomized apply checks against naive re-evaluation", 5.0):
        rng = random.Random(7)
        cases = []
        for domain, problem in ((load_domain("blocksworld/domain.pddl"), parse_problem(blocks_instance(3, 4))),
                                (load_domain("logistics/domain.pddl"), load_problem("logistics/problem.pddl"))):
            library = {ga.name: ga for ga in ground(domain, problem).actions}
            naive = [(name, pre, eff) for name, pre, eff in naive_ground(domain, problem) if name in library]
            assert len(naive) == len(library)
            universe = frozenset(a for _, pre, eff in naive for a, _ in pre + eff)
            cases.append((library, naive, universe))
        for i in range(1000):
            library, naive, universe = cases[i % 2]
            name, pre, eff = rng.choice(naive)
            state = frozenset(a for a in universe if rng.random() < 0.4)
            state = (state - {a for a, pos in pre if not pos}) | {a for a, pos in pre if pos}
            result = apply(state, library[name])
            assert result == naive_apply(universe, state, eff), name
            touched = {a for a, _ in eff}
            assert all((a in result) == (a in state) for a in universe - touched)


def snapshot(root):
    return sorted(p.relative_to(root).as_posix() for p in root.rglob("*") if p.is_file())


def test_criterion_8_determinism(tmp_path):
    with criterion(8, "two fixture-backend runs produce byte-identical output trees", 10.0):
        config = DATA / "logistics" / "pipeline.yaml"
        outs = [tmp_path / "first", tmp_path / "second"]
        for out in outs:
            done = subprocess.run([sys.executable, "-m", "nl2pddl.cli", "run", "--config", str(config),
                                   "--backend", "fixture", "--out", str(out)], capture_output=True, text=True)
            assert done.returncode == 0, done.stderr
        files = snapshot(outs[0])
        assert files == snapshot(outs[1]) and "run_report.json" in files and "ledger.jsonl" in files
        _, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], files, shallow=False)
        assert mismatch == [] and errors == []
