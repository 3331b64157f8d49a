"""End-to-end runs: NL descriptions to domain, task, diagnostics, plan and critique."""

from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .builders.domain import (
    TypeHierarchy, assemble_domain, build_domain_action_by_action, load_action_model,
)
from .builders.feedback import (
    LLM, MODES, RoundsExhausted, ScriptedGate, refine_until_accepted, task_feedback,
)
from .builders.task import extract_task, generate_task
from .llm.client import LLMClient, LLMConfig, RunLedger
from .llm.templates import PromptTemplate
from .pddl.formatter import format_domain
from .pddl.parser import parse_domain, parse_problem
from .planning.search import solve
from .planning.validate import validate_plan
from .validation import has_errors, validate_pair

logger = logging.getLogger(__name__)

STAGES = ("build-domain", "build-task", "validate", "plan", "feedback")
BACKENDS = ("live", "fixture")
_ENV = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")

OK, FAILED, SKIPPED = "ok", "failed", "skipped"


class ConfigError(ValueError):
    pass


def _interpolate(value, env):
    if isinstance(value, str):
        def sub(m):
            if m.group(1) not in env:
                raise ConfigError(f"environment variable {m.group(1)} is not set")
            return env[m.group(1)]
        return _ENV.sub(sub, value)
    if isinstance(value, dict):
        return {k: _interpolate(v, env) for k, v in value.items()}
    if isinstance(value, list):
        return [_interpolate(v, env) for v in value]
    return value


@dataclass
class PipelineConfig:
    base: Path
    stages: tuple[str, ...]
    paths: dict[str, Path]
    output: Path
    llm: LLMConfig = field(default_factory=LLMConfig)
    backend: str = "fixture"
    fixtures: Path | None = None
    names: dict[str, str] = field(default_factory=dict)
    keys: dict[str, str] = field(default_factory=dict)
    limits: dict = field(default_factory=dict)
    feedback_mode: str = LLM
    seed: int = 0

    @classmethod
    def load(cls, path: str | Path, *, backend: str | None = None, out: str | Path | None = None,
             seed: int | None = None, stages=None, env=None) -> PipelineConfig:
        path = Path(path)
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        return cls.from_mapping(data, path.parent, backend=backend, out=out, seed=seed, stages=stages, env=env)

    @classmethod
    def from_mapping(cls, data: dict, base: Path, *, backend=None, out=None, seed=None, stages=None,
                     env=None) -> PipelineConfig:
        known = {"stages", "paths", "output", "llm", "backend", "fixtures", "names", "keys", "limits",
                 "feedback_mode", "seed"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        base = Path(base)
        env = os.environ if env is None else env
        # secrets are only resolved inside the llm section
        llm_data = _interpolate(dict(data.get("llm") or {}), env)
        limits = {"max_iter": 2, "max_rounds": 1, "max_expansions": 1_000_000, "token_budget": None}
        limits.update(data.get("limits") or {})
        if limits["token_budget"] is not None:
            llm_data["token_budget"] = limits["token_budget"]
        try:
            llm = LLMConfig.from_mapping(llm_data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

        stages = tuple(stages or data.get("stages") or STAGES)
        bad = [s for s in stages if s not in STAGES]
        if bad:
            raise ConfigError(f"unknown stage(s): {', '.join(bad)}")
        if list(stages) != sorted(set(stages), key=STAGES.index):
            raise ConfigError(f"stages must be distinct and ordered as {', '.join(STAGES)}")

        paths = {k: base / v for k, v in (data.get("paths") or {}).items()}
        backend = backend or data.get("backend", "fixture")
        if backend not in BACKENDS:
            raise ConfigError(f"backend must be live or fixture, got {backend!r}")
        fixtures = base / data["fixtures"] if data.get("fixtures") else None
        if backend == "fixture" and fixtures is None:
            raise ConfigError("fixture backend needs a 'fixtures' directory")
        mode = data.get("feedback_mode", LLM)
        if mode not in MODES:
            raise ConfigError(f"feedback_mode must be one of {', '.join(MODES)}")
        output = Path(out) if out is not None else base / data.get("output", "out")
        cfg = cls(base, stages, paths, output, llm, backend, fixtures,
                  {"domain": "domain", "problem": "problem", **(data.get("names") or {})},
                  dict(data.get("keys") or {}), limits, mode,
                  int(seed if seed is not None else data.get("seed", 0)))
        cfg.check()
        return cfg

    def needs(self) -> list[str]:
        """Path keys the requested stages read."""
        s = set(self.stages)
        keys = []
        if "build-domain" in s:
            keys += ["domain_desc", "action_model", "hierarchy", "templates"]
        if "build-task" in s:
            keys += ["problem_desc", "templates"] + ([] if "build-domain" in s else ["domain"])
        if s & {"validate", "plan"}:
            if "build-domain" not in s:
                keys.append("domain")
            if "build-task" not in s:
                keys.append("problem")
        if "feedback" in s:
            keys += ["problem_desc", "templates"]
            if "build-domain" not in s:
                keys.append("domain")
            if "build-task" not in s:
                keys.append("problem")
        if "answers" in self.paths:
            keys.append("answers")
        return list(dict.fromkeys(keys))

    def check(self) -> None:
        for key in self.needs():
            if key not in self.paths:
                raise ConfigError(f"stages {', '.join(self.stages)} need paths.{key}")
            if not self.paths[key].exists():
                raise ConfigError(f"paths.{key}: {self.paths[key]} does not exist")
        if self.backend == "fixture" and not self.fixtures.is_dir():
            raise ConfigError(f"fixtures: {self.fixtures} is not a directory")
        if self.feedback_mode != LLM and "feedback" in self.stages and "answers" not in self.paths:
            raise ConfigError(f"feedback_mode {self.feedback_mode} in a pipeline needs paths.answers")


@dataclass
class StageResult:
    name: str
    status: str
    artifacts: list[str] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)
    error: str | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "artifacts": self.artifacts,
                "diagnostics": self.diagnostics, "error": self.error, "details": self.details}


@dataclass
class RunReport:
    stages: list[StageResult]
    ledger: str
    seed: int
    backend: str

    @property
    def ok(self) -> bool:
        return all(s.status == OK for s in self.stages)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    @property
    def artifacts(self) -> list[str]:
        return [a for s in self.stages for a in s.artifacts]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "seed": self.seed, "backend": self.backend, "ledger": self.ledger,
                "stages": [s.to_dict() for s in self.stages], "artifacts": self.artifacts}


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class _Run:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.out = cfg.output
        self.domain = None
        self.problem = None
        self.predicates = None
        self.hierarchy = None
        self._llm = None
        self.ledger = RunLedger(self.out / "ledger.jsonl")

    def llm(self) -> LLMClient:
        if self._llm is None:
            fixtures = self.cfg.fixtures if self.cfg.backend == "fixture" else None
            self._llm = LLMClient(self.cfg.llm, fixtures=fixtures, ledger=self.ledger)
        return self._llm

    def write(self, result: StageResult, name: str, text: str) -> None:
        (self.out / name).write_text(text, encoding="utf-8")
        result.artifacts.append(name)

    def read(self, key: str) -> str:
        return self.cfg.paths[key].read_text(encoding="utf-8")

    def template(self, name: str) -> PromptTemplate:
        return PromptTemplate.load(self.cfg.paths["templates"] / name)

    def types(self) -> TypeHierarchy | None:
        if self.hierarchy is None and "hierarchy" in self.cfg.paths:
            self.hierarchy = TypeHierarchy.load(self.cfg.paths["hierarchy"])
        return self.hierarchy

    def load_domain(self):
        if self.domain is None:
            self.domain = parse_domain(self.read("domain"))
        return self.domain

    def load_problem(self):
        if self.problem is None:
            self.problem = parse_problem(self.read("problem"))
        return self.problem

    def key(self, name: str, default: str) -> str:
        return self.cfg.keys.get(name, default)

    # stages

    def build_domain(self, r: StageResult) -> None:
        cfg = self.cfg
        draft = build_domain_action_by_action(
            self.llm(), load_action_model(cfg.paths["action_model"]), self.read("domain_desc"),
            self.types(), self.template("pddl_prompt.txt"), cfg.limits["max_iter"],
            key_prefix=self.key("domain", "domain"))
        built = assemble_domain(cfg.names["domain"], [":strips"], self.types(), draft.predicates, draft.actions)
        self.domain = built.domain
        self.write(r, "domain.pddl", format_domain(built.domain))
        diagnostics = draft.diagnostics + built.diagnostics
        r.diagnostics = [d.to_dict() for d in diagnostics]
        r.details = {"predicates": len(draft.predicates), "actions": len(draft.actions),
                     "sweeps": draft.sweeps, "warnings": draft.warnings}
        if has_errors(diagnostics):
            r.status = FAILED

    def build_task(self, r: StageResult) -> None:
        domain = self.load_domain()
        draft = extract_task(self.llm(), self.read("problem_desc"), self.template("extract_task.txt"),
                             self.types() or dict(domain.types), domain.predicates,
                             key=self.key("task", "task") + "/round1")
        text = generate_task(domain.name, self.cfg.names["problem"], draft.objects, draft.init, draft.goal)
        self.problem = parse_problem(text)
        self.write(r, "problem.pddl", text)
        r.diagnostics = [d.to_dict() for d in draft.diagnostics]
        r.details = {"objects": len(draft.objects), "init": len(draft.init), "goal": len(draft.goal),
                     "warnings": draft.warnings}
        if has_errors(draft.diagnostics):
            r.status = FAILED

    def validate(self, r: StageResult) -> None:
        diagnostics = validate_pair(self.load_domain(), self.load_problem())
        r.diagnostics = [d.to_dict() for d in diagnostics]
        self.write(r, "diagnostics.json", _dump(r.diagnostics))
        if has_errors(diagnostics):
            r.status = FAILED

    def plan(self, r: StageResult) -> None:
        domain, problem = self.load_domain(), self.load_problem()
        plan = solve(domain, problem, max_expansions=self.cfg.limits["max_expansions"])
        check = validate_plan(domain, problem, plan)
        self.write(r, "plan.txt", plan.to_text())
        r.details = {"length": len(plan.steps), "expansions": plan.expansions, "validation": check.to_dict()}
        if not check.valid:
            r.status = FAILED
            r.error = check.message

    def feedback(self, r: StageResult) -> None:
        domain, problem = self.load_domain(), self.load_problem()
        gate = ScriptedGate.load(self.cfg.paths["answers"]) if "answers" in self.cfg.paths else None
        template = self.template("feedback_task.txt")
        types = self.types() or dict(domain.types)
        prefix = self.key("feedback", "task_feedback")

        def critique(candidate, rnd):
            return task_feedback(self.llm(), self.read("problem_desc"), template, self.cfg.feedback_mode,
                                 domain.predicates, types, candidate, gate=gate, key=f"{prefix}/round{rnd}",
                                 domain_name=domain.name, problem_name=problem.name)

        try:
            final, transcript = refine_until_accepted(
                lambda: (problem.objects, problem.init, problem.goal), critique, self.cfg.limits["max_rounds"])
        except RoundsExhausted as exc:
            final, transcript = exc.candidate, exc.transcript
            r.status = FAILED
            r.error = str(exc)
        self.write(r, "feedback.json", _dump(transcript))
        self.write(r, "problem_revised.pddl", generate_task(domain.name, problem.name, *final))
        r.details = {"rounds": len(transcript), "verdict": transcript[-1]["verdict"]}


def run(cfg: PipelineConfig, *, keep_going: bool = False) -> RunReport:
    """Execute the configured stages in order and write ``run_report.json``."""
    cfg.output.mkdir(parents=True, exist_ok=True)
    state = _Run(cfg)
    results: list[StageResult] = []
    halted = False
    for stage in cfg.stages:
        r = StageResult(stage, OK)
        results.append(r)
        if halted:
            r.status = SKIPPED
            continue
        try:
            getattr(state, stage.replace("-", "_"))(r)
        except Exception as exc:  # recorded per stage, never raised past the run
            logger.debug("stage %s failed", stage, exc_info=True)
            r.status = FAILED
            r.error = f"{type(exc).__name__}: {exc}"
        logger.info("stage %s: %s", stage, r.status)
        if r.status == FAILED and not keep_going:
            halted = True
    if state._llm is not None:
        state._llm.close()
    report = RunReport(results, "ledger.jsonl", cfg.seed, cfg.backend)
    (cfg.output / "run_report.json").write_text(_dump(report.to_dict()), encoding="utf-8")
    return report
