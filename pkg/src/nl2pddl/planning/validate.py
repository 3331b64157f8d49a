"""Plan validation by simulation from the initial state."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..pddl.errors import PDDLError
from ..pddl.model import Atom, Domain, Problem
from ..pddl.sexpr import SList, Token, read
from .task import GroundAction, compatible, instantiate, object_table

VALID = "valid"
INVALID = "invalid"
GOAL_UNSATISFIED = "goal_unsatisfied"


@dataclass(frozen=True)
class ValidationReport:
    status: str
    step: int | None = None  # zero-based index of the failing step
    literal: str | None = None
    missing: tuple[str, ...] = ()
    message: str = ""

    @property
    def valid(self) -> bool:
        return self.status == VALID

    def to_dict(self) -> dict:
        return {"status": self.status, "step": self.step, "literal": self.literal,
                "missing": list(self.missing), "message": self.message}


@dataclass(frozen=True)
class PlanStep:
    name: str
    args: tuple[str, ...] = field(default_factory=tuple)

    def __str__(self) -> str:
        return str(Atom(self.name, self.args))


def parse_plan_text(text: str) -> list[PlanStep]:
    """Read ``(name obj ...)`` lines; ``;`` comments and blank lines are skipped."""
    nodes, _ = read(text)
    steps = []
    for node in nodes:
        if not isinstance(node, SList) or not node.items:
            raise PDDLError(f"plan line {getattr(node, 'line', '?')}: expected '(action args...)'")
        if not all(isinstance(item, Token) for item in node.items):
            raise PDDLError(f"plan line {node.line}: nested expression in plan step")
        steps.append(PlanStep(node.items[0].value, tuple(t.value for t in node.items[1:])))
    return steps


def _as_step(step) -> PlanStep:
    if isinstance(step, GroundAction):
        return PlanStep(step.schema, step.args)
    if isinstance(step, PlanStep):
        return step
    if isinstance(step, str):
        return parse_plan_text(step)[0]
    name, args = step
    return PlanStep(name, tuple(args))


def validate_plan(domain: Domain, problem: Problem, plan) -> ValidationReport:
    """Check each step's preconditions in the state left by its predecessors.

    ``plan`` may be a :class:`Plan`, plan text, or a sequence of steps.
    """
    if isinstance(plan, str):
        steps = parse_plan_text(plan)
    else:
        steps = [_as_step(s) for s in getattr(plan, "steps", plan)]
    objects = object_table(domain, problem)
    state = frozenset(problem.init)
    for index, step in enumerate(steps):
        schema = domain.action(step.name)
        if schema is None:
            return ValidationReport(INVALID, index, message=f"step {index}: unknown action {step.name!r}")
        if len(step.args) != len(schema.params):
            return ValidationReport(
                INVALID, index,
                message=f"step {index}: {step.name} takes {len(schema.params)} arguments, got {len(step.args)}")
        unknown = [a for a in step.args if a not in objects]
        if unknown:
            return ValidationReport(INVALID, index, message=f"step {index}: unknown objects {unknown}")
        mistyped = [f"{a} - {objects[a]}" for a, p in zip(step.args, schema.params)
                    if not compatible(domain, objects[a], p.type_name)]
        if mistyped:
            return ValidationReport(INVALID, index, message=f"step {index}: ill-typed arguments {mistyped}")
        ground = instantiate(schema, step.args)
        if ground is None:
            return ValidationReport(INVALID, index, literal="(=)",
                                    message=f"step {index}: equality constraint of {step} fails")
        violated = ground.first_violation(state)
        if violated is not None:
            return ValidationReport(INVALID, index, literal=str(violated),
                                    message=f"step {index}: {step} requires {violated}")
        state = (state - ground.delete) | ground.add
    missing = tuple(str(l) for l in problem.goal if (l.atom in state) != l.positive)
    if missing:
        return ValidationReport(GOAL_UNSATISFIED, missing=missing,
                                message=f"goal not reached: missing {', '.join(missing)}")
    return ValidationReport(VALID, message=f"plan of {len(steps)} steps is valid")


