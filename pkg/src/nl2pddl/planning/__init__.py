from .equivalence import EquivalenceReport, VocabularyMismatch, operational_equivalence
from .search import Plan, ResourceExhausted, Unsolvable, search, simulate, solve
from .task import (
    GroundAction,
    GroundTask,
    Inapplicable,
    PlanningError,
    State,
    TypeMismatch,
    apply,
    ground,
    instantiate,
    reachable_atoms,
)
from .validate import (
    GOAL_UNSATISFIED,
    INVALID,
    VALID,
    PlanStep,
    ValidationReport,
    parse_plan_text,
    validate_plan,
)

__all__ = [
    "EquivalenceReport", "GOAL_UNSATISFIED", "GroundAction", "GroundTask", "INVALID",
    "Inapplicable", "Plan", "PlanStep", "PlanningError", "ResourceExhausted", "State",
    "TypeMismatch", "Unsolvable", "VALID", "ValidationReport", "VocabularyMismatch", "apply",
    "ground", "instantiate", "operational_equivalence", "parse_plan_text", "reachable_atoms",
    "search", "simulate", "solve", "validate_plan",
]
