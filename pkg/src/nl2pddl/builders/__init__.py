from .domain import (
    ActionExtraction,
    BuildError,
    DomainBuild,
    DomainDraft,
    DuplicateNameError,
    PredicateExtraction,
    TypeHierarchy,
    assemble_domain,
    build_domain_action_by_action,
    build_domain_candidates,
    extract_action,
    extract_predicates,
    load_action_model,
    normalize_name,
    parse_parameters,
    parse_predicate_lines,
)
from .feedback import (
    ACCEPT,
    HUMAN,
    HYBRID,
    LLM,
    MODES,
    REVISE,
    AcceptAll,
    ChecklistAnswer,
    Edit,
    FeedbackError,
    FeedbackReport,
    Gate,
    MalformedSuggestion,
    MissingChecklist,
    RoundsExhausted,
    ScriptedGate,
    TerminalGate,
    UnappliableSuggestion,
    checklist_questions,
    domain_feedback,
    parse_checklist,
    parse_suggestion,
    parse_suggestions,
    refine_until_accepted,
    task_feedback,
)
from .task import (
    TaskDraft,
    check_task,
    extract_task,
    format_goal,
    format_initial,
    format_objects,
    generate_task,
    parse_goal,
    parse_initial,
    parse_objects,
)

__all__ = [
    "ActionExtraction", "BuildError", "DomainBuild", "DomainDraft", "DuplicateNameError",
    "PredicateExtraction", "TypeHierarchy", "assemble_domain", "build_domain_action_by_action",
    "build_domain_candidates", "extract_action", "extract_predicates", "load_action_model",
    "normalize_name", "parse_parameters", "parse_predicate_lines", "ACCEPT", "HUMAN", "HYBRID", "LLM",
    "MODES", "REVISE", "AcceptAll", "ChecklistAnswer", "Edit", "FeedbackError", "FeedbackReport",
    "Gate", "MalformedSuggestion", "MissingChecklist", "RoundsExhausted", "ScriptedGate",
    "TerminalGate", "UnappliableSuggestion", "checklist_questions", "domain_feedback",
    "parse_checklist", "parse_suggestion", "parse_suggestions", "refine_until_accepted",
    "task_feedback", "TaskDraft", "check_task", "extract_task", "format_goal", "format_initial",
    "format_objects", "generate_task", "parse_goal", "parse_initial", "parse_objects"
]
