from .errors import EmptyGoal, MalformedSignature, PDDLError, PDDLSyntaxError, UnsupportedFeature
from .formatter import (
    format_action,
    format_domain,
    format_goal,
    format_initial,
    format_objects,
    format_predicate,
    format_problem,
    render_problem,
)
from .model import ROOT_TYPE, Action, Atom, Domain, Literal, Predicate, Problem, TypedParam
from .parser import (
    SUPPORTED_REQUIREMENTS,
    parse_condition,
    parse_domain,
    parse_effect,
    parse_predicate_signature,
    parse_problem,
)
from .sexpr import tokens_of

__all__ = [
    "Action", "Atom", "Domain", "EmptyGoal", "Literal", "MalformedSignature", "PDDLError",
    "PDDLSyntaxError", "Predicate", "Problem", "ROOT_TYPE", "SUPPORTED_REQUIREMENTS",
    "TypedParam", "UnsupportedFeature", "format_action", "format_domain", "format_goal",
    "format_initial", "format_objects", "format_predicate", "format_problem", "parse_condition",
    "parse_domain", "parse_effect", "parse_predicate_signature", "parse_problem",
    "render_problem", "tokens_of",
]
