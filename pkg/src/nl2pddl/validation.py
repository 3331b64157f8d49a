"""Static diagnostics for domains, problems, and domain/problem pairs.

Only syntax and static semantics are checked here. Whether a model matches
what its author meant is left to the feedback round.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .pddl.model import EQUALITY, ROOT_TYPE, Action, Atom, Domain, Predicate, Problem


class Code(str, enum.Enum):
    UNDECLARED_PREDICATE = "UndeclaredPredicate"
    ARITY_MISMATCH = "ArityMismatch"
    TYPE_ERROR = "TypeError"
    UNBOUND_VARIABLE = "UnboundVariable"
    UNUSED_PREDICATE = "UnusedPredicate"
    UNKNOWN_OBJECT_TYPE = "UnknownObjectType"
    UNREACHABLE_GOAL_ATOM = "UnreachableGoalAtom"
    PREDICATE_ONLY_IN_PROBLEM = "PredicateOnlyInProblem"
    CONTRADICTORY_EFFECT = "ContradictoryEffect"
    DUPLICATE_NAME = "DuplicateName"


ERROR = "error"
WARNING = "warning"

SEVERITY = {code: ERROR for code in Code}
SEVERITY[Code.UNUSED_PREDICATE] = WARNING
# delete relaxation over-approximates, so unreachability is only a hint
SEVERITY[Code.UNREACHABLE_GOAL_ATOM] = WARNING

_CODE_ORDER = {code: i for i, code in enumerate(Code)}


@dataclass(frozen=True)
class Diagnostic:
    code: Code
    severity: str
    location: str
    message: str
    suggestion: str | None = None
    file: str = ""
    line: int | None = None

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR

    def to_dict(self) -> dict:
        return {"code": self.code.value, "severity": self.severity, "file": self.file,
                "line": self.line, "location": self.location, "message": self.message,
                "suggestion": self.suggestion}

    def __str__(self) -> str:
        anchor = self.file or "<input>"
        if self.line is not None:
            anchor += f":{self.line}"
        hint = f" (hint: {self.suggestion})" if self.suggestion else ""
        return f"{anchor}: {self.severity} [{self.code.value}] {self.location}: {self.message}{hint}"


def diag(code: Code, location: str, message: str, suggestion: str | None = None, *,
         file: str = "", line: int | None = None, strict: bool = False) -> Diagnostic:
    severity = ERROR if strict else SEVERITY[code]
    return Diagnostic(code, severity, location, message, suggestion, file, line)


def has_errors(diagnostics) -> bool:
    return any(d.is_error for d in diagnostics)


def to_json(diagnostics) -> str:
    return json.dumps([d.to_dict() for d in diagnostics], indent=2) + "\n"


class _Collector:
    """Accumulates findings keyed for deterministic ordering."""

    def __init__(self, file: str, strict: bool):
        self.file = file
        self.strict = strict
        self.items: list[tuple[tuple, Diagnostic]] = []

    def add(self, order: tuple, code: Code, location: str, message: str,
            suggestion: str | None = None, line: int | None = None) -> None:
        d = diag(code, location, message, suggestion, file=self.file, line=line, strict=self.strict)
        self.items.append(((*order, _CODE_ORDER[code], len(self.items)), d))

    def result(self) -> list[Diagnostic]:
        return [d for _, d in sorted(self.items, key=lambda item: item[0])]


def _check_atom(out: _Collector, order: tuple, where: str, atom: Atom, domain: Domain,
                var_types: dict[str, str] | None, line: int | None) -> None:
    """Shared predicate/arity/type checks for one atom."""
    if atom.predicate == EQUALITY:
        if atom.arity != 2:
            out.add(order, Code.ARITY_MISMATCH, where, f"'=' takes 2 arguments, got {atom.arity}", line=line)
        return
    decl = domain.predicate(atom.predicate)
    if decl is None:
        out.add(order, Code.UNDECLARED_PREDICATE, where,
                f"predicate {atom.predicate!r} is not declared",
                f"declare ({atom.predicate} ...) in :predicates or use an existing predicate", line)
        return
    if decl.arity != atom.arity:
        out.add(order, Code.ARITY_MISMATCH, where,
                f"{atom} has {atom.arity} arguments but {decl.signature} takes {decl.arity}",
                f"use {decl.signature}", line)
        return
    if var_types is None:
        return
    for arg, param in zip(atom.args, decl.params):
        arg_type = var_types.get(arg)
        if arg_type is None or arg_type == ROOT_TYPE or param.type_name == ROOT_TYPE:
            continue
        if arg_type in domain.type_names() and not domain.is_subtype(arg_type, param.type_name):
            out.add(order, Code.TYPE_ERROR, where,
                    f"{arg} is a {arg_type} but {atom.predicate} expects {param.type_name} for {param.name}",
                    f"retype {arg} as {param.type_name}", line)


def _in_cycle(domain: Domain, name: str) -> bool:
    seen: set[str] = set()
    current = name
    while current in domain.types:
        if current in seen:
            return True
        seen.add(current)
        current = domain.types[current]
    return False


def _type_forest_errors(domain: Domain, out: _Collector) -> None:
    known = domain.type_names()
    for i, (name, parent) in enumerate(domain.types.items()):
        where = f"types/{name}"
        if parent not in known:
            out.add((0, i), Code.TYPE_ERROR, where, f"parent type {parent!r} is not declared")
        if _in_cycle(domain, name):
            out.add((0, i), Code.TYPE_ERROR, where, f"type hierarchy cycle through {name!r}",
                    f"make {name} descend from {ROOT_TYPE}")


def check_domain(domain: Domain, *, file: str = "domain.pddl", strict: bool = False) -> list[Diagnostic]:
    """All findings for a domain in declaration order, then by code.

    ``strict`` reports every finding, warnings included, at error severity.
    """
    out = _Collector(file, strict)
    _type_forest_errors(domain, out)
    known_types = domain.type_names()

    seen: dict[str, int] = {}
    for i, pred in enumerate(domain.predicates):
        where = f"predicates/{pred.name}"
        if pred.name in seen:
            out.add((1, i), Code.DUPLICATE_NAME, where, f"predicate {pred.name!r} declared twice",
                    "remove or rename one declaration", pred.line)
        seen.setdefault(pred.name, i)
        for param in pred.params:
            if param.type_name not in known_types:
                out.add((1, i), Code.TYPE_ERROR, where,
                        f"parameter {param.name} has undeclared type {param.type_name!r}",
                        f"declare {param.type_name} in :types", pred.line)

    used: set[str] = set()
    action_seen: set[str] = set()
    for i, action in enumerate(domain.actions):
        order = (2, i)
        base = f"actions/{action.name}"
        if action.name in action_seen:
            out.add(order, Code.DUPLICATE_NAME, base, f"action {action.name!r} defined twice",
                    "rename or merge the duplicate action", action.line)
        action_seen.add(action.name)
        _check_action(out, order, base, action, domain, known_types, used)

    for i, pred in enumerate(domain.predicates):
        if pred.name not in used and seen.get(pred.name) == i:
            out.add((1, i), Code.UNUSED_PREDICATE, f"predicates/{pred.name}",
                    f"predicate {pred.name!r} is never used by any action",
                    "remove it or use it in an action", pred.line)
    return out.result()


def _check_action(out: _Collector, order: tuple, base: str, action: Action, domain: Domain,
                  known_types: set[str], used: set[str]) -> None:
    var_types: dict[str, str] = {}
    for param in action.params:
        if param.name in var_types:
            out.add(order, Code.DUPLICATE_NAME, f"{base}/parameters/{param.name}",
                    f"parameter {param.name} appears twice", line=action.line)
        if param.type_name not in known_types:
            out.add(order, Code.TYPE_ERROR, f"{base}/parameters/{param.name}",
                    f"parameter {param.name} has undeclared type {param.type_name!r}",
                    f"declare {param.type_name} in :types", action.line)
        var_types.setdefault(param.name, param.type_name)
    for name, type_name in domain.constants.items():
        var_types.setdefault(name, type_name)

    for section, j, lit in action.literals():
        where = f"{base}/{section}/{j}"
        used.add(lit.predicate)
        _check_atom(out, order, where, lit.atom, domain, var_types, action.line)
        for var in lit.atom.variables():
            if var not in var_types:
                out.add(order, Code.UNBOUND_VARIABLE, where,
                        f"variable {var} in {lit} is not a parameter of {action.name}",
                        f"add {var} to :parameters", action.line)

    adds = {lit.atom for lit in action.effects if lit.positive}
    for j, lit in enumerate(action.effects):
        if not lit.positive and lit.atom in adds:
            out.add(order, Code.CONTRADICTORY_EFFECT, f"{base}/effect/{j}",
                    f"{lit.atom} is both added and deleted", "drop one of the two effects", action.line)


def check_problem(domain: Domain, problem: Problem, *, file: str = "problem.pddl",
                  strict: bool = False) -> list[Diagnostic]:
    """Object typing and init/goal well-formedness against ``domain``.

    Predicates the domain does not declare are left to :func:`cross_check`.
    """
    out = _Collector(file, strict)
    known_types = domain.type_names()
    objects = dict(domain.constants)
    for i, (obj, type_name) in enumerate(problem.objects.items()):
        if type_name not in known_types:
            out.add((0, i), Code.UNKNOWN_OBJECT_TYPE, f"objects/{obj}",
                    f"object {obj!r} has undeclared type {type_name!r}",
                    f"declare {type_name} in the domain's :types or retype {obj}")
        if obj in domain.constants:
            out.add((0, i), Code.DUPLICATE_NAME, f"objects/{obj}",
                    f"object {obj!r} shadows a domain constant")
        objects[obj] = type_name
    sections = [("init", list(problem.init))] + [("goal", [l.atom for l in problem.goal])]
    for s, (section, atoms) in enumerate(sections, start=1):
        for j, atom in enumerate(atoms):
            where = f"{section}/{j}"
            for arg in atom.args:
                if arg not in objects:
                    out.add((s, j), Code.UNKNOWN_OBJECT_TYPE, where,
                            f"{atom} mentions undeclared object {arg!r}",
                            f"declare {arg} in :objects")
            if atom.predicate != EQUALITY and domain.predicate(atom.predicate) is None:
                continue
            _check_atom(out, (s, j), where, atom, domain, objects, line=None)
    return out.result()


def cross_check(domain: Domain, problem: Problem, *, file: str = "problem.pddl",
                strict: bool = False) -> list[Diagnostic]:
    """Predicate-usage dependencies between the files and goal reachability."""
    from .planning.task import PlanningError, ground, reachable_atoms

    out = _Collector(file, strict)
    declared = {p.name for p in domain.predicates} | {EQUALITY}
    atoms = [("init", j, a) for j, a in enumerate(problem.init)]
    atoms += [("goal", j, l.atom) for j, l in enumerate(problem.goal)]
    reported: set[str] = set()
    for s, (section, j, atom) in enumerate(atoms):
        if atom.predicate not in declared and atom.predicate not in reported:
            reported.add(atom.predicate)
            out.add((0, s), Code.PREDICATE_ONLY_IN_PROBLEM, f"{section}/{j}",
                    f"predicate {atom.predicate!r} appears in the problem but not in domain {domain.name!r}",
                    f"declare ({atom.predicate} ...) in the domain or drop it from the problem")
    if reported:
        return out.result()
    try:
        task = ground(domain, problem)
    except PlanningError:
        return out.result()
    reachable = reachable_atoms(task)
    for j, lit in enumerate(problem.goal):
        if lit.positive and lit.atom not in reachable:
            out.add((1, j), Code.UNREACHABLE_GOAL_ATOM, f"goal/{j}",
                    f"goal atom {lit.atom} is unreachable even ignoring delete effects",
                    f"make some action add ({lit.atom.predicate} ...)")
    return out.result()


def validate_pair(domain: Domain, problem: Problem, *, domain_file: str = "domain.pddl",
                  problem_file: str = "problem.pddl", strict: bool = False) -> list[Diagnostic]:
    """check_domain + check_problem, then cross_check when those found no errors."""
    found = check_domain(domain, file=domain_file, strict=strict)
    found += check_problem(domain, problem, file=problem_file, strict=strict)
    if not has_errors(found):
        found += cross_check(domain, problem, file=problem_file, strict=strict)
    return found


def prune_predicates(predicates: list[Predicate], actions: list[Action]) -> list[Predicate]:
    """Keep predicates that some action's preconditions or effects mention.

    Same-name duplicates collapse to the highest-arity definition (the latest
    one on ties), placed where the name was first seen.
    """
    referenced = {lit.predicate for action in actions for _, _, lit in action.literals()}
    chosen: dict[str, Predicate] = {}
    for pred in predicates:
        if pred.name not in referenced:
            continue
        best = chosen.get(pred.name)
        if best is None or pred.arity >= best.arity:
            chosen[pred.name] = pred
    return list(chosen.values())
