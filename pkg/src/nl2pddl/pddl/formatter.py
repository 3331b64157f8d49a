"""Canonical pretty-printing of domains and problems.

Output order is always declaration order, so ``format(parse(t))`` is a
fixpoint after one pass.
"""

from __future__ import annotations

from typing import Iterable

from .model import Action, Atom, Domain, Literal, Predicate, Problem, render_params

INDENT = "  "
PROBLEM_INDENT = "   "


def _desc_comment(desc: str) -> str:
    return " ".join(desc.split())


def format_predicate(p: Predicate) -> str:
    if p.desc:
        return f"{p.signature} ; {_desc_comment(p.desc)}"
    return p.signature


def format_conjunction(literals: Iterable[Literal]) -> str:
    parts = " ".join(str(lit) for lit in literals)
    return f"(and {parts})" if parts else "(and)"


def format_action(a: Action, indent: str = INDENT) -> str:
    inner = indent * 2
    return "\n".join([
        f"{indent}(:action {a.name}",
        f"{inner}:parameters ({render_params(a.params)})",
        f"{inner}:precondition {format_conjunction(a.preconditions)}",
        f"{inner}:effect {format_conjunction(a.effects)}",
        f"{indent})",
    ])


def _typed_lines(mapping: dict[str, str]) -> list[str]:
    return [f"{name} - {type_name}" for name, type_name in mapping.items()]


def _block(header: str, lines: list[str], indent: str) -> list[str]:
    return [f"{indent}({header}", *(f"{indent * 2}{line}" for line in lines), f"{indent})"]


def format_domain(d: Domain) -> str:
    out = [f"(define (domain {d.name})"]
    if d.requirements:
        out.append(f"{INDENT}(:requirements {' '.join(d.requirements)})")
    if d.types:
        out.extend(_block(":types", _typed_lines(d.types), INDENT))
    if d.constants:
        out.extend(_block(":constants", _typed_lines(d.constants), INDENT))
    if d.predicates:
        out.extend(_block(":predicates", [format_predicate(p) for p in d.predicates], INDENT))
    for action in d.actions:
        out.append(format_action(action))
    out.append(")")
    return "\n".join(out) + "\n"


def format_objects(objects: dict[str, str]) -> str:
    return "\n".join(_typed_lines(objects))


def format_initial(init: Iterable[Atom]) -> str:
    return "\n".join(str(atom) for atom in init)


def format_goal(goal: Iterable[Literal]) -> str:
    return format_conjunction(goal)


def render_problem(domain_name: str, problem_name: str, objects: str, initial: str, goal: str) -> str:
    """Lay out pre-formatted sections in the five-section problem shape."""
    ind, ind2 = PROBLEM_INDENT, PROBLEM_INDENT * 2

    def section(header: str, body: str) -> list[str]:
        lines = [f"{ind2}{line.strip()}" for line in body.splitlines() if line.strip()]
        return [f"{ind}({header}", *lines, f"{ind})"]

    out = ["(define", f"{ind}(problem {problem_name})", f"{ind}(:domain {domain_name})"]
    out += section(":objects", objects)
    out += section(":init", initial)
    out += section(":goal", goal)
    out.append(")")
    return "\n".join(out) + "\n"


def format_problem(p: Problem) -> str:
    return render_problem(p.domain_name, p.name, format_objects(p.objects),
                          format_initial(p.init), format_goal(p.goal))
