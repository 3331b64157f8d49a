"""Extract problem files (objects, initial state, goal) against a fixed vocabulary."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..llm.sections import extract_sections
from ..llm.templates import PromptTemplate, render_prompt
from ..pddl.errors import EmptyGoal
from ..pddl.formatter import format_goal, format_initial, format_objects, render_problem
from ..pddl.model import EQUALITY, Atom, Domain, Literal, Predicate, Problem
from ..pddl.parser import parse_condition, parse_typed_list
from ..pddl.sexpr import read
from ..validation import Code, Diagnostic, check_problem, diag
from .domain import TypeHierarchy, _only_used, _strip_bullet, _types_text

OBJECTS = "OBJECTS"
INITIAL = "INITIAL"
GOAL = "GOAL"

__all__ = ["TaskDraft", "extract_task", "format_objects", "format_initial", "format_goal",
           "generate_task", "parse_objects", "parse_initial", "parse_goal", "check_task"]


def strip_descriptions(block: str) -> str:
    """Drop ``: description`` tails that follow a complete item on a line."""
    lines = []
    depth = 0
    for line in block.splitlines():
        line = _strip_bullet(line)
        kept = []
        for ch in line:
            if ch == ":" and depth == 0 and "".join(kept).strip():
                break
            depth += (ch == "(") - (ch == ")")
            kept.append(ch)
        lines.append("".join(kept).rstrip())
    return "\n".join(lines)


def parse_objects(block: str) -> dict[str, str]:
    nodes, _ = read("(" + strip_descriptions(block) + ")")
    return {name: type_name for name, type_name, _ in parse_typed_list(nodes[0].items)}


def parse_initial(block: str) -> tuple[tuple[Atom, ...], list[str]]:
    """Ground atoms in listed order; negated ones are dropped with a warning."""
    literals = parse_condition("(and " + strip_descriptions(block) + ")", allow_equality=False)
    atoms: list[Atom] = []
    warnings = []
    for lit in literals:
        if not lit.positive:
            warnings.append(f"dropped negative initial literal {lit}; the initial state is closed-world")
        elif lit.atom not in atoms:
            atoms.append(lit.atom)
    return tuple(atoms), warnings


def parse_goal(block: str) -> tuple[Literal, ...]:
    goal = parse_condition("(and " + strip_descriptions(block) + ")")
    if not goal:
        raise EmptyGoal("goal section is empty")
    return goal


def _vocabulary(predicates: Iterable[Predicate], types) -> Domain:
    if isinstance(types, TypeHierarchy):
        parents = types.parents()
    elif types:
        parents = TypeHierarchy.from_mapping(types).parents()
    else:
        parents = {}
    return Domain("vocabulary", (":strips", ":typing"), parents, {}, tuple(predicates), ())


def check_task(objects: dict[str, str], init, goal, predicates, types=None, *,
               file: str = "problem.pddl") -> list[Diagnostic]:
    """Vocabulary diagnostics for an extracted task."""
    vocab = _vocabulary(predicates, types)
    problem = Problem("task", vocab.name, dict(objects), tuple(init), tuple(goal))
    found = []
    for section, atoms in (("init", problem.init), ("goal", [l.atom for l in problem.goal])):
        for j, atom in enumerate(atoms):
            if atom.predicate != EQUALITY and vocab.predicate(atom.predicate) is None:
                found.append(diag(Code.UNDECLARED_PREDICATE, f"{section}/{j}",
                                  f"{atom} uses predicate {atom.predicate!r} outside the vocabulary",
                                  "use a declared predicate or extend the domain", file=file))
    return found + check_problem(vocab, problem, file=file)


@dataclass
class TaskDraft:
    """Extracted task; unpacks as ``(objects, init, goal, raw)``."""

    objects: dict[str, str]
    init: tuple[Atom, ...]
    goal: tuple[Literal, ...]
    raw: str
    diagnostics: list[Diagnostic] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter((self.objects, self.init, self.goal, self.raw))


def extract_task(llm, problem_desc: str, template: PromptTemplate | str, types, predicates, *,
                 key: str = "task/round1") -> TaskDraft:
    predicates = list(predicates)
    if not predicates:
        raise ValueError("the predicate vocabulary must be fixed before extracting a task")
    bindings = {"problem_desc": problem_desc, "types": _types_text(types), "predicates": predicates}
    prompt = render_prompt(template, _only_used(template, bindings))
    completion = llm.complete(prompt, key=key)
    sections = extract_sections(completion.text, [OBJECTS, INITIAL, GOAL])
    objects = parse_objects(sections[OBJECTS])
    init, warnings = parse_initial(sections[INITIAL])
    goal = parse_goal(sections[GOAL])
    diagnostics = check_task(objects, init, goal, predicates, types)
    return TaskDraft(objects, init, goal, completion.text, diagnostics, warnings)


def generate_task(domain_name: str, problem_name: str, objects, initial, goal) -> str:
    """Problem text; each part may be pre-formatted text or the parsed value."""
    if not isinstance(objects, str):
        objects = format_objects(dict(objects))
    if not isinstance(initial, str):
        initial = format_initial(initial)
    if not isinstance(goal, str):
        goal = format_goal(goal)
    return render_problem(domain_name, problem_name, objects, initial, goal)
