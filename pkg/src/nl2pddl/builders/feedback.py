"""Critique rounds over candidate models, with a closed vocabulary of edits.

Suggestions are parsed from a ``### Suggestions`` block, one edit per line:

    remove init (atom)          add init (atom)
    remove goal (literal)       add goal (literal)
    remove object NAME          add object NAME - TYPE      retype object NAME - TYPE
    add predicate (sig): desc   remove predicate NAME
    add precondition ACTION (literal)   remove precondition ACTION (literal)
    add effect ACTION (literal)         remove effect ACTION (literal)
    retype param ACTION ?x - TYPE
"""

from __future__ import annotations

import logging
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable

from ..llm.sections import split_sections, section_block
from ..llm.templates import PromptTemplate, render_prompt
from ..pddl.errors import PDDLError
from ..pddl.formatter import format_domain
from ..pddl.model import ROOT_TYPE, Domain, Literal, TypedParam
from ..pddl.parser import parse_condition, parse_predicate_signature
from ..validation import Diagnostic, check_domain
from .domain import _only_used, _types_text
from .task import check_task, generate_task

logger = logging.getLogger(__name__)

LLM, HUMAN, HYBRID = "llm", "human", "hybrid"
MODES = (LLM, HUMAN, HYBRID)
REVISE, ACCEPT = "revise", "accept"
SUGGESTIONS = "suggestions"

TASK_KINDS = {"init", "goal", "object"}
DOMAIN_KINDS = {"predicate", "precondition", "effect", "param"}

_QUESTION = re.compile(r"^\s*(\d+)[.)]\s+(.*\?)\s*$")
_NUMBERED = re.compile(r"^\s*(\d+)[.)]\s+(.*)$")
_ANSWER = re.compile(r"\b(yes|no)\b", re.IGNORECASE)


class FeedbackError(RuntimeError):
    pass


class MissingChecklist(FeedbackError):
    pass


class MalformedSuggestion(FeedbackError):
    pass


class UnappliableSuggestion(FeedbackError):
    pass


class RoundsExhausted(FeedbackError):
    def __init__(self, rounds: int, candidate, report, transcript):
        self.rounds = rounds
        self.candidate = candidate
        self.report = report
        self.transcript = transcript
        super().__init__(f"no accepted candidate after {rounds} round(s)")


@dataclass(frozen=True)
class Edit:
    op: str  # add | remove | retype
    kind: str  # init | goal | object | predicate | precondition | effect | param
    item: str  # literal text, object or predicate name, or parameter variable
    action: str | None = None
    type_name: str | None = None
    desc: str = ""

    def target(self) -> tuple:
        return (self.kind, self.action, self.item)

    def literal(self) -> Literal:
        lits = parse_condition(self.item)
        if len(lits) != 1:
            raise MalformedSuggestion(f"expected a single literal, got {self.item!r}")
        return lits[0]

    def __str__(self) -> str:
        parts = [self.op, self.kind]
        if self.action:
            parts.append(self.action)
        parts.append(self.item)
        if self.type_name:
            parts += ["-", self.type_name]
        line = " ".join(parts)
        return f"{line}: {self.desc}" if self.desc else line


def parse_suggestion(line: str) -> Edit:
    text = line.strip()
    if text.startswith(("-", "*")):
        text = text[1:].strip()
    words = text.split(None, 2)
    if len(words) < 3:
        raise MalformedSuggestion(f"cannot read suggestion {line!r}")
    op, kind, rest = words[0].lower(), words[1].lower(), words[2].strip()
    if op not in ("add", "remove", "retype"):
        raise MalformedSuggestion(f"unknown edit {op!r} in {line!r}")
    if kind in ("init", "goal"):
        if op == "retype":
            raise MalformedSuggestion(f"cannot retype a {kind} literal: {line!r}")
        edit = Edit(op, kind, rest)
        try:
            lit = edit.literal()
        except PDDLError as exc:
            raise MalformedSuggestion(f"bad literal in {line!r}: {exc}") from exc
        if kind == "init" and not lit.positive:
            raise MalformedSuggestion(f"initial states hold positive atoms only: {line!r}")
        return Edit(op, kind, str(lit))
    if kind == "object":
        m = re.fullmatch(r"([A-Za-z][\w\-]*)(?:\s+-\s+([A-Za-z][\w\-]*))?", rest)
        if not m or (op == "remove") == bool(m.group(2)):
            raise MalformedSuggestion(f"cannot read object edit {line!r}")
        return Edit(op, kind, m.group(1).lower(), type_name=(m.group(2) or "").lower() or None)
    if kind == "predicate":
        if op == "add":
            try:
                pred = parse_predicate_signature(rest)
            except PDDLError as exc:
                raise MalformedSuggestion(str(exc)) from exc
            return Edit(op, kind, pred.signature, desc=pred.desc)
        if op == "remove" and re.fullmatch(r"[A-Za-z][\w\-]*", rest):
            return Edit(op, kind, rest.lower())
        raise MalformedSuggestion(f"cannot read predicate edit {line!r}")
    if kind in ("precondition", "effect"):
        if op == "retype":
            raise MalformedSuggestion(f"cannot retype a {kind}: {line!r}")
        action, _, lit_text = rest.partition(" ")
        edit = Edit(op, kind, lit_text.strip(), action=action.lower())
        try:
            lit = edit.literal()
        except PDDLError as exc:
            raise MalformedSuggestion(f"bad literal in {line!r}: {exc}") from exc
        return replace(edit, item=str(lit))
    if kind == "param":
        m = re.fullmatch(r"([A-Za-z][\w\-]*)\s+(\?[\w\-]+)\s+-\s+([A-Za-z][\w\-]*)", rest)
        if op != "retype" or not m:
            raise MalformedSuggestion(f"cannot read param edit {line!r}")
        return Edit(op, kind, m.group(2).lower(), action=m.group(1).lower(), type_name=m.group(3).lower())
    raise MalformedSuggestion(f"unknown edit target {kind!r} in {line!r}")


@dataclass(frozen=True)
class ChecklistAnswer:
    question: str
    answer: str  # "yes" | "no"
    rationale: str

    def to_dict(self) -> dict:
        return {"question": self.question, "answer": self.answer, "rationale": self.rationale}


@dataclass
class FeedbackReport:
    source: str
    checklist_answers: list[ChecklistAnswer] = field(default_factory=list)
    suggestions: list[Edit] = field(default_factory=list)
    verdict: str = ACCEPT
    decisions: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    raw: str = ""

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "verdict": self.verdict,
            "checklist": [a.to_dict() for a in self.checklist_answers],
            "suggestions": [str(s) for s in self.suggestions],
            "decisions": self.decisions,
            "warnings": self.warnings,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


def checklist_questions(template: PromptTemplate | str) -> dict[int, str]:
    body = template.body if isinstance(template, PromptTemplate) else template
    return {int(m.group(1)): m.group(2) for m in map(_QUESTION.match, body.splitlines()) if m}


def parse_checklist(completion: str, questions: dict[int, str]) -> list[ChecklistAnswer]:
    """Answers keyed by question number; the last yes/no in each item's text counts."""
    if not questions:
        raise MissingChecklist("feedback template has no numbered checklist questions")
    items: dict[int, list[str]] = {}
    current = None
    for line in completion.splitlines():
        if line.lstrip().startswith("#"):
            break
        m = _NUMBERED.match(line)
        if m and int(m.group(1)) in questions and int(m.group(1)) not in items:
            current = int(m.group(1))
            items[current] = [m.group(2)]
        elif current is not None:
            if not line.strip() or not line.startswith((" ", "\t")):
                current = None
            else:
                items[current].append(line.strip())
    answers = []
    for n, question in questions.items():
        if n not in items:
            continue
        rationale = " ".join(items[n][1:]) if len(items[n]) > 1 else ""
        found = _ANSWER.findall(rationale or items[n][0])
        if found:
            answers.append(ChecklistAnswer(question, found[-1].lower(), rationale))
    if not answers:
        raise MissingChecklist("completion answers none of the checklist questions")
    return answers


def parse_suggestions(completion: str) -> tuple[list[Edit], list[str]]:
    block = ""
    for title, body in split_sections(completion):
        if title == SUGGESTIONS:
            block = section_block(body)
    edits, warnings = [], []
    for line in block.splitlines():
        if not line.strip():
            continue
        try:
            edits.append(parse_suggestion(line))
        except MalformedSuggestion as exc:
            warnings.append(f"skipped suggestion: {exc}")
    return edits, warnings


class Gate:
    """Accept, reject, or replace each proposed edit."""

    def ask(self, edit: Edit) -> tuple[str, Edit | None]:
        raise NotImplementedError

    def compose(self) -> list[str]:
        raise NotImplementedError


class AcceptAll(Gate):
    def ask(self, edit):
        return "y", edit

    def compose(self):
        return []


class ScriptedGate(Gate):
    """Answers from a list: ``y``, ``n``, or ``e`` followed by a replacement edit line.

    ``compose`` consumes edit lines up to a blank line.
    """

    def __init__(self, answers: Iterable[str]):
        self._answers = [a.rstrip("\n") for a in answers]
        self._pos = 0

    @classmethod
    def load(cls, path: str | Path) -> ScriptedGate:
        return cls(Path(path).read_text(encoding="utf-8").splitlines())

    def _next(self) -> str:
        if self._pos >= len(self._answers):
            raise FeedbackError("scripted answers exhausted")
        self._pos += 1
        return self._answers[self._pos - 1]

    def ask(self, edit):
        answer = self._next().strip().lower()
        if answer == "e":
            return "e", parse_suggestion(self._next())
        if answer not in ("y", "n"):
            raise FeedbackError(f"scripted answer must be y, n or e, got {answer!r}")
        return answer, edit if answer == "y" else None

    def compose(self):
        lines = []
        while self._pos < len(self._answers):
            line = self._next()
            if not line.strip():
                break
            lines.append(line)
        return lines


class TerminalGate(Gate):
    def __init__(self, input_fn: Callable[[str], str] = input, out=None):
        self._input = input_fn
        self._out = out or sys.stdout

    def ask(self, edit):
        self._out.write(f"suggested edit: {edit}\n")
        while True:
            answer = self._input("apply? [y/n/e] ").strip().lower()
            if answer in ("y", "n"):
                return answer, edit if answer == "y" else None
            if answer == "e":
                try:
                    return "e", parse_suggestion(self._input("replacement edit: "))
                except MalformedSuggestion as exc:
                    self._out.write(f"{exc}\n")

    def compose(self):
        self._out.write("enter edits, one per line; blank line to finish\n")
        lines = []
        while True:
            try:
                line = self._input("> ")
            except EOFError:
                break
            if not line.strip():
                break
            lines.append(line)
        return lines


def _apply_task_edit(edit: Edit, objects: dict, init: list, goal: list) -> None:
    if edit.kind not in TASK_KINDS:
        raise UnappliableSuggestion(f"{edit} does not apply to a task")
    if edit.kind == "object":
        present = edit.item in objects
        if edit.op == "add":
            if present:
                raise UnappliableSuggestion(f"object {edit.item} already exists")
            objects[edit.item] = edit.type_name
        else:
            if not present:
                raise UnappliableSuggestion(f"no object named {edit.item}")
            if edit.op == "remove":
                del objects[edit.item]
            else:
                objects[edit.item] = edit.type_name
        return
    lit = edit.literal()
    items = init if edit.kind == "init" else goal
    value = lit.atom if edit.kind == "init" else lit
    if edit.op == "add":
        if value in items:
            raise UnappliableSuggestion(f"{lit} is already in the {edit.kind}")
        items.append(value)
    else:
        if value not in items:
            raise UnappliableSuggestion(f"{lit} is not in the {edit.kind}")
        if edit.kind == "goal" and len(items) == 1:
            raise UnappliableSuggestion("removing the last goal literal would leave the goal empty")
        items.remove(value)


def _apply_domain_edit(edit: Edit, domain: Domain) -> Domain:
    if edit.kind not in DOMAIN_KINDS:
        raise UnappliableSuggestion(f"{edit} does not apply to a domain")
    if edit.kind == "predicate":
        if edit.op == "add":
            pred = parse_predicate_signature(f"{edit.item}: {edit.desc}" if edit.desc else edit.item)
            if domain.predicate(pred.name) is not None:
                raise UnappliableSuggestion(f"predicate {pred.name} already exists")
            return replace(domain, predicates=domain.predicates + (pred,))
        if domain.predicate(edit.item) is None:
            raise UnappliableSuggestion(f"no predicate named {edit.item}")
        return replace(domain, predicates=tuple(p for p in domain.predicates if p.name != edit.item))
    action = domain.action(edit.action)
    if action is None:
        raise UnappliableSuggestion(f"no action named {edit.action}")
    if edit.kind == "param":
        if edit.item not in action.param_names:
            raise UnappliableSuggestion(f"action {action.name} has no parameter {edit.item}")
        if edit.type_name != ROOT_TYPE and edit.type_name not in domain.types:
            raise UnappliableSuggestion(f"type {edit.type_name} is not declared")
        params = tuple(TypedParam(p.name, edit.type_name) if p.name == edit.item else p for p in action.params)
        new_action = replace(action, params=params)
    else:
        lit = edit.literal()
        section = "preconditions" if edit.kind == "precondition" else "effects"
        current = getattr(action, section)
        if edit.op == "add":
            if lit in current:
                raise UnappliableSuggestion(f"{lit} is already a {edit.kind} of {action.name}")
            updated = current + (lit,)
        else:
            if lit not in current:
                raise UnappliableSuggestion(f"{lit} is not a {edit.kind} of {action.name}")
            updated = tuple(l for l in current if l != lit)
        new_action = replace(action, **{section: updated})
    return replace(domain, actions=tuple(new_action if a.name == action.name else a for a in domain.actions))


def _review(completion: str | None, template, mode: str, gate: Gate | None, apply_one) -> FeedbackReport:
    """Shared round logic; ``apply_one(edit)`` raises UnappliableSuggestion to skip."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    if mode != LLM and gate is None:
        gate = TerminalGate()
    report = FeedbackReport(source=mode, raw=completion or "")
    if mode == HUMAN:
        edits = []
        for line in gate.compose():
            try:
                edits.append(parse_suggestion(line))
            except MalformedSuggestion as exc:
                report.warnings.append(f"skipped suggestion: {exc}")
        report.suggestions = edits
        report.verdict = REVISE if edits else ACCEPT
    else:
        report.checklist_answers = parse_checklist(completion, checklist_questions(template))
        report.suggestions, warnings = parse_suggestions(completion)
        report.warnings += warnings
        report.verdict = REVISE if any(a.answer == "yes" for a in report.checklist_answers) else ACCEPT
        if report.verdict == ACCEPT and report.suggestions:
            report.warnings.append("checklist accepts the candidate; suggestions ignored")
            return report
    touched: set[tuple] = set()
    for edit in report.suggestions:
        decision, chosen = ("y", edit) if mode in (LLM, HUMAN) else gate.ask(edit)
        record = {"suggestion": str(edit), "decision": {"y": "accepted", "n": "rejected", "e": "edited"}[decision]}
        if chosen is not None:
            if chosen.target() in touched:
                record["decision"] = "skipped"
                report.warnings.append(f"skipped {chosen}: overlaps an earlier edit")
            else:
                try:
                    apply_one(chosen)
                    touched.add(chosen.target())
                    if decision == "e":
                        record["applied"] = str(chosen)
                except (UnappliableSuggestion, MalformedSuggestion, PDDLError) as exc:
                    record["decision"] = "skipped"
                    report.warnings.append(f"skipped {chosen}: {exc}")
        report.decisions.append(record)
    for w in report.warnings:
        logger.warning(w)
    return report


def task_feedback(llm, problem_desc: str, feedback_template: PromptTemplate | str, mode: str,
                  predicates, types, candidate, *, gate: Gate | None = None, key: str = "task_feedback/round1",
                  domain_name: str = "domain", problem_name: str = "problem"):
    """Critique a task triple and return ``((objects, init, goal), report)``."""
    objects, init, goal = (candidate.objects, candidate.init, candidate.goal) \
        if hasattr(candidate, "objects") else candidate
    objects, init, goal = dict(objects), list(init), list(goal)
    completion = None
    if mode != HUMAN:
        bindings = {"problem_desc": problem_desc, "types": _types_text(types), "predicates": list(predicates),
                    "candidate": generate_task(domain_name, problem_name, objects, init, goal)}
        completion = llm.complete(render_prompt(feedback_template, _only_used(feedback_template, bindings)),
                                  key=key).text
    report = _review(completion, feedback_template, mode, gate,
                     lambda edit: _apply_task_edit(edit, objects, init, goal))
    revised = (objects, tuple(init), tuple(goal))
    report.diagnostics = check_task(*revised, list(predicates), types)
    return revised, report


def domain_feedback(llm, domain_desc: str, feedback_template: PromptTemplate | str, mode: str,
                    candidate: Domain, *, gate: Gate | None = None, key: str = "domain_feedback/round1"):
    """Critique a domain and return ``(revised domain, report)``."""
    state = {"domain": candidate}
    completion = None
    if mode != HUMAN:
        bindings = {"domain_desc": domain_desc, "candidate": format_domain(candidate)}
        completion = llm.complete(render_prompt(feedback_template, _only_used(feedback_template, bindings)),
                                  key=key).text

    def apply_one(edit: Edit) -> None:
        state["domain"] = _apply_domain_edit(edit, state["domain"])

    report = _review(completion, feedback_template, mode, gate, apply_one)
    report.diagnostics = check_domain(state["domain"])
    return state["domain"], report


def refine_until_accepted(build: Callable[[], object], feedback: Callable[[object, int], tuple],
                          max_rounds: int):
    """Alternate critique and revision until a round accepts.

    ``feedback(candidate, round)`` returns ``(revised, report)``. Returns the
    accepted candidate and the per-round transcript.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    candidate = build()
    transcript = []
    report = None
    for rnd in range(1, max_rounds + 1):
        revised, report = feedback(candidate, rnd)
        transcript.append({"round": rnd, "verdict": report.verdict, "report": report.to_dict()})
        if report.verdict == ACCEPT:
            return candidate, transcript
        candidate = revised
    raise RoundsExhausted(max_rounds, candidate, report, transcript)
