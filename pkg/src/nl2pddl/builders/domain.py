"""Build PDDL domains from natural language, one action at a time."""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple

from ..llm.sections import extract_sections
from ..llm.templates import PromptTemplate, render_prompt
from ..pddl.errors import MalformedSignature, PDDLError
from ..pddl.model import ROOT_TYPE, Action, Atom, Domain, Literal, Predicate, TypedParam
from ..pddl.parser import parse_condition, parse_effect, parse_predicate_signature, parse_typed_list
from ..pddl.sexpr import read
from ..validation import Code, Diagnostic, check_domain, diag, prune_predicates

PARAMS = "Action Parameters"
PRECONDITIONS = "Action Preconditions"
EFFECTS = "Action Effects"
NEW_PREDICATES = "New Predicates"

_BULLET = re.compile(r"^\s*(?:[-*]|\d+[.)])\s+")
_IDENT = re.compile(r"^[a-z][a-z0-9_\-]*$")


class DuplicateNameError(ValueError):
    pass


class BuildError(RuntimeError):
    def __init__(self, sweep: int, action: str, cause: Exception):
        self.sweep = sweep
        self.action = action
        self.cause = cause
        super().__init__(f"sweep {sweep}, action {action!r}: {cause}")


def normalize_name(name: str) -> str:
    norm = re.sub(r"[\s]+", "_", name.strip().lower())
    if not _IDENT.match(norm):
        raise ValueError(f"{name!r} is not a valid PDDL identifier")
    return norm


@dataclass(frozen=True)
class TypeHierarchy:
    """Type name -> (parent, description), in declaration order."""

    types: dict[str, tuple[str, str]] = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, data: Mapping) -> TypeHierarchy:
        if "hierarchy" in data and isinstance(data["hierarchy"], Mapping):
            data = data["hierarchy"]
        types: dict[str, tuple[str, str]] = {}
        for name, spec in data.items():
            if isinstance(spec, str):
                parent, desc = ROOT_TYPE, spec
            else:
                parent = spec.get("parent", ROOT_TYPE) or ROOT_TYPE
                desc = spec.get("description", spec.get("desc", ""))
            types[normalize_name(name)] = (normalize_name(parent), desc)
        hierarchy = cls(types)
        hierarchy.check()
        return hierarchy

    @classmethod
    def load(cls, path: str | Path) -> TypeHierarchy:
        return cls.from_mapping(json.loads(Path(path).read_text(encoding="utf-8")))

    def check(self) -> None:
        for name in self.types:
            seen = {name}
            parent = self.types[name][0]
            while parent != ROOT_TYPE:
                if parent not in self.types:
                    raise ValueError(f"type {name!r} has undeclared parent {parent!r}")
                if parent in seen:
                    raise ValueError(f"type hierarchy cycle through {name!r}")
                seen.add(parent)
                parent = self.types[parent][0]

    def parents(self) -> dict[str, str]:
        return {name: parent for name, (parent, _) in self.types.items() if name != ROOT_TYPE}

    def render(self) -> str:
        lines = []
        for name, (parent, desc) in self.types.items():
            line = f"- {name} - {parent}"
            lines.append(f"{line}: {desc}" if desc else line)
        return "\n".join(lines)


def load_action_model(data: Mapping | str | Path) -> dict[str, str]:
    """Ordered ``action name -> description``; accepts ``{name: {"desc": ...}}`` too."""
    if isinstance(data, (str, Path)):
        data = json.loads(Path(data).read_text(encoding="utf-8"))
    out: dict[str, str] = {}
    for name, spec in data.items():
        desc = spec if isinstance(spec, str) else spec.get("desc", spec.get("description", ""))
        out[normalize_name(name)] = desc
    return out


class PredicateExtraction(NamedTuple):
    predicates: list[Predicate]
    raw: str
    warnings: list[str]


class ActionExtraction(NamedTuple):
    action: Action
    new_predicates: list[Predicate]
    raw: str
    diagnostics: list[Diagnostic]
    warnings: list[str]


def _strip_bullet(line: str) -> str:
    return _BULLET.sub("", line, count=1).strip()


def parse_predicate_lines(block: str) -> tuple[list[Predicate], list[str]]:
    """Parse one signature per line; malformed lines are skipped with a warning."""
    predicates: list[Predicate] = []
    warnings: list[str] = []
    for line in block.splitlines():
        text = _strip_bullet(line)
        if not text:
            continue
        try:
            predicates.append(parse_predicate_signature(text))
        except MalformedSignature as exc:
            warnings.append(f"skipped predicate line: {exc}")
    return predicates, warnings


def _dedupe(predicates: list[Predicate]) -> list[Predicate]:
    seen: set[tuple[str, int]] = set()
    out = []
    for p in predicates:
        if (p.name, p.arity) not in seen:
            seen.add((p.name, p.arity))
            out.append(p)
    return out


def _types_text(types: TypeHierarchy | Mapping | str | None) -> str:
    if types is None:
        return ""
    if isinstance(types, str):
        return types
    if not isinstance(types, TypeHierarchy):
        types = TypeHierarchy.from_mapping(types)
    return types.render()


def extract_predicates(llm, domain_desc: str, template: PromptTemplate | str, types=None,
                       nl_actions: Mapping[str, str] | None = None, *,
                       key: str = "predicates/round1") -> PredicateExtraction:
    actions_text = "".join(f"\n- {name}: {desc}" for name, desc in (nl_actions or {}).items())
    bindings = {"domain_desc": domain_desc, "types": _types_text(types), "action_list": actions_text}
    prompt = render_prompt(template, _only_used(template, bindings))
    completion = llm.complete(prompt, key=key)
    block = extract_sections(completion.text, [NEW_PREDICATES])[NEW_PREDICATES]
    predicates, warnings = parse_predicate_lines(block)
    return PredicateExtraction(_dedupe(predicates), completion.text, warnings)


def _only_used(template: PromptTemplate | str, bindings: dict) -> dict:
    body = template.body if isinstance(template, PromptTemplate) else template
    return {k: v for k, v in bindings.items() if "{" + k + "}" in body}


def parse_parameters(block: str) -> tuple[TypedParam, ...]:
    """``?t - truck: desc`` lines (bullets allowed) into typed parameters."""
    parts = []
    for line in block.splitlines():
        text = _strip_bullet(line)
        if not text:
            continue
        text = text.split(":", 1)[0].split(";", 1)[0].strip()
        if text:
            parts.append(text)
    nodes, _ = read("(" + " ".join(parts) + ")")
    params = []
    for name, type_name, _ in parse_typed_list(nodes[0].items):
        params.append(TypedParam(name if name.startswith("?") else f"?{name}", type_name))
    return tuple(params)


def _normalize_vars(literals: tuple[Literal, ...], params: tuple[TypedParam, ...]) -> tuple[Literal, ...]:
    bare = {p.name[1:]: p.name for p in params}
    out = []
    for lit in literals:
        args = tuple(bare.get(a, a) if not a.startswith("?") else a for a in lit.atom.args)
        out.append(Literal(Atom(lit.atom.predicate, args), lit.positive))
    return tuple(out)


def _unbound(action: Action) -> list[Diagnostic]:
    names = set(action.param_names)
    found = []
    for section, j, lit in action.literals():
        for var in lit.atom.variables():
            if var not in names:
                found.append(diag(Code.UNBOUND_VARIABLE, f"actions/{action.name}/{section}/{j}",
                                  f"variable {var} in {lit} is not a parameter of {action.name}",
                                  f"add {var} to :parameters"))
    return found


def extract_action(llm, domain_desc: str, template: PromptTemplate | str, action_name: str,
                   action_desc: str, action_list=(), predicates=(), types=None, *,
                   key: str | None = None) -> ActionExtraction:
    """Ask for one action schema against the current predicate list."""
    name = normalize_name(action_name)
    bindings = {
        "domain_desc": domain_desc,
        "types": _types_text(types),
        "predicates": list(predicates),
        "action_name": name,
        "action_desc": action_desc,
        "action_list": list(action_list),
    }
    prompt = render_prompt(template, _only_used(template, bindings))
    completion = llm.complete(prompt, key=key or f"{name}/round1")
    sections = extract_sections(completion.text, [PARAMS, PRECONDITIONS, EFFECTS, NEW_PREDICATES],
                                optional=(NEW_PREDICATES,))
    params = parse_parameters(sections[PARAMS])
    pre = parse_condition("(and " + sections[PRECONDITIONS] + ")")
    eff = parse_effect("(and " + sections[EFFECTS] + ")")
    action = Action(name, params, _normalize_vars(pre, params), _normalize_vars(eff, params))
    new_predicates, warnings = parse_predicate_lines(sections[NEW_PREDICATES])
    return ActionExtraction(action, new_predicates, completion.text, _unbound(action), warnings)


@dataclass
class DomainDraft:
    """Result of the action-by-action loop; unpacks as ``(predicates, actions)``."""

    predicates: list[Predicate]
    actions: list[Action]
    warnings: list[str] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    sweeps: list[dict] = field(default_factory=list)

    def __iter__(self):
        return iter((self.predicates, self.actions))


def build_domain_action_by_action(llm, action_model: Mapping[str, str], domain_desc: str,
                                  hierarchy, template: PromptTemplate | str, max_iter: int = 2, *,
                                  key_prefix: str = "domain") -> DomainDraft:
    """Re-extract every action ``max_iter`` times against a growing predicate list.

    New predicates accumulate within a sweep; unused ones are pruned at the
    end of each sweep.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    actions = load_action_model(action_model)
    pred_list: list[Predicate] = []
    action_list: list[Action] = []
    draft = DomainDraft([], [])
    for sweep in range(1, max_iter + 1):
        action_list = []
        diagnostics: list[Diagnostic] = []
        candidates = 0
        for name, desc in actions.items():
            try:
                result = extract_action(llm, domain_desc, template, name, desc, action_list,
                                        pred_list, hierarchy, key=f"{key_prefix}/{name}/round{sweep}")
            except (LookupError, PDDLError, ValueError) as exc:
                raise BuildError(sweep, name, exc) from exc
            pred_list.extend(result.new_predicates)
            candidates += len(result.new_predicates)
            action_list.append(result.action)
            diagnostics.extend(result.diagnostics)
            draft.warnings.extend(f"sweep {sweep}, {name}: {w}" for w in result.warnings)
        pred_list = prune_predicates(pred_list, action_list)
        draft.sweeps.append({"sweep": sweep, "new_candidates": candidates,
                             "predicates": [p.name for p in pred_list]})
        draft.diagnostics = diagnostics
    draft.predicates, draft.actions = pred_list, action_list
    return draft


def build_domain_candidates(llm, k: int, *args, key_prefix: str = "domain", max_workers: int = 4,
                            **kwargs) -> list[DomainDraft]:
    """Run ``k`` independent builds concurrently under ``{key_prefix}/candidate{i}``."""
    def one(i: int) -> DomainDraft:
        return build_domain_action_by_action(llm, *args, key_prefix=f"{key_prefix}/candidate{i}", **kwargs)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, range(1, k + 1)))


class DomainBuild(NamedTuple):
    domain: Domain
    diagnostics: list[Diagnostic]


def assemble_domain(name: str, requirements, types, predicates, actions) -> DomainBuild:
    """Combine built parts into a Domain and attach its static diagnostics."""
    actions = list(actions)
    predicates = list(predicates)
    for kind, names in (("action", [a.name for a in actions]), ("predicate", [p.name for p in predicates])):
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise DuplicateNameError(f"duplicate {kind} name(s): {', '.join(dupes)}")
    if isinstance(types, TypeHierarchy):
        types = types.parents()
    types = dict(types or {})
    reqs = list(requirements)
    if types and ":typing" not in reqs:
        reqs.append(":typing")
    domain = Domain(normalize_name(name), tuple(reqs), types, {}, tuple(predicates), tuple(actions))
    return DomainBuild(domain, check_domain(domain))
