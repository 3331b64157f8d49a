"""Prompt templates with ``{placeholder}`` substitution."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

KNOWN_PLACEHOLDERS = frozenset({
    "domain_desc", "types", "predicates", "action_name", "action_desc",
    "action_list", "problem_desc", "candidate",
})

NO_PREDICATES = "\nNo predicate has been defined yet"

_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


class TemplateError(ValueError):
    pass


class MissingPlaceholder(TemplateError):
    def __init__(self, names):
        self.names = sorted(names)
        super().__init__(f"no binding for placeholder(s): {', '.join(self.names)}")


class UnknownPlaceholder(TemplateError):
    def __init__(self, names):
        self.names = sorted(names)
        super().__init__(f"unknown placeholder(s) in template: {', '.join(self.names)}")


@dataclass(frozen=True)
class PromptTemplate:
    body: str
    required: frozenset | None = None

    def __post_init__(self):
        found = self.placeholders()
        unknown = found - KNOWN_PLACEHOLDERS
        if unknown:
            raise UnknownPlaceholder(unknown)
        if self.required is None:
            object.__setattr__(self, "required", frozenset(found))
        else:
            object.__setattr__(self, "required", frozenset(self.required))

    def placeholders(self) -> frozenset:
        return frozenset(_PLACEHOLDER.findall(self.body))

    @classmethod
    def load(cls, path: str | Path, required=None) -> PromptTemplate:
        return cls(Path(path).read_text(encoding="utf-8"), required)


def format_predicate_list(predicates) -> str:
    """Numbered ``raw`` lines, or the sentinel line when there are none."""
    if not predicates:
        return NO_PREDICATES
    out = ""
    for i, p in enumerate(predicates):
        raw = p if isinstance(p, str) else (p.raw or p.clean)
        out += f"\n{i + 1}. {raw}"
    return out


def _format_value(name: str, value) -> str:
    if isinstance(value, str):
        return value
    if name == "predicates":
        return format_predicate_list(list(value))
    items = list(value)
    return "".join(f"\n{i + 1}. {getattr(item, 'name', item)}" for i, item in enumerate(items))


def render_prompt(template: PromptTemplate | str, bindings: Mapping[str, object]) -> str:
    """Substitute every placeholder in a single pass.

    Lists bound to ``{predicates}`` become a numbered list of raw signatures;
    other lists are numbered by item name.
    """
    if isinstance(template, str):
        template = PromptTemplate(template)
    present = template.placeholders()
    missing = (template.required | present) - set(bindings)
    if missing:
        raise MissingPlaceholder(missing)
    rendered = {name: _format_value(name, bindings[name]) for name in present}
    return _PLACEHOLDER.sub(lambda m: rendered[m.group(1)], template.body)
