"""Object model for the typed-STRIPS subset of PDDL.

All values are frozen dataclasses. Tuples are used wherever declaration
order matters so that formatting is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

ROOT_TYPE = "object"
EQUALITY = "="


@dataclass(frozen=True)
class TypedParam:
    name: str
    type_name: str = ROOT_TYPE

    def render(self) -> str:
        if self.type_name == ROOT_TYPE:
            return self.name
        return f"{self.name} - {self.type_name}"


def render_params(params) -> str:
    """Render parameters as ``?a - t1 ?b - t2``.

    ``object`` stays implicit only when no parameter is typed; otherwise an
    untyped name would pick up the type of the next typed group on reparse.
    """
    if all(p.type_name == ROOT_TYPE for p in params):
        return " ".join(p.name for p in params)
    return " ".join(f"{p.name} - {p.type_name}" for p in params)


@dataclass(frozen=True, order=True)
class Atom:
    """A predicate applied to arguments (variables or object names)."""

    predicate: str
    args: tuple[str, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> Iterator[str]:
        return (a for a in self.args if a.startswith("?"))

    def substitute(self, binding: dict[str, str]) -> Atom:
        return Atom(self.predicate, tuple(binding.get(a, a) for a in self.args))

    def __str__(self) -> str:
        if not self.args:
            return f"({self.predicate})"
        return f"({self.predicate} {' '.join(self.args)})"


@dataclass(frozen=True, order=True)
class Literal:
    atom: Atom
    positive: bool = True

    @property
    def predicate(self) -> str:
        return self.atom.predicate

    def negate(self) -> Literal:
        return Literal(self.atom, not self.positive)

    def substitute(self, binding: dict[str, str]) -> Literal:
        return Literal(self.atom.substitute(binding), self.positive)

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"(not {self.atom})"


@dataclass(frozen=True)
class Predicate:
    """A predicate signature with its five facets.

    ``raw`` keeps the verbatim source line and is excluded from equality;
    ``clean`` is always derived from the other facets.
    """

    name: str
    params: tuple[TypedParam, ...] = ()
    desc: str = ""
    raw: str = field(default="", compare=False)
    line: int | None = field(default=None, compare=False)

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def param_map(self) -> dict[str, str]:
        return {p.name: p.type_name for p in self.params}

    @property
    def signature(self) -> str:
        inner = " ".join([self.name, render_params(self.params)]).strip()
        return f"({inner})"

    @property
    def clean(self) -> str:
        if self.desc:
            return f"{self.signature}: {self.desc}"
        return self.signature

    def as_record(self) -> dict:
        """The dictionary shape used in prompt fixtures and JSON output."""
        return {
            "name": self.name,
            "desc": self.desc,
            "raw": self.raw or self.clean,
            "params": self.param_map,
            "clean": self.clean,
        }


@dataclass(frozen=True)
class Action:
    name: str
    params: tuple[TypedParam, ...] = ()
    preconditions: tuple[Literal, ...] = ()
    effects: tuple[Literal, ...] = ()
    line: int | None = field(default=None, compare=False)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    @property
    def add_effects(self) -> tuple[Atom, ...]:
        return tuple(lit.atom for lit in self.effects if lit.positive)

    @property
    def del_effects(self) -> tuple[Atom, ...]:
        return tuple(lit.atom for lit in self.effects if not lit.positive)

    def literals(self) -> Iterator[tuple[str, int, Literal]]:
        """Yield ``(section, index, literal)`` for preconditions then effects."""
        for i, lit in enumerate(self.preconditions):
            yield "precondition", i, lit
        for i, lit in enumerate(self.effects):
            yield "effect", i, lit


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...] = ()
    types: dict[str, str] = field(default_factory=dict)
    constants: dict[str, str] = field(default_factory=dict)
    predicates: tuple[Predicate, ...] = ()
    actions: tuple[Action, ...] = ()

    def predicate(self, name: str) -> Predicate | None:
        for p in self.predicates:
            if p.name == name:
                return p
        return None

    def action(self, name: str) -> Action | None:
        for a in self.actions:
            if a.name == name:
                return a
        return None

    def type_names(self) -> set[str]:
        return {ROOT_TYPE, *self.types, *self.types.values()}

    def ancestors(self, type_name: str) -> list[str]:
        """``type_name`` followed by its parents up to the root; cycle-safe."""
        chain = [type_name]
        seen = {type_name}
        current = type_name
        while current in self.types:
            current = self.types[current]
            if current in seen:
                break
            chain.append(current)
            seen.add(current)
        if chain[-1] != ROOT_TYPE and ROOT_TYPE not in seen:
            chain.append(ROOT_TYPE)
        return chain

    def is_subtype(self, child: str, parent: str) -> bool:
        return parent == ROOT_TYPE or parent in self.ancestors(child)


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: dict[str, str] = field(default_factory=dict)
    init: tuple[Atom, ...] = ()
    goal: tuple[Literal, ...] = ()
