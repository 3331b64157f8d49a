"""Grounding and the STRIPS transition function."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..pddl.model import EQUALITY, ROOT_TYPE, Action, Atom, Domain, Literal, Problem

State = frozenset  # frozenset[Atom]; closed world, true atoms only


class PlanningError(Exception):
    pass


class TypeMismatch(PlanningError):
    pass


class Inapplicable(PlanningError):
    def __init__(self, action: GroundAction, literal: Literal):
        self.action = action
        self.literal = literal
        super().__init__(f"{action.name} is not applicable: {literal} does not hold")


@dataclass(frozen=True)
class GroundAction:
    schema: str
    args: tuple[str, ...]
    pre: tuple[Literal, ...]
    add: frozenset
    delete: frozenset
    binding: tuple[tuple[str, str], ...] = ()
    pre_pos: frozenset = field(init=False, repr=False, compare=False)
    pre_neg: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "pre_pos", frozenset(l.atom for l in self.pre if l.positive))
        object.__setattr__(self, "pre_neg", frozenset(l.atom for l in self.pre if not l.positive))
        # add wins over delete; keeps add and del disjoint
        object.__setattr__(self, "delete", frozenset(self.delete) - frozenset(self.add))

    @property
    def name(self) -> str:
        return str(Atom(self.schema, self.args))

    def applicable(self, state: State) -> bool:
        return self.pre_pos <= state and not (self.pre_neg & state)

    def first_violation(self, state: State) -> Literal | None:
        for lit in self.pre:
            if (lit.atom in state) != lit.positive:
                return lit
        return None


def instantiate(action: Action, args: tuple[str, ...]) -> GroundAction | None:
    """Bind ``action`` to ``args``; None when a static equality test fails."""
    binding = dict(zip(action.param_names, args))
    pre: list[Literal] = []
    for lit in action.preconditions:
        ground = lit.substitute(binding)
        if ground.predicate == EQUALITY:
            left, right = ground.atom.args
            if (left == right) != ground.positive:
                return None
            continue
        pre.append(ground)
    add = frozenset(l.atom.substitute(binding) for l in action.effects if l.positive)
    delete = frozenset(l.atom.substitute(binding) for l in action.effects if not l.positive)
    return GroundAction(action.name, tuple(args), tuple(pre), add, delete,
                        tuple(binding.items()))


def apply(state: State, action: GroundAction) -> State:
    violated = action.first_violation(state)
    if violated is not None:
        raise Inapplicable(action, violated)
    return (state - action.delete) | action.add


def object_table(domain: Domain, problem: Problem) -> dict[str, str]:
    objects = dict(domain.constants)
    objects.update(problem.objects)
    return objects


def compatible(domain: Domain, object_type: str, param_type: str) -> bool:
    """Untyped (``object``) objects bind to any parameter type."""
    return object_type == ROOT_TYPE or domain.is_subtype(object_type, param_type)


@dataclass(frozen=True)
class GroundTask:
    domain: Domain
    problem: Problem
    actions: tuple[GroundAction, ...]
    init: State
    goal: tuple[Literal, ...]

    @property
    def goal_pos(self) -> frozenset:
        return frozenset(l.atom for l in self.goal if l.positive)

    @property
    def goal_neg(self) -> frozenset:
        return frozenset(l.atom for l in self.goal if not l.positive)

    def is_goal(self, state: State) -> bool:
        return self.goal_pos <= state and not (self.goal_neg & state)

    def unsatisfied(self, state: State) -> list[Literal]:
        return [l for l in self.goal if (l.atom in state) != l.positive]


def ground(domain: Domain, problem: Problem) -> GroundTask:
    """Enumerate every type-consistent binding of every schema.

    Order: schema declaration order, then lexicographic bindings.
    """
    objects = object_table(domain, problem)
    known = domain.type_names()
    for obj, type_name in sorted(objects.items()):
        if type_name not in known:
            raise TypeMismatch(f"object {obj!r} has undeclared type {type_name!r}")
    names = sorted(objects)
    actions: list[GroundAction] = []
    seen: set[tuple[str, tuple[str, ...]]] = set()
    for schema in domain.actions:
        candidates = [
            [o for o in names if compatible(domain, objects[o], p.type_name)]
            for p in schema.params
        ]
        for args in itertools.product(*candidates):
            key = (schema.name, args)
            if key in seen:
                continue
            seen.add(key)
            ga = instantiate(schema, args)
            if ga is not None:
                actions.append(ga)
    return GroundTask(domain, problem, tuple(actions), frozenset(problem.init), problem.goal)


def reachable_atoms(task: GroundTask) -> frozenset:
    """Delete-relaxation fixpoint; negated preconditions count as satisfiable."""
    reached = set(task.init)
    pending = list(task.actions)
    changed = True
    while changed:
        changed = False
        remaining = []
        for action in pending:
            if action.pre_pos <= reached:
                if not action.add <= reached:
                    reached |= action.add
                    changed = True
            else:
                remaining.append(action)
        pending = remaining
    return frozenset(reached)
