"""Sampled operational-equivalence check between two domains.

Two domains are operationally equivalent on a problem when they accept and
reject the same action sequences (and, optionally, agree on which states
satisfy the goal). Equivalence cannot be proven by sampling, only refuted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from ..pddl.model import Domain, Literal, Problem
from .task import GroundAction, PlanningError, ground


class VocabularyMismatch(PlanningError):
    pass


@dataclass(frozen=True)
class EquivalenceReport:
    agree: bool
    samples: int
    seed: int | None = None
    sequence: tuple[str, ...] = ()
    step: int | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "result": "AgreeOnSample" if self.agree else "Disagree",
            "samples": self.samples,
            "seed": self.seed,
            "sequence": list(self.sequence),
            "step": self.step,
            "reason": self.reason,
        }


def _check_vocabulary(a: Domain, b: Domain, mapping: dict[str, str]) -> None:
    problems = []
    for kind, names_a, names_b in (
        ("predicate", [p.name for p in a.predicates], {p.name for p in b.predicates}),
        ("action", [x.name for x in a.actions], {x.name for x in b.actions}),
    ):
        images = set()
        for name in names_a:
            target = mapping.get(name, name)
            images.add(target)
            if target not in names_b:
                problems.append(f"{kind} {name!r} -> {target!r} missing from second domain")
        for name in sorted(names_b - images):
            problems.append(f"{kind} {name!r} of second domain has no counterpart")
    if problems:
        raise VocabularyMismatch("; ".join(problems))


def _rename_problem(problem: Problem, mapping: dict[str, str]) -> Problem:
    def atom(a):
        return replace(a, predicate=mapping.get(a.predicate, a.predicate))
    return replace(problem,
                   init=tuple(atom(a) for a in problem.init),
                   goal=tuple(Literal(atom(l.atom), l.positive) for l in problem.goal))


def operational_equivalence(domain_a: Domain, domain_b: Domain, problem: Problem, *,
                            n_walks: int = 200, max_len: int = 10, seed: int = 0,
                            mapping: dict[str, str] | None = None,
                            check_goal: bool = True) -> EquivalenceReport:
    """Compare the domains on sampled action sequences over ``problem``.

    ``problem`` uses the vocabulary of ``domain_a``; ``mapping`` renames
    predicates and actions of ``domain_a`` into those of ``domain_b``.
    Even-numbered samples are random walks valid in ``domain_a``: every
    state on the walk is probed with each ground action, which is where
    rejecting evidence comes from. Odd-numbered samples are uniformly random
    sequences.
    """
    mapping = dict(mapping or {})
    _check_vocabulary(domain_a, domain_b, mapping)
    task_a = ground(domain_a, problem)
    task_b = ground(domain_b, _rename_problem(problem, mapping))
    index_b = {(ga.schema, ga.args): ga for ga in task_b.actions}
    counterpart: list[GroundAction | None] = [
        index_b.get((mapping.get(ga.schema, ga.schema), ga.args)) for ga in task_a.actions
    ]
    actions = task_a.actions
    rng = random.Random(seed)

    def disagree(k: int, seq: list[int], step: int, reason: str) -> EquivalenceReport:
        return EquivalenceReport(False, k + 1, seed, tuple(actions[i].name for i in seq), step, reason)

    def goal_mismatch(sa, sb) -> str | None:
        if check_goal and task_a.is_goal(sa) != task_b.is_goal(sb):
            return f"goal satisfied in {'first' if task_a.is_goal(sa) else 'second'} domain only"
        return None

    for k in range(n_walks):
        sa, sb = task_a.init, task_b.init
        seq: list[int] = []
        reason = goal_mismatch(sa, sb)
        if reason:
            return disagree(k, seq, 0, reason)
        valid_walk = k % 2 == 0
        for step in range(max_len):
            if valid_walk:
                applicable = []
                for i, ga in enumerate(actions):
                    ok_a = ga.applicable(sa)
                    other = counterpart[i]
                    ok_b = other is not None and other.applicable(sb)
                    if ok_a != ok_b:
                        side = "first" if ok_a else "second"
                        return disagree(k, seq + [i], step, f"{ga.name} applicable in {side} domain only")
                    if ok_a:
                        applicable.append(i)
                if not applicable:
                    break
                choice = applicable[rng.randrange(len(applicable))]
            else:
                choice = rng.randrange(len(actions)) if actions else None
                if choice is None:
                    break
                ok_a = actions[choice].applicable(sa)
                other = counterpart[choice]
                ok_b = other is not None and other.applicable(sb)
                if ok_a != ok_b:
                    side = "first" if ok_a else "second"
                    return disagree(k, seq + [choice], step,
                                    f"{actions[choice].name} applicable in {side} domain only")
                if not ok_a:
                    break
            seq.append(choice)
            ga, other = actions[choice], counterpart[choice]
            sa = (sa - ga.delete) | ga.add
            sb = (sb - other.delete) | other.add
            reason = goal_mismatch(sa, sb)
            if reason:
                return disagree(k, seq, step, reason)
    return EquivalenceReport(True, n_walks, seed)
