"""Forward state-space search over a ground task."""

from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass

from ..pddl.model import Domain, Problem
from .task import GroundAction, GroundTask, PlanningError, State, apply, ground


class Unsolvable(PlanningError):
    def __init__(self, expansions: int):
        self.expansions = expansions
        super().__init__(f"no plan exists (search space exhausted after {expansions} expansions)")


class ResourceExhausted(PlanningError):
    def __init__(self, expansions: int, reason: str):
        self.expansions = expansions
        self.reason = reason
        super().__init__(f"search stopped by {reason} after {expansions} expansions")


@dataclass(frozen=True)
class Plan:
    steps: tuple[GroundAction, ...]
    planner: str = "bfs"
    seed: int | None = None
    expansions: int = 0

    @property
    def cost(self) -> int:
        return len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def names(self) -> list[str]:
        return [step.name for step in self.steps]

    def to_text(self) -> str:
        return "".join(f"{name}\n" for name in self.names())

    def to_dict(self) -> dict:
        return {"steps": self.names(), "cost": self.cost, "planner": self.planner,
                "seed": self.seed, "expansions": self.expansions}


def _successors(task: GroundTask, state: State):
    for index, action in enumerate(task.actions):
        if action.applicable(state):
            yield index, (state - action.delete) | action.add


def _extract(task: GroundTask, parents: dict, state: State) -> tuple[GroundAction, ...]:
    steps = []
    while parents[state] is not None:
        prev, index = parents[state]
        steps.append(task.actions[index])
        state = prev
    return tuple(reversed(steps))


def _goal_count(task: GroundTask, state: State) -> int:
    return len(task.unsatisfied(state))


def search(task: GroundTask, *, max_expansions: int | None = None,
           timeout: float | None = None, mode: str = "bfs") -> Plan:
    """Breadth-first (optimal for unit costs) or goal-count greedy best-first.

    Ties are broken by ground-action index, so results are deterministic.
    """
    if mode not in ("bfs", "gbfs"):
        raise ValueError(f"unknown search mode {mode!r}")
    deadline = None if timeout is None else time.monotonic() + timeout
    start = task.init
    parents: dict[State, tuple[State, int] | None] = {start: None}
    if task.is_goal(start):
        return Plan((), planner=mode)
    expansions = 0
    counter = 0
    if mode == "bfs":
        frontier: deque | list = deque([start])
    else:
        frontier = [(_goal_count(task, start), 0, start)]
    while frontier:
        if max_expansions is not None and expansions >= max_expansions:
            raise ResourceExhausted(expansions, "max_expansions")
        if deadline is not None and time.monotonic() > deadline:
            raise ResourceExhausted(expansions, "timeout")
        state = frontier.popleft() if mode == "bfs" else heapq.heappop(frontier)[2]
        expansions += 1
        for index, succ in _successors(task, state):
            if succ in parents:
                continue
            parents[succ] = (state, index)
            if task.is_goal(succ):
                return Plan(_extract(task, parents, succ), planner=mode, expansions=expansions)
            if mode == "bfs":
                frontier.append(succ)
            else:
                counter += 1
                heapq.heappush(frontier, (_goal_count(task, succ), counter, succ))
    raise Unsolvable(expansions)


def solve(domain: Domain, problem: Problem, *, max_expansions: int | None = 1_000_000,
          timeout: float | None = None, mode: str = "bfs") -> Plan:
    return search(ground(domain, problem), max_expansions=max_expansions,
                  timeout=timeout, mode=mode)


def simulate(state: State, steps) -> State:
    for step in steps:
        state = apply(state, step)
    return state
