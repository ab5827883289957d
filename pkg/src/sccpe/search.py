"""Breadth-first reachability over the transition system.

Three built-in safety queries plus a user predicate hook:

* ``InconsistentStore``   -- some store has become unsatisfiable;
* ``StoreEntails(tau)``   -- some store has gained enough information to
                             entail the formula tau;
* ``StoresEquivalent``    -- two different agents hold mutually entailing,
                             non-trivial stores (the same knowledge);
* ``Predicate(fn)``       -- arbitrary state condition.

``search`` explores breadth-first with canonical-state deduplication and
reports every witness binding inside every matching state, in a fully
deterministic order: states in discovery order (successors sorted by
canonical key), witnesses in canonical (agent, store) order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .calculus import AgentId, SysState, step, store_map
from .formula import Formula, TRUE, term_key
from .solver import Solver, SolverInconclusive


@dataclass(frozen=True)
class InconsistentStore:
    pass


@dataclass(frozen=True)
class StoreEntails:
    tau: Formula


@dataclass(frozen=True)
class StoresEquivalent:
    pass


@dataclass(frozen=True)
class Predicate:
    fn: Callable[[SysState], bool]


Query = Union[InconsistentStore, StoreEntails, StoresEquivalent, Predicate]


@dataclass(frozen=True)
class Match:
    state: SysState
    state_index: int
    witnesses: tuple  # of (AgentId, Formula); one pair per witness binding


@dataclass(frozen=True)
class SearchOutcome:
    matches: tuple
    states_explored: int
    depth_reached: int
    truncated: bool


def evaluate_query(s: SysState, q: Query, solver: Solver) -> list:
    """All witness bindings for q in s, in canonical order.

    Each binding is a tuple of (agent, store) pairs: one pair for the
    single-store queries, two for StoresEquivalent (reported in both
    orders), none for Predicate matches.
    """
    if isinstance(q, Predicate):
        return [()] if q.fn(s) else []
    stores = sorted(store_map(s).items(), key=lambda kv: (kv[0].path, term_key(kv[1])))
    if isinstance(q, InconsistentStore):
        return [((aid, c),) for aid, c in stores if solver.check_unsat(c)]
    if isinstance(q, StoreEntails):
        return [((aid, c),) for aid, c in stores if solver.entails(c, q.tau)]
    if isinstance(q, StoresEquivalent):
        out = []
        nontrivial = [(aid, c) for aid, c in stores if c != TRUE]
        for i in range(len(nontrivial)):
            for j in range(i + 1, len(nontrivial)):
                a0, c0 = nontrivial[i]
                a1, c1 = nontrivial[j]
                if solver.entails(c0, c1) and solver.entails(c1, c0):
                    out.append(((a0, c0), (a1, c1)))
                    out.append(((a1, c1), (a0, c0)))
        return out
    raise TypeError(f"not a query: {q!r}")


def search(
    init: SysState,
    q: Query,
    mode: str = "any",
    max_depth: int = 64,
    max_solutions: Optional[int] = None,
    solver: Solver | None = None,
) -> SearchOutcome:
    """BFS from init, testing q on every visited state (mode 'any') or on
    every successor-free state (mode 'terminal').

    A state with several witness bindings yields one match per binding.
    Exploration stops at max_depth or once max_solutions matches are
    collected; `truncated` reports an early stop.
    """
    if mode not in ("any", "terminal"):
        raise ValueError(f"unknown search mode {mode!r}")
    solver = solver or Solver()
    visited: dict[SysState, int] = {init: 0}
    queue: deque = deque([(init, 0)])
    matches: list[Match] = []
    depth_reached = 0
    truncated = False

    def capped() -> bool:
        return max_solutions is not None and len(matches) >= max_solutions

    while queue:
        state, depth = queue.popleft()
        depth_reached = max(depth_reached, depth)
        try:
            succs = step(state, solver)
        except SolverInconclusive as exc:
            raise SolverInconclusive(f"exploring {state}: {exc}") from exc
        if mode == "any" or not succs:
            try:
                bindings = evaluate_query(state, q, solver)
            except SolverInconclusive as exc:
                raise SolverInconclusive(f"evaluating query on {state}: {exc}") from exc
            index = visited[state]
            for b in bindings:
                matches.append(Match(state, index, b))
                if capped():
                    return SearchOutcome(tuple(matches), len(visited), depth_reached, True)
        for t in succs:
            if t not in visited:
                if depth >= max_depth:
                    truncated = True
                    continue
                visited[t] = len(visited)
                queue.append((t, depth + 1))
    return SearchOutcome(tuple(matches), len(visited), depth_reached, truncated)


def reachable_count(init: SysState, max_depth: int = 64, solver: Solver | None = None) -> int:
    """Number of distinct canonical states reachable within max_depth,
    the initial state included."""
    outcome = search(
        init, Predicate(lambda s: False), mode="any", max_depth=max_depth, solver=solver
    )
    return outcome.states_explored
