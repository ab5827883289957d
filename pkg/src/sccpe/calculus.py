"""Executable semantics of spatial constraint processes with extrusion.

A system state is a multiset of objects: per-agent constraint stores and
running processes, both addressed by a qualified agent name (a path of
naturals ending at the root).  Two invisible normalizations keep states
canonical -- nil processes vanish and same-agent stores merge by
conjunction -- and six observable rules drive execution:

* tell    posts a constraint into the local store;
* ask     unblocks a guarded process once the local store entails the guard;
* parallel splits a composition into separately scheduled processes;
* space   pushes a process one level down the agent hierarchy, creating the
          child's (empty) store;
* recursion unfolds a recursive definition by substitution;
* extrusion moves a process from an agent's space up to its parent.

``step`` enumerates all single-rule successors of a normalized state;
``run`` explores to the successor-free states.  Rule application mirrors
pattern-matching semantics: tell, ask, and space all require the local
store object to exist, and extrusion only fires when the process sits in
the space named by its own argument.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Union

from .formula import Formula, TRUE, canonicalize, conjoin, term_key
from .solver import Solver


# ---------------------------------------------------------------------------
# Qualified agent names


@dataclass(frozen=True)
class AgentId:
    """Path of agent indices, innermost first; the empty path is the root.

    ``AgentId((2, 0))`` reads "agent 2 within agent 0 within the root" and
    prints as ``2 . 0 . root``.
    """

    path: tuple

    def child(self, index: int) -> "AgentId":
        return AgentId((index,) + self.path)

    @property
    def parent(self) -> "AgentId":
        return AgentId(self.path[1:])

    @property
    def is_root(self) -> bool:
        return not self.path

    def __str__(self) -> str:
        if not self.path:
            return "root"
        return " . ".join(str(n) for n in self.path) + " . root"


ROOT = AgentId(())


def is_prefix(a: AgentId, b: AgentId) -> bool:
    """True iff a is an ancestor of b or equal to it.

    The root prefixes everything; nothing else prefixes the root; otherwise
    a prefixes b when it equals b or prefixes b's parent.
    """
    if a.is_root:
        return True
    while True:
        if b.is_root:
            return False
        if a == b:
            return True
        b = b.parent


# ---------------------------------------------------------------------------
# Processes


@dataclass(frozen=True)
class Nil:
    def __str__(self) -> str:
        return "0"


@dataclass(frozen=True)
class Tell:
    constraint: Formula

    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class Ask:
    guard: Formula
    then: "Process"

    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class Par:
    """Parallel composition; associative-commutative, kept flat and sorted
    in canonical form (duplicates are meaningful: it is a multiset)."""

    args: tuple  # >= 2 processes

    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class Space:
    agent: int
    body: "Process"

    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class Rec:
    var: int
    body: "Process"

    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class Extr:
    agent: int
    body: "Process"

    def __str__(self) -> str:
        return format_process(self)


@dataclass(frozen=True)
class ProcVar:
    var: int

    def __str__(self) -> str:
        return format_process(self)


Process = Union[Nil, Tell, Ask, Par, Space, Rec, Extr, ProcVar]

NIL = Nil()


def par(*args: Process) -> Process:
    """Canonical parallel composition of the given processes."""
    flat = []
    for p in args:
        if isinstance(p, Par):
            flat.extend(p.args)
        else:
            flat.append(p)
    if not flat:
        return NIL
    if len(flat) == 1:
        return flat[0]
    return Par(tuple(sorted(flat, key=process_key)))


_PROC_TAG = {Nil: 100, Tell: 101, Ask: 102, Par: 103, Space: 104, Rec: 105, Extr: 106, ProcVar: 107}


@functools.lru_cache(maxsize=None)
def process_key(p: Process) -> tuple:
    tag = _PROC_TAG[type(p)]
    if isinstance(p, Nil):
        return (tag,)
    if isinstance(p, Tell):
        return (tag, term_key(p.constraint))
    if isinstance(p, Ask):
        return (tag, term_key(p.guard), process_key(p.then))
    if isinstance(p, Par):
        return (tag, tuple(process_key(a) for a in p.args))
    if isinstance(p, (Space, Extr)):
        return (tag, p.agent, process_key(p.body))
    if isinstance(p, Rec):
        return (tag, p.var, process_key(p.body))
    return (tag, p.var)


def canon_process(p: Process) -> Process:
    """Canonical form: flat, sorted parallel compositions and canonical
    constraint subterms, recursively."""
    if isinstance(p, (Nil, ProcVar)):
        return p
    if isinstance(p, Tell):
        return Tell(canonicalize(p.constraint))
    if isinstance(p, Ask):
        return Ask(canonicalize(p.guard), canon_process(p.then))
    if isinstance(p, Par):
        return par(*(canon_process(a) for a in p.args))
    if isinstance(p, Space):
        return Space(p.agent, canon_process(p.body))
    if isinstance(p, Rec):
        return Rec(p.var, canon_process(p.body))
    if isinstance(p, Extr):
        return Extr(p.agent, canon_process(p.body))
    raise TypeError(f"not a process: {p!r}")


def replace(p: Process, n: int, q: Process) -> Process:
    """Substitute q for every occurrence of the process variable n.

    Substitution is homomorphic through tell/ask/parallel/space/extrusion
    but does not descend into recursion bodies, matching the unfolding
    discipline of the rewrite rules.
    """
    if isinstance(p, (Nil, Tell)):
        return p
    if isinstance(p, Ask):
        return Ask(p.guard, replace(p.then, n, q))
    if isinstance(p, Par):
        return Par(tuple(replace(a, n, q) for a in p.args))
    if isinstance(p, Space):
        return Space(p.agent, replace(p.body, n, q))
    if isinstance(p, Rec):
        return p
    if isinstance(p, Extr):
        return Extr(p.agent, replace(p.body, n, q))
    if isinstance(p, ProcVar):
        return q if p.var == n else p
    raise TypeError(f"not a process: {p!r}")


def format_process(p: Process, parent: int = 0) -> str:
    """Process rendering in the object-notation style, e.g.
    ``ask Y:Integer < 20 -> xtr(0, tell(...))``."""
    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Tell):
        return f"tell({p.constraint})"
    if isinstance(p, Ask):
        s = f"ask {p.guard} -> {format_process(p.then, 2)}"
        return f"({s})" if parent > 1 else s
    if isinstance(p, Par):
        s = " || ".join(format_process(a, 2) for a in p.args)
        return f"({s})" if parent > 1 else s
    if isinstance(p, Space):
        return f"< {p.agent} >[ {format_process(p.body)} ]"
    if isinstance(p, Rec):
        return f"rec({p.var}, {format_process(p.body)})"
    if isinstance(p, Extr):
        return f"xtr({p.agent}, {format_process(p.body)})"
    if isinstance(p, ProcVar):
        return f"v({p.var})"
    raise TypeError(f"not a process: {p!r}")


# ---------------------------------------------------------------------------
# Objects and states


@dataclass(frozen=True)
class StoreObj:
    aid: AgentId
    constraint: Formula

    def __str__(self) -> str:
        return f"[store, {self.aid}, {self.constraint}]"


@dataclass(frozen=True)
class ProcObj:
    aid: AgentId
    program: Process

    def __str__(self) -> str:
        return f"[process, {self.aid}, {self.program}]"


Obj = Union[StoreObj, ProcObj]


@dataclass(frozen=True)
class SysState:
    """A multiset of objects; canonical once normalized (sorted, one store
    per agent, no nil processes)."""

    objects: tuple

    def __str__(self) -> str:
        inner = " ".join(str(o) for o in self.objects)
        return "{ " + inner + " }" if inner else "{ }"


def obj_key(o: Obj) -> tuple:
    if isinstance(o, StoreObj):
        return (0, o.aid.path, term_key(o.constraint))
    return (1, o.aid.path, process_key(o.program))


def state_key(s: SysState) -> tuple:
    return tuple(obj_key(o) for o in s.objects)


def exists_store(objects: Iterable[Obj], aid: AgentId) -> bool:
    """True iff some store object in the multiset carries exactly aid."""
    return any(isinstance(o, StoreObj) and o.aid == aid for o in objects)


def store_map(s: SysState) -> dict:
    """Agent -> store constraint for every store object in the state."""
    return {o.aid: o.constraint for o in s.objects if isinstance(o, StoreObj)}


def normalize(s: SysState) -> SysState:
    """Exhaustive application of the invisible transitions plus canonical
    ordering: drop nil processes, merge same-agent stores by conjunction,
    canonicalize all payloads, sort.  Idempotent."""
    stores: dict[AgentId, Formula] = {}
    procs = []
    for o in s.objects:
        if isinstance(o, StoreObj):
            if o.aid in stores:
                stores[o.aid] = conjoin(stores[o.aid], o.constraint)
            else:
                stores[o.aid] = o.constraint
        else:
            program = canon_process(o.program)
            if not isinstance(program, Nil):
                procs.append(ProcObj(o.aid, program))
    objects = [StoreObj(aid, canonicalize(c)) for aid, c in stores.items()]
    objects.extend(procs)
    objects.sort(key=obj_key)
    return SysState(tuple(objects))


# ---------------------------------------------------------------------------
# Observable transitions


def step(s: SysState, solver: Solver) -> list:
    """All states reachable from s by one rule applied at one position.

    Returns normalized states, deduplicated and sorted by canonical key.
    The input is expected to be normalized.
    """
    objs = s.objects
    stores = {o.aid: (i, o.constraint) for i, o in enumerate(objs) if isinstance(o, StoreObj)}
    out = set()

    def emit(new_objs: list) -> None:
        out.add(normalize(SysState(tuple(new_objs))))

    for i, o in enumerate(objs):
        if not isinstance(o, ProcObj):
            continue
        p = o.program
        if isinstance(p, Tell):
            hit = stores.get(o.aid)
            if hit is None:
                continue
            j, current = hit
            new = list(objs)
            new[j] = StoreObj(o.aid, conjoin(current, p.constraint))
            new[i] = ProcObj(o.aid, NIL)
            emit(new)
        elif isinstance(p, Ask):
            hit = stores.get(o.aid)
            if hit is None:
                continue
            _, current = hit
            if solver.entails(current, p.guard):
                new = list(objs)
                new[i] = ProcObj(o.aid, p.then)
                emit(new)
        elif isinstance(p, Par):
            for k in range(len(p.args)):
                rest = p.args[:k] + p.args[k + 1 :]
                sibling = rest[0] if len(rest) == 1 else Par(rest)
                new = list(objs)
                new[i] = ProcObj(o.aid, p.args[k])
                new.insert(i + 1, ProcObj(o.aid, sibling))
                emit(new)
        elif isinstance(p, Space):
            if o.aid not in stores:
                continue
            child = o.aid.child(p.agent)
            new = list(objs)
            new[i] = ProcObj(o.aid, NIL)
            new.append(StoreObj(child, TRUE))
            new.append(ProcObj(child, p.body))
            emit(new)
        elif isinstance(p, Rec):
            new = list(objs)
            new[i] = ProcObj(o.aid, replace(p.body, p.var, p))
            emit(new)
        elif isinstance(p, Extr):
            if not o.aid.is_root and o.aid.path[0] == p.agent:
                new = list(objs)
                new[i] = ProcObj(o.aid, NIL)
                new.append(ProcObj(o.aid.parent, p.body))
                emit(new)
    return sorted(out, key=state_key)


@dataclass(frozen=True)
class RunResult:
    terminal_states: tuple
    truncated: bool
    states_explored: int


def run(s: SysState, solver: Solver, max_steps: int = 64) -> RunResult:
    """Exhaustively explore from s up to max_steps deep and collect the
    states with no successors.  `truncated` reports whether the depth bound
    cut the exploration before closure."""
    start = normalize(s)
    visited = {start}
    frontier = [start]
    terminals = []
    truncated = False
    depth = 0
    while frontier:
        next_frontier = []
        for state in frontier:
            succs = step(state, solver)
            if not succs:
                terminals.append(state)
                continue
            if depth >= max_steps:
                if any(t not in visited for t in succs):
                    truncated = True
                continue
            for t in succs:
                if t not in visited:
                    visited.add(t)
                    next_frontier.append(t)
        frontier = next_frontier
        depth += 1
    terminals.sort(key=state_key)
    return RunResult(tuple(terminals), truncated, len(visited))
