"""Interpreter and reachability analyzer for spatial constraint programs
with extrusion: per-agent constraint stores arranged in a tree, processes
that tell/ask constraints, move between spaces, and recurse, plus
breadth-first search for safety queries over all executions."""

from .calculus import (
    ROOT,
    AgentId,
    Ask,
    Extr,
    NIL,
    Nil,
    Par,
    ProcObj,
    ProcVar,
    Process,
    Rec,
    RunResult,
    Space,
    StoreObj,
    SysState,
    Tell,
    canon_process,
    exists_store,
    is_prefix,
    normalize,
    par,
    replace,
    run,
    step,
    store_map,
)
from .formula import (
    FALSE,
    TRUE,
    DLAtom,
    Formula,
    FragmentUnsupported,
    Sort,
    SortConflict,
    Var,
    boolvar,
    canonicalize,
    conjoin,
    eq_,
    format_formula,
    free_vars,
    intvar,
    ne_,
    negate,
    read_formula,
    to_dnf,
)
from .lang import Diagnostic, ParseError, ProgramAst, elaborate, parse, print_program, validate
from .render import render_tree, state_from_json, state_to_json
from .search import (
    InconsistentStore,
    Match,
    Predicate,
    Query,
    SearchOutcome,
    StoreEntails,
    StoresEquivalent,
    evaluate_query,
    reachable_count,
    search,
)
from .solver import (
    SAT,
    UNSAT,
    SatResult,
    Solver,
    SolverConfig,
    SolverInconclusive,
    brute_force_sat,
    check_sat,
    check_unsat,
    dl_conjunct_sat,
    entails,
    small_model_bound,
)

__version__ = "0.1.0"
