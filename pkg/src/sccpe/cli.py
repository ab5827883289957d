"""Command-line front end.

Subcommands:

* ``run FILE``     parse, validate, elaborate, and explore to the terminal
                   states, printed as space trees (or JSON);
* ``search FILE --query inconsistent | entails FORMULA | equiv``
                   reachability queries with numbered solutions and a
                   ``states: N  solutions: M`` summary;
* ``check FILE --entails C1 C2``
                   a one-off entailment check (prints true/false).

``FILE`` is a program path or ``-`` for standard input.  Exit codes:
0 success (a "No solution." outcome is a success), 1 usage/parse/validate
error, 2 solver inconclusive (timeout or formula beyond the configured
backend), 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys

from . import lang, render
from .calculus import run as run_engine
from .formula import FragmentUnsupported, format_formula
from .search import InconsistentStore, StoreEntails, StoresEquivalent
from .search import search as search_states
from .solver import ExternalSolverError, Solver, SolverConfig, SolverInconclusive

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INCONCLUSIVE = 2
EXIT_INTERNAL = 3


class _UsageError(Exception):
    pass


class _InputError(Exception):
    """Diagnostics already printed; abort with the usage exit code."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise _UsageError(message)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", metavar="FILE", help="program file, or - for stdin")
    p.add_argument(
        "--solver",
        default=None,
        metavar="BACKEND",
        help="internal (default) or external:CMD; env SCCPE_SOLVER overrides the default",
    )
    p.add_argument("--timeout", type=int, default=5000, metavar="MS", help="solver timeout")
    p.add_argument(
        "--unknown-as",
        choices=("error", "paper"),
        default="error",
        help="treat solver 'unknown' as an error (default) or as not-satisfiable",
    )
    p.add_argument("--format", choices=("text", "json"), default="text")


def _build_parser() -> _Parser:
    parser = _Parser(prog="sccpe", description="Run and analyze spatial constraint programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a program to its terminal states")
    _common_flags(p_run)
    p_run.add_argument("--max-depth", type=int, default=64, metavar="N")

    p_search = sub.add_parser("search", help="reachability query over all executions")
    _common_flags(p_search)
    p_search.add_argument(
        "--query",
        nargs="+",
        required=True,
        metavar="QUERY",
        help="inconsistent | entails FORMULA | equiv",
    )
    p_search.add_argument("--mode", choices=("any", "final"), default="any")
    p_search.add_argument("--max-depth", type=int, default=64, metavar="N")
    p_search.add_argument("--max-solutions", type=int, default=None, metavar="N")

    p_check = sub.add_parser("check", help="one-off entailment between two constraints")
    _common_flags(p_check)
    p_check.add_argument("--entails", nargs=2, required=True, metavar=("C1", "C2"))

    return parser


def _solver_from_args(args) -> Solver:
    choice = args.solver if args.solver is not None else os.environ.get("SCCPE_SOLVER", "internal")
    if choice == "internal":
        backend, cmd = "internal", None
    elif choice.startswith("external:"):
        cmd = tuple(shlex.split(choice[len("external:") :]))
        if not cmd:
            raise _UsageError("external solver needs a command line, e.g. external:'z3 -in'")
        backend = "external"
    else:
        raise _UsageError(f"unknown solver backend {choice!r}")
    config = SolverConfig(
        backend=backend,
        external_cmd=cmd,
        timeout_ms=args.timeout,
        unknown_policy=args.unknown_as,
    )
    return Solver(config)


def _load_program(path: str):
    if path == "-":
        return sys.stdin.read(), "<stdin>"
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read(), path
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}")


def _parse_program(text: str, name: str, err):
    try:
        ast = lang.parse(text)
    except lang.ParseError as exc:
        for d in exc.diagnostics:
            print(f"{name}:{d}", file=err)
        raise _InputError from exc
    diagnostics = lang.validate(ast)
    for d in diagnostics:
        print(f"{name}:{d}", file=err)
    if any(d.severity == "error" for d in diagnostics):
        raise _InputError
    return ast


def _elaborate(text: str, name: str, err):
    ast = _parse_program(text, name, err)
    return ast, lang.elaborate(ast)


def _cmd_run(args, out, err) -> int:
    text, name = _load_program(args.input)
    _, state = _elaborate(text, name, err)
    solver = _solver_from_args(args)
    result = run_engine(state, solver, max_steps=args.max_depth)
    if args.format == "json":
        doc = {
            "command": "run",
            "terminal_states": [render.state_to_obj(s) for s in result.terminal_states],
            "states": result.states_explored,
            "truncated": result.truncated,
        }
        print(json.dumps(doc, indent=2), file=out)
    else:
        for i, s in enumerate(result.terminal_states, start=1):
            print(f"Terminal state {i}:", file=out)
            print(render.render_tree(s), end="", file=out)
        print(f"states: {result.states_explored}  terminal: {len(result.terminal_states)}", file=out)
    if result.truncated:
        print(f"warning: depth bound {args.max_depth} reached before closure", file=err)
    return EXIT_OK


def _parse_query(args, table):
    kind = args.query[0]
    if kind == "inconsistent":
        if len(args.query) != 1:
            raise _UsageError("--query inconsistent takes no argument")
        return InconsistentStore(), "inconsistent"
    if kind == "entails":
        if len(args.query) != 2:
            raise _UsageError('--query entails needs a formula, e.g. --query entails "Z > 9"')
        tau = lang.parse_constraint_text(args.query[1], table)
        return StoreEntails(tau), f"entails {format_formula(tau)}"
    if kind == "equiv":
        if len(args.query) != 1:
            raise _UsageError("--query equiv takes no argument")
        return StoresEquivalent(), "equiv"
    raise _UsageError(f"unknown query {kind!r} (expected inconsistent, entails, or equiv)")


def _cmd_search(args, out, err) -> int:
    text, name = _load_program(args.input)
    ast, state = _elaborate(text, name, err)
    query, query_label = _parse_query(args, ast.var_table)
    solver = _solver_from_args(args)
    mode = "terminal" if args.mode == "final" else "any"
    outcome = search_states(
        state,
        query,
        mode=mode,
        max_depth=args.max_depth,
        max_solutions=args.max_solutions,
        solver=solver,
    )
    if args.format == "json":
        doc = {
            "command": "search",
            "query": query_label,
            "solutions": [
                {
                    "solution": i,
                    "state": m.state_index,
                    "witnesses": [
                        {
                            "aid": list(aid.path),
                            "store": format_formula(c),
                            "store_term": render.formula_to_obj(c),
                        }
                        for aid, c in m.witnesses
                    ],
                }
                for i, m in enumerate(outcome.matches, start=1)
            ],
            "states": outcome.states_explored,
            "truncated": outcome.truncated,
        }
        print(json.dumps(doc, indent=2), file=out)
    else:
        for i, m in enumerate(outcome.matches, start=1):
            print(f"Solution {i} (state {m.state_index})", file=out)
            for aid, c in m.witnesses:
                print(f"  aid: {aid}", file=out)
                print(f"  store: {format_formula(c)}", file=out)
        if not outcome.matches:
            print("No solution.", file=out)
        else:
            print("No more solutions.", file=out)
        print(f"states: {outcome.states_explored}  solutions: {len(outcome.matches)}", file=out)
    return EXIT_OK


def _cmd_check(args, out, err) -> int:
    text, name = _load_program(args.input)
    table = {}
    if text.strip():
        table = _parse_program(text, name, err).var_table
    left = lang.parse_constraint_text(args.entails[0], table)
    right = lang.parse_constraint_text(args.entails[1], table)
    solver = _solver_from_args(args)
    verdict = solver.entails(left, right)
    if args.format == "json":
        doc = {
            "command": "check",
            "entails": verdict,
            "left": format_formula(left),
            "right": format_formula(right),
        }
        print(json.dumps(doc, indent=2), file=out)
    else:
        print("true" if verdict else "false", file=out)
    return EXIT_OK


def main(argv=None) -> int:
    out, err = sys.stdout, sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args, out, err)
        if args.command == "search":
            return _cmd_search(args, out, err)
        return _cmd_check(args, out, err)
    except _UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except _InputError:
        return EXIT_USAGE
    except lang.ParseError as exc:  # query/check formulas, no file context
        for d in exc.diagnostics:
            print(str(d), file=err)
        return EXIT_USAGE
    except (SolverInconclusive, FragmentUnsupported, ExternalSolverError) as exc:
        print(f"solver inconclusive: {exc}", file=err)
        return EXIT_INCONCLUSIVE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
