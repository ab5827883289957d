"""State rendering: indented space trees and a lossless JSON form.

The tree view prints one node per agent, two spaces of indentation per
nesting level, children sorted by agent index.  A node shows its store
constraint (``true`` when only implied by resident processes) and each
resident process on a ``* ``-prefixed line before the child spaces:

    root: true
      0: X:Integer === 25
        2: W:Integer < Y:Integer
      1: Z:Integer >= 10
        * ask Y:Integer < 20 -> ...
        0: Y:Integer < 5

The JSON schema is ``{"objects": [{"kind": "store"|"process",
"aid": [n, ...], "payload": <tagged term>}]}`` with the agent path
innermost-first and payloads as nested ``{"op": ...}`` objects in
canonical order; ``state_from_json(state_to_json(s)) == s`` for every
normalized state.
"""

from __future__ import annotations

import json

from .calculus import (
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
    Space,
    StoreObj,
    SysState,
    Tell,
    format_process,
    normalize,
    process_key,
)
from .formula import (
    And,
    Arith,
    BoolConst,
    BoolEq,
    BoolITE,
    BoolNeq,
    Cmp,
    FALSE,
    Formula,
    Implies,
    IntExpr,
    IntITE,
    IntLit,
    Neg,
    Not,
    Or,
    Sort,
    TRUE,
    Var,
    Xor,
    format_formula,
)


class JsonFormatError(ValueError):
    """Malformed state document; the message carries the offending path."""


# ---------------------------------------------------------------------------
# Tree rendering


def render_tree(s: SysState) -> str:
    """Deterministic indented tree of the state's spatial hierarchy."""
    stores: dict[tuple, Formula] = {}
    procs: dict[tuple, list] = {}
    for o in s.objects:
        if isinstance(o, StoreObj):
            stores[o.aid.path] = o.constraint
        else:
            procs.setdefault(o.aid.path, []).append(o.program)
    nodes = {()} | set(stores) | set(procs)
    for path in list(nodes):
        while path:
            path = path[1:]
            nodes.add(path)
    children: dict[tuple, list] = {path: [] for path in nodes}
    for path in nodes:
        if path:
            children[path[1:]].append(path)
    for kids in children.values():
        kids.sort(key=lambda p: p[0])

    lines: list[str] = []

    def visit(path: tuple, depth: int) -> None:
        indent = "  " * depth
        label = "root" if not path else str(path[0])
        constraint = stores.get(path, TRUE)
        lines.append(f"{indent}{label}: {format_formula(constraint)}")
        for p in sorted(procs.get(path, ()), key=process_key):
            lines.append(f"{indent}  * {format_process(p)}")
        for child in children[path]:
            visit(child, depth + 1)

    visit((), 0)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON encoding

_SORT_NAME = {Sort.INT: "Int", Sort.BOOL: "Bool"}


def formula_to_obj(f) -> dict:
    if isinstance(f, BoolConst):
        return {"op": "true" if f.value else "false"}
    if isinstance(f, Var):
        return {"op": "var", "name": f.name, "sort": _SORT_NAME[f.sort]}
    if isinstance(f, IntLit):
        return {"op": "int", "value": f.value}
    if isinstance(f, Neg):
        return {"op": "neg", "arg": formula_to_obj(f.arg)}
    if isinstance(f, Arith):
        return {
            "op": "arith",
            "fn": f.op,
            "left": formula_to_obj(f.left),
            "right": formula_to_obj(f.right),
        }
    if isinstance(f, Not):
        return {"op": "not", "arg": formula_to_obj(f.arg)}
    if isinstance(f, (And, Or, Xor)):
        tag = {And: "and", Or: "or", Xor: "xor"}[type(f)]
        return {"op": tag, "args": [formula_to_obj(a) for a in f.args]}
    if isinstance(f, Implies):
        return {"op": "implies", "left": formula_to_obj(f.left), "right": formula_to_obj(f.right)}
    if isinstance(f, (BoolEq, BoolNeq)):
        tag = "beq" if isinstance(f, BoolEq) else "bneq"
        return {"op": tag, "left": formula_to_obj(f.left), "right": formula_to_obj(f.right)}
    if isinstance(f, Cmp):
        return {
            "op": "cmp",
            "fn": f.op,
            "left": formula_to_obj(f.left),
            "right": formula_to_obj(f.right),
        }
    if isinstance(f, (IntITE, BoolITE)):
        tag = "ite" if isinstance(f, IntITE) else "bite"
        return {
            "op": tag,
            "cond": formula_to_obj(f.cond),
            "then": formula_to_obj(f.then),
            "else": formula_to_obj(f.orelse),
        }
    raise TypeError(f"not a term: {f!r}")


def process_to_obj(p: Process) -> dict:
    if isinstance(p, Nil):
        return {"op": "nil"}
    if isinstance(p, Tell):
        return {"op": "tell", "constraint": formula_to_obj(p.constraint)}
    if isinstance(p, Ask):
        return {"op": "ask", "guard": formula_to_obj(p.guard), "then": process_to_obj(p.then)}
    if isinstance(p, Par):
        return {"op": "par", "args": [process_to_obj(a) for a in p.args]}
    if isinstance(p, Space):
        return {"op": "space", "agent": p.agent, "body": process_to_obj(p.body)}
    if isinstance(p, Rec):
        return {"op": "rec", "var": p.var, "body": process_to_obj(p.body)}
    if isinstance(p, Extr):
        return {"op": "xtr", "agent": p.agent, "body": process_to_obj(p.body)}
    if isinstance(p, ProcVar):
        return {"op": "procvar", "var": p.var}
    raise TypeError(f"not a process: {p!r}")


def state_to_obj(s: SysState) -> dict:
    objects = []
    for o in s.objects:
        if isinstance(o, StoreObj):
            objects.append(
                {"kind": "store", "aid": list(o.aid.path), "payload": formula_to_obj(o.constraint)}
            )
        else:
            objects.append(
                {"kind": "process", "aid": list(o.aid.path), "payload": process_to_obj(o.program)}
            )
    return {"objects": objects}


def state_to_json(s: SysState) -> str:
    return json.dumps(state_to_obj(s), separators=(", ", ": "))


# ---------------------------------------------------------------------------
# JSON decoding


def _need(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise JsonFormatError(f"{path}: expected an object, found {type(obj).__name__}")
    if key not in obj:
        raise JsonFormatError(f"{path}: missing key {key!r}")
    return obj[key]


def _int_at(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise JsonFormatError(f"{path}: expected an integer")
    return value


def obj_to_formula(obj, path: str = "$"):
    op = _need(obj, "op", path)
    if op == "true":
        return TRUE
    if op == "false":
        return FALSE
    if op == "var":
        name = _need(obj, "name", path)
        sort = _need(obj, "sort", path)
        if sort not in ("Int", "Bool"):
            raise JsonFormatError(f"{path}.sort: expected Int or Bool, found {sort!r}")
        return Var(name, Sort.INT if sort == "Int" else Sort.BOOL)
    if op == "int":
        return IntLit(_int_at(_need(obj, "value", path), f"{path}.value"))
    if op == "neg":
        return Neg(obj_to_formula(_need(obj, "arg", path), f"{path}.arg"))
    if op == "arith":
        fn = _need(obj, "fn", path)
        if fn not in ("+", "-", "*", "div", "mod"):
            raise JsonFormatError(f"{path}.fn: unknown arithmetic operator {fn!r}")
        return Arith(
            fn,
            obj_to_formula(_need(obj, "left", path), f"{path}.left"),
            obj_to_formula(_need(obj, "right", path), f"{path}.right"),
        )
    if op == "not":
        return Not(obj_to_formula(_need(obj, "arg", path), f"{path}.arg"))
    if op in ("and", "or", "xor"):
        args = _need(obj, "args", path)
        if not isinstance(args, list) or len(args) < 2:
            raise JsonFormatError(f"{path}.args: expected a list of at least two terms")
        cls = {"and": And, "or": Or, "xor": Xor}[op]
        return cls(tuple(obj_to_formula(a, f"{path}.args[{i}]") for i, a in enumerate(args)))
    if op in ("implies", "beq", "bneq"):
        cls = {"implies": Implies, "beq": BoolEq, "bneq": BoolNeq}[op]
        return cls(
            obj_to_formula(_need(obj, "left", path), f"{path}.left"),
            obj_to_formula(_need(obj, "right", path), f"{path}.right"),
        )
    if op == "cmp":
        fn = _need(obj, "fn", path)
        if fn not in ("<", "<=", ">", ">=", "===", "=/=="):
            raise JsonFormatError(f"{path}.fn: unknown comparison {fn!r}")
        return Cmp(
            fn,
            obj_to_formula(_need(obj, "left", path), f"{path}.left"),
            obj_to_formula(_need(obj, "right", path), f"{path}.right"),
        )
    if op in ("ite", "bite"):
        cls = IntITE if op == "ite" else BoolITE
        return cls(
            obj_to_formula(_need(obj, "cond", path), f"{path}.cond"),
            obj_to_formula(_need(obj, "then", path), f"{path}.then"),
            obj_to_formula(_need(obj, "else", path), f"{path}.else"),
        )
    raise JsonFormatError(f"{path}.op: unknown term constructor {op!r}")


def obj_to_process(obj, path: str = "$") -> Process:
    op = _need(obj, "op", path)
    if op == "nil":
        return NIL
    if op == "tell":
        return Tell(obj_to_formula(_need(obj, "constraint", path), f"{path}.constraint"))
    if op == "ask":
        return Ask(
            obj_to_formula(_need(obj, "guard", path), f"{path}.guard"),
            obj_to_process(_need(obj, "then", path), f"{path}.then"),
        )
    if op == "par":
        args = _need(obj, "args", path)
        if not isinstance(args, list) or len(args) < 2:
            raise JsonFormatError(f"{path}.args: expected a list of at least two processes")
        return Par(tuple(obj_to_process(a, f"{path}.args[{i}]") for i, a in enumerate(args)))
    if op in ("space", "xtr"):
        cls = Space if op == "space" else Extr
        return cls(
            _int_at(_need(obj, "agent", path), f"{path}.agent"),
            obj_to_process(_need(obj, "body", path), f"{path}.body"),
        )
    if op == "rec":
        return Rec(
            _int_at(_need(obj, "var", path), f"{path}.var"),
            obj_to_process(_need(obj, "body", path), f"{path}.body"),
        )
    if op == "procvar":
        return ProcVar(_int_at(_need(obj, "var", path), f"{path}.var"))
    raise JsonFormatError(f"{path}.op: unknown process constructor {op!r}")


def obj_to_state(doc) -> SysState:
    objects = _need(doc, "objects", "$")
    if not isinstance(objects, list):
        raise JsonFormatError("$.objects: expected a list")
    out = []
    for i, entry in enumerate(objects):
        path = f"$.objects[{i}]"
        kind = _need(entry, "kind", path)
        aid_raw = _need(entry, "aid", path)
        if not isinstance(aid_raw, list):
            raise JsonFormatError(f"{path}.aid: expected a list of agent indices")
        aid = AgentId(tuple(_int_at(n, f"{path}.aid[{j}]") for j, n in enumerate(aid_raw)))
        payload = _need(entry, "payload", path)
        if kind == "store":
            out.append(StoreObj(aid, obj_to_formula(payload, f"{path}.payload")))
        elif kind == "process":
            out.append(ProcObj(aid, obj_to_process(payload, f"{path}.payload")))
        else:
            raise JsonFormatError(f"{path}.kind: expected 'store' or 'process', found {kind!r}")
    return normalize(SysState(tuple(out)))


def state_from_json(text: str) -> SysState:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise JsonFormatError(f"invalid JSON: {exc}") from exc
    return obj_to_state(doc)
