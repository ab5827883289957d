"""Quantifier-free Boolean/integer constraint terms.

Constraints are immutable trees over Boolean connectives, integer
comparisons, and integer arithmetic.  The module provides:

* ``conjoin``/``negate`` with the unit and absorbing identities applied at
  the top (``c and true = c``, ``c and false = false``, constant folding
  for ``not``), so stores never accumulate redundant ``true`` conjuncts;
* ``canonicalize``, a purely syntactic normal form: associative-commutative
  chains are flattened and sorted under a fixed total term order, ``true``
  conjuncts dropped, ``false`` absorbing, syntactic duplicates in a
  conjunction removed.  Canonical terms are the engine's state-identity
  currency;
* ``to_dnf``, which lowers the decidable fragment (Boolean combinations of
  comparisons between integer variables and literals) to a disjunction of
  difference-logic atoms, ready for a negative-cycle check;
* a printer/reader pair for the concrete constraint syntax used in logs
  (``X:Integer === 25 and Y:Integer < 5``).

Everything here is a pure function over immutable values.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Union


class Sort(Enum):
    INT = "Int"
    BOOL = "Bool"


class FragmentUnsupported(Exception):
    """Formula falls outside the difference-logic fragment."""


class DnfLimitExceeded(FragmentUnsupported):
    """DNF conversion would exceed the configured conjunct limit."""


class SortConflict(ValueError):
    """The same variable name is used with two different sorts."""


# ---------------------------------------------------------------------------
# Term structure


class _IntOps:
    """Operator sugar for building integer comparisons and arithmetic."""

    __slots__ = ()

    def __lt__(self, other):
        return Cmp("<", _as_int(self), _as_int(other))

    def __le__(self, other):
        return Cmp("<=", _as_int(self), _as_int(other))

    def __gt__(self, other):
        return Cmp(">", _as_int(self), _as_int(other))

    def __ge__(self, other):
        return Cmp(">=", _as_int(self), _as_int(other))

    def __add__(self, other):
        return Arith("+", _as_int(self), _as_int(other))

    def __sub__(self, other):
        return Arith("-", _as_int(self), _as_int(other))

    def __mul__(self, other):
        return Arith("*", _as_int(self), _as_int(other))

    def __neg__(self):
        return Neg(_as_int(self))


@dataclass(frozen=True)
class Var(_IntOps):
    """A sorted variable; Bool variables double as atomic formulas."""

    name: str
    sort: Sort

    def __str__(self) -> str:
        return format_formula(self) if self.sort is Sort.BOOL else format_int_expr(self)


@dataclass(frozen=True)
class IntLit(_IntOps):
    value: int

    def __str__(self) -> str:
        return format_int_expr(self)


@dataclass(frozen=True)
class Neg(_IntOps):
    arg: "IntExpr"

    def __str__(self) -> str:
        return format_int_expr(self)


@dataclass(frozen=True)
class Arith(_IntOps):
    op: str  # one of + - * div mod
    left: "IntExpr"
    right: "IntExpr"

    def __str__(self) -> str:
        return format_int_expr(self)


@dataclass(frozen=True)
class IntITE(_IntOps):
    """Conditional choice over integers: ``cond ? then : orelse``."""

    cond: "Formula"
    then: "IntExpr"
    orelse: "IntExpr"

    def __str__(self) -> str:
        return format_int_expr(self)


@dataclass(frozen=True)
class BoolConst:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


TRUE = BoolConst(True)
FALSE = BoolConst(False)


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class And:
    args: tuple  # >= 2 formulas

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Or:
    args: tuple

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Xor:
    args: tuple

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class BoolEq:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class BoolNeq:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Cmp:
    """Integer comparison; op is one of < <= > >= === =/==."""

    op: str
    left: "IntExpr"
    right: "IntExpr"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class BoolITE:
    cond: "Formula"
    then: "Formula"
    orelse: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


IntExpr = Union[Var, IntLit, Neg, Arith, IntITE]
Formula = Union[BoolConst, Var, Not, And, Or, Xor, Implies, BoolEq, BoolNeq, Cmp, BoolITE]

_INT_EXPR_TYPES = (Var, IntLit, Neg, Arith, IntITE)


def intvar(name: str) -> Var:
    return Var(name, Sort.INT)


def boolvar(name: str) -> Var:
    return Var(name, Sort.BOOL)


def _as_int(x) -> IntExpr:
    if isinstance(x, int) and not isinstance(x, bool):
        return IntLit(x)
    if isinstance(x, Var) and x.sort is not Sort.INT:
        raise SortConflict(f"Boolean variable {x.name} used as an integer")
    if isinstance(x, _INT_EXPR_TYPES):
        return x
    raise TypeError(f"not an integer expression: {x!r}")


def eq_(left, right) -> Formula:
    """Equality atom: integer `===` or Boolean `===` depending on operands."""
    if isinstance(left, (int, IntLit)) or (isinstance(left, _INT_EXPR_TYPES) and not _is_bool(left)):
        return Cmp("===", _as_int(left), _as_int(right))
    return BoolEq(left, right)


def ne_(left, right) -> Formula:
    if isinstance(left, (int, IntLit)) or (isinstance(left, _INT_EXPR_TYPES) and not _is_bool(left)):
        return Cmp("=/==", _as_int(left), _as_int(right))
    return BoolNeq(left, right)


def _is_bool(t) -> bool:
    return isinstance(t, Var) and t.sort is Sort.BOOL or isinstance(
        t, (BoolConst, Not, And, Or, Xor, Implies, BoolEq, BoolNeq, Cmp, BoolITE)
    ) and not isinstance(t, _INT_EXPR_TYPES)


# ---------------------------------------------------------------------------
# Conjunction and negation identities


def conjoin(c: Formula, d: Formula) -> Formula:
    """Conjunction with the unit/absorbing identities applied at the top."""
    if c == TRUE:
        return d
    if d == TRUE:
        return c
    if c == FALSE or d == FALSE:
        return FALSE
    parts = (c.args if isinstance(c, And) else (c,)) + (d.args if isinstance(d, And) else (d,))
    return And(parts)


def negate(c: Formula) -> Formula:
    """Negation with constant folding for the two Boolean constants."""
    if c == TRUE:
        return FALSE
    if c == FALSE:
        return TRUE
    return Not(c)


# ---------------------------------------------------------------------------
# Total term order and canonical form

_TAG = {
    BoolConst: 0,
    Var: 1,
    IntLit: 2,
    Neg: 3,
    Arith: 4,
    IntITE: 5,
    Not: 6,
    And: 7,
    Or: 8,
    Xor: 9,
    Implies: 10,
    BoolEq: 11,
    BoolNeq: 12,
    Cmp: 13,
    BoolITE: 14,
}


@functools.lru_cache(maxsize=None)
def term_key(t) -> tuple:
    """Key realizing a fixed total order on terms (tag, payload, children)."""
    tag = _TAG[type(t)]
    if isinstance(t, BoolConst):
        return (tag, 1 if t.value else 0)
    if isinstance(t, Var):
        return (tag, 0 if t.sort is Sort.INT else 1, t.name)
    if isinstance(t, IntLit):
        return (tag, t.value)
    if isinstance(t, (Neg, Not)):
        return (tag, term_key(t.arg))
    if isinstance(t, Arith):
        return (tag, t.op, term_key(t.left), term_key(t.right))
    if isinstance(t, Cmp):
        return (tag, t.op, term_key(t.left), term_key(t.right))
    if isinstance(t, (And, Or, Xor)):
        return (tag, tuple(term_key(a) for a in t.args))
    if isinstance(t, (Implies, BoolEq, BoolNeq)):
        return (tag, term_key(t.left), term_key(t.right))
    if isinstance(t, (IntITE, BoolITE)):
        return (tag, term_key(t.cond), term_key(t.then), term_key(t.orelse))
    raise TypeError(f"not a term: {t!r}")


def canonicalize(c: Formula) -> Formula:
    """Syntactic canonical form; idempotent.

    Conjunctions are flattened, stripped of ``true``, collapsed on
    ``false``, deduplicated, and sorted; the other associative-commutative
    chains (or, xor) are flattened and sorted; ``or`` drops its units and
    ``not`` folds constants.  No semantic reasoning happens here.
    """
    return _canon_bool(c)


def _canon_bool(f: Formula) -> Formula:
    if isinstance(f, (BoolConst, Var)):
        return f
    if isinstance(f, Not):
        a = _canon_bool(f.arg)
        if a == TRUE:
            return FALSE
        if a == FALSE:
            return TRUE
        return Not(a)
    if isinstance(f, And):
        parts = []
        for raw in f.args:
            a = _canon_bool(raw)
            if isinstance(a, And):
                parts.extend(a.args)
            elif a == TRUE:
                continue
            elif a == FALSE:
                return FALSE
            else:
                parts.append(a)
        parts = sorted(dict.fromkeys(parts), key=term_key)
        if not parts:
            return TRUE
        if len(parts) == 1:
            return parts[0]
        return And(tuple(parts))
    if isinstance(f, Or):
        parts = []
        for raw in f.args:
            a = _canon_bool(raw)
            if isinstance(a, Or):
                parts.extend(a.args)
            elif a == TRUE:
                return TRUE
            elif a == FALSE:
                continue
            else:
                parts.append(a)
        parts.sort(key=term_key)
        if not parts:
            return FALSE
        if len(parts) == 1:
            return parts[0]
        return Or(tuple(parts))
    if isinstance(f, Xor):
        parts = []
        for raw in f.args:
            a = _canon_bool(raw)
            if isinstance(a, Xor):
                parts.extend(a.args)
            else:
                parts.append(a)
        parts.sort(key=term_key)
        return Xor(tuple(parts))
    if isinstance(f, Implies):
        return Implies(_canon_bool(f.left), _canon_bool(f.right))
    if isinstance(f, BoolEq):
        return BoolEq(_canon_bool(f.left), _canon_bool(f.right))
    if isinstance(f, BoolNeq):
        return BoolNeq(_canon_bool(f.left), _canon_bool(f.right))
    if isinstance(f, Cmp):
        return Cmp(f.op, _canon_int(f.left), _canon_int(f.right))
    if isinstance(f, BoolITE):
        return BoolITE(_canon_bool(f.cond), _canon_bool(f.then), _canon_bool(f.orelse))
    raise TypeError(f"not a formula: {f!r}")


def _canon_int(e: IntExpr) -> IntExpr:
    if isinstance(e, (Var, IntLit)):
        return e
    if isinstance(e, Neg):
        return Neg(_canon_int(e.arg))
    if isinstance(e, Arith):
        return Arith(e.op, _canon_int(e.left), _canon_int(e.right))
    if isinstance(e, IntITE):
        return IntITE(_canon_bool(e.cond), _canon_int(e.then), _canon_int(e.orelse))
    raise TypeError(f"not an integer expression: {e!r}")


# ---------------------------------------------------------------------------
# Free variables


def free_vars(c: Formula) -> frozenset:
    """All variables of c with their sorts; rejects inconsistent sorts."""
    acc: dict[str, Sort] = {}
    _collect_vars(c, acc)
    return frozenset(Var(n, s) for n, s in acc.items())


def _collect_vars(t, acc: dict) -> None:
    if isinstance(t, Var):
        seen = acc.get(t.name)
        if seen is not None and seen is not t.sort:
            raise SortConflict(f"variable {t.name} used with sorts {seen.value} and {t.sort.value}")
        acc[t.name] = t.sort
        return
    if isinstance(t, (BoolConst, IntLit)):
        return
    if isinstance(t, (Not, Neg)):
        _collect_vars(t.arg, acc)
        return
    if isinstance(t, (And, Or, Xor)):
        for a in t.args:
            _collect_vars(a, acc)
        return
    if isinstance(t, (Implies, BoolEq, BoolNeq, Cmp, Arith)):
        _collect_vars(t.left, acc)
        _collect_vars(t.right, acc)
        return
    if isinstance(t, (IntITE, BoolITE)):
        _collect_vars(t.cond, acc)
        _collect_vars(t.then, acc)
        _collect_vars(t.orelse, acc)
        return
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Direct evaluation (reference semantics, used by the brute-force oracle)


def eval_formula(f: Formula, env: Mapping[str, object]) -> bool:
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Var):
        return bool(env[f.name])
    if isinstance(f, Not):
        return not eval_formula(f.arg, env)
    if isinstance(f, And):
        return all(eval_formula(a, env) for a in f.args)
    if isinstance(f, Or):
        return any(eval_formula(a, env) for a in f.args)
    if isinstance(f, Xor):
        acc = False
        for a in f.args:
            acc ^= eval_formula(a, env)
        return acc
    if isinstance(f, Implies):
        return (not eval_formula(f.left, env)) or eval_formula(f.right, env)
    if isinstance(f, BoolEq):
        return eval_formula(f.left, env) == eval_formula(f.right, env)
    if isinstance(f, BoolNeq):
        return eval_formula(f.left, env) != eval_formula(f.right, env)
    if isinstance(f, Cmp):
        lv, rv = eval_int_expr(f.left, env), eval_int_expr(f.right, env)
        return _CMP_FN[f.op](lv, rv)
    if isinstance(f, BoolITE):
        return eval_formula(f.then if eval_formula(f.cond, env) else f.orelse, env)
    raise TypeError(f"not a formula: {f!r}")


_CMP_FN: dict[str, Callable[[int, int], bool]] = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "===": lambda a, b: a == b,
    "=/==": lambda a, b: a != b,
}


def eval_int_expr(e: IntExpr, env: Mapping[str, object]) -> int:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Var):
        return int(env[e.name])
    if isinstance(e, Neg):
        return -eval_int_expr(e.arg, env)
    if isinstance(e, Arith):
        a, b = eval_int_expr(e.left, env), eval_int_expr(e.right, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        # Euclidean division: remainder is always non-negative.
        if e.op == "div":
            return a // b if b > 0 else -(a // -b)
        if e.op == "mod":
            return a - b * (a // b if b > 0 else -(a // -b))
        raise ValueError(f"unknown arithmetic operator {e.op}")
    if isinstance(e, IntITE):
        return eval_int_expr(e.then if eval_formula(e.cond, env) else e.orelse, env)
    raise TypeError(f"not an integer expression: {e!r}")


# ---------------------------------------------------------------------------
# Difference-logic DNF


@dataclass(frozen=True)
class DLAtom:
    """Closed integer difference constraint.

    kind 'ub': x <= k;  kind 'lb': x >= k (stored as -x <= -k);
    kind 'diff': x - y <= k.  Strict inequalities are tightened before
    construction (x < k becomes x <= k-1).
    """

    kind: str
    x: str
    k: int
    y: str | None = None

    def holds(self, env: Mapping[str, object]) -> bool:
        if self.kind == "ub":
            return int(env[self.x]) <= self.k
        if self.kind == "lb":
            return int(env[self.x]) >= self.k
        return int(env[self.x]) - int(env[self.y]) <= self.k

    def __str__(self) -> str:
        if self.kind == "ub":
            return f"{self.x} <= {self.k}"
        if self.kind == "lb":
            return f"{self.x} >= {self.k}"
        return f"{self.x} - {self.y} <= {self.k}"


@dataclass(frozen=True)
class BoolLit:
    name: str
    positive: bool = True

    def holds(self, env: Mapping[str, object]) -> bool:
        return bool(env[self.name]) == self.positive

    def __str__(self) -> str:
        return self.name if self.positive else f"not {self.name}"


Literal = Union[DLAtom, BoolLit]


def _lit_key(lit: Literal) -> tuple:
    if isinstance(lit, BoolLit):
        return (0, lit.name, lit.positive)
    return (1, lit.kind, lit.x, lit.y or "", lit.k)


def _conjunct_key(conj: frozenset) -> tuple:
    return tuple(sorted(_lit_key(l) for l in conj))


def to_dnf(c: Formula, limit: int = 4096) -> list:
    """Disjunction of literal conjunctions equivalent to c over the integers.

    Every comparison is tightened to a DLAtom; disequalities split into a
    strict-less and strict-greater disjunct.  The empty list denotes false;
    an empty conjunct denotes true.  Raises FragmentUnsupported outside the
    fragment and DnfLimitExceeded past `limit` conjuncts.
    """
    disjuncts = _dnf(c, True, limit)
    uniq = list(dict.fromkeys(disjuncts))
    uniq.sort(key=_conjunct_key)
    return uniq


def _guard(n: int, limit: int) -> None:
    if n > limit:
        raise DnfLimitExceeded(f"DNF exceeds {limit} conjuncts")


def _cross(a: list, b: list, limit: int) -> list:
    _guard(len(a) * len(b), limit)
    return [x | y for x in a for y in b]


def _dnf(f: Formula, pos: bool, limit: int) -> list:
    if isinstance(f, BoolConst):
        return [frozenset()] if f.value == pos else []
    if isinstance(f, Var):
        if f.sort is not Sort.BOOL:
            raise FragmentUnsupported(f"integer variable {f.name} in formula position")
        return [frozenset({BoolLit(f.name, pos)})]
    if isinstance(f, Not):
        return _dnf(f.arg, not pos, limit)
    if isinstance(f, (And, Or)):
        conjunctive = isinstance(f, And) == pos
        if conjunctive:
            acc = [frozenset()]
            for a in f.args:
                acc = _cross(acc, _dnf(a, pos, limit), limit)
            return acc
        out = []
        for a in f.args:
            out.extend(_dnf(a, pos, limit))
            _guard(len(out), limit)
        return out
    if isinstance(f, Implies):
        if pos:
            out = _dnf(f.left, False, limit) + _dnf(f.right, True, limit)
            _guard(len(out), limit)
            return out
        return _cross(_dnf(f.left, True, limit), _dnf(f.right, False, limit), limit)
    if isinstance(f, Xor):
        head, rest = f.args[0], f.args[1:]
        tail = rest[0] if len(rest) == 1 else Xor(rest)
        if pos:
            out = _cross(_dnf(head, True, limit), _dnf(tail, False, limit), limit) + _cross(
                _dnf(head, False, limit), _dnf(tail, True, limit), limit
            )
        else:
            out = _cross(_dnf(head, True, limit), _dnf(tail, True, limit), limit) + _cross(
                _dnf(head, False, limit), _dnf(tail, False, limit), limit
            )
        _guard(len(out), limit)
        return out
    if isinstance(f, Cmp):
        op = f.op if pos else _NEG_OP[f.op]
        return _atom_dnf(op, f.left, f.right)
    raise FragmentUnsupported(f"{type(f).__name__} is outside the difference-logic fragment")


_NEG_OP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "===": "=/==", "=/==": "==="}
_FLIP_OP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "===": "===", "=/==": "=/=="}


def _atom_dnf(op: str, left: IntExpr, right: IntExpr) -> list:
    if isinstance(left, IntLit) and not isinstance(right, IntLit):
        left, right, op = right, left, _FLIP_OP[op]
    if isinstance(left, Var):
        if left.sort is not Sort.INT:
            raise FragmentUnsupported(f"Boolean variable {left.name} in a comparison")
        if isinstance(right, Var):
            if right.sort is not Sort.INT:
                raise FragmentUnsupported(f"Boolean variable {right.name} in a comparison")
            if left.name == right.name:
                value = _CMP_FN[op](0, 0)
                return [frozenset()] if value else []
            x, y = left.name, right.name
            if op == "<":
                return [frozenset({DLAtom("diff", x, -1, y)})]
            if op == "<=":
                return [frozenset({DLAtom("diff", x, 0, y)})]
            if op == ">":
                return [frozenset({DLAtom("diff", y, -1, x)})]
            if op == ">=":
                return [frozenset({DLAtom("diff", y, 0, x)})]
            if op == "===":
                return [frozenset({DLAtom("diff", x, 0, y), DLAtom("diff", y, 0, x)})]
            return [frozenset({DLAtom("diff", x, -1, y)}), frozenset({DLAtom("diff", y, -1, x)})]
        if isinstance(right, IntLit):
            x, k = left.name, right.value
            if op == "<":
                return [frozenset({DLAtom("ub", x, k - 1)})]
            if op == "<=":
                return [frozenset({DLAtom("ub", x, k)})]
            if op == ">":
                return [frozenset({DLAtom("lb", x, k + 1)})]
            if op == ">=":
                return [frozenset({DLAtom("lb", x, k)})]
            if op == "===":
                return [frozenset({DLAtom("ub", x, k), DLAtom("lb", x, k)})]
            return [frozenset({DLAtom("ub", x, k - 1)}), frozenset({DLAtom("lb", x, k + 1)})]
    if isinstance(left, IntLit) and isinstance(right, IntLit):
        value = _CMP_FN[op](left.value, right.value)
        return [frozenset()] if value else []
    raise FragmentUnsupported("comparison operands must be integer variables or literals")


# ---------------------------------------------------------------------------
# Concrete syntax: printer

_B_ITE, _B_IMPLIES, _B_OR, _B_XOR, _B_AND, _B_EQ, _B_CMP = 1, 2, 3, 4, 5, 6, 7
_B_ADD, _B_MUL, _B_NEG, _B_ATOM = 8, 9, 10, 100


def format_formula(f: Formula) -> str:
    """Render in the concrete constraint syntax, e.g. ``X:Integer === 25``."""
    return _fmt_bool(f, 0)


def format_int_expr(e: IntExpr) -> str:
    return _fmt_int(e, 0)


def _wrap(s: str, bp: int, parent: int) -> str:
    return f"({s})" if bp < parent else s


def _fmt_bool(f: Formula, parent: int) -> str:
    if isinstance(f, BoolConst):
        return str(f)
    if isinstance(f, Var):
        return f"{f.name}:Boolean"
    if isinstance(f, Not):
        return f"not({_fmt_bool(f.arg, 0)})"
    if isinstance(f, And):
        s = " and ".join(_fmt_bool(a, _B_AND + 1) for a in f.args)
        return _wrap(s, _B_AND, parent)
    if isinstance(f, Or):
        s = " or ".join(_fmt_bool(a, _B_OR + 1) for a in f.args)
        return _wrap(s, _B_OR, parent)
    if isinstance(f, Xor):
        s = " xor ".join(_fmt_bool(a, _B_XOR + 1) for a in f.args)
        return _wrap(s, _B_XOR, parent)
    if isinstance(f, Implies):
        s = f"{_fmt_bool(f.left, _B_IMPLIES + 1)} implies {_fmt_bool(f.right, _B_IMPLIES + 1)}"
        return _wrap(s, _B_IMPLIES, parent)
    if isinstance(f, BoolEq):
        s = f"{_fmt_bool(f.left, _B_EQ + 1)} === {_fmt_bool(f.right, _B_EQ + 1)}"
        return _wrap(s, _B_EQ, parent)
    if isinstance(f, BoolNeq):
        s = f"{_fmt_bool(f.left, _B_EQ + 1)} =/== {_fmt_bool(f.right, _B_EQ + 1)}"
        return _wrap(s, _B_EQ, parent)
    if isinstance(f, Cmp):
        s = f"{_fmt_int(f.left, _B_CMP + 1)} {f.op} {_fmt_int(f.right, _B_CMP + 1)}"
        return _wrap(s, _B_CMP, parent)
    if isinstance(f, BoolITE):
        s = (
            f"{_fmt_bool(f.cond, _B_ITE + 1)} ? {_fmt_bool(f.then, _B_ITE + 1)}"
            f" : {_fmt_bool(f.orelse, _B_ITE + 1)}"
        )
        return _wrap(s, _B_ITE, parent)
    raise TypeError(f"not a formula: {f!r}")


def _fmt_int(e: IntExpr, parent: int) -> str:
    if isinstance(e, IntLit):
        s = str(e.value)
        return _wrap(s, _B_ATOM if e.value >= 0 else _B_NEG, parent)
    if isinstance(e, Var):
        return f"{e.name}:Integer"
    if isinstance(e, Neg):
        return _wrap(f"-{_fmt_int(e.arg, _B_NEG + 1)}", _B_NEG, parent)
    if isinstance(e, Arith):
        bp = _B_ADD if e.op in ("+", "-") else _B_MUL
        s = f"{_fmt_int(e.left, bp)} {e.op} {_fmt_int(e.right, bp + 1)}"
        return _wrap(s, bp, parent)
    if isinstance(e, IntITE):
        s = (
            f"{_fmt_bool(e.cond, _B_ITE + 1)} ? {_fmt_int(e.then, _B_ITE + 1)}"
            f" : {_fmt_int(e.orelse, _B_ITE + 1)}"
        )
        return _wrap(s, _B_ITE, parent)
    raise TypeError(f"not an integer expression: {e!r}")


# ---------------------------------------------------------------------------
# Concrete syntax: reader

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<name>[A-Za-z][A-Za-z0-9]*)"
    r"|(?P<int>\d+)"
    r"|(?P<op>===|=/==|<=|>=|\|\||->|[<>+\-*?:().]))"
)

_KEYWORDS = {"and", "or", "xor", "implies", "not", "true", "false", "div", "mod", "Integer", "Boolean"}


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ValueError(f"column {pos}: unexpected character {text[pos]!r}")
        pos = m.end()
        if m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start()))
        elif m.lastgroup == "int":
            tokens.append(("int", m.group("int"), m.start()))
        else:
            tokens.append(("op", m.group("op"), m.start()))
    tokens.append(("eof", "", len(text)))
    return tokens


class _Reader:
    """Pratt parser over the printed constraint syntax."""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, val, at = self.next()
        if val != value:
            raise ValueError(f"column {at}: expected {value!r}, found {val!r}")

    def fail(self, msg: str):
        kind, val, at = self.peek()
        raise ValueError(f"column {at}: {msg} (at {val!r})")

    # Each parse method returns ('bool', Formula) or ('int', IntExpr).

    def parse(self, min_bp: int):
        kind, node = self.parse_prefix()
        while True:
            tk, tv, _ = self.peek()
            if tk == "name" and tv in ("and", "or", "xor", "implies", "div", "mod"):
                opname = tv
            elif tk == "op" and tv in ("===", "=/==", "<=", ">=", "<", ">", "+", "-", "*", "?"):
                opname = tv
            else:
                break
            bp = _READ_BP[opname]
            if bp < min_bp:
                break
            self.next()
            if opname == "?":
                kind, node = self.parse_ite(kind, node)
                continue
            if opname in ("and", "or", "xor"):
                kind, node = self.parse_chain(opname, kind, node, bp)
                continue
            rk, rn = self.parse(bp + 1)
            kind, node = self.combine(opname, kind, node, rk, rn)
        return kind, node

    def parse_chain(self, opname: str, kind, node, bp: int):
        args = [self.require_bool(kind, node)]
        while True:
            rk, rn = self.parse(bp + 1)
            args.append(self.require_bool(rk, rn))
            tk, tv, _ = self.peek()
            if tk == "name" and tv == opname:
                self.next()
                continue
            break
        cls = {"and": And, "or": Or, "xor": Xor}[opname]
        return "bool", cls(tuple(args))

    def parse_ite(self, ck, cn):
        cond = self.require_bool(ck, cn)
        tk_kind, tk_node = self.parse(_B_ITE + 1)
        self.expect(":")
        ek_kind, ek_node = self.parse(_B_ITE + 1)
        if tk_kind != ek_kind:
            self.fail("conditional branches have different sorts")
        if tk_kind == "int":
            return "int", IntITE(cond, tk_node, ek_node)
        return "bool", BoolITE(cond, tk_node, ek_node)

    def combine(self, op: str, lk, ln, rk, rn):
        if op == "implies":
            return "bool", Implies(self.require_bool(lk, ln), self.require_bool(rk, rn))
        if op in ("<", "<=", ">", ">="):
            return "bool", Cmp(op, self.require_int(lk, ln), self.require_int(rk, rn))
        if op in ("===", "=/=="):
            if lk == "int" and rk == "int":
                return "bool", Cmp(op, ln, rn)
            if lk == "bool" and rk == "bool":
                return "bool", (BoolEq if op == "===" else BoolNeq)(ln, rn)
            self.fail(f"operands of {op} have different sorts")
        if op in ("+", "-", "*", "div", "mod"):
            return "int", Arith(op, self.require_int(lk, ln), self.require_int(rk, rn))
        raise AssertionError(op)

    def require_bool(self, kind, node) -> Formula:
        if kind != "bool":
            self.fail("expected a Boolean term")
        return node

    def require_int(self, kind, node) -> IntExpr:
        if kind != "int":
            self.fail("expected an integer term")
        return node

    def parse_prefix(self):
        tk, tv, at = self.next()
        if tk == "int":
            return "int", IntLit(int(tv))
        if tk == "op" and tv == "-":
            kind, node = self.parse(_B_NEG)
            if kind != "int":
                raise ValueError(f"column {at}: unary minus needs an integer operand")
            if isinstance(node, IntLit):
                return "int", IntLit(-node.value)
            return "int", Neg(node)
        if tk == "op" and tv == "(":
            kind, node = self.parse(0)
            self.expect(")")
            # accept the (10).Integer / (true).Boolean literal notation
            pk, pv, _ = self.peek()
            if pv == ".":
                self.next()
                sk, sv, sat = self.next()
                if sv not in ("Integer", "Boolean"):
                    raise ValueError(f"column {sat}: expected Integer or Boolean after '.'")
            return kind, node
        if tk == "name":
            if tv == "true":
                return "bool", TRUE
            if tv == "false":
                return "bool", FALSE
            if tv == "not":
                self.expect("(")
                kind, node = self.parse(0)
                self.expect(")")
                return "bool", Not(self.require_bool(kind, node))
            if tv in _KEYWORDS:
                raise ValueError(f"column {at}: unexpected keyword {tv!r}")
            pk, pv, _ = self.peek()
            if pv == ":":
                self.next()
                sk, sv, sat = self.next()
                if sv == "Integer":
                    return "int", Var(tv, Sort.INT)
                if sv == "Boolean":
                    return "bool", Var(tv, Sort.BOOL)
                raise ValueError(f"column {sat}: expected Integer or Boolean sort annotation")
            raise ValueError(f"column {at}: variable {tv} needs a :Integer or :Boolean annotation")
        raise ValueError(f"column {at}: unexpected token {tv!r}")


_READ_BP = {
    "?": _B_ITE,
    "implies": _B_IMPLIES,
    "or": _B_OR,
    "xor": _B_XOR,
    "and": _B_AND,
    "===": _B_EQ,
    "=/==": _B_EQ,
    "<": _B_CMP,
    "<=": _B_CMP,
    ">": _B_CMP,
    ">=": _B_CMP,
    "+": _B_ADD,
    "-": _B_ADD,
    "*": _B_MUL,
    "div": _B_MUL,
    "mod": _B_MUL,
}


def read_formula(text: str) -> Formula:
    """Parse the printer's concrete syntax back into a Formula."""
    reader = _Reader(text)
    kind, node = reader.parse(0)
    tk, tv, at = reader.peek()
    if tk != "eof":
        raise ValueError(f"column {at}: trailing input {tv!r}")
    if kind != "bool":
        raise ValueError("expected a Boolean formula, found an integer expression")
    return node
