"""Formulas over symbolic expressions: comparisons, connectives, ranged quantifiers.

Path conditions are tuples of formulas read as a conjunction.  Comparisons keep
the orientation they were built with (for rendering) and expose a normalized
form ``expr <= 0 | expr == 0 | expr != 0`` for reasoning and de-duplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from .expr import Atom, BoundVar, SymExpr

LE, EQ, NE = "le", "eq", "ne"

_FLIP = {"<=": ">", "<": ">=", ">=": "<", ">": "<=", "==": "!=", "!=": "=="}
_MIRROR = {"<=": ">=", "<": ">", ">=": "<=", ">": "<", "==": "==", "!=": "!="}


class EvalError(Exception):
    """A formula could not be evaluated concretely (e.g. out-of-bounds read)."""


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class BoolConst(Formula):
    value: bool

    def __repr__(self):
        return "true" if self.value else "false"


TRUE = BoolConst(True)
FALSE = BoolConst(False)


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


@dataclass(frozen=True)
class Cmp(Formula):
    lhs: SymExpr
    op: str
    rhs: SymExpr

    def __post_init__(self):
        if self.op not in _FLIP:
            raise ValueError(f"bad comparison operator {self.op!r}")
        object.__setattr__(self, "lhs", SymExpr.lift(self.lhs))
        object.__setattr__(self, "rhs", SymExpr.lift(self.rhs))

    def norm(self) -> tuple[str, SymExpr] | bool:
        """Normalized ``(kind, e)`` meaning ``e <= 0``/``e == 0``/``e != 0``,
        or a bool when the comparison is ground."""
        l, r, op = self.lhs, self.rhs, self.op
        if op == "<=":
            kind, e = LE, l - r
        elif op == "<":
            kind, e = LE, l - r + 1
        elif op == ">=":
            kind, e = LE, r - l
        elif op == ">":
            kind, e = LE, r - l + 1
        else:
            kind, e = (EQ if op == "==" else NE), l - r
        if e.is_const():
            c = e.const
            return {LE: c <= 0, EQ: c == 0, NE: c != 0}[kind]
        g = e.content_gcd()
        if kind == LE:
            e = SymExpr(_ceil_div(e.const, g), [(a, c // g) for a, c in e.terms])
        else:
            if e.const % g:
                return kind == NE
            e = SymExpr(e.const // g, [(a, c // g) for a, c in e.terms])
            if e.terms[0][1] < 0:
                e = -e
        return kind, e

    def __repr__(self):
        return f"{self.lhs!r} {self.op} {self.rhs!r}"


@dataclass(frozen=True)
class And(Formula):
    items: tuple

    def __repr__(self):
        return "(" + " && ".join(map(repr, self.items)) + ")"


@dataclass(frozen=True)
class Or(Formula):
    items: tuple

    def __repr__(self):
        return "(" + " || ".join(map(repr, self.items)) + ")"


@dataclass(frozen=True)
class Quant(Formula):
    """``q var in [lo, hi) . body``; ``lo``/``hi`` are None for an unbounded
    existential over an auxiliary symbol.  ``incl`` only affects rendering
    (``lo <= k <= hi-1``)."""

    q: str
    var: BoundVar
    lo: SymExpr | None
    hi: SymExpr | None
    body: Formula
    incl: bool = False

    def __repr__(self):
        if self.lo is None:
            return f"{self.q} {self.var}. {self.body!r}"
        return f"{self.q} {self.var} in [{self.lo!r}, {self.hi!r}). {self.body!r}"


def fkey(f: Formula):
    """Key identifying formulas up to comparison normalization."""
    if isinstance(f, Cmp):
        n = f.norm()
        return ("c", n) if isinstance(n, bool) else ("c",) + n
    if isinstance(f, (And, Or)):
        return (type(f).__name__, tuple(fkey(i) for i in f.items))
    if isinstance(f, Quant):
        return ("q", f.q, f.var, f.lo, f.hi, fkey(f.body))
    return ("b", f.value)


def mk_and(items) -> Formula:
    flat: list[Formula] = []
    seen = set()
    for it in items:
        it = simplify(it)
        sub = it.items if isinstance(it, And) else (it,)
        for s in sub:
            if s == TRUE:
                continue
            if s == FALSE:
                return FALSE
            k = fkey(s)
            if k not in seen:
                seen.add(k)
                flat.append(s)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def mk_or(items) -> Formula:
    flat: list[Formula] = []
    seen = set()
    for it in items:
        it = simplify(it)
        sub = it.items if isinstance(it, Or) else (it,)
        for s in sub:
            if s == FALSE:
                continue
            if s == TRUE:
                return TRUE
            k = fkey(s)
            if k not in seen:
                seen.add(k)
                flat.append(s)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def simplify(f: Formula) -> Formula:
    if isinstance(f, Cmp):
        n = f.norm()
        if isinstance(n, bool):
            return TRUE if n else FALSE
        return f
    if isinstance(f, And):
        return mk_and(f.items)
    if isinstance(f, Or):
        return mk_or(f.items)
    if isinstance(f, Quant):
        body = simplify(f.body)
        if f.lo is not None:
            empty = Cmp(f.hi, "<=", f.lo).norm()
            if empty is True:
                return TRUE if f.q == "forall" else FALSE
        if isinstance(body, BoolConst) and f.lo is None:
            return body
        if body == TRUE and f.q == "forall":
            return TRUE
        return Quant(f.q, f.var, f.lo, f.hi, body, f.incl)
    return f


def negate(f: Formula) -> Formula:
    if isinstance(f, BoolConst):
        return FALSE if f.value else TRUE
    if isinstance(f, Cmp):
        return Cmp(f.lhs, _FLIP[f.op], f.rhs)
    if isinstance(f, And):
        return mk_or(negate(i) for i in f.items)
    if isinstance(f, Or):
        return mk_and(negate(i) for i in f.items)
    if isinstance(f, Quant):
        q = "exists" if f.q == "forall" else "forall"
        return Quant(q, f.var, f.lo, f.hi, negate(f.body), f.incl)
    raise TypeError(f)


def substitute(f: Formula, mapping: Mapping[Atom, SymExpr]) -> Formula:
    """Simultaneous substitution; a quantifier's own bound variable is never replaced."""
    if not mapping or isinstance(f, BoolConst):
        return f
    if isinstance(f, Cmp):
        return Cmp(f.lhs.substitute(mapping), f.op, f.rhs.substitute(mapping))
    if isinstance(f, And):
        return And(tuple(substitute(i, mapping) for i in f.items))
    if isinstance(f, Or):
        return Or(tuple(substitute(i, mapping) for i in f.items))
    if isinstance(f, Quant):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        lo = None if f.lo is None else f.lo.substitute(inner)
        hi = None if f.hi is None else f.hi.substitute(inner)
        return Quant(f.q, f.var, lo, hi, substitute(f.body, inner), f.incl)
    raise TypeError(f)


def formula_atoms(f: Formula) -> set[Atom]:
    """Free atoms of ``f`` (including nested ones)."""
    if isinstance(f, BoolConst):
        return set()
    if isinstance(f, Cmp):
        return f.lhs.all_atoms() | f.rhs.all_atoms()
    if isinstance(f, (And, Or)):
        out: set[Atom] = set()
        for i in f.items:
            out |= formula_atoms(i)
        return out
    if isinstance(f, Quant):
        out = formula_atoms(f.body)
        if f.lo is not None:
            out |= f.lo.all_atoms() | f.hi.all_atoms()
        out.discard(f.var)
        return out
    raise TypeError(f)


def map_cmps(f: Formula, fn: Callable[[Cmp], Formula]) -> Formula:
    if isinstance(f, Cmp):
        return fn(f)
    if isinstance(f, And):
        return And(tuple(map_cmps(i, fn) for i in f.items))
    if isinstance(f, Or):
        return Or(tuple(map_cmps(i, fn) for i in f.items))
    if isinstance(f, Quant):
        return Quant(f.q, f.var, f.lo, f.hi, map_cmps(f.body, fn), f.incl)
    return f


def conj(pc: tuple, *fs: Formula) -> tuple:
    """Conjoin formulas onto a path condition (flattened, de-duplicated)."""
    out = list(pc)
    seen = {fkey(f) for f in out}
    for f in fs:
        f = simplify(f)
        for s in (f.items if isinstance(f, And) else (f,)):
            if s == TRUE:
                continue
            k = fkey(s)
            if k not in seen:
                seen.add(k)
                out.append(s)
    return tuple(out)


# -- concrete evaluation

UNBOUNDED_WINDOW = 64


def evaluate(f: Formula, val: Callable[[Atom], int]) -> bool:
    """Truth of ``f`` under a concrete valuation of its atoms."""
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Cmp):
        l, r = f.lhs.evaluate(val), f.rhs.evaluate(val)
        return {"<=": l <= r, "<": l < r, ">=": l >= r, ">": l > r,
                "==": l == r, "!=": l != r}[f.op]
    if isinstance(f, And):
        return all(evaluate(i, val) for i in f.items)
    if isinstance(f, Or):
        return any(evaluate(i, val) for i in f.items)
    if isinstance(f, Quant):
        if f.lo is None and f.q == "exists":
            binders, body = [], f
            while isinstance(body, Quant) and body.lo is None and body.q == "exists":
                binders.append(body.var)
                body = body.body
            return _exists_block(binders, body, val)
        if f.lo is None:
            rng = _unbounded_range(f, val)
        else:
            rng = range(f.lo.evaluate(val), f.hi.evaluate(val))
        test = any if f.q == "exists" else all

        def body_at(k):
            # substitution (not a wrapped valuation) also reaches nested atoms
            # such as array offsets
            try:
                return evaluate(substitute(f.body, {f.var: SymExpr(k)}), val)
            except EvalError:
                if f.q == "exists":
                    return False
                raise
        return test(body_at(k) for k in rng)
    raise TypeError(f)


def _exists_block(binders: list, body: Formula, val) -> bool:
    """Witness search for a block of unbounded existentials.

    Binder-free conjuncts are checked first; the rest split into groups that
    share no binder and are searched independently, always branching on the
    binder with the fewest candidates (an equality makes that a singleton).
    """
    items = list(body.items) if isinstance(body, And) else [body]
    groups: list[tuple[set, list]] = []
    for it in items:
        mine = {b for b in binders if _mentions(it, b)}
        if not mine:
            try:
                if not evaluate(it, val):
                    return False
            except EvalError:
                return False
            continue
        merged = [g for g in groups if g[0] & mine]
        for g in merged:
            groups.remove(g)
            mine |= g[0]
        groups.append((mine, [it] + [x for g in merged for x in g[1]]))
    return all(_search(sorted(bs, key=lambda v: v.name), mk_and(fs), val) for bs, fs in groups)


def _mentions(f: Formula, b) -> bool:
    return b in formula_atoms(f)


def _search(binders: list, body: Formula, val) -> bool:
    if not binders:
        try:
            return evaluate(body, val)
        except EvalError:
            return False
    best = None
    for b in binders:
        rng = _unbounded_range(Quant("exists", b, None, None, body), val)
        if best is None or len(rng) < len(best[1]):
            best = (b, rng)
        if len(rng) <= 1:
            break
    b, rng = best
    rest = [x for x in binders if x != b]
    return any(_exists_block(rest, substitute(body, {b: SymExpr(k)}), val) for k in rng)


def _unbounded_range(f: Quant, val) -> range:
    lo = hi = None
    items = f.body.items if isinstance(f.body, And) else (f.body,)
    for it in items:
        if not isinstance(it, Cmp):
            continue
        n = it.norm()
        if isinstance(n, bool):
            continue
        kind, e = n
        a = e.coeff(f.var)
        rest = e - SymExpr.atom(f.var, a)
        if a == 0 or rest.mentions(lambda t: t == f.var) or kind == NE:
            continue
        try:
            r = rest.evaluate(val)
        except (KeyError, EvalError):
            continue
        if kind == EQ:
            if r % a:
                return range(0)
            v = -r // a
            return range(v, v + 1)
        if a > 0:
            b = (-r) // a
            hi = b if hi is None else min(hi, b)
        else:
            b = _ceil_div(r, -a)
            lo = b if lo is None else max(lo, b)
    if lo is None and hi is None:
        return range(-UNBOUNDED_WINDOW, UNBOUNDED_WINDOW + 1)
    if lo is None:
        lo = hi - 2 * UNBOUNDED_WINDOW
    if hi is None:
        hi = lo + 2 * UNBOUNDED_WINDOW
    return range(lo, hi + 1)
