"""Sound, incomplete affine reasoning over path conditions.

Top-level comparisons are read as linear constraints over their atoms (nonlinear
monomials, reads and aggregates are opaque variables).  Equalities are
eliminated by substitution, inequalities by Fourier-Motzkin with integer
tightening, disequalities by splitting into two strict cases.  Disjunctions are
case-split up to a fixed budget; quantified conjuncts are ignored.  A verdict of
INFEASIBLE is only given when a contradiction is derived.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd

from .expr import SymExpr
from .formula import (
    EQ, LE, NE, And, BoolConst, Cmp, Formula, Or, Quant, fkey, negate,
)

FEASIBLE, INFEASIBLE, UNKNOWN = "feasible", "infeasible", "unknown"
MUST_EQUAL, MUST_DIFFER = "must_equal", "must_differ"

MAX_CONSTRAINTS = 400
MAX_CASES = 64


class _Contradiction(Exception):
    pass


def _lin(e: SymExpr) -> tuple[dict, Fraction]:
    return {a: Fraction(c) for a, c in e.terms}, Fraction(e.const)


def _collect(items, les, eqs, nes, ors):
    for f in items:
        if isinstance(f, BoolConst):
            if not f.value:
                raise _Contradiction
        elif isinstance(f, Cmp):
            n = f.norm()
            if isinstance(n, bool):
                if not n:
                    raise _Contradiction
                continue
            kind, e = n
            {LE: les, EQ: eqs, NE: nes}[kind].append(e)
        elif isinstance(f, And):
            _collect(f.items, les, eqs, nes, ors)
        elif isinstance(f, Or):
            ors.append(f.items)
        # quantified facts carry no linear information here


def _tighten(coefs: dict, const: Fraction):
    """Scale to integers and round the constant (valid over integer atoms)."""
    coefs = {a: c for a, c in coefs.items() if c}
    if not coefs:
        if const > 0:
            raise _Contradiction
        return None
    den = 1
    for c in list(coefs.values()) + [const]:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = {a: int(c * den) for a, c in coefs.items()}
    k = const * den
    g = 0
    for c in ints.values():
        g = gcd(g, abs(c))
    # sum(ci/g * ti) <= -k/g  ->  sum(ci/g * ti) + ceil(k/g) <= 0
    kk = -((-k.numerator) // (k.denominator * g))
    return (tuple(sorted(((a, c // g) for a, c in ints.items()), key=lambda t: t[0].sort_key())),
            kk)


def _fm(les: list[tuple[dict, Fraction]], eqs: list[tuple[dict, Fraction]]) -> bool | None:
    """False when the system is infeasible, None when undecided/satisfiable."""
    eqs = [(dict(c), k) for c, k in eqs]
    les = [(dict(c), k) for c, k in les]
    # Gaussian elimination of equalities
    while eqs:
        c, k = eqs.pop()
        c = {a: v for a, v in c.items() if v}
        if not c:
            if k != 0:
                return False
            continue
        piv = min(c, key=lambda a: (abs(c[a]) != 1, a.sort_key()))
        pv = c[piv]
        # piv = -(k + sum_{a != piv} c_a a) / pv

        def sub(cc, kk):
            m = cc.get(piv)
            if not m:
                return cc, kk
            out = dict(cc)
            del out[piv]
            f = m / pv
            for a, v in c.items():
                if a == piv:
                    continue
                out[a] = out.get(a, 0) - f * v
            return out, kk - f * k
        eqs = [sub(cc, kk) for cc, kk in eqs]
        les = [sub(cc, kk) for cc, kk in les]
    try:
        cons = set()
        for c, k in les:
            t = _tighten(c, k)
            if t is not None:
                cons.add(t)
    except _Contradiction:
        return False
    while cons:
        if len(cons) > MAX_CONSTRAINTS:
            return None
        var_stats: dict = {}
        for terms, _ in cons:
            for a, c in terms:
                p, n = var_stats.get(a, (0, 0))
                var_stats[a] = (p + (c > 0), n + (c < 0))
        a = min(var_stats, key=lambda v: (var_stats[v][0] * var_stats[v][1], v.sort_key()))
        pos, neg, new = [], [], set()
        for con in cons:
            c = dict(con[0]).get(a, 0)
            if c > 0:
                pos.append(con)
            elif c < 0:
                neg.append(con)
            else:
                new.add(con)
        try:
            for pt, pk in pos:
                pd = dict(pt)
                for nt, nk in neg:
                    nd = dict(nt)
                    mp, mn = pd[a], -nd[a]
                    comb: dict = {}
                    for t, v in pt:
                        comb[t] = comb.get(t, 0) + v * mn
                    for t, v in nt:
                        comb[t] = comb.get(t, 0) + v * mp
                    comb.pop(a, None)
                    t = _tighten({x: Fraction(v) for x, v in comb.items()},
                                 Fraction(pk * mn + nk * mp))
                    if t is not None:
                        new.add(t)
        except _Contradiction:
            return False
        cons = new
    return None


def _system_infeasible(les, eqs, nes) -> bool:
    base_le = [_lin(e) for e in les]
    base_eq = [_lin(e) for e in eqs]
    if _fm(base_le, base_eq) is False:
        return True
    for e in nes:
        lo = _lin(e + 1)            # e <= -1
        hi = _lin(-e + 1)           # e >= 1
        if _fm(base_le + [lo], base_eq) is False and _fm(base_le + [hi], base_eq) is False:
            return True
    return False


@lru_cache(maxsize=20000)
def _check_key(items: tuple) -> str:
    les, eqs, nes, ors = [], [], [], []
    try:
        _collect(items, les, eqs, nes, ors)
    except _Contradiction:
        return INFEASIBLE
    if not ors:
        if _system_infeasible(les, eqs, nes):
            return INFEASIBLE
        return FEASIBLE if not (les or eqs or nes) else UNKNOWN
    choices = []
    n_cases = 1
    for alts in ors:
        if any(_opaque(a) for a in alts):
            continue
        choices.append(alts)
        n_cases *= len(alts)
        if n_cases > MAX_CASES:
            choices.pop()
            n_cases //= len(alts)
    for combo in product(*choices) if choices else [()]:
        l2, e2, n2, o2 = list(les), list(eqs), list(nes), []
        try:
            _collect(combo, l2, e2, n2, o2)
        except _Contradiction:
            continue
        if not _system_infeasible(l2, e2, n2):
            return UNKNOWN
    return INFEASIBLE


def _opaque(f: Formula) -> bool:
    if isinstance(f, Quant):
        return True
    if isinstance(f, (And, Or)):
        return any(_opaque(i) for i in f.items)
    return False


def _canon(pc) -> tuple:
    items = []
    seen = set()
    for f in pc:
        k = fkey(f)
        if k not in seen:
            seen.add(k)
            items.append(f)
    return tuple(items)


def prune_infeasible(pc) -> str:
    """FEASIBLE (trivially), INFEASIBLE (contradiction derived) or UNKNOWN."""
    return _check_key(_canon(pc))


def implies(pc, f: Formula) -> bool:
    """True only when ``pc`` provably entails ``f``."""
    if isinstance(f, BoolConst):
        return f.value or prune_infeasible(pc) == INFEASIBLE
    if isinstance(f, And):
        return all(implies(pc, i) for i in f.items)
    if isinstance(f, Quant):
        return False
    return prune_infeasible(tuple(pc) + (negate(f),)) == INFEASIBLE


def compare_exprs(b1: SymExpr, b2: SymExpr, pc=()) -> str:
    d = SymExpr.lift(b1) - SymExpr.lift(b2)
    if d.is_const():
        return MUST_EQUAL if d.const == 0 else MUST_DIFFER
    if implies(pc, Cmp(d, "==", SymExpr(0))):
        return MUST_EQUAL
    if implies(pc, Cmp(d, "!=", SymExpr(0))):
        return MUST_DIFFER
    return UNKNOWN
