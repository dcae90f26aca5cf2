"""Invariant plugins.

Path-insensitive plugins (affine relations, loop assigns) always contribute.
Among the path-sensitive ones (search, max/min) the applicable plugin with the
highest priority is the principal handler; when none applies the loop falls
back to havoc, which needs no code: unmatched scalars get fresh exit symbols
and written arrays are covered by the assigns baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..segments import I_OFF, Indexed
from ..symcore import (
    And, BoundVar, Cell, Cmp, OpaqueRead, Or, Quant, SymExpr, SymVal, V,
    formula_atoms, implies, negate, substitute,
)
from ..symcore.formula import fkey
from .info import LoopInfo

INVARIANT, ASSIGNS = "invariant", "assigns"
NORMAL, BREAK, RETURN, HEAD = "normal", "break", "return", "head"


@dataclass(frozen=True)
class Clause:
    kind: str
    formula: object = None
    ranges: tuple = ()  # ((array, lo, hi), ...) half-open
    scalars: tuple = ()
    plugin: str = ""


@dataclass
class ExitSpec:
    kind: str
    path: object  # body-pass path, head path, or None for the recognized normal exit
    ie: SymExpr | None = None  # iterator value at the exit
    K: SymExpr | None = None  # completed iterations
    sigma: dict = field(default_factory=dict)
    facts: list = field(default_factory=list)
    ranges: dict = field(default_factory=dict)  # array -> [(lo, hi)]
    indexed: dict = field(default_factory=dict)  # array -> Indexed summary of its range


K_VAR = BoundVar("k")
J_VAR = BoundVar("j")


def _delta(info: LoopInfo, x: str):
    """Common per-iteration increment of ``x`` if loop-invariant, else None."""
    h = V(info.head_syms[x])
    ds = set()
    for p in info.cont:
        v = info.value(p, x)
        if not isinstance(v, SymExpr):
            return None
        ds.add(v - h)
    if len(ds) != 1:
        return None
    d = ds.pop()
    return d if info.is_invariant(d) else None


class AffinePlugin:
    """Iterator bounds plus ``x == x0 + d*k`` for every scalar whose
    per-iteration increment ``d`` is the same loop-invariant expression on all
    continuing paths.  This covers the linear relations the loops here need
    without a general linear-arithmetic engine.
    """
    name, priority, path_sensitive = "affine", 10, False

    def applies(self, info: LoopInfo) -> bool:
        return info.recognized

    def run(self, info: LoopInfo, exits: list, clauses: list):
        hi, i0, s = info.hi, info.i0, info.step
        B = info.bound
        if B is not None:
            top = B + s
            if s > 0 and implies(info.pre.pc, Cmp(i0, "<=", top)):
                clauses.append(Clause(INVARIANT, And((Cmp(i0, "<=", hi), Cmp(hi, "<=", top))),
                                      plugin=self.name))
            elif s < 0 and implies(info.pre.pc, Cmp(top, "<=", i0)):
                clauses.append(Clause(INVARIANT, And((Cmp(top, "<=", hi), Cmp(hi, "<=", i0))),
                                      plugin=self.name))
        for x in info.written:
            if x == info.iterator or info.entry_vals.get(x) is None:
                continue
            d = _delta(info, x)
            if d is None:
                continue
            x0, hx = info.entry_vals[x], info.head_syms[x]
            if abs(s) == 1:
                f = Cmp(V(hx), "==", x0 + d * ((hi - i0) * s))
            else:
                f = Cmp(V(hx) * s, "==", x0 * s + d * (hi - i0))
            clauses.append(Clause(INVARIANT, f, plugin=self.name))
            for ex in exits:
                ex.sigma[hx] = x0 + d * ex.K
        self._indexed(info, exits, clauses)

    def _indexed(self, info: LoopInfo, exits, clauses):
        if len(info.cont) != 1 or info.brk or info.rets or info.head_conj or info.step <= 0:
            return
        p = info.cont[0]
        hsym = info.head_syms[info.iterator]
        for base in info.warrays:
            writes = [(k, v) for k, v in p.state.mem.items() if k.base == base]
            if not writes or any(not isinstance(v, SymExpr) for _, v in writes):
                continue
            cs, gs = [], set()
            for k, v in writes:
                c = k.offset - info.hi
                if not c.is_const():
                    break
                cs.append(c.const)
                gs.add(v.substitute({hsym: V(K_VAR) - c.const}))
            else:
                if len(gs) != 1 or sorted(cs) != list(range(min(cs), min(cs) + info.step)):
                    continue
                g = gs.pop()
                if not info.is_invariant(g):
                    continue
                cmin = min(cs)
                lo = info.i0 + cmin
                phi = g.substitute({K_VAR: lo + I_OFF})
                clauses.append(Clause(INVARIANT, Quant(
                    "forall", K_VAR, lo, info.hi + cmin,
                    Cmp(V(Cell(base, V(K_VAR))), "==", g)), plugin=self.name))
                for ex in exits:
                    ex.indexed[base] = Indexed(phi)


class AssignsPlugin:
    name, priority, path_sensitive = "assigns", 0, False

    def applies(self, info: LoopInfo) -> bool:
        return True

    def _patterns(self, info: LoopInfo, base: str):
        """(offsets relative to the iterator, loop-invariant offsets) or None."""
        rel, fixed = set(), set()
        n0 = len(info.body_start.assigned)
        for p in info.cont + info.brk + info.rets:
            for ent in p.assigned[n0:]:
                if ent[0] != "cell" or ent[1].base != base:
                    continue
                off = ent[1].offset
                if info.recognized:
                    c = off - info.hi
                    if c.is_const():
                        rel.add(c.const)
                        continue
                if info.is_invariant(off):
                    fixed.add(off)
                    continue
                return None
        return rel, fixed

    def run(self, info: LoopInfo, exits: list, clauses: list):
        ann_ranges = []
        for base in info.warrays:
            whole = (base, SymExpr(0), V(info.ctx.lengths[base]))
            pat = self._patterns(info, base) if info.recognized else None
            if pat is None:
                ann_ranges.append(whole)
                for ex in exits:
                    ex.ranges.setdefault(base, []).append(whole[1:])
                continue
            rel, fixed = pat
            for off in sorted(fixed, key=lambda e: e.sort_key()):
                ann_ranges.append((base, off, off + 1))
                for ex in exits:
                    ex.ranges.setdefault(base, []).append((off, off + 1))
            if not rel:
                continue
            cmin, cmax, s, i0 = min(rel), max(rel), info.step, info.i0
            B = info.bound
            if B is None:
                ann_ranges.append(whole)
            elif s > 0:
                ann_ranges.append((base, i0 + cmin, B + cmax + 1))
            else:
                ann_ranges.append((base, B + cmin, i0 + cmax + 1))
            for ex in exits:
                if ex.kind == NORMAL:
                    last = ex.ie - s  # last iterated value
                else:
                    last = ex.ie
                if s > 0:
                    r = (i0 + cmin, last + cmax + 1)
                else:
                    r = (last + cmin, i0 + cmax + 1)
                ex.ranges.setdefault(base, []).append(r)
        clauses.append(Clause(ASSIGNS, None, tuple(ann_ranges), tuple(info.written),
                              plugin=self.name))


class SearchPlugin:
    name, priority, path_sensitive = "search", 30, True

    def site(self, info: LoopInfo):
        """(exit kind, break condition over the head iterator) or None."""
        if not info.recognized or info.step != 1 or info.a != 1:
            return None
        sites = len(info.brk) + len(info.rets) + (1 if info.head_conj else 0)
        if sites != 1:
            return None
        if info.head_conj:
            if len(info.head_conj) != 1 or not isinstance(info.head_conj[0], Cmp):
                return None
            kind, cond = HEAD, negate(info.head_conj[0])
        else:
            p = (info.brk or info.rets)[0]
            ex = info.extras(p)
            if len(ex) != 1 or not isinstance(ex[0], Cmp):
                return None
            kind, cond = (BREAK if info.brk else RETURN), ex[0]
        hsym = info.head_syms[info.iterator]
        reads = 0
        for at in formula_atoms(cond):
            if isinstance(at, OpaqueRead):
                if at.offset != info.hi or at.base in info.warrays or at.gen > info.g0:
                    return None
                reads += 1
            elif at == hsym:
                continue
            elif isinstance(at, SymVal) and at.id > info.t0:
                return None
        if reads == 0:
            return None
        neg = negate(cond)
        for p in info.cont:
            if fkey(neg) not in {fkey(f) for f in p.pc} and not implies(p.pc, neg):
                return None
        return kind, cond

    def applies(self, info: LoopInfo) -> bool:
        return self.site(info) is not None

    def run(self, info: LoopInfo, exits: list, clauses: list):
        kind, cond = self.site(info)
        hsym = info.head_syms[info.iterator]
        ck = substitute(cond, {hsym: V(K_VAR)})
        clauses.append(Clause(INVARIANT, Quant("forall", K_VAR, info.i0, info.hi, negate(ck)),
                              plugin=self.name))
        for ex in exits:
            if ex.kind == kind:
                ex.facts.append(Quant("exists", K_VAR, info.i0, ex.ie + 1, ck, incl=True))


class MaxMinPlugin:
    name, priority, path_sensitive = "maxmin", 20, True

    def match(self, info: LoopInfo):
        if (not info.recognized or info.step != 1 or info.a != 1 or len(info.cont) != 2
                or info.brk or info.rets or info.head_conj or info.warrays):
            return None
        others = [x for x in info.written if x != info.iterator]
        if len(others) != 1:
            return None
        m = others[0]
        hm = V(info.head_syms[m])
        upd = same = None
        for p in info.cont:
            v = info.value(p, m)
            if v == hm:
                same = p
            elif (isinstance(v, SymExpr) and len(v.terms) == 1 and v.const == 0
                  and v.terms[0][1] == 1 and isinstance(v.terms[0][0], OpaqueRead)):
                rd = v.terms[0][0]
                if rd.offset == info.hi and rd.gen == 0:
                    upd = (p, rd)
        if upd is None or same is None:
            return None
        p, rd = upd
        R = V(rd)
        for f in info.extras(p):
            if not isinstance(f, Cmp):
                continue
            n = f.norm()
            if isinstance(n, bool) or n[0] != "le":
                continue
            e = n[1]
            core = e.without_const()
            if e.const not in (0, 1):
                continue
            if core == hm - R:
                op = "max"
            elif core == R - hm:
                op = "min"
            else:
                continue
            if not implies(same.pc, negate(f)):
                return None
            return m, rd.base, op
        return None

    def applies(self, info: LoopInfo) -> bool:
        return self.match(info) is not None

    def run(self, info: LoopInfo, exits: list, clauses: list):
        m, arr, op = self.match(info)
        hm = V(info.head_syms[m])
        i0, hi = info.i0, info.hi
        m0 = info.entry_vals.get(m)
        rel = "<=" if op == "max" else ">="

        def cell(k):
            return V(OpaqueRead(arr, V(k), 0))
        bound_k = Cmp(cell(K_VAR), rel, hm)
        wit_j = Cmp(hm, "==", cell(J_VAR))
        if m0 is not None and m0 == V(OpaqueRead(arr, i0 - 1, 0)):
            lo = i0 - 1
            clauses.append(Clause(INVARIANT, Quant("forall", K_VAR, lo, hi, bound_k), plugin=self.name))
            clauses.append(Clause(INVARIANT, Quant("exists", J_VAR, lo, hi, wit_j), plugin=self.name))
        elif m0 is not None:
            clauses.append(Clause(INVARIANT, Quant("forall", K_VAR, i0, hi, bound_k), plugin=self.name))
            clauses.append(Clause(INVARIANT, Cmp(m0, rel, hm), plugin=self.name))
            clauses.append(Clause(INVARIANT, Or((Cmp(hm, "==", m0),
                                                 Quant("exists", J_VAR, i0, hi, wit_j))),
                                  plugin=self.name))
        # the exit value of m is a fresh symbol constrained by the instantiated clauses


ALL_PLUGINS = {p.name: p for p in (SearchPlugin(), MaxMinPlugin(), AffinePlugin(), AssignsPlugin())}
DEFAULT_PLUGINS = ("search", "maxmin", "affine", "assigns")


def registry(names) -> list:
    """Plugin objects for ``names``; the assigns baseline is always included."""
    out = []
    for n in names:
        if n not in ALL_PLUGINS:
            raise ValueError(f"unknown plugin {n!r}")
        out.append(ALL_PLUGINS[n])
    if "assigns" not in names:
        out.append(ALL_PLUGINS["assigns"])
    return out
