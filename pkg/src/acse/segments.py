"""Contiguous array segments with content summaries.

A segment ``base[start .. start+length)`` carries one summary: an indexed
formula over the relative offset ``i_off``, an aggregate fact, or Unknown.
Unknown segments carry a generation number so that reads from them never
unify with entry reads or reads of earlier generations.  When segments of one
array overlap undecidably, the one with the highest ``stamp`` was created last
and takes precedence.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .symcore import (
    And, Cmp, IOff, Or, SymExpr, V, compare_exprs, implies, MUST_EQUAL,
)

I_OFF = V(IOff())


class NonConcretizable(Exception):
    pass


@dataclass(frozen=True)
class Indexed:
    phi: SymExpr

    def __repr__(self):
        return f"phi(i_off) = {self.phi!r}"


@dataclass(frozen=True)
class AggregateFact:
    op: str
    value: SymExpr

    def __repr__(self):
        return f"{self.op} = {self.value!r}"


@dataclass(frozen=True)
class Unknown:
    def __repr__(self):
        return "T"


UNKNOWN = Unknown()


@dataclass(frozen=True)
class Segment:
    base: str
    start: SymExpr
    length: SymExpr
    summary: object
    gen: int = 0
    stamp: int = 0

    @property
    def end(self) -> SymExpr:
        return self.start + self.length

    def value_at(self, off: SymExpr) -> SymExpr | None:
        if isinstance(self.summary, Indexed):
            return self.summary.phi.substitute({IOff(): off - self.start})
        return None

    def __repr__(self):
        return f"{self.base}[{self.start!r} .. {self.end!r}) : {self.summary!r}"


def dump(store) -> str:
    return "\n".join(repr(s) for s in store)


# -- containment

INSIDE, MAYBE, OUTSIDE = "inside", "maybe", "outside"


def inside_formula(seg: Segment, off: SymExpr):
    return And((Cmp(seg.start, "<=", off), Cmp(off, "<", seg.end)))


def containment(seg: Segment, off: SymExpr, pc) -> str:
    if implies(pc, Or((Cmp(off, "<", seg.start), Cmp(off, ">=", seg.end)))):
        return OUTSIDE
    if implies(pc, inside_formula(seg, off)):
        return INSIDE
    return MAYBE


def range_relation(seg: Segment, lo: SymExpr, hi: SymExpr, pc) -> str:
    """INSIDE when ``seg`` lies within ``[lo, hi)``, OUTSIDE when disjoint."""
    if implies(pc, Or((Cmp(seg.length, "<=", 0), Cmp(seg.end, "<=", lo),
                       Cmp(hi, "<=", seg.start)))):
        return OUTSIDE
    if implies(pc, And((Cmp(lo, "<=", seg.start), Cmp(seg.end, "<=", hi)))):
        return INSIDE
    return MAYBE


# -- operations

def seg_read(store, base: str, off: SymExpr, pc) -> list[SymExpr]:
    """Candidate values for ``base[off]`` from indexed segments that may hold it.

    Several candidates stand for their disjunction; an empty list means no
    indexed segment applies.
    """
    out = []
    for s in store:
        if s.base == base and isinstance(s.summary, Indexed):
            if containment(s, off, pc) != OUTSIDE:
                out.append(s.value_at(off))
    return out


def seg_write(store, base: str, off: SymExpr, pc, fresh) -> tuple:
    """Adjust segment structure for a write to ``base[off]``."""
    out = []
    for s in store:
        if s.base != base:
            out.append(s)
            continue
        where = containment(s, off, pc)
        if where == OUTSIDE:
            out.append(s)
            continue
        rel = off - s.start
        if where == INSIDE and rel.is_const():
            j = rel.const
            pre = replace(s, length=SymExpr(j))
            suf_start = s.start + (j + 1)
            suf = replace(s, start=suf_start, length=s.length - (j + 1))
            if isinstance(s.summary, Indexed):
                # the suffix's own offsets start j+1 cells later
                suf = replace(suf, summary=Indexed(
                    s.summary.phi.substitute({IOff(): I_OFF + (j + 1)})))
            for part in (pre, suf):
                if not _empty(part.length, pc):
                    out.append(part)
            continue
        out.append(replace(s, summary=UNKNOWN, gen=fresh.gen()))
    return tuple(out)


def _empty(length: SymExpr, pc) -> bool:
    return length.is_const() and length.const <= 0 or implies(pc, Cmp(length, "<=", 0))


def same_summary(s1: Segment, s2: Segment) -> bool:
    a, b = s1.summary, s2.summary
    if isinstance(a, Unknown) and isinstance(b, Unknown):
        return True
    if isinstance(a, Indexed) and isinstance(b, Indexed):
        return a.phi == b.phi.substitute({IOff(): I_OFF - s1.length})
    return False


def seg_merge(store, pc, fresh) -> tuple:
    """Merge adjacent segments with equal summaries until nothing changes."""
    segs = list(store)
    changed = True
    while changed:
        changed = False
        for x in range(len(segs)):
            for y in range(len(segs)):
                if x == y:
                    continue
                s1, s2 = segs[x], segs[y]
                if s1.base != s2.base or not same_summary(s1, s2):
                    continue
                if compare_exprs(s2.start, s1.end, pc) != MUST_EQUAL:
                    continue
                gen = fresh.gen() if isinstance(s1.summary, Unknown) else 0
                merged = Segment(s1.base, s1.start, s1.length + s2.length, s1.summary,
                                 gen, max(s1.stamp, s2.stamp))
                segs = [s for k, s in enumerate(segs) if k not in (x, y)]
                segs.insert(min(x, y), merged)
                changed = True
                break
            if changed:
                break
    return tuple(segs)


def add_range(store, seg: Segment, pc, fresh) -> tuple:
    """Install ``seg`` over existing segments of the same array.

    Existing segments inside the new range are dropped, disjoint ones kept, and
    the rest demoted to Unknown (the new segment's higher stamp wins on reads).
    """
    out = []
    for s in store:
        if s.base != seg.base:
            out.append(s)
            continue
        rel = range_relation(s, seg.start, seg.end, pc)
        if rel == INSIDE:
            continue
        if rel == OUTSIDE or isinstance(s.summary, Unknown):
            out.append(s)
        else:
            out.append(replace(s, summary=UNKNOWN, gen=fresh.gen()))
    out.append(seg)
    return tuple(out)


def denote(store, val) -> dict:
    """Concrete cell facts: ``(base, index) -> value`` or None for Unknown.

    ``val`` maps atoms to integers; later stamps override earlier ones.
    """
    out: dict = {}
    for s in sorted(store, key=lambda s: s.stamp):
        try:
            lo = s.start.evaluate(val)
            n = s.length.evaluate(val)
        except (KeyError, LookupError) as e:
            raise NonConcretizable(repr(s)) from e
        for k in range(lo, lo + max(n, 0)):
            if isinstance(s.summary, Indexed):
                out[(s.base, k)] = s.summary.phi.evaluate(
                    lambda a, k=k: (k - lo) if isinstance(a, IOff) else val(a))
            else:
                out[(s.base, k)] = None
    return out
