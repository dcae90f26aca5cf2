"""Structural loop information from one symbolic pass over the body.

The body is executed once from a generic iteration state in which every
scalar written by the loop holds a fresh loop-head symbol and every written
array is a single Unknown segment.  The resulting continuing, break and return
paths are inspected for an induction iterator, an affine guard and the write
patterns of each array.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .. import ir
from ..executor import (
    Context, Path, cond_formula, exec_block, run_prelude, set_var,
)
from ..segments import Segment, UNKNOWN
from ..symcore import (
    AUX_KINDS, INFEASIBLE, LE, LOOPENTRY, LOOPHEAD, NE, And, Cmp, OpaqueRead,
    SymExpr, SymVal, V, conj, implies, prune_infeasible,
)
from ..symcore.formula import fkey


class NonTerminating(Exception):
    def __init__(self, line: int):
        super().__init__(f"loop at line {line} has no exit")
        self.line = line


def user_scalar(name: str) -> bool:
    return not name.startswith("_")


@dataclass
class LoopInfo:
    ctx: Context
    stmt: ir.While
    pre: Path  # incoming path, loop-entry symbols installed
    head: Path  # generic head state after the guard prelude
    guard: object  # formula at the head
    body_start: Path
    cont: list
    brk: list
    rets: list
    head_syms: dict  # user scalar -> loop-head SymVal
    entry_vals: dict  # user scalar -> value at loop entry (or None)
    written: list  # user scalars written in the loop, sorted
    warrays: list  # arrays written in the loop, sorted
    head_gen: dict  # array -> generation of its head-state Unknown segment
    t0: int = 0
    g0: int = 0
    back: dict = field(default_factory=dict)  # loop-entry symbol -> entry value
    # iterator data (None when unrecognized)
    iterator: str | None = None
    step: int = 0
    a: int = 0  # guard conjunct a*i + r <= 0
    r: SymExpr | None = None
    head_conj: list = field(default_factory=list)
    reason: str = ""

    @property
    def loop_id(self) -> int:
        return self.stmt.loop_id

    @property
    def recognized(self) -> bool:
        return self.iterator is not None

    @property
    def hi(self) -> SymExpr:
        return V(self.head_syms[self.iterator])

    @property
    def i0(self) -> SymExpr:
        return self.entry_vals[self.iterator]

    def L(self, x: SymExpr) -> SymExpr:
        return x * self.a + self.r

    @property
    def bound(self) -> SymExpr | None:
        """Last iterator value admitted by the guard (unit coefficient only)."""
        if abs(self.a) != 1:
            return None
        return -self.r * self.a

    def is_invariant(self, e: SymExpr) -> bool:
        for at in e.all_atoms():
            if isinstance(at, SymVal) and at.id > self.t0:
                return False
            if isinstance(at, OpaqueRead) and at.gen > self.g0:
                return False
        return True

    def formula_invariant(self, f) -> bool:
        from ..symcore import formula_atoms
        return self.is_invariant(_atoms_expr(formula_atoms(f)))

    def value(self, path: Path, name: str):
        a = path.state.addr.get(name)
        return None if a is None else path.state.mem.get(a)

    def extras(self, path: Path) -> list:
        """Conjuncts a body-pass path added beyond the loop's starting condition."""
        seen = {fkey(f) for f in self.body_start.pc}
        return [f for f in path.pc if fkey(f) not in seen]


def _atoms_expr(atoms) -> SymExpr:
    return SymExpr(0, [(a, 1) for a in atoms])


def _mentions_aux(v) -> bool:
    return isinstance(v, SymExpr) and v.mentions(
        lambda a: isinstance(a, SymVal) and a.kind in AUX_KINDS)


def extract_loop_info(ctx: Context, W: ir.While, P: Path) -> LoopInfo:
    fresh = ctx.fresh
    lid = W.loop_id
    body_all = ir.Seq(tuple(W.prelude) + (W.body,))
    written = sorted(n for n in ir.written_vars(body_all) if user_scalar(n))
    warrays = sorted(ir.written_arrays(W.body))

    # loop-entry symbols for entry values that are not source-expressible
    back = {}
    pre = P
    for x in written:
        a = P.state.addr.get(x)
        v = P.state.mem.get(a) if a is not None else None
        if _mentions_aux(v):
            le = fresh.val(LOOPENTRY, x, lid)
            back[le] = v
            pre = set_var(pre, x, V(le))
            pre = replace(pre, pc=conj(pre.pc, Cmp(V(le), "==", v)))
    entry_vals = {}
    for x in written:
        a = pre.state.addr.get(x)
        v = pre.state.mem.get(a) if a is not None else None
        entry_vals[x] = v if isinstance(v, SymExpr) else None

    t0, g0 = fresh._next, fresh._gen
    head = pre
    head_syms = {}
    for x in written:
        h = fresh.val(LOOPHEAD, x, lid)
        head_syms[x] = h
        head = set_var(head, x, V(h))
    head_gen = {}
    if warrays:
        mem = {k: v for k, v in head.state.mem.items() if k.base not in warrays}
        segs = [s for s in head.segs if s.base not in warrays]
        for arr in warrays:
            g = fresh.gen()
            head_gen[arr] = g
            segs.append(Segment(arr, SymExpr(0), V(ctx.lengths[arr]), UNKNOWN, g, g))
        head = replace(head, state=type(head.state)(mem, head.state.addr), segs=tuple(segs))

    head = run_prelude(ctx, head, W.prelude)
    guard, facts = cond_formula(ctx, head, W.cond)
    head = replace(head, pc=conj(head.pc, *facts))
    body_start = replace(head, pc=conj(head.pc, guard))
    cont, brk, rets = [], [], []
    if prune_infeasible(body_start.pc) != INFEASIBLE:
        for p in exec_block(ctx, ir.stmts(W.body), [body_start]):
            if prune_infeasible(p.pc) == INFEASIBLE:
                continue
            (rets if p.returned else brk if p.broke else cont).append(p)
    info = LoopInfo(ctx, W, pre, head, guard, body_start, cont, brk, rets, head_syms,
                    entry_vals, written, warrays, head_gen, t0, g0, back)
    _find_iterator(info)
    return info


def _find_iterator(info: LoopInfo):
    if not info.cont:
        info.reason = "no continuing path"
        return
    gatoms = _guard_atoms(info.guard)
    cands = []
    for x in info.written:
        h = V(info.head_syms[x])
        steps = set()
        for p in info.cont:
            v = info.value(p, x)
            d = v - h if isinstance(v, SymExpr) else None
            if d is None or not d.is_const() or d.const == 0:
                break
            steps.add(d.const)
        else:
            if len(steps) == 1 and info.head_syms[x] in gatoms:
                cands.append((x, steps.pop()))
    found = []
    for x, s in cands:
        g = _guard_split(info, x, s)
        if g is not None:
            found.append((x, s, g))
    if len(found) != 1:
        info.reason = "no unique iterator" if found or not cands else "guard not affine"
        return
    x, s, (a, r, rest) = found[0]
    info.iterator, info.step, info.a, info.r, info.head_conj = x, s, a, r, rest


def _guard_atoms(g) -> set:
    from ..symcore import formula_atoms
    return formula_atoms(g)


def _guard_split(info: LoopInfo, x: str, s: int):
    """Find the affine conjunct ``a*x + r <= 0`` of the guard; returns (a, r, others)."""
    items = list(info.guard.items) if isinstance(info.guard, And) else [info.guard]
    h = info.head_syms[x]
    i0 = info.entry_vals.get(x)
    if i0 is None:
        return None
    for k, c in enumerate(items):
        if not isinstance(c, Cmp):
            continue
        n = c.norm()
        if isinstance(n, bool):
            continue
        kind, e = n
        a = e.coeff(h)
        if a == 0:
            continue
        rest = e - SymExpr.atom(h, a)
        if not info.is_invariant(rest) or rest.mentions(lambda t: t == h):
            continue
        if kind == LE:
            la, lr = a, rest
        elif kind == NE and abs(a) == 1 and abs(s) == 1:
            # x != n reached by unit steps from the right side
            n_ = -rest * a  # x == n_ makes the conjunct false
            if s == 1 and implies(info.pre.pc, Cmp(i0, "<=", n_)):
                la, lr = 1, -n_ + 1
            elif s == -1 and implies(info.pre.pc, Cmp(i0, ">=", n_)):
                la, lr = -1, n_ + 1
            else:
                continue
        else:
            continue
        if la * s <= 0:
            continue
        others = items[:k] + items[k + 1:]
        return la, lr, others
    return None
