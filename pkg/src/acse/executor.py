"""Statement-ordered symbolic execution over the lowered IR.

Paths advance together statement by statement; a conditional runs each
feasible branch to its join point before the next statement is processed.
Loops are handed to :mod:`acse.loopanalysis`, which returns the post-loop paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import frontend as F
from . import ir
from .segments import Indexed, Unknown, seg_merge, seg_write
from .symcore import (
    ENTRY, FALSE, HAVOC, INFEASIBLE, LENGTH, MUST_EQUAL, UNKNOWN, Cmp, Fresh,
    OpaqueRead, SymAddr, SymExpr, SymbolicState, TRUE, V, compare_exprs,
    conj, eval_expr, implies, negate, prune_infeasible,
)
from .symcore.formula import mk_and, mk_or
from .segments import INSIDE, OUTSIDE, containment, inside_formula

DEFAULT_BUDGET = 64


class PathExplosion(Exception):
    def __init__(self, count: int):
        super().__init__(f"path budget exceeded ({count} live paths)")
        self.count = count


class EmptyConfiguration(Exception):
    pass


@dataclass(frozen=True)
class Path:
    pid: int
    state: SymbolicState
    segs: tuple
    pc: tuple
    assigned: tuple = ()  # ("cell", SymAddr) | ("range", base, lo, hi)
    returned: bool = False
    result: SymExpr | None = None
    broke: bool = False

    @property
    def done(self) -> bool:
        return self.returned or self.broke


@dataclass
class Context:
    fd: F.FunctionDef
    body: object
    fresh: Fresh
    entry: dict  # scalar param -> SymVal
    lengths: dict  # array param -> SymVal
    arrays: set
    assigned_names: set
    plugins: tuple
    budget: int = DEFAULT_BUDGET
    annotations: dict = field(default_factory=dict)  # loop id -> list of LoopAnnotation
    next_pid: int = 0
    pre_formula: object = TRUE
    pre_items: tuple = ()

    def pid(self) -> int:
        self.next_pid += 1
        return self.next_pid


# ---------------------------------------------------------------- reads

def resolve_read(ctx: Context, path: Path, a: SymAddr, facts: list) -> SymExpr:
    """Value of cell ``a``: memory keys first, then segments, then the entry value."""
    mem, pc = path.state.mem, path.pc
    aliased = False
    for k, v in mem.items():
        if k.base != a.base or not isinstance(v, SymExpr):
            continue
        rel = compare_exprs(k.offset, a.offset, pc)
        if rel == MUST_EQUAL:
            return v
        if rel == UNKNOWN:
            aliased = True
    if aliased:
        return V(ctx.fresh.val(HAVOC, a.base))
    cands = [s for s in path.segs if s.base == a.base]
    if cands:
        where = {id(s): containment(s, a.offset, pc) for s in cands}
        live = [s for s in cands if where[id(s)] != OUTSIDE]
        sure = [s for s in live if where[id(s)] == INSIDE]
        if sure:
            top = max(sure, key=lambda s: s.stamp)
            if all(s.stamp <= top.stamp for s in live):
                if isinstance(top.summary, Indexed):
                    return top.value_at(a.offset)
                if isinstance(top.summary, Unknown):
                    return V(OpaqueRead(a.base, a.offset, top.gen))
                return V(ctx.fresh.val(HAVOC, a.base))
        if live:
            h = V(ctx.fresh.val(HAVOC, a.base))
            if all(isinstance(s.summary, Indexed) for s in live):
                alts = [mk_and((inside_formula(s, a.offset), Cmp(h, "==", s.value_at(a.offset))))
                        for s in live]
                if not implies(pc, mk_or(inside_formula(s, a.offset) for s in live)):
                    # outside every segment the cell still holds its entry value
                    alts.append(mk_and([negate(inside_formula(s, a.offset)) for s in live]
                                       + [Cmp(h, "==", V(OpaqueRead(a.base, a.offset, 0)))]))
                facts.append(mk_or(alts))
            return h
    return V(OpaqueRead(a.base, a.offset, 0))


class Reader:
    def __init__(self, ctx: Context, path: Path):
        self.ctx, self.path, self.facts = ctx, path, []

    def __call__(self, a: SymAddr) -> SymExpr:
        return resolve_read(self.ctx, self.path, a, self.facts)


def eval_in(ctx: Context, path: Path, g):
    r = Reader(ctx, path)
    return eval_expr(g, path.state, r), r.facts


def cond_formula(ctx: Context, path: Path, c):
    """Formula for an IR condition in ``path``'s state, plus read facts."""
    r = Reader(ctx, path)

    def go(c):
        if isinstance(c, ir.ICmp):
            return Cmp(eval_expr(c.lhs, path.state, r), c.op, eval_expr(c.rhs, path.state, r))
        if isinstance(c, ir.INot):
            return negate(go(c.arg))
        if isinstance(c, ir.IAnd):
            return mk_and((go(c.lhs), go(c.rhs)))
        if isinstance(c, ir.IOr):
            return mk_or((go(c.lhs), go(c.rhs)))
        if isinstance(c, ir.IBool):
            return TRUE if c.value else FALSE
        raise TypeError(c)
    f = go(c)
    return f, r.facts


# ---------------------------------------------------------------- transfer

def set_var(path: Path, name: str, value) -> Path:
    a = path.state.addr.get(name) or SymAddr(name, 0)
    st = path.state.with_mem({a: value})
    if name not in path.state.addr:
        st = SymbolicState(st.mem, {**path.state.addr, name: a})
    return replace(path, state=st)


def write_cell(ctx: Context, path: Path, a: SymAddr, value: SymExpr) -> Path:
    updates, drop = {}, []
    for k, v in path.state.mem.items():
        if k.base != a.base or k == a:
            continue
        rel = compare_exprs(k.offset, a.offset, path.pc)
        if rel == MUST_EQUAL:
            drop.append(k)
        elif rel == UNKNOWN:
            updates[k] = V(ctx.fresh.val(HAVOC, a.base))
    updates[a] = value
    st = path.state.with_mem(updates, drop)
    segs = seg_merge(seg_write(path.segs, a.base, a.offset, path.pc, ctx.fresh), path.pc, ctx.fresh)
    return replace(path, state=st, segs=segs, assigned=path.assigned + (("cell", a),))


def exec_simple(ctx: Context, s, path: Path) -> Path:
    if isinstance(s, ir.Assign):
        v, facts = eval_in(ctx, path, s.expr)
        path = replace(path, pc=conj(path.pc, *facts))
        return set_var(path, s.name, v)
    if isinstance(s, ir.AddrOf):
        off, facts = eval_in(ctx, path, s.offset)
        path = replace(path, pc=conj(path.pc, *facts))
        return set_var(path, s.name, SymAddr(s.array, off))
    if isinstance(s, ir.Write):
        target = path.state.lookup(s.addr)
        v, facts = eval_in(ctx, path, s.expr)
        path = replace(path, pc=conj(path.pc, *facts))
        return write_cell(ctx, path, target, v)
    raise TypeError(s)


def run_prelude(ctx: Context, path: Path, prelude) -> Path:
    for s in prelude:
        path = exec_simple(ctx, s, path)
    return path


def branch(ctx: Context, path: Path, prelude, cond):
    """Split ``path`` on ``cond``: (then-path or None, else-path or None)."""
    path = run_prelude(ctx, path, prelude)
    f, facts = cond_formula(ctx, path, cond)
    base = conj(path.pc, *facts)
    out = []
    for g in (f, negate(f)):
        pc = conj(base, g)
        out.append(None if prune_infeasible(pc) == INFEASIBLE else replace(path, pc=pc))
    return out[0], out[1]


def exec_stmt(ctx: Context, s, path: Path) -> list[Path]:
    if isinstance(s, (ir.Assign, ir.AddrOf, ir.Write)):
        return [exec_simple(ctx, s, path)]
    if isinstance(s, ir.Skip):
        return [path]
    if isinstance(s, ir.Seq):
        return exec_block(ctx, list(s.items), [path])
    if isinstance(s, ir.Return):
        if s.expr is None:
            return [replace(path, returned=True)]
        v, facts = eval_in(ctx, path, s.expr)
        return [replace(path, pc=conj(path.pc, *facts), returned=True, result=v)]
    if isinstance(s, ir.Break):
        return [replace(path, broke=True)]
    if isinstance(s, ir.If):
        t, e = branch(ctx, path, s.prelude, s.cond)
        out = []
        if t is not None:
            out += exec_block(ctx, ir.stmts(s.then), [t])
        if e is not None:
            e = replace(e, pid=ctx.pid()) if t is not None else e
            out += exec_block(ctx, ir.stmts(s.els), [e])
        return out
    if isinstance(s, ir.While):
        from .loopanalysis import analyze_loop
        return analyze_loop(ctx, s, path)
    raise F.UnsupportedConstruct("IrStatement", 0, type(s).__name__)


def exec_block(ctx: Context, items: list, paths: list[Path]) -> list[Path]:
    for s in items:
        nxt = []
        for p in paths:
            if p.done:
                nxt.append(p)
            else:
                nxt.extend(exec_stmt(ctx, s, p))
        if len(nxt) > ctx.budget:
            raise PathExplosion(len(nxt))
        paths = nxt
    return paths


# ---------------------------------------------------------------- setup and run

def strip_valid(c):
    """Drop ``\\valid`` atoms, which carry no arithmetic content symbolically."""
    if c is None:
        return None
    if isinstance(c, F.Valid):
        return F.BoolLit(True)
    if isinstance(c, F.And):
        return F.And(strip_valid(c.lhs), strip_valid(c.rhs))
    if isinstance(c, F.Or):
        return F.Or(strip_valid(c.lhs), strip_valid(c.rhs))
    if isinstance(c, F.Not):
        return F.Not(strip_valid(c.arg))
    return c


def init_state(fd: F.FunctionDef, pre=None, plugins=None, budget=DEFAULT_BUDGET,
               body=None) -> tuple[Context, Path]:
    """Initial context and path: fresh entry symbols for parameters, ``pre`` in the pc."""
    from .loopanalysis import DEFAULT_PLUGINS
    fresh = Fresh()
    entry, lengths, addr, mem = {}, {}, {}, {}
    for p, kind in fd.params:
        if kind == F.ARRAY:
            lengths[p] = fresh.val(LENGTH, p)
            addr[p] = SymAddr(p, 0)
        else:
            entry[p] = fresh.val(ENTRY, p)
            addr[p] = SymAddr(p, 0)
            mem[addr[p]] = V(entry[p])
    if body is None:
        body = ir.lower(fd)
    ctx = Context(fd, body, fresh, entry, lengths, set(fd.arrays()),
                  F.assigned_vars(fd.body), tuple(plugins or DEFAULT_PLUGINS), budget)
    path = Path(ctx.pid(), SymbolicState(mem, addr), (), ())
    pre = fd.declared_pre if pre is None else pre
    if pre is not None:
        f, facts = cond_formula(ctx, path, ir.lower_condition(strip_valid(pre)))
        ctx.pre_formula = f
        pc = conj((), f, *facts, *_valid_facts(ctx, path, pre))
        ctx.pre_items = pc
        path = replace(path, pc=pc)
    return ctx, path


def _valid_facts(ctx: Context, path: Path, pre) -> list:
    """Length bounds from the top-level ``\\valid`` conjuncts of ``pre``."""
    out, todo = [], [pre]
    while todo:
        c = todo.pop()
        if isinstance(c, F.And):
            todo += [c.lhs, c.rhs]
        elif isinstance(c, F.Valid) and c.array in ctx.lengths:
            lo, _ = eval_in(ctx, path, ir.lower_pure(c.lo))
            hi, _ = eval_in(ctx, path, ir.lower_pure(c.hi))
            size = V(ctx.lengths[c.array])
            out.append(mk_or((Cmp(lo, ">", hi),
                              mk_and((Cmp(lo, ">=", SymExpr(0)), Cmp(hi, "<", size))))))
    return out


def run(fd: F.FunctionDef, pre=None, plugins=None, budget=DEFAULT_BUDGET, funcs=None):
    """Execute ``fd`` symbolically; returns (context, final paths).

    ``fd`` must already be validated; calls are inlined when ``funcs`` is given.
    """
    if funcs is not None:
        fd = F.prepare(fd, funcs)
    ctx, p0 = init_state(fd, pre, plugins, budget)
    if prune_infeasible(p0.pc) == INFEASIBLE:
        raise EmptyConfiguration("precondition is contradictory")
    paths = exec_block(ctx, ir.stmts(ctx.body), [p0])
    final = [p for p in paths if prune_infeasible(p.pc) != INFEASIBLE]
    if not final:
        raise EmptyConfiguration("all paths pruned")
    return ctx, final


def dump_paths(paths) -> str:
    from .segments import dump
    out = []
    for p in paths:
        out.append(f"path {p.pid}:")
        out.append("  pc: " + " && ".join(repr(f) for f in p.pc))
        if p.result is not None:
            out.append(f"  result: {p.result!r}")
        for line in dump(p.segs).splitlines():
            out.append("  seg " + line)
        for a in p.assigned:
            out.append("  assigns " + (repr(a[1]) if a[0] == "cell"
                                       else f"{a[1]}[{a[2]!r} .. {a[3]!r})"))
    return "\n".join(out)
