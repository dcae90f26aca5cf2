"""Loop summarization: from loop information and plugin output to post-loop paths."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .. import ir
from ..executor import Context, Path, cond_formula, run_prelude, write_cell
from ..segments import INSIDE, OUTSIDE, Segment, UNKNOWN, Indexed, add_range, range_relation, seg_merge
from ..symcore import (
    EXIT, HAVOC, INFEASIBLE, ITER, Cell, Cmp, Or, SymAddr, SymExpr,
    SymbolicState, V, conj, formula_atoms, mk_and, negate, prune_infeasible,
    substitute,
)
from .info import LoopInfo, NonTerminating, extract_loop_info
from .plugins import (
    ASSIGNS, BREAK, HEAD, INVARIANT, NORMAL, RETURN, Clause, ExitSpec, registry,
)


@dataclass(frozen=True)
class LoopAnnotation:
    loop_id: int
    line: int
    origin: str | None
    clauses: tuple
    written: tuple = ()
    pos: int = 0


# ---------------------------------------------------------------- substitution on paths

def _sub_val(v, m):
    if isinstance(v, SymExpr):
        return v.substitute(m)
    if isinstance(v, SymAddr):
        return SymAddr(v.base, v.offset.substitute(m))
    return v


def _sub_seg(s: Segment, m) -> Segment:
    summ = s.summary
    if isinstance(summ, Indexed):
        summ = Indexed(summ.phi.substitute(m))
    return replace(s, start=s.start.substitute(m), length=s.length.substitute(m), summary=summ)


def _sub_assigned(ent, m):
    if ent[0] == "cell":
        return ("cell", _sub_val(ent[1], m))
    return ("range", ent[1], ent[2].substitute(m), ent[3].substitute(m))


def sub_path(p: Path, m: dict) -> Path:
    if not m:
        return p
    mem = {_sub_val(k, m): _sub_val(v, m) for k, v in p.state.mem.items()}
    return replace(
        p,
        state=SymbolicState(mem, p.state.addr),
        segs=tuple(_sub_seg(s, m) for s in p.segs),
        pc=conj((), *(substitute(f, m) for f in p.pc)),
        assigned=tuple(_sub_assigned(e, m) for e in p.assigned),
        result=_sub_val(p.result, m),
    )


# ---------------------------------------------------------------- exits

def _exits(info: LoopInfo) -> list[ExitSpec]:
    fresh = info.ctx.fresh
    exits = []
    if info.recognized:
        s, i0 = info.step, info.i0
        pc0 = info.pre.pc
        if info.a * s == 1 and _entails(pc0, Cmp(info.L(i0), "<=", 1)):
            ie = (-info.r + 1) * info.a
            ex = ExitSpec(NORMAL, None, ie, (ie - i0) * s)
        else:
            n = V(fresh.val(ITER, "k", info.loop_id))
            ie = i0 + n * s
            ex = ExitSpec(NORMAL, None, ie, n, facts=[
                Cmp(n, ">=", 0), Cmp(info.L(ie), ">=", 1),
                Or((Cmp(n, "==", 0), Cmp(info.L(ie - s), "<=", 0)))])
        exits.append(ex)
        sites = [(BREAK, p) for p in info.brk] + [(RETURN, p) for p in info.rets]
        if info.head_conj:
            gl = Cmp(info.L(info.hi), "<=", 0)
            hp = replace(info.head, pc=conj(info.head.pc, gl, negate(mk_and(info.head_conj))))
            sites.append((HEAD, hp))
        for kind, p in sites:
            if abs(s) == 1:
                ib = V(fresh.val(EXIT, info.iterator, info.loop_id))
                kb = (ib - i0) * s
                facts = [Cmp(kb, ">=", 0)]
            else:
                mb = V(fresh.val(ITER, "k", info.loop_id))
                ib, kb = i0 + mb * s, mb
                facts = [Cmp(mb, ">=", 0)]
            exits.append(ExitSpec(kind, p, ib, kb, facts=facts))
        for ex in exits:
            ex.sigma[info.head_syms[info.iterator]] = ex.ie
    else:
        hp = replace(info.head, pc=conj(info.head.pc, negate(info.guard)))
        exits.append(ExitSpec(NORMAL, hp))
        exits += [ExitSpec(BREAK, p) for p in info.brk]
        exits += [ExitSpec(RETURN, p) for p in info.rets]
    return exits


def _entails(pc, f) -> bool:
    from ..symcore import implies
    return implies(pc, f)


def _has_cell(f) -> bool:
    return any(isinstance(a, Cell) for a in formula_atoms(f))


def _apply_ranges(ctx: Context, info: LoopInfo, path: Path, ex: ExitSpec) -> Path:
    """Install the written ranges of each array on the pre-loop array state."""
    mem = dict(path.state.mem)
    segs = path.segs
    assigned = list(path.assigned)
    pc = path.pc
    for base in info.warrays:
        rs = ex.ranges.get(base, [])
        for k in [k for k in mem if k.base == base]:
            rels = [range_relation(Segment(base, k.offset, SymExpr(1), UNKNOWN), lo, hi, pc)
                    for lo, hi in rs]
            if any(r == INSIDE for r in rels):
                del mem[k]
            elif not all(r == OUTSIDE for r in rels):
                mem[k] = V(ctx.fresh.val(HAVOC, base))
        for lo, hi in rs:
            summ = ex.indexed.get(base, UNKNOWN) if len(rs) == 1 else UNKNOWN
            seg = Segment(base, lo, hi - lo, summ,
                          0 if isinstance(summ, Indexed) else info.head_gen[base],
                          ctx.fresh.gen())
            segs = add_range(segs, seg, pc, ctx.fresh)
            assigned.append(("range", base, lo, hi))
    return replace(path, state=SymbolicState(mem, path.state.addr), segs=segs,
                   assigned=tuple(assigned))


def _build(info: LoopInfo, ex: ExitSpec, invariants: list, pid: int) -> Path:
    ctx = info.ctx
    sig = dict(ex.sigma)
    for x, h in info.head_syms.items():
        if h not in sig:
            sig[h] = V(ctx.fresh.val(EXIT, x, info.loop_id))
    inst = [substitute(c.formula, sig) for c in invariants if not _has_cell(c.formula)]
    facts = [substitute(f, sig) for f in ex.facts]
    if not info.recognized:
        p = sub_path(ex.path, sig)
        p = replace(p, pc=conj(p.pc, *facts, *inst))
        assigned = list(p.assigned)
        for base in info.warrays:
            assigned.append(("range", base, SymExpr(0), V(ctx.lengths[base])))
        return replace(p, pid=pid, assigned=tuple(assigned))
    src = ex.path if ex.path is not None else info.head
    src = sub_path(src, sig)
    p = info.pre
    for name, a in src.state.addr.items():
        if name in ctx.arrays:
            continue
        if name not in p.state.addr or src.state.mem.get(a) != p.state.mem.get(p.state.addr[name]):
            v = src.state.mem.get(a)
            if v is not None:
                p = _set(p, name, a, v)
    p = replace(p, pc=conj(src.pc, *facts, *inst), result=src.result,
                returned=src.returned)
    p = _apply_ranges(ctx, info, p, ex)
    if ex.path is not None:
        for ent in src.assigned[len(info.body_start.assigned):]:
            if ent[0] == "cell" and ent[1].base in info.warrays:
                v = src.state.mem.get(ent[1])
                if v is not None:  # None: superseded by a later write to the same cell
                    p = write_cell(ctx, p, ent[1], v)
    return replace(p, pid=pid)


def _set(p: Path, name, a, v) -> Path:
    st = p.state.with_mem({a: v})
    if name not in p.state.addr:
        st = SymbolicState(st.mem, {**p.state.addr, name: a})
    return replace(p, state=st)


# ---------------------------------------------------------------- entry point

def analyze_loop(ctx: Context, W: ir.While, P: Path) -> list[Path]:
    q = run_prelude(ctx, P, W.prelude)
    f, facts = cond_formula(ctx, q, W.cond)
    entered = prune_infeasible(conj(q.pc, *facts, f)) != INFEASIBLE
    info = extract_loop_info(ctx, W, P)
    if not entered or prune_infeasible(info.body_start.pc) == INFEASIBLE:
        # the guard fails on entry: the loop is skipped
        _record(ctx, info, [Clause(ASSIGNS, None, (), tuple(info.written), "assigns")])
        return [replace(q, pc=conj(q.pc, *facts, negate(f)))]
    if (not info.brk and not info.rets
            and prune_infeasible(conj(info.head.pc, negate(info.guard))) == INFEASIBLE):
        raise NonTerminating(W.line)

    exits = _exits(info)
    clauses: list = []
    plugins = registry(ctx.plugins)
    principal = None
    for pl in sorted((p for p in plugins if p.path_sensitive), key=lambda p: -p.priority):
        if pl.applies(info):
            principal = pl
            break
    if principal is not None:
        principal.run(info, exits, clauses)
    for pl in plugins:
        if not pl.path_sensitive and pl.applies(info):
            pl.run(info, exits, clauses)
    invariants = [c for c in clauses if c.kind == INVARIANT]
    _record(ctx, info, clauses)

    out = []
    for n, ex in enumerate(exits):
        pid = P.pid if n == 0 else ctx.pid()
        p = _build(info, ex, invariants, pid)
        p = sub_path(p, info.back)
        p = replace(p, segs=seg_merge(p.segs, p.pc, ctx.fresh),
                    broke=False)
        if prune_infeasible(p.pc) != INFEASIBLE:
            out.append(p)
    return out


def _record(ctx: Context, info: LoopInfo, clauses: list):
    ann = LoopAnnotation(info.loop_id, info.stmt.line, info.stmt.origin, tuple(clauses),
                         tuple(info.written), info.stmt.pos)
    ctx.annotations.setdefault(info.loop_id, []).append(ann)
