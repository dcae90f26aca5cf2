"""Contract synthesis from the final symbolic configuration.

Each feasible final path becomes one postcondition disjunct.  Internal symbols
are eliminated through unit-coefficient equalities; the rest are bound by
existential quantifiers named after their source variable.  Conjuncts that
speak about intermediate array contents (reads of an overwritten generation)
have no source-level reading and are dropped; the number dropped is reported
as residuals so that callers can downgrade the result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import acsl
from . import frontend as F
from .executor import Context, EmptyConfiguration, Path
from .segments import IOff, Indexed
from .symcore import (
    AUX_KINDS, EQ, TRUE, BoundVar, Cell, Cmp, OpaqueRead, Quant, ResultAtom,
    SymExpr, SymVal, V, compare_exprs, fkey, formula_atoms, implies, mk_and,
    simplify, substitute, MUST_EQUAL,
)


class UnprojectableRange(Exception):
    pass


@dataclass(frozen=True)
class AssignsRange:
    """``array[start .. end)`` over entry symbols and array lengths."""
    array: str
    start: SymExpr
    end: SymExpr


@dataclass
class LoopBlock:
    loop_id: int
    line: int
    pos: int
    invariants: list  # rendered clause texts
    formulas: list  # matching formulas, for the oracle
    assigns: list  # rendered loop-assigns targets
    ranges: list  # (array, lo, hi) behind the array targets


@dataclass
class Contract:
    function: str
    params: tuple
    pre_text: str | None
    post: list  # one formula per final path
    assigns: list  # AssignsRange
    loops: list  # LoopBlock
    assigned_names: frozenset = frozenset()
    written_arrays: frozenset = frozenset()
    lengths: dict = field(default_factory=dict)  # array -> LENGTH symbol
    residuals: int = 0
    warnings: list = field(default_factory=list)
    start: int = 0
    annot_span: tuple | None = None

    def namer(self, mode=acsl.POST) -> acsl.Namer:
        return acsl.Namer(self.assigned_names, self.written_arrays, mode)

    def requires_text(self) -> list[str]:
        return [self.pre_text.strip()] if self.pre_text else ["\\true"]

    def post_text(self) -> str:
        nm = self.namer()
        parts = [acsl.render_formula(d, nm) for d in self.post]
        if len(parts) == 1:
            return parts[0]
        return "\n    || ".join(f"({p})" for p in parts)

    def assigns_text(self) -> list[str]:
        if not self.assigns:
            return ["\\nothing"]
        nm = self.namer()
        return [acsl.render_range(r.array, r.start, r.end, nm, V(self.lengths[r.array]))
                for r in self.assigns]

    def to_json(self) -> dict:
        nm = self.namer()
        return {
            "schema": 1,
            "function": self.function,
            "pre": self.requires_text()[0],
            "post_disjuncts": [acsl.render_formula(d, nm) for d in self.post],
            "assigns": [] if not self.assigns else self.assigns_text(),
            "loops": [{"line": lb.line, "invariants": lb.invariants, "assigns": lb.assigns}
                      for lb in self.loops],
            "residuals": self.residuals,
            "warnings": list(self.warnings),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


# ---------------------------------------------------------------- projection

def _is_aux(a) -> bool:
    return isinstance(a, SymVal) and a.kind in AUX_KINDS


def _stale(a) -> bool:
    return isinstance(a, OpaqueRead) and a.gen > 0


def _solve(f, avoid=()):
    """``(sym, solution)`` for an equality with a unit-coefficient aux symbol."""
    if not isinstance(f, Cmp):
        return None
    n = f.norm()
    if isinstance(n, bool) or n[0] != EQ:
        return None
    e = n[1]
    for a, c in e.terms:
        if abs(c) != 1 or not _is_aux(a) or a in avoid:
            continue
        rest = e - SymExpr.atom(a, c)
        if rest.mentions(lambda t: t == a):
            continue
        return a, rest * (-c)
    return None


def eliminate(items: list) -> tuple[list, dict]:
    """Substitute away aux symbols defined by equalities; returns (items, mapping)."""
    items = list(items)
    sub: dict = {}
    changed = True
    while changed:
        changed = False
        for idx, f in enumerate(items):
            sol = _solve(f)
            if sol is None:
                continue
            a, v = sol
            m = {a: v}
            sub = {k: x.substitute(m) for k, x in sub.items()}
            sub[a] = v
            items = [simplify(substitute(g, m)) for j, g in enumerate(items) if j != idx]
            items = [g for g in items if g != TRUE]
            changed = True
            break
    return items, sub


def _array_facts(ctx: Context, path: Path) -> list:
    out = []
    for k, v in path.state.mem.items():
        if k.base in ctx.arrays and isinstance(v, SymExpr):
            out.append(Cmp(V(Cell(k.base, k.offset)), "==", v))
    kv = BoundVar("k")
    for s in path.segs:
        if isinstance(s.summary, Indexed):
            val = s.summary.phi.substitute({IOff(): V(kv) - s.start})
            out.append(Quant("forall", kv, s.start, s.end, Cmp(V(Cell(s.base, V(kv))), "==", val)))
    return out


def _bound_names(f, acc: set):
    if isinstance(f, Quant):
        acc.add(f.var.name)
        _bound_names(f.body, acc)
    elif hasattr(f, "items"):
        for i in f.items:
            _bound_names(i, acc)


def project_path(ctx: Context, path: Path) -> tuple[object, int, dict]:
    """Source-level formula for ``path``: (formula, dropped conjuncts, elimination map)."""
    pre_keys = {fkey(f) for f in ctx.pre_items}
    items = [f for f in path.pc if fkey(f) not in pre_keys]
    if path.result is not None:
        items.append(Cmp(V(ResultAtom()), "==", path.result))
    items += _array_facts(ctx, path)
    items, sub = eliminate(items)
    kept = [f for f in items if not any(_stale(a) for a in formula_atoms(f))]
    dropped = len(items) - len(kept)
    body = mk_and(kept)
    aux = sorted({a for a in formula_atoms(body) if _is_aux(a)}, key=lambda a: a.id)
    if aux:
        used = set(ctx.fd.param_names) | set(F.assigned_vars(ctx.fd.body))
        _bound_names(body, used)
        ren = {}
        for a in aux:
            nm, j = a.name.lstrip("_") or "v", 1
            while nm in used:
                j += 1
                nm = f"{a.name.lstrip('_') or 'v'}{j}"
            used.add(nm)
            ren[a] = BoundVar(nm)
        body = substitute(body, {a: V(b) for a, b in ren.items()})
        for a in reversed(aux):
            body = Quant("exists", ren[a], None, None, body)
    return body, dropped, sub


# ---------------------------------------------------------------- assigns

def _path_ranges(ctx: Context, path: Path) -> list:
    rs = []
    for ent in path.assigned:
        if ent[0] == "cell":
            a = ent[1]
            if a.base in ctx.arrays:
                rs.append((a.base, a.offset, a.offset + 1))
        elif ent[1] in ctx.arrays:
            rs.append((ent[1], ent[2], ent[3]))
    pc = path.pc
    rs = [r for r in rs if not implies(pc, Cmp(r[2], "<=", r[1]))]
    changed = True
    while changed:
        changed = False
        for x in range(len(rs)):
            for y in range(len(rs)):
                if x == y or rs[x][0] != rs[y][0]:
                    continue
                (b, l1, h1), (_, l2, h2) = rs[x], rs[y]
                merged = None
                if l1 == l2 and h1 == h2 or implies(pc, mk_and((Cmp(l1, "<=", l2), Cmp(h2, "<=", h1)))):
                    merged = (b, l1, h1)
                elif compare_exprs(h1, l2, pc) == MUST_EQUAL:
                    merged = (b, l1, h2)
                elif implies(pc, mk_and((Cmp(l1, "<=", l2), Cmp(l2, "<=", h1), Cmp(h1, "<=", h2)))):
                    merged = (b, l1, h2)
                if merged is not None:
                    rs = [r for k, r in enumerate(rs) if k not in (x, y)] + [merged]
                    changed = True
                    break
            if changed:
                break
    return rs


def _source_only(e: SymExpr) -> bool:
    return not e.mentions(lambda a: _is_aux(a) or _stale(a) or isinstance(a, (OpaqueRead, Cell)))


def _candidates(ctx: Context, path: Path) -> list:
    out = [SymExpr(0)]
    for f in path.pc:
        if isinstance(f, Cmp):
            for side in (f.lhs, f.rhs):
                if _source_only(side):
                    out += [side, side + 1]
    return out


def _project_bound(ctx, path, e: SymExpr, sub: dict, lower: bool):
    e = e.substitute(sub)
    if _source_only(e):
        return e
    for c in _candidates(ctx, path):
        if implies(path.pc, Cmp(c, "<=", e) if lower else Cmp(e, "<=", c)):
            return c
    return None


def derive_assigns(ctx: Context, paths: list, subs: list) -> tuple[list, list]:
    """Merged array footprint over all paths; returns (ranges, warnings)."""
    out: list[AssignsRange] = []
    warnings = []
    for p, sub in zip(paths, subs):
        for base, lo, hi in _path_ranges(ctx, p):
            plo = _project_bound(ctx, p, lo, sub, True)
            phi = _project_bound(ctx, p, hi, sub, False)
            if plo is None or phi is None:
                warnings.append(f"assigns range of {base} widened to the whole array")
                plo, phi = SymExpr(0), V(ctx.lengths[base])
            r = AssignsRange(base, plo, phi)
            if r not in out:
                out.append(r)
    pre = ctx.pre_items
    keep = []
    for r in out:
        covered = any(o is not r and o.array == r.array and (o.start, o.end) != (r.start, r.end)
                      and implies(pre, mk_and((Cmp(o.start, "<=", r.start), Cmp(r.end, "<=", o.end))))
                      for o in out)
        if not covered:
            keep.append(r)
    return keep, warnings


# ---------------------------------------------------------------- loop blocks

def _loop_blocks(ctx: Context, warnings: list) -> list[LoopBlock]:
    fd = ctx.fd
    nm = acsl.Namer(F.assigned_vars(fd.body), _written_arrays(ctx), acsl.LOOP)
    blocks = []
    for lid in sorted(ctx.annotations):
        anns = [a for a in ctx.annotations[lid] if a.origin in ("", None, fd.name)]
        if not anns:
            continue
        per_path = []
        assigns, ranges, scalars = [], [], []
        for a in anns:
            texts = {}
            for c in a.clauses:
                if c.kind == "assigns":
                    for base, lo, hi in c.ranges:
                        try:
                            t = acsl.render_range(base, lo, hi, nm, V(ctx.lengths[base]))
                        except acsl.Unrenderable:
                            t = f"{base}[..]"
                            lo, hi = SymExpr(0), V(ctx.lengths[base])
                        if t not in assigns:
                            assigns.append(t)
                            ranges.append((base, lo, hi))
                    for x in c.scalars:
                        if x not in scalars:
                            scalars.append(x)
                    continue
                try:
                    texts.setdefault(acsl.render_formula(c.formula, nm), c.formula)
                except acsl.Unrenderable:
                    warnings.append(f"loop at line {a.line}: dropped a clause over internal symbols")
            per_path.append(texts)
        common = [t for t in per_path[0] if all(t in d for d in per_path[1:])]
        blocks.append(LoopBlock(lid, anns[0].line, anns[0].pos, common,
                                [per_path[0][t] for t in common],
                                scalars + assigns, ranges))
    return blocks


def _written_arrays(ctx: Context) -> set:
    out = set()
    for n in F.walk(ctx.fd.body):
        if isinstance(n, F.ArrAssign):
            out.add(n.array)
    return out


# ---------------------------------------------------------------- synthesis

def synthesize(ctx: Context, paths: list, pre_text: str | None = None) -> Contract:
    if not paths:
        raise EmptyConfiguration("no feasible final path")
    fd = ctx.fd
    post, subs, residuals = [], [], 0
    for p in paths:
        f, dropped, sub = project_path(ctx, p)
        post.append(f)
        subs.append(sub)
        residuals += dropped
    warnings = []
    assigns, w = derive_assigns(ctx, paths, subs)
    warnings += w
    loops = _loop_blocks(ctx, warnings)
    if pre_text is None:
        pre_text = fd.pre_text
    return Contract(fd.name, fd.params, pre_text, post, assigns, loops,
                    frozenset(F.assigned_vars(fd.body)), frozenset(_written_arrays(ctx)),
                    dict(ctx.lengths), residuals, warnings, fd.start, fd.annot_span)
