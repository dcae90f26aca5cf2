"""Systematic contract mutations, used to show the validator is not vacuous.

Each mutant carries a family name.  Families in ``MUST_DETECT`` change the
contract in a way no correct validator may accept on a domain that reaches
every path; the others can produce equivalent mutants (e.g. negating a
conjunct that is implied by the rest) and are only counted.
"""

from __future__ import annotations

from dataclasses import replace

from .contracts import AssignsRange, Contract
from .symcore import And, Cmp, Quant, ResultAtom, SymExpr, V, mk_and, negate

NEGATE_DISJUNCT = "negated-disjunct"
NEGATE_CONJUNCT = "negated-conjunct"
RESULT_SHIFT = "result-off-by-k"
RELOP = "relational-operator"
RANGE_SHIFT = "quantifier-range-off-by-one"
CONST_SHIFT = "comparison-off-by-one"
ASSIGNS_DROP = "dropped-assigns-range"
ASSIGNS_SHRINK = "shrunk-assigns-range"
LOOP_NEGATE = "negated-loop-invariant"

MUST_DETECT = {NEGATE_DISJUNCT, RESULT_SHIFT, ASSIGNS_DROP}

# replacements that strengthen or change an equality/inequality (never weaken it)
_STRONGER = {"==": ("<", ">", "!="), "<=": ("<", ">", "=="), ">=": (">", "<", "=="),
             "<": (">=", "=="), ">": ("<=", "=="), "!=": ("==",)}


def _peel(f):
    """Split an unbounded-existential prefix from ``f``: (rewrap, conjunct list)."""
    binders = []
    while isinstance(f, Quant) and f.lo is None:
        binders.append(f)
        f = f.body
    items = list(f.items) if isinstance(f, And) else [f]

    def rewrap(new_items):
        g = mk_and(new_items) if len(new_items) != 1 else new_items[0]
        for q in reversed(binders):
            g = Quant(q.q, q.var, None, None, g, q.incl)
        return g
    return rewrap, items


def _is_result_eq(f) -> bool:
    return (isinstance(f, Cmp) and f.op == "=="
            and f.lhs == V(ResultAtom()) and not f.rhs.mentions(lambda a: a == ResultAtom()))


def _cmp_site(f):
    """The comparison of a plain or single-quantifier conjunct, with a rebuilder."""
    if isinstance(f, Cmp):
        return f, lambda g: g
    if isinstance(f, Quant) and isinstance(f.body, Cmp):
        return f.body, lambda g: Quant(f.q, f.var, f.lo, f.hi, g, f.incl)
    return None, None


def _post_mutants(c: Contract):
    for i, d in enumerate(c.post):
        def with_disjunct(g, i=i):
            return replace(c, post=c.post[:i] + [g] + c.post[i + 1:])
        yield NEGATE_DISJUNCT, f"disjunct {i} negated", with_disjunct(negate(d))
        rewrap, items = _peel(d)
        for j, f in enumerate(items):
            def with_item(g, j=j):
                return with_disjunct(rewrap(items[:j] + [g] + items[j + 1:]))
            yield NEGATE_CONJUNCT, f"disjunct {i} conjunct {j} negated", with_item(negate(f))
            if _is_result_eq(f):
                for k in (1, -1, 2, -2, 3, -3):
                    yield (RESULT_SHIFT, f"disjunct {i}: result shifted by {k}",
                           with_item(Cmp(f.lhs, "==", f.rhs + k)))
            if isinstance(f, Cmp):
                for op in _STRONGER[f.op]:
                    yield (RELOP, f"disjunct {i} conjunct {j}: {f.op} -> {op}",
                           with_item(Cmp(f.lhs, op, f.rhs)))
            cmp, rebuild = _cmp_site(f)
            if cmp is not None and not _is_result_eq(f):
                for k in (1, -1):
                    yield (CONST_SHIFT, f"disjunct {i} conjunct {j}: constant shifted by {k}",
                           with_item(rebuild(Cmp(cmp.lhs, cmp.op, cmp.rhs + k))))
            if isinstance(f, Quant) and f.lo is not None:
                if f.q == "forall":
                    widen = [(f.lo - 1, f.hi), (f.lo, f.hi + 1)]
                else:
                    widen = [(f.lo + 1, f.hi), (f.lo, f.hi - 1)]
                for lo, hi in widen:
                    yield (RANGE_SHIFT, f"disjunct {i} conjunct {j}: range shifted",
                           with_item(Quant(f.q, f.var, lo, hi, f.body, f.incl)))


def _assigns_mutants(c: Contract):
    for i, r in enumerate(c.assigns):
        rest = c.assigns[:i] + c.assigns[i + 1:]
        yield ASSIGNS_DROP, f"assigns range {i} dropped", replace(c, assigns=rest)
        for lo, hi in ((r.start + 1, r.end), (r.start, r.end - 1)):
            yield (ASSIGNS_SHRINK, f"assigns range {i} shrunk",
                   replace(c, assigns=rest + [AssignsRange(r.array, SymExpr.lift(lo), SymExpr.lift(hi))]))


def _loop_mutants(c: Contract):
    for b, lb in enumerate(c.loops):
        for j, f in enumerate(lb.formulas):
            forms = lb.formulas[:j] + [negate(f)] + lb.formulas[j + 1:]
            texts = lb.invariants[:j] + [f"!({lb.invariants[j]})"] + lb.invariants[j + 1:]
            loops = c.loops[:b] + [replace(lb, formulas=forms, invariants=texts)] + c.loops[b + 1:]
            yield LOOP_NEGATE, f"loop {b} invariant {j} negated", replace(c, loops=loops)


def mutants(c: Contract) -> list[tuple[str, str, Contract]]:
    """All mutants of ``c`` as (family, description, mutated contract)."""
    return list(_post_mutants(c)) + list(_assigns_mutants(c)) + list(_loop_mutants(c))
