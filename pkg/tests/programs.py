"""Hypothesis strategies producing mini-C functions ``f(int a[], int x, int n)``."""

from __future__ import annotations

from hypothesis import strategies as st

from acse import frontend as F

PARAMS = (("a", F.ARRAY), ("x", F.INT), ("n", F.INT))
CMP_OPS = ["<=", "<", ">=", ">", "!=", "=="]


def _exprs(names):
    leaves = st.one_of(st.integers(0, 9).map(F.IntConst), st.sampled_from(names).map(F.Var),
                       st.sampled_from(names).map(lambda v: F.ArrayAccess("a", F.Var(v))))
    e1 = st.one_of(leaves, st.builds(F.BinOp, st.sampled_from("+-*"), leaves, leaves))
    e2 = st.one_of(e1, st.builds(F.BinOp, st.sampled_from("+-*"), e1, e1))
    return leaves, e1, e2


def _conds(e1):
    atoms = st.builds(F.Cmp, st.sampled_from(CMP_OPS), e1, e1)
    return st.one_of(atoms, st.builds(F.Not, atoms), st.builds(F.And, atoms, atoms),
                     st.builds(F.Or, atoms, atoms))


def _block(item, size=3):
    return st.lists(item, max_size=size).map(lambda xs: F.Seq(tuple(xs)))


LEAVES, EXPR1, EXPRS = _exprs(("x", "y", "n"))
CONDS = _conds(EXPR1)
INIT = _exprs(("x", "n"))[1]  # y is not yet in scope
SIMPLE = st.one_of(st.builds(F.VarAssign, st.sampled_from(("x", "y")), EXPRS),
                   st.builds(F.ArrAssign, st.just("a"), EXPR1, EXPRS))
BLOCK0 = _block(SIMPLE)
BLOCK1 = _block(st.one_of(SIMPLE, st.builds(F.If, CONDS, BLOCK0, BLOCK0)))
BLOCK2 = _block(st.one_of(SIMPLE, st.builds(F.If, CONDS, BLOCK1, BLOCK1)))


def function(items) -> F.FunctionDef:
    return F.FunctionDef("f", PARAMS, F.Seq(tuple(items)))


@st.composite
def loop_free(draw):
    """Straight-line code with nested conditionals and arbitrary array indices."""
    items = [F.Decl("y", draw(INIT))]
    items += draw(BLOCK2).items
    items.append(F.Return(draw(EXPRS)))
    return function(items)


@st.composite
def with_loop(draw):
    """Any statement mix plus one loop with an arbitrary guard and body."""
    items = [F.Decl("y", draw(INIT))]
    items += draw(BLOCK1).items
    items.append(F.While(draw(CONDS), draw(BLOCK1)))
    items.append(F.Return(draw(EXPRS)))
    return function(items)


# counted loops: induction variable i, constant step, body touching a[i]
_, L_EXPR1, L_EXPRS = _exprs(("x", "y", "n", "i"))
L_CONDS = _conds(L_EXPR1)
I = F.Var("i")


def _cell(off):
    return I if off == 0 else F.BinOp("+", I, F.IntConst(off))


L_SIMPLE = st.one_of(
    st.builds(F.VarAssign, st.sampled_from(("x", "y")), L_EXPRS),
    st.builds(lambda v, c: F.VarAssign(v, F.BinOp("+", F.Var(v), c)),
              st.sampled_from(("x", "y")), st.one_of(st.integers(0, 3).map(F.IntConst), st.just(F.Var("n")))),
    st.builds(lambda off, e: F.ArrAssign("a", _cell(off), e), st.integers(0, 1), L_EXPRS),
    st.builds(lambda m, op: F.If(F.Cmp(op, F.Var(m), F.ArrayAccess("a", I)),
                                 F.VarAssign(m, F.ArrayAccess("a", I)), F.Seq(())),
              st.sampled_from(("x", "y")), st.sampled_from(("<", ">"))),
)
L_BREAK = st.builds(lambda c: F.If(c, F.Break(), F.Seq(())), st.one_of(
    L_CONDS, st.builds(F.Cmp, st.sampled_from(CMP_OPS), st.just(F.ArrayAccess("a", I)), LEAVES)))


@st.composite
def counted_loop(draw):
    """``i = lo; while (i < bound) { body; i = i + step; }`` with optional break."""
    lo = draw(st.integers(0, 2))
    step = draw(st.sampled_from((1, 1, 1, 2)))
    op = draw(st.sampled_from(("<", "<=")))
    bound = draw(st.sampled_from((F.Var("n"), F.BinOp("-", F.Var("n"), F.IntConst(1)))))
    body = list(draw(_block(L_SIMPLE, 2)).items)
    if draw(st.booleans()):
        body.insert(draw(st.integers(0, len(body))), draw(L_BREAK))
    body.append(F.VarAssign("i", F.BinOp("+", I, F.IntConst(step))))
    items = [F.Decl("y", draw(INIT)), F.Decl("i", F.IntConst(lo))]
    items += draw(_block(SIMPLE, 2)).items
    items.append(F.While(F.Cmp(op, I, bound), F.Seq(tuple(body))))
    items += draw(_block(st.one_of(SIMPLE, st.builds(F.If, CONDS, BLOCK0, BLOCK0)), 2)).items
    items.append(F.Return(draw(st.sampled_from((F.Var("x"), F.Var("y"), I)))))
    return function(items)
