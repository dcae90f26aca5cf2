"""Symbolic expressions, formulas, states and the affine reasoning engine."""

from .expr import (
    AUX_KINDS, ENTRY, EXIT, HAVOC, ITER, LENGTH, LOOPENTRY, LOOPHEAD,
    Aggregate, Atom, BoundVar, C, Cell, Fresh, IOff, Mono, OpaqueRead,
    ResultAtom, SymExpr, SymVal, V, render,
)
from .formula import (
    EQ, LE, NE, And, BoolConst, Cmp, EvalError, FALSE, Formula, Or, Quant, TRUE,
    conj, evaluate, fkey, formula_atoms, map_cmps, mk_and, mk_or, negate,
    simplify, substitute,
)
from .reason import (
    FEASIBLE, INFEASIBLE, MUST_DIFFER, MUST_EQUAL, UNKNOWN,
    compare_exprs, implies, prune_infeasible,
)
from .state import SymAddr, SymbolicState, UnboundVariable, eval_expr

__all__ = [
    "AUX_KINDS", "Aggregate", "And", "Atom", "BoolConst", "BoundVar", "C", "Cell",
    "Cmp", "ENTRY", "EQ", "EXIT", "EvalError", "FALSE", "FEASIBLE", "Formula",
    "Fresh", "HAVOC", "INFEASIBLE", "IOff", "ITER", "LE", "LENGTH", "LOOPENTRY",
    "LOOPHEAD", "MUST_DIFFER", "MUST_EQUAL", "Mono", "NE", "OpaqueRead", "Or",
    "Quant", "ResultAtom", "SymAddr", "SymExpr", "SymVal", "SymbolicState", "TRUE",
    "UNKNOWN", "UnboundVariable", "V", "compare_exprs", "conj", "eval_expr",
    "evaluate", "fkey", "formula_atoms", "implies", "map_cmps", "mk_and", "mk_or",
    "negate", "prune_infeasible", "render", "simplify", "substitute",
]
