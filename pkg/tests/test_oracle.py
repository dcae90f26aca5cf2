"""The concrete interpreter and the contract validator built on it."""

from __future__ import annotations

from dataclasses import replace

import pytest

from acse import frontend as F
from acse import oracle as O
from acse.contracts import AssignsRange
from acse.symcore import TRUE, Cell, Cmp, EvalError, ResultAtom, SymExpr, V, evaluate, negate

from conftest import analyze, corpus_analysis


def sz_state(data):
    return O.ConcreteState({"size": len(data)}, {"data": list(data)})


def fn(src: str) -> F.FunctionDef:
    funcs = {f.name: f for f in F.parse_source(src)}
    return F.prepare(list(funcs.values())[-1], funcs)


def test_searchzero_finds_nonzero(searchzero):
    st, res, trace = O.interpret(searchzero.pfd, sz_state([0, 0, 3]))
    assert res == 1 and st.ints["i"] == 2
    assert [ev.iteration for ev in trace] == [0, 1, 2]
    assert [ev.snapshot.ints["i"] for ev in trace] == [0, 1, 2]


def test_searchzero_all_zero(searchzero):
    st, res, trace = O.interpret(searchzero.pfd, sz_state([0, 0]))
    assert res == 0 and st.ints["i"] == 2
    assert len(trace) == 3  # the final head visit sees the failing guard


def test_input_not_mutated(searchzero):
    inp = sz_state([0, 1])
    O.interpret(searchzero.pfd, inp)
    assert inp.ints == {"size": 2}


def test_out_of_bounds_read():
    with pytest.raises(O.OutOfBounds):
        O.interpret(fn("int f(int a[]) { return a[3]; }"), O.ConcreteState({}, {"a": [1, 2]}))


def test_fuel_exhaustion():
    fd = fn("int f(int x) { while (x == x) { x = x + 1; } return x; }")
    with pytest.raises(O.NonTermination):
        O.interpret(fd, O.ConcreteState({"x": 0}, {}), fuel=500)


def test_more_fuel_same_answer():
    fd = fn("int f(int n) { int s = 0; int i = 0; while (i < n) { s = s + i; i++; } return s; }")
    inp = O.ConcreteState({"n": 6}, {})
    answers = set()
    for fuel in (100, 1000, 10_000):
        answers.add(O.interpret(fd, inp, fuel=fuel)[1])
    assert answers == {15}
    with pytest.raises(O.NonTermination):
        O.interpret(fd, inp, fuel=5)


def test_precondition_enumeration_count():
    fd = corpus_analysis("searchzero").pfd
    pre = F.parse_source("/*@ requires size >= 1 && \\valid(data + (0 .. size-1)); */ "
                         "int g(int data[], int size) { return 0; }")[0].declared_pre
    dom = O.Domain(ints=(1,), max_len=2, values=(-1, 0, 1))
    assert len(list(O.gen_inputs(fd, pre, domain=dom))) == 12


def test_precondition_filters_ints():
    fd = fn("/*@ requires n == 4*m; */ int f(int n, int m) { return n; }")
    got = {(s.ints["n"], s.ints["m"]) for s in O.gen_inputs(fd, fd.declared_pre)}
    assert got == {(0, 0), (4, 1), (-4, -1)}


def test_unsatisfiable_precondition():
    fd = fn("/*@ requires n > 9; */ int f(int n) { return n; }")
    with pytest.raises(O.PreconditionUnsatisfiable):
        list(O.gen_inputs(fd, fd.declared_pre))


def test_random_mode_is_seeded():
    fd = corpus_analysis("bnadd").pfd
    a = [s.as_dict() for s in O.gen_inputs(fd, fd.declared_pre, mode="random", samples=50, seed=3)]
    b = [s.as_dict() for s in O.gen_inputs(fd, fd.declared_pre, mode="random", samples=50, seed=3)]
    assert a == b and len(a) == 50
    assert all(len(s["rr"]) >= s["n"] for s in a)


def test_valuation_out_of_bounds():
    inp = O.ConcreteState({}, {"a": [5]})
    f = Cmp(V(Cell("a", SymExpr(3))), "==", SymExpr(0))
    with pytest.raises(EvalError):
        evaluate(f, O.valuation(inp, inp))
    assert evaluate(f, O.valuation(inp, inp, fill=0))


def test_out_of_bounds_cells_are_unspecified():
    inp = O.ConcreteState({}, {"a": [5]})
    cell = V(Cell("a", SymExpr(3)))
    assert not O.holds(Cmp(cell, "==", SymExpr(0)), inp, inp)
    assert O.holds(Cmp(cell, "==", cell), inp, inp)
    assert O.holds(Cmp(V(Cell("a", SymExpr(0))), "==", SymExpr(5)), inp, inp)


def test_contract_accepted(searchzero):
    rep = O.validate_contract(searchzero.pfd, searchzero.contract,
                              O.gen_inputs(searchzero.pfd, searchzero.pfd.declared_pre))
    assert rep.ok and rep.inputs_tested > 1000
    assert rep.to_json()["failures"] == []


def test_negated_post_flagged(searchzero):
    c = searchzero.contract
    bad = replace(c, post=[negate(c.post[0]), c.post[1]])
    rep = O.validate_contract(searchzero.pfd, bad, [sz_state([0, 0])])
    assert [f["check"] for f in rep.failures] == ["post"]


def test_shifted_result_flagged():
    an = analyze("int f(int x) { return x + 1; }")
    bad = replace(an.contract, post=[Cmp(V(ResultAtom()), "==", SymExpr(0))])
    rep = O.validate_contract(an.pfd, bad, O.gen_inputs(an.pfd))
    assert not rep.ok and rep.inputs_tested == 9
    assert len(rep.failures) == 8  # only x == -1 returns 0


def test_empty_assigns_flagged():
    an = corpus_analysis("bnadd")
    bad = replace(an.contract, assigns=[])
    inp = O.ConcreteState({"n": 1}, {"rr": [0], "ap": [1], "bp": [1]})
    rep = O.validate_contract(an.pfd, bad, [inp])
    assert [f["check"] for f in rep.failures] == ["assigns"]


def test_shrunk_assigns_flagged():
    an = corpus_analysis("array_init")
    (r,) = an.contract.assigns
    bad = replace(an.contract, assigns=[AssignsRange(r.array, r.start + 1, r.end)])
    inp = O.ConcreteState({"n": 2}, {"a": [4, 4]})
    assert any(f["check"] == "assigns" for f in O.validate_contract(an.pfd, bad, [inp]).failures)


def test_wrong_loop_invariant_flagged():
    an = corpus_analysis("affine_accum")
    lb = an.contract.loops[0]
    bad_lb = replace(lb, formulas=[TRUE, negate(lb.formulas[1])], invariants=["t", "f"])
    bad = replace(an.contract, loops=[bad_lb])
    rep = O.validate_contract(an.pfd, bad, [O.ConcreteState({"x": 0, "c": 1, "n": 2}, {})])
    assert {f["check"] for f in rep.failures} == {"loop_invariant"}


def test_skipped_runs_reported():
    an = analyze("int f(int a[], int k) { return a[k]; }")
    rep = O.validate_contract(an.pfd, an.contract, O.gen_inputs(an.pfd))
    assert rep.ok
    assert any("out of bounds" in w for w in rep.warnings)


def test_failures_are_capped():
    an = analyze("int f(int x) { return x; }")
    bad = replace(an.contract, post=[Cmp(V(ResultAtom()), "==", SymExpr(99))])
    rep = O.validate_contract(an.pfd, bad, O.gen_inputs(an.pfd), max_failures=3)
    assert len(rep.failures) == 4 and rep.failures[-1]["check"] == "truncated"
