import pytest
from hypothesis import HealthCheck, given, settings

from acse import executor as E
from acse import frontend as F
from acse.symcore import Cmp, SymAddr, SymExpr, V, implies
from conftest import analyze, corpus_analysis
import programs
import properties as P

PROP = settings(deadline=None, suppress_health_check=list(HealthCheck), derandomize=True)


def first(src):
    return F.parse_source(src)[-1]


def test_init_state_from_precondition():
    fd = first("/*@ requires size >= 1; */ int g(int d[], int size) { int i = 0; return i; }")
    ctx, p0 = E.init_state(fd)
    size = ctx.entry["size"]
    assert p0.pc == (Cmp(V(size), ">=", 1),)
    assert p0.state.lookup("size") == V(size)


def test_parameterless_function_has_empty_pc():
    ctx, p0 = E.init_state(first("int g() { return 1; }"))
    assert p0.pc == ()


def test_initializer_binds_local():
    ctx, paths = E.run(first("int g() { int x = 3; return x; }"))
    (p,) = paths
    assert p.state.lookup("x") == SymExpr(3)
    assert p.result == SymExpr(3)


def test_straight_line_gives_one_path():
    a = analyze("int g(int x) { int y = x + 1; y = y * 2; return y; }")
    assert len(a.paths) == 1
    assert a.paths[0].result == (V(a.ctx.entry["x"]) + 1) * 2


def test_determined_branch_has_single_successor():
    a = analyze("/*@ requires x > 5; */ int g(int x) { int r = 0; if (x > 0) r = 1; else r = 2; return r; }")
    assert [p.result for p in a.paths] == [SymExpr(1)]


def test_write_updates_cell_and_footprint():
    a = analyze("void g(int rr[], int k, int j) { rr[4*k + j] = 7; }")
    (p,) = a.paths
    off = V(a.ctx.entry["k"]) * 4 + V(a.ctx.entry["j"])
    assert p.state.mem[SymAddr("rr", off)] == SymExpr(7)
    assert ("cell", SymAddr("rr", off)) in p.assigned


def test_searchzero_gives_two_paths(searchzero):
    assert sorted(p.result.const for p in searchzero.paths) == [0, 1]
    size = V(searchzero.ctx.entry["size"])
    zero = next(p for p in searchzero.paths if p.result == SymExpr(0))
    # the normal-exit path has i == size, hence the whole array is zero
    assert any(str(f).startswith("forall k in [0, size") for f in zero.pc)
    assert implies(zero.pc, Cmp(size, ">=", 1))


def test_bnadd_single_path_with_merged_footprint():
    a = corpus_analysis("bnadd")
    (p,) = a.paths
    (seg,) = [s for s in p.segs if s.base == "rr"]
    n = V(a.ctx.entry["n"])
    assert (seg.start, seg.end) == (SymExpr(0), n)


def test_path_budget():
    src = "int g(int a[], int x) { int r = 0; " + " ".join(
        f"if (a[{k}] > x) r = r + {k};" for k in range(8)) + " return r; }"
    with pytest.raises(E.PathExplosion):
        analyze(src, budget=16)
    assert len(analyze(src, budget=1000).paths) == 256


def test_dump_paths_lists_pc_and_footprint():
    text = E.dump_paths(analyze("void g(int a[]) { a[2] = 1; }").paths)
    assert text.splitlines()[0] == "path 1:"
    assert "assigns (a, 2)" in text


def test_determinism():
    src = ("int g(int a[], int n) { int i = 0; int m = a[0]; while (i < n) { if (m < a[i]) m = a[i]; i++; } return m; }")
    one, two = analyze(src), analyze(src)
    assert E.dump_paths(one.paths) == E.dump_paths(two.paths)
    assert one.contract.dumps() == two.contract.dumps()


# -- properties over generated programs (each example runs 25 inputs)

@settings(PROP, max_examples=150)
@given(programs.loop_free())
def test_path_coverage_loop_free(fd):
    fd = P.prepare(fd)
    P.check_paths(fd, P.inputs(fd, 25))


@settings(PROP, max_examples=150)
@given(programs.counted_loop())
def test_path_coverage_counted_loops(fd):
    fd = P.prepare(fd)
    P.check_paths(fd, P.inputs(fd, 25))


@settings(PROP, max_examples=100)
@given(programs.with_loop())
def test_path_coverage_arbitrary_loops(fd):
    fd = P.prepare(fd)
    P.check_paths(fd, P.inputs(fd, 25))


@settings(PROP, max_examples=100)
@given(programs.counted_loop())
def test_havoc_fallback_is_sound(fd):
    fd = P.prepare(fd)
    P.check_paths(fd, P.inputs(fd, 25), plugins=("assigns",))
