"""Loop recognition, invariant plugins and loop summaries."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings

from acse import acsl, ir
from acse import executor as E
from acse import frontend as F
from acse import oracle as O
from acse.loopanalysis import NonTerminating, extract_loop_info, registry
from acse.loopanalysis.plugins import ALL_PLUGINS

from conftest import CORPUS_FILES, analyze, corpus_analysis, corpus_text, validate
from programs import counted_loop
from properties import check_loop_invariants, inputs, prepare

PROP = settings(deadline=None, suppress_health_check=list(HealthCheck), derandomize=True)


def first_loop_info(text: str):
    an = analyze(text)
    ctx, p0 = E.init_state(an.pfd)
    items = ir.stmts(ctx.body)
    k = next(j for j, s in enumerate(items) if isinstance(s, ir.While))
    (pre,) = E.exec_block(ctx, items[:k], [p0])
    return extract_loop_info(ctx, items[k], pre)


def clauses(an, loop_index: int = 0):
    """(plugin, rendered text) for every non-assigns clause of one loop."""
    nm = acsl.Namer(F.assigned_vars(an.pfd.body), an.contract.written_arrays, acsl.LOOP)
    lid = sorted(an.ctx.annotations)[loop_index]
    out = []
    for ann in an.ctx.annotations[lid]:
        for c in ann.clauses:
            if c.kind != "assigns":
                out.append((c.plugin, acsl.render_formula(c.formula, nm)))
    return out


def texts(an, loop_index: int = 0):
    return an.contract.loops[loop_index].invariants


# ---------------------------------------------------------------- loop info

def test_searchzero_iterator():
    info = first_loop_info(corpus_text("searchzero"))
    assert info.recognized
    assert (info.iterator, info.step, info.a) == ("i", 1, 1)
    assert acsl.Namer().expr(info.bound) == "size - 1"
    assert len(info.brk) == 1 and len(info.cont) == 1 and not info.rets


def test_affine_iterator():
    info = first_loop_info(corpus_text("affine_accum"))
    assert (info.iterator, info.step) == ("i", 1)
    assert info.written == ["i", "x"]
    assert info.warrays == []


def test_stride_four_iterator():
    info = first_loop_info(corpus_text("bnadd"))
    assert (info.iterator, info.step) == ("i", 4)
    assert info.warrays == ["rr"]


def test_two_counters_unrecognized():
    src = "int f(int n) { int i = 0; int j = 0; while (i + j < n) { i++; j++; } return i; }"
    info = first_loop_info(src)
    assert not info.recognized
    assert info.reason


def test_decreasing_iterator():
    src = "int f(int n) { int i = n; int s = 0; while (i > 0) { s = s + 2; i--; } return s; }"
    info = first_loop_info(src)
    assert (info.iterator, info.step, info.a) == ("i", -1, -1)


def test_infinite_loop_rejected():
    with pytest.raises(NonTerminating):
        analyze("int f(int x) { while (1 == 1) { x = x + 1; } return x; }")


# ---------------------------------------------------------------- plugin goldens

def test_affine_goldens():
    ts = texts(corpus_analysis("affine_accum"))
    assert "0 <= i <= n" in ts
    assert "x == \\old(x) + c*i" in ts
    assert corpus_analysis("affine_accum").contract.loops[0].assigns == ["i", "x"]


def test_search_goldens():
    an = corpus_analysis("search_break")
    assert "\\forall integer k; 0 <= k < i ==> a[k] != t" in texts(an)
    assert "0 <= i <= n" in texts(an)
    post = an.contract.post_text()
    assert "\\exists integer k; 0 <= k <= \\result && a[k] == t" in post


def test_linear_search_return_path():
    an = corpus_analysis("linear_search")
    assert "\\forall integer k; 0 <= k < i ==> a[k] != t" in texts(an)
    assert "\\exists integer k; 0 <= k <= \\result && a[k] == t" in an.contract.post_text()
    assert an.contract.loops[0].assigns == ["i"]


def test_max_goldens():
    ts = texts(corpus_analysis("array_max"))
    assert "\\forall integer k; 0 <= k < i ==> a[k] <= m" in ts
    assert "\\exists integer j; 0 <= j < i && m == a[j]" in ts
    assert "1 <= i <= n" in ts


def test_min_is_dual():
    ts = texts(corpus_analysis("array_min"))
    assert any(">= m" in t and "\\forall" in t for t in ts)
    assert any("\\exists integer j" in t for t in ts)


def test_plugin_attribution():
    assert {p for p, _ in clauses(corpus_analysis("array_max"))} >= {"maxmin"}
    assert {p for p, _ in clauses(corpus_analysis("search_break"))} >= {"search"}
    assert {p for p, _ in clauses(corpus_analysis("affine_accum"))} == {"affine"}


def test_accumulator_has_no_affine_clause():
    an = analyze("int f(int n) { int s = 0; int i = 0; while (i < n) { s = s + i; i++; } return s; }")
    assert not any(t.startswith("s ==") for t in texts(an))


def test_search_over_two_arrays():
    src = ("int f(int a[], int b[], int n) { int i = 0; while (i < n) { "
           "if (a[i] == b[i]) break; i++; } return i; }")
    an = analyze(src)
    assert ("search", "\\forall integer k; 0 <= k < i ==> a[k] != b[k]") in clauses(an)
    assert validate(an).ok


def test_search_inapplicable_when_target_moves():
    src = ("int f(int a[], int n, int s) { int i = 0; while (i < n) { "
           "if (a[i] == s) break; s = s + 1; i++; } return i; }")
    an = analyze(src)
    assert "search" not in {p for p, _ in clauses(an)}
    assert validate(an).ok


def test_max_single_element_pins_result():
    an = corpus_analysis("array_max")
    # n == 1: the loop is skipped and the result is a[0]
    dom = O.Domain(ints=(1,), max_len=1, values=(-2, 0, 2))
    rep = validate(an, dom)
    assert rep.ok and rep.inputs_tested == 3


def test_zero_iteration_precondition():
    an = corpus_analysis("zero_iter")
    assert an.contract.post_text() == "\\result == 7"
    assert an.contract.assigns_text() == ["\\nothing"]


def test_loop_assigns_ranges():
    an = corpus_analysis("bnadd")
    first, second = an.contract.loops
    assert any(t.startswith("rr[") for t in first.assigns)
    assert "i" in first.assigns and "i" in second.assigns


def test_read_only_loop_assigns_scalars_only():
    an = corpus_analysis("array_max")
    assert set(an.contract.loops[0].assigns) == {"i", "m"}


# ---------------------------------------------------------------- registry

def test_registry_rejects_unknown():
    with pytest.raises(ValueError):
        registry(["search", "nope"])


def test_registry_keeps_assigns():
    names = [p.name for p in registry(["search"])]
    assert names == ["search", "assigns"]
    assert set(ALL_PLUGINS) == {"search", "maxmin", "affine", "assigns"}


def test_path_sensitive_priorities():
    ps = sorted((p for p in ALL_PLUGINS.values() if p.path_sensitive), key=lambda p: -p.priority)
    assert [p.name for p in ps] == ["search", "maxmin"]


# ---------------------------------------------------------------- exits and refinement

@pytest.mark.parametrize("stem", ["searchzero", "linear_search", "search_break"])
def test_exit_disjuncts_exclusive(stem):
    an = corpus_analysis(stem)
    runs, _ = O.record_runs(an.pfd, O.gen_inputs(an.pfd, an.pfd.declared_pre))
    assert runs
    for run in runs:
        hits = sum(O.holds(d, run.input, run.final, run.result) for d in an.contract.post)
        assert hits == 1, run.input.as_dict()


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_refinement_keeps_assigns(path):
    text = path.read_text()
    full = analyze(text)
    base = analyze(text, plugins=("assigns",))
    assert full.contract.assigns_text() == base.contract.assigns_text()


# ---------------------------------------------------------------- invariant truth

@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_corpus_loop_invariants_hold(path):
    an = corpus_analysis(path.stem)
    fd = prepare(an.fd) if not an.funcs.keys() - {an.fd.name} else an.pfd
    check_loop_invariants(fd, list(O.gen_inputs(fd, fd.declared_pre)))


@settings(PROP, max_examples=150)
@given(counted_loop())
def test_loop_invariants_hold(fd):
    fd = prepare(fd)
    check_loop_invariants(fd, inputs(fd, 25))
