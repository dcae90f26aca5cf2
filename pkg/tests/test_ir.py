"""Lowering to the intermediate syntax and the CFG view of it."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings

from acse import frontend as F
from acse import ir
from acse import oracle as O

from conftest import CORPUS_FILES, corpus_text
from programs import counted_loop, loop_free, with_loop
from properties import inputs, prepare

PROP = settings(deadline=None, suppress_health_check=list(HealthCheck), derandomize=True)


def lowered(src: str):
    (fd,) = F.parse_source(src)
    return ir.lower(F.validate(fd, {fd.name: fd}))


def test_array_accesses_go_through_addresses():
    items = ir.stmts(lowered("int f(int a[], int n) { int s = a[n - 1]; a[s] = s + 1; return s; }"))
    assert [type(s).__name__ for s in items] == ["AddrOf", "Assign", "AddrOf", "Write", "Return"]
    assert items[0] == ir.AddrOf("_b1", "a", ir.BinOp("-", ir.IntVar("n"), ir.Const(1)), items[0].line)
    assert items[1].expr == ir.Read("_b1")
    assert items[3].addr == "_b2"


def test_read_inside_index_uses_temporary():
    items = ir.stmts(lowered("int f(int a[]) { return a[a[0]]; }"))
    kinds = [type(s).__name__ for s in items]
    assert kinds == ["AddrOf", "Assign", "AddrOf", "Return"]
    assert items[1].name.startswith("_t")
    assert items[2].offset == ir.IntVar(items[1].name)


def test_condition_reads_form_a_prelude():
    (w,) = [s for s in ir.stmts(lowered(
        "int f(int a[], int n) { int i = 0; while (i < n && a[i] != 0) { i++; } return i; }"))
        if isinstance(s, ir.While)]
    assert len(w.prelude) == 1 and isinstance(w.prelude[0], ir.AddrOf)
    assert isinstance(w.cond, ir.IAnd)
    assert w.loop_id == 0


def test_uninitialized_declaration_is_zero():
    (s, _) = ir.stmts(lowered("int f() { int r; return r; }"))
    assert s == ir.Assign("r", ir.Const(0), s.line)


def test_loop_ids_follow_source_order():
    low = lowered("void f(int n) { int i = 0; while (i < n) { i++; } while (i > 0) { i--; } }")
    assert [s.loop_id for s in ir.stmts(low) if isinstance(s, ir.While)] == [0, 1]


def test_written_sets():
    low = lowered(corpus_text("bnadd"))
    assert ir.written_arrays(low) == {"rr"}
    assert {"i"} <= ir.written_vars(low)


def test_precondition_lowering_rejects_reads():
    (fd,) = F.parse_source("/*@ requires a[0] > 0; */ int f(int a[]) { return 0; }")
    with pytest.raises(F.UnsupportedConstruct):
        ir.lower_condition(fd.declared_pre)


def test_cfg_dump_golden():
    dump = ir.build_cfg(lowered("int g(int n) { int i = 0; while (i < n) { i++; } return i; }")).dump()
    assert dump.splitlines() == [
        "ℓ0 --[true]--> ℓ2 : i := 0",
        "ℓ2 --[true]--> ℓ4 : id",
        "ℓ3 --[true]--> ℓ1 : \\result := i",
        "ℓ4 --[true]--> ℓ5 : id",
        "ℓ5 --[!(i < n)]--> ℓ3 : id",
        "ℓ5 --[i < n]--> ℓ6 : id",
        "ℓ6 --[true]--> ℓ4 : i := (i + 1)",
    ]


def test_cfg_of_empty_body():
    cfg = ir.build_cfg(ir.lower(F.parse_source("void h() { }")[0]))
    assert cfg.dump() == "ℓ0 --[true]--> ℓ1 : id"
    assert (cfg.entry.kind, cfg.exit.kind) == (ir.ENTRY, ir.EXIT)


def test_cfg_location_kinds():
    cfg = ir.build_cfg(lowered(corpus_text("searchzero")))
    kinds = [loc.kind for loc in cfg.locations]
    assert kinds.count(ir.LOOPHEAD) == 1
    assert kinds.count(ir.BRANCH) == 3  # loop guard, break test, final test
    loop_edges = [t for t in cfg.transitions if t.loop_id is not None]
    assert len(loop_edges) == 1 and loop_edges[0].dst.kind == ir.LOOPHEAD


def test_branches_are_exhaustive():
    cfg = ir.build_cfg(lowered(corpus_text("searchzero")))
    for loc in cfg.locations:
        guarded = [t for t in cfg.out(loc) if t.guard is not None]
        if loc.kind == ir.BRANCH:
            assert len(guarded) == 2
            assert guarded[1].guard == ir.negate_cond(guarded[0].guard) or \
                guarded[0].guard == ir.negate_cond(guarded[1].guard)
        else:
            assert not guarded


# ---------------------------------------------------------------- differential

def _agree(fd, ins):
    """The CFG semantics and the AST interpreter agree on every input."""
    cfg = ir.build_cfg(ir.lower(fd))
    n = 0
    for inp in ins:
        try:
            st, res, _ = O.interpret(fd, inp, fuel=3_000)
            want = ("ok", st.ints, st.arrays, res)
        except O.OutOfBounds:
            want = ("oob",)
        except O.NonTermination:
            continue
        try:
            env, arrays, res = ir.run_cfg(cfg, inp.ints, inp.arrays, fuel=60_000)
            got = ("ok", {k: env[k] for k in inp.ints}, arrays, res)
        except ir.IrOutOfBounds:
            got = ("oob",)
        except TimeoutError:
            continue
        if want[0] == "ok":
            want = ("ok", {k: want[1][k] for k in inp.ints}, want[2], want[3])
        assert got == want, inp.as_dict()
        n += 1
    return n


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_corpus_cfg_matches_interpreter(path):
    funcs = {f.name: f for f in F.parse_source(path.read_text())}
    fd = F.prepare(list(funcs.values())[-1], funcs)
    assert _agree(fd, O.gen_inputs(fd, fd.declared_pre)) > 0


@settings(PROP, max_examples=150)
@given(loop_free())
def test_loop_free_cfg_matches_interpreter(fd):
    fd = prepare(fd)
    _agree(fd, inputs(fd, 20))


@settings(PROP, max_examples=100)
@given(counted_loop())
def test_counted_loop_cfg_matches_interpreter(fd):
    fd = prepare(fd)
    _agree(fd, inputs(fd, 20))


@settings(PROP, max_examples=100)
@given(with_loop())
def test_any_loop_cfg_matches_interpreter(fd):
    fd = prepare(fd)
    _agree(fd, inputs(fd, 20))
