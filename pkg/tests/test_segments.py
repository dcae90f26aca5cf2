from hypothesis import given, settings, strategies as st

from acse.segments import (
    I_OFF, UNKNOWN, Indexed, NonConcretizable, Segment, denote, dump, seg_merge, seg_read,
    seg_write,
)
from acse.symcore import ENTRY, LENGTH, Cmp, Fresh, SymExpr, V

fresh = Fresh()
N = fresh.val(LENGTH, "n")
X = fresh.val(ENTRY, "x")
PC = (Cmp(V(N), ">=", 0),)


def val_for(n, x=0):
    return {N: n, X: x}.__getitem__


summaries = st.one_of(
    st.just(UNKNOWN),
    st.builds(lambda c0, c1, c2: Indexed(SymExpr(c0, [(I_OFF.terms[0][0], c1), (X, c2)])),
              st.integers(-4, 4), st.integers(-2, 2), st.integers(-1, 1)),
)
lengths = st.one_of(st.integers(0, 3).map(SymExpr), st.just(V(N)))


@st.composite
def stores(draw):
    """Back-to-back segments of array ``a`` starting at offset 0."""
    parts = draw(st.lists(st.tuples(lengths, summaries), min_size=1, max_size=4))
    out, start = [], SymExpr(0)
    for k, (ln, sm) in enumerate(parts):
        out.append(Segment("a", start, ln, sm, gen=0 if isinstance(sm, Indexed) else k + 1))
        start = start + ln
    return tuple(out)


@settings(max_examples=1000, deadline=None)
@given(stores())
def test_merge_preserves_denotation(store):
    merged = seg_merge(store, PC, fresh)
    for n in range(0, 9):
        for x in (-4, 0, 3):
            assert denote(merged, val_for(n, x)) == denote(store, val_for(n, x))


@settings(max_examples=1000, deadline=None)
@given(stores(), st.integers(0, 8))
def test_split_drops_exactly_the_written_cell(store, j):
    after = seg_write(store, "a", SymExpr(j), PC, fresh)
    concrete = all(s.length.is_const() for s in store)
    for n in range(0, 9):
        v = val_for(n, 1)
        before, now = denote(store, v), denote(after, v)
        assert now.get(("a", j)) is None  # no stale fact about the written cell
        for cell, fact in now.items():
            if cell != ("a", j):
                assert fact is None or fact == before.get(cell)
        if concrete:
            expect = {c: f for c, f in before.items() if c != ("a", j)}
            assert {c: f for c, f in now.items() if c != ("a", j)} == expect


@settings(max_examples=1000, deadline=None)
@given(stores(), st.integers(0, 8), st.integers(0, 8))
def test_read_candidates_contain_the_fact(store, off, n):
    pc = PC + (Cmp(V(N), "==", n),)
    v = val_for(n, 2)
    facts = denote(store, v)
    fact = facts.get(("a", off))
    cands = [c.evaluate(v) for c in seg_read(store, "a", SymExpr(off), pc)]
    if fact is not None:
        assert fact in cands


def test_read_example():
    store = (Segment("a", SymExpr(0), V(N), Indexed(I_OFF + 2)),)
    (got,) = seg_read(store, "a", SymExpr(3), (Cmp(V(N), ">=", 4),))
    assert got == SymExpr(5)
    assert seg_read((), "a", SymExpr(3), ()) == []


def test_read_two_candidates_symbolic_index():
    j = V(fresh.val(ENTRY, "j"))
    store = (Segment("a", SymExpr(0), SymExpr(2), Indexed(I_OFF + 1)),
             Segment("a", SymExpr(2), SymExpr(2), Indexed(I_OFF * 3)))
    got = seg_read(store, "a", j, (Cmp(j, ">=", 0), Cmp(j, "<", 4)))
    assert got == [j + 1, (j - 2) * 3]


def test_write_splits_constant_offset():
    store = (Segment("a", SymExpr(0), V(N), Indexed(I_OFF + 2)),)
    pc = (Cmp(V(N), ">=", 5),)
    pre, suf = seg_write(store, "a", SymExpr(2), pc, fresh)
    assert (pre.start, pre.length) == (SymExpr(0), SymExpr(2))
    assert (suf.start, suf.length) == (SymExpr(3), V(N) - 3)
    assert suf.value_at(SymExpr(4)) == SymExpr(6)  # content at a[4] is unchanged


def test_write_at_zero_drops_empty_prefix():
    store = (Segment("a", SymExpr(0), V(N), Indexed(I_OFF + 2)),)
    (suf,) = seg_write(store, "a", SymExpr(0), (Cmp(V(N), ">=", 1),), fresh)
    assert (suf.start, suf.length) == (SymExpr(1), V(N) - 1)


def test_write_outside_leaves_store():
    store = (Segment("a", SymExpr(0), SymExpr(3), Indexed(I_OFF)),)
    assert seg_write(store, "a", SymExpr(5), (), fresh) == store
    assert seg_write(store, "b", SymExpr(1), (), fresh) == store


def test_symbolic_write_demotes_to_unknown():
    j = V(fresh.val(ENTRY, "j"))
    store = (Segment("a", SymExpr(0), SymExpr(3), Indexed(I_OFF)),)
    (s,) = seg_write(store, "a", j, (Cmp(j, ">=", 0), Cmp(j, "<", 3)), fresh)
    assert s.summary == UNKNOWN and s.gen > 0


def test_merge_unknown_halves_into_whole_range():
    k = V(fresh.val(ENTRY, "k"))
    store = (Segment("rr", SymExpr(0), k * 4, UNKNOWN, gen=1),
             Segment("rr", k * 4, V(N) - k * 4, UNKNOWN, gen=2))
    (m,) = seg_merge(store, (), fresh)
    assert (m.start, m.end) == (SymExpr(0), V(N))


def test_merge_respects_rebasing():
    s1 = Segment("a", SymExpr(0), SymExpr(2), Indexed(I_OFF + 2))
    apart = Segment("a", SymExpr(2), SymExpr(3), Indexed(I_OFF + 5))
    assert len(seg_merge((s1, apart), (), fresh)) == 2
    v = val_for(0)
    assert denote((s1,), v)[("a", 1)] + 1 != denote((apart,), v)[("a", 2)]
    cont = Segment("a", SymExpr(2), SymExpr(3), Indexed(I_OFF + 4))
    (m,) = seg_merge((s1, cont), (), fresh)
    assert m.length == SymExpr(5)


def test_single_segment_unchanged_by_merge():
    store = (Segment("a", SymExpr(0), SymExpr(3), Indexed(I_OFF)),)
    assert seg_merge(store, (), fresh) == store


def test_denote_examples():
    store = (Segment("a", SymExpr(0), SymExpr(3), Indexed(I_OFF + 2)),)
    assert denote(store, val_for(0)) == {("a", 0): 2, ("a", 1): 3, ("a", 2): 4}
    assert denote((), val_for(0)) == {}
    assert denote((Segment("a", SymExpr(0), SymExpr(2), UNKNOWN),), val_for(0)) == {
        ("a", 0): None, ("a", 1): None}


def test_denote_needs_concrete_lengths():
    m = fresh.val(LENGTH, "m")
    try:
        denote((Segment("a", SymExpr(0), V(m), UNKNOWN),), val_for(0))
    except NonConcretizable:
        return
    raise AssertionError("expected NonConcretizable")


def test_dump_format():
    store = (Segment("a", SymExpr(0), SymExpr(3), Indexed(I_OFF + 2)),)
    assert dump(store) == "a[0 .. 3) : phi(i_off) = i_off + 2"
