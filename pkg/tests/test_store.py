"""Relational store: ingest, selection, joins, grouping, linking, admissibility."""

import random

import pytest

import tracelens as tl
from tracelens.errors import Incompatible, InvalidPlotKind, TooManyGroups, UnknownBlock, UnknownName
from tracelens.model import TraceSpec, TrackTarget, empty_trace
from tracelens.store import Filters, GroupBy, PlotQuery, TraceStore, allowed_plots

from oracles import random_trace, subtree_rows, trees_equal


def _trace(src, targets, **kwargs):
    spec = TraceSpec.build(targets=[TrackTarget(t) if isinstance(t, str) else t for t in targets], **kwargs)
    trace, _, err = tl.trace_in_process(src, spec, "subject.py")
    assert err is None
    return trace


def test_root_only_trace_has_one_block_row():
    store = TraceStore.ingest(empty_trace())
    assert store.counts() == {"blocks": 1, "tracked": 0, "custom": 0}


def test_single_call_cell_rows():
    # one call block plus one tracked row named val, like the translate figure
    src = "def f(n):\n    val = n + 1\n    return val\nf(1)\n"
    trace = _trace(src, [TrackTarget("val", scope="f")])
    store = TraceStore.ingest(trace)
    assert store.counts()["blocks"] == 2  # root + call
    rows = store.select_values("val")
    assert len(rows) == 1
    assert rows[0].value == 2


def test_random_traces_reconstruct_exactly():
    rng = random.Random(11)
    for _ in range(20):
        trace = random_trace(rng, max_blocks=500)
        store = TraceStore.ingest(trace)
        assert trees_equal(store.reconstruct(), trace.root)


def test_select_unknown_name_raises(fib_trace):
    store = TraceStore.ingest(fib_trace)
    with pytest.raises(UnknownName):
        store.select_values("ghost")


def test_select_fib_rows_are_time_ordered(fib_trace):
    store = TraceStore.ingest(fib_trace)
    rows = store.select_values("val")
    assert len(rows) == 25
    stamps = [r.ts for r in rows]
    assert stamps == sorted(stamps) and len(set(stamps)) == 25


def test_range_filter_matches_full_scan_oracle():
    rng = random.Random(23)
    trace = random_trace(rng, max_blocks=400)
    store = TraceStore.ingest(trace)
    for name in store.names():
        rows = store.select_values(name)
        got = store.select_values(name, Filters(value_min=0, value_max=1))
        # oracle: full scan with sqlite's cross-type ordering (numbers < text)
        def key(v):
            if isinstance(v, bool):
                return (1, str(v))
            if isinstance(v, (int, float)):
                return (0, v)
            return (1, str(v))

        lo, hi = key(0), key(1)
        expected = [r for r in rows if lo <= key(_stored(r.value)) <= hi]
        assert [r.id for r in got] == [r.id for r in expected]


def _stored(value):
    # mirror of the store's lossless encoding, for oracle comparisons
    if value is None:
        return "None"
    if isinstance(value, bool):
        return "True" if value else "False"
    return value


def test_id_set_filter(fib_trace):
    store = TraceStore.ingest(fib_trace)
    ids = [r.id for r in store.select_values("val")][:5]
    got = store.select_values("val", Filters(ids=frozenset(ids)))
    assert [r.id for r in got] == sorted(ids, key=lambda i: next(r.ts for r in store.select_values("val") if r.id == i))


def test_disjoint_filters_partition_everything():
    rng = random.Random(5)
    trace = random_trace(rng, max_blocks=600)
    store = TraceStore.ingest(trace)
    for name in store.names():
        everything = {r.id for r in store.select_values(name)}
        below = {r.id for r in store.select_values(name, Filters(value_max=0.5))}
        above = {r.id for r in store.select_values(name, Filters(value_min=0.5))}
        on_cut = {r.id for r in store.select_values(name, Filters(value_min=0.5, value_max=0.5))}
        assert below | above == everything
        assert below & above == on_cut


# --- joins -----------------------------------------------------------------------


def test_join_name_with_itself_is_identity(fib_trace):
    store = TraceStore.ingest(fib_trace)
    pairs = store.join_values(["val", "val"])
    rows = store.select_values("val")
    assert len(pairs) == len(rows)
    for pair, row in zip(pairs, rows):
        assert pair["rows"]["val"].id == row.id


def test_join_aligns_one_tuple_per_iteration():
    src = (
        "angle = 0.0\n"
        "hits = 0\n"
        "for step in range(5):\n"
        "    angle = angle + step\n"
        "    hits = hits - step\n"
    )
    trace = _trace(src, [TrackTarget("angle", scope=""), TrackTarget("hits", scope="")])
    store = TraceStore.ingest(trace)
    tuples = store.join_values(["angle", "hits"])
    # module-level initial assignments join at root; per-iteration pairs after
    per_iter = [t for t in tuples if store.node_brief(t["instance"])["type"] == "iteration"]
    assert len(per_iter) == 5
    for t in tuples:
        assert t["rows"]["angle"].ts != t["rows"]["hits"].ts


def test_join_counts_mismatch_is_incompatible():
    src = (
        "for step in range(4):\n"
        "    a = step\n"
        "    b = step\n"
        "    b = step + 1\n"
        "    b = step + 2\n"
    )
    trace = _trace(src, [TrackTarget("a", scope=""), TrackTarget("b", scope="")])
    store = TraceStore.ingest(trace)
    # oracle: counting query confirms 1 vs 3 instances per iteration
    iterations = [n for n in trace.root.walk() if n.type == "iteration"]
    for it in iterations:
        names = [c.name for c in it.children if c.type == "tracked"]
        assert names.count("a") == 1 and names.count("b") == 3
    with pytest.raises(Incompatible) as exc:
        store.join_values(["a", "b"])
    assert "b" in str(exc.value)


# --- grouping --------------------------------------------------------------------


def test_group_by_loop_that_ran_once():
    src = "for i in range(3):\n    x = i\n"
    trace = _trace(src, [TrackTarget("x", scope="")])
    store = TraceStore.ingest(trace)
    groups = store.group_values("x", GroupBy("loop", 1))
    assert len(groups) == 1
    assert [r.value for r in groups[0]["rows"]] == [0, 1, 2]


def test_group_by_outer_loop_instances():
    src = (
        "for outer in range(3):\n"
        "    for inner in range(4):\n"
        "        w = outer * 10 + inner\n"
    )
    trace = _trace(src, [TrackTarget("w", scope="")])
    store = TraceStore.ingest(trace)
    groups = store.group_values("w", GroupBy("loop", 2))  # split by inner-loop instances
    assert len(groups) == 3  # one instance of the inner loop per outer iteration
    assert [len(g["rows"]) for g in groups] == [4, 4, 4]
    firsts = [g["rows"][0].ts for g in groups]
    assert firsts == sorted(firsts)
    everything = [r.id for r in store.select_values("w")]
    regrouped = sorted(r.id for g in groups for r in g["rows"])
    assert regrouped == sorted(everything)


def test_group_by_boolean_name_partitions_rows():
    src = (
        "flag = False\n"
        "for i in range(6):\n"
        "    flag = i % 2 == 0\n"
        "    y = i * i\n"
    )
    trace = _trace(src, [TrackTarget("flag", scope=""), TrackTarget("y", scope="")])
    store = TraceStore.ingest(trace)
    groups = store.group_values("y", GroupBy("name", "flag"))
    keys = {g["key"] for g in groups}
    assert keys == {True, False}
    total = sum(len(g["rows"]) for g in groups)
    assert total == len(store.select_values("y"))


def test_group_cap_enforced():
    src = "for i in range(60):\n    g = i\n    z = i\n"
    trace = _trace(src, [TrackTarget("g", scope=""), TrackTarget("z", scope="")])
    store = TraceStore.ingest(trace)
    with pytest.raises(TooManyGroups):
        store.group_values("z", GroupBy("name", "g"), cap=50)


# --- subtree + linking ---------------------------------------------------------------


def test_subtree_values_at_root_returns_all(fib_trace):
    store = TraceStore.ingest(fib_trace)
    got = store.subtree_values("val", 0)
    assert len(got["rows"]) == 25
    assert got["context"] == []


def test_subtree_of_one_call_matches_parent_context(fib_trace):
    store = TraceStore.ingest(fib_trace)
    some_call = next(n for n in fib_trace.root.walk() if n.type == "call" and len(n.children) > 1)
    got = store.subtree_values("val", some_call.id, include_parent_context=True)
    assert {r.id for r in got["rows"]} <= {r.id for r in got["context"]}
    expected = subtree_rows(fib_trace, "val", some_call.id)
    assert sorted(r.id for r in got["rows"]) == expected


def test_subtree_matches_ancestor_walk_oracle():
    rng = random.Random(31)
    for _ in range(10):
        trace = random_trace(rng, max_blocks=300)
        store = TraceStore.ingest(trace)
        blocks = [n for n in trace.root.walk() if n.type in ("root", "call", "loop", "iteration")]
        for name in store.names():
            block = rng.choice(blocks)
            got = sorted(r.id for r in store.subtree_values(name, block.id)["rows"])
            assert got == subtree_rows(trace, name, block.id)


def test_subtree_unknown_block(fib_trace):
    store = TraceStore.ingest(fib_trace)
    with pytest.raises(UnknownBlock):
        store.subtree_values("val", 10_000)


def test_linking_identity_on_empty_set(fib_trace):
    store = TraceStore.ingest(fib_trace)
    assert store.blocks_for_values([]) == set()
    assert store.values_for_blocks([], "val") == []


def test_linking_round_trips_brushed_points(fib_trace):
    store = TraceStore.ingest(fib_trace)
    rows = store.select_values("val")
    brushed = {r.id for r in rows[5:12]}
    blocks = store.blocks_for_values(brushed)
    assert blocks == brushed  # tracked records are leaf blocks
    back = store.values_for_blocks(blocks, "val")
    assert {r.id for r in back} == brushed


def test_linking_random_subsets_round_trip():
    rng = random.Random(41)
    trace = random_trace(rng, max_blocks=400)
    store = TraceStore.ingest(trace)
    for name in store.names():
        ids = [r.id for r in store.select_values(name)]
        for _ in range(5):
            subset = set(rng.sample(ids, k=rng.randint(0, len(ids)))) if ids else set()
            blocks = store.blocks_for_values(subset)
            back = {r.id for r in store.values_for_blocks(blocks, name)}
            assert back == subset


# --- typing + plot admissibility -----------------------------------------------------


def test_value_typing_rules():
    src = (
        "q = 1\n"
        "q = 2.5\n"
        "s = 'a'\n"
        "s = 'b'\n"
        "m = 1\n"
        "m = 'not a number'\n"
        "o = 0\n"
        "o = [1, 2]\n"
    )
    trace = _trace(src, [TrackTarget(n, scope="") for n in "qsmo"])
    store = TraceStore.ingest(trace)
    assert store.value_type("q") == "Q"
    assert store.value_type("s") == "N"
    assert store.value_type("m") == "N"
    assert store.value_type("o") == "O"


def test_nonfinite_values_stay_quantitative():
    src = "x = 1.0\nx = float('nan')\nx = float('inf')\n"
    trace = _trace(src, [TrackTarget("x", scope="")], extra_exclusions=["float"])
    store = TraceStore.ingest(trace)
    assert store.value_type("x") == "Q"
    stats = store.value_stats("x")
    assert stats["n_nonfinite"] == 2
    assert stats["min"] == stats["max"] == 1.0


FIG4_TABLE = {
    ("Q",): {"histogram"},
    ("N",): {"bar"},
    ("Q", "Q"): {"scatter"},
    ("Q", "Q", "Q"): {"parallel_coordinates"},
    ("Q", "Q", "Q", "Q"): {"parallel_coordinates"},
}

GROUPED_TABLE = {
    ("Q",): {"small_multiples", "box"},
    ("N",): {"small_multiples"},
    ("Q", "Q"): {"small_multiples"},
}


@pytest.mark.parametrize("sig,expected", list(FIG4_TABLE.items()))
def test_plot_admissibility_table(sig, expected):
    assert allowed_plots(sig, grouped=False) == frozenset(expected)


@pytest.mark.parametrize("sig,expected", list(GROUPED_TABLE.items()))
def test_plot_admissibility_grouped(sig, expected):
    assert allowed_plots(sig, grouped=True) == frozenset(expected)


def test_plot_admissibility_rejects_everything_else():
    assert allowed_plots(("N", "Q"), grouped=False) == frozenset()
    assert allowed_plots(("O",), grouped=False) == frozenset()
    assert allowed_plots((), grouped=False) == frozenset()
    assert allowed_plots(("Q", "Q", "Q"), grouped=True) == frozenset()


def test_store_persists_and_reopens(fib_trace, tmp_path):
    path = str(tmp_path / "trace.db")
    store = TraceStore.ingest(fib_trace, path)
    rows = store.select_values("val")
    reopened = TraceStore.open(path)
    assert [r.id for r in reopened.select_values("val")] == [r.id for r in rows]
    assert trees_equal(reopened.reconstruct(), fib_trace.root)
    with pytest.raises(Exception):
        TraceStore.open(str(tmp_path / "missing.db"))


def test_resolve_plot_enforces_admissibility(fib_trace):
    store = TraceStore.ingest(fib_trace)
    with pytest.raises(InvalidPlotKind):
        store.resolve_plot(PlotQuery(names=("val",), plot_kind="bar"))
    payload = store.resolve_plot(PlotQuery(names=("val",), plot_kind="histogram"))
    assert payload["signature"] == ["Q"]
    assert len(payload["rows"]) == 25
    scatter = store.resolve_plot(PlotQuery(names=("val",), plot_kind="scatter", with_time=True))
    assert scatter["allowed"] == ["scatter"]
