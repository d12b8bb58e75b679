import types

import numpy as np
import pytest

from k2triples.triplestore import (
    FORMAT_VERSION,
    StoreFormatError,
    TriplePattern,
    TripleStore,
    build_store,
    dump_store,
    load_store,
    solve_pattern,
    tree_access_count,
)
from conftest import random_store
from oracles import scan_pattern

FORMS = ["SPO", "SP?O", "?SPO", "?SP?O", "S?PO", "S?P?O", "?S?PO", "?S?P?O"]


def instantiate(form, triple):
    s, p, o = triple
    return TriplePattern(
        "s" if form.startswith("?S") else s,
        "p" if "?P" in form else p,
        "o" if form.endswith("?O") else o,
    )


def test_figure3_trees(figure2):
    store, _ = figure2
    assert len(store.trees) == 3
    assert store.trees[1].points() == [(0, 4), (1, 3), (2, 5)]
    assert store.n == 16 and store.side == 6


def test_figure3_patterns(figure2):
    store, _ = figure2
    assert list(store.solve((2, 2, 4))) == [(2, 2, 4)]
    assert list(store.solve((1, 2, "o"))) == [(1, 2, 5)]
    assert list(store.solve(("s", 2, "o"))) == [(1, 2, 5), (2, 2, 4), (3, 2, 6)]
    assert list(store.solve((2, 2, 5))) == []
    assert store.objects(1, 2) == [5]
    assert store.subjects(2, 6) == [3]
    assert list(store.solve((1, "p", "o"))) == [(1, 2, 5), (1, 3, 2)]


def test_empty_dataset():
    store = build_store([], (0, 0, 0, 5))
    assert len(store.trees) == 5
    assert all(t.ones == 0 for t in store.trees)
    for form in FORMS:
        assert list(store.solve(instantiate(form, (1, 1, 1)))) == []


def test_membership_vs_hash_set(rng):
    sizes = (300, 200, 500, 20)
    store, arr = random_store(rng, 10_000, sizes)
    present = set(map(tuple, arr.tolist()))
    for t in present:
        assert store.contains(*t)
    absent = 0
    while absent < 5000:
        t = (int(rng.integers(1, 501)), int(rng.integers(1, 21)), int(rng.integers(1, 801)))
        if t not in present:
            assert not store.contains(*t)
            absent += 1


@pytest.mark.parametrize("k", [2, 3])
def test_all_forms_vs_linear_scan(rng, k):
    sizes = (100, 50, 150, 7)
    store, arr = random_store(rng, 3000, sizes, k=k)
    for form in FORMS:
        for _ in range(40):
            if rng.random() < 0.8:
                base = tuple(arr[rng.integers(len(arr))].tolist())
            else:
                base = (int(rng.integers(1, 151)), int(rng.integers(1, 8)), int(rng.integers(1, 251)))
            pat = instantiate(form, base)
            assert list(store.solve(pat)) == scan_pattern(arr, pat), (form, pat)


def test_completeness(rng):
    store, arr = random_store(rng, 2000, (50, 50, 80, 6))
    union = set()
    for p in range(1, 7):
        union |= set(store.solve(("s", p, "o")))
    assert union == set(map(tuple, arr.tolist()))


def test_order_and_role_range(rng):
    store, arr = random_store(rng, 2000, (50, 30, 80, 6))
    for s, p, o in arr[:200].tolist():
        objs = [t[2] for t in store.solve((s, p, "o"))]
        subs = [t[0] for t in store.solve(("s", p, o))]
        assert all(a < b for a, b in zip(objs, objs[1:]))
        assert all(a < b for a, b in zip(subs, subs[1:]))
    for s, _, o in store.solve(("s", "p", "o")):
        assert s <= store.max_subject_id and o <= store.max_object_id
    assert len({t.n for t in store.trees}) == 1


def test_tree_access_counts(figure2):
    store, _ = figure2
    assert tree_access_count(store, (1, 2, "o")) == 1
    assert tree_access_count(store, (2, "p", 4)) == 3
    assert store.tree_access_count(("s", "p", "o")) == 3


def test_bad_predicate_rejected(figure2):
    store, _ = figure2
    for p in (0, 4):
        with pytest.raises(ValueError):
            store.solve((1, p, "o"))


def test_foreign_ids_give_empty(figure2):
    store, _ = figure2
    # Subject IDs stop at 3 and object IDs at 6.
    assert list(store.solve((5, 2, "o"))) == []
    assert list(store.solve(("s", "p", 9))) == []
    with pytest.raises(ValueError):
        store.solve((0, 1, "o"))


def test_solve_is_lazy(figure2):
    store, _ = figure2
    stream = solve_pattern(store, ("s", "p", "o"))
    assert isinstance(stream, types.GeneratorType)
    assert next(stream) == (2, 1, 1)


def test_build_rejects_out_of_range():
    with pytest.raises(ValueError, match=r"\(4, 1, 1\)"):
        build_store([(1, 1, 1), (4, 1, 1)], (1, 2, 2, 1))
    with pytest.raises(ValueError):
        build_store([(1, 2, 1)], (1, 2, 2, 1))


def test_build_sorts_out_duplicates():
    store = build_store([(1, 1, 1), (1, 1, 1)], (1, 0, 0, 1))
    assert len(store) == 1


def test_store_file_round_trip(figure2, rng):
    store, dictionary = figure2
    raw = dump_store(store, dictionary)
    assert raw[:4] == b"K2TS"
    assert int.from_bytes(raw[4:8], "little") == FORMAT_VERSION
    back, back_dict = load_store(raw)
    assert back_dict == dictionary
    assert dump_store(back, back_dict) == raw
    for form in FORMS:
        pat = instantiate(form, (1, 2, 5))
        assert list(back.solve(pat)) == list(store.solve(pat))

    id_store, _ = random_store(rng, 500, (20, 10, 30, 4))
    raw = dump_store(id_store)
    back, no_dict = load_store(raw)
    assert no_dict is None
    assert dump_store(back) == raw


def test_store_file_layout(figure2):
    store, dictionary = figure2
    raw = dump_store(store, dictionary)
    assert [int.from_bytes(raw[8 + 8 * i:16 + 8 * i], "little") for i in range(4)] == [1, 2, 5, 3]
    assert int.from_bytes(raw[40:42], "little") == 4
    size = int.from_bytes(raw[42:50], "little")
    assert raw[50:50 + size] == store.trees[0].to_bytes()


@pytest.mark.parametrize("mangle", [
    lambda b: b"XXXX" + b[4:],
    lambda b: b[:4] + (99).to_bytes(4, "little") + b[8:],
    lambda b: b[:30],
    lambda b: b[:-3],
    lambda b: b + b"\x00",
])
def test_corrupt_files(figure2, mangle):
    store, dictionary = figure2
    with pytest.raises(StoreFormatError):
        load_store(mangle(dump_store(store, dictionary)))


def test_mismatched_dictionary_rejected(figure2):
    store, _ = figure2
    other = build_store([], (0, 0, 0, 3), k=4)
    with pytest.raises(ValueError):
        dump_store(other, figure2[1])


def test_numpy_ids_accepted(rng):
    store, arr = random_store(rng, 100, (5, 5, 5, 2))
    s, p, o = (np.int64(x) for x in arr[0])
    assert store.contains(s, p, o)
