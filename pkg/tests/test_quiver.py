import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extcat.quiver import QuiverRep, direct_sum, interval_rep, rep_decompose
from helpers import brute_force_decompose


def test_zero_maps_split_into_simples():
    rep = QuiverRep((1, 1, 0, 0), (np.zeros((1, 1), dtype=np.int64),
                                   np.zeros((0, 1), dtype=np.int64),
                                   np.zeros((0, 0), dtype=np.int64)), 2)
    assert rep_decompose(rep) == {(1, 1): 1, (2, 2): 1}


def test_identity_map_glues_to_interval():
    rep = QuiverRep((1, 1, 0, 0), (np.eye(1, dtype=np.int64),
                                   np.zeros((0, 1), dtype=np.int64),
                                   np.zeros((0, 0), dtype=np.int64)), 2)
    assert rep_decompose(rep) == {(1, 2): 1}
    # cross-check against endomorphism idempotent splitting
    assert brute_force_decompose(rep) == {(1, 2): 1}


def test_zero_representation():
    rep = QuiverRep((0, 0), (np.zeros((0, 0), dtype=np.int64),), 3)
    assert rep_decompose(rep) == {}


@pytest.mark.parametrize("p", [2, 3])
def test_interval_reps_decompose_to_themselves(p):
    for a in range(1, 5):
        for b in range(a, 5):
            rep = interval_rep(a, b, 4, p)
            assert rep_decompose(rep) == {(a, b): 1}


def small_reps(n=3, p=2, max_dim=2):
    dims = st.tuples(*[st.integers(0, max_dim) for _ in range(n)])

    def build(args):
        dims_v, seed = args
        rng = np.random.default_rng(seed)
        maps = tuple(
            rng.integers(0, p, size=(dims_v[v + 1], dims_v[v])).astype(np.int64)
            for v in range(n - 1)
        )
        return QuiverRep(tuple(dims_v), maps, p)

    return st.tuples(dims, st.integers(0, 10**6)).map(build)


@settings(max_examples=80, deadline=None)
@given(small_reps())
def test_decomposition_reconstructs_dimensions(rep):
    out = rep_decompose(rep)
    assert all(m > 0 for m in out.values())
    for v in range(rep.n):
        total = sum(m for (a, b), m in out.items() if a <= v + 1 <= b)
        assert total == rep.dims[v]


@settings(max_examples=40, deadline=None)
@given(small_reps(), small_reps())
def test_decomposition_additive_on_sums(rep1, rep2):
    combined = rep_decompose(direct_sum([rep1, rep2]))
    merged = dict(rep_decompose(rep1))
    for iv, m in rep_decompose(rep2).items():
        merged[iv] = merged.get(iv, 0) + m
    assert combined == merged


@settings(max_examples=25, deadline=None)
@given(small_reps(n=3, p=2, max_dim=1))
def test_rank_route_matches_idempotent_splitting(rep):
    assert rep_decompose(rep) == brute_force_decompose(rep)
