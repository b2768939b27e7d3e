import io
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hocn import (Graph, RunningState, ScaleError, apply_normalization,
                  cn_order_features, exact_walk_participation,
                  heuristic_score, normalized_cn_score, running_counts,
                  update_running_participation)
from hocn.features import as_dense

from conftest import batch_of, nonadjacent_pairs, random_graph


def brute_force_participation(g: Graph, k: int, exclude_endpoints: bool) -> np.ndarray:
    """Ordered-pair column sums computed directly from the feature pipeline."""
    counts = np.zeros(g.n)
    pairs = list(combinations(range(g.n), 2))
    if not pairs:
        return counts
    feats = cn_order_features(g, batch_of(pairs), k,
                              exclude_endpoints=exclude_endpoints)
    # combined is symmetric in the pair, so ordered totals double the sums
    counts += 2.0 * np.asarray(as_dense(feats.combined)).sum(axis=0)
    return counts


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("exclude", [False, True])
def test_exact_participation_matches_brute_force(seed, k, exclude):
    g = random_graph(5 + seed, 0.45, seed=seed)
    got = exact_walk_participation(g, k, exclude_endpoints=exclude).counts
    want = brute_force_participation(g, k, exclude)
    assert np.allclose(got, want), (seed, k, exclude)


def test_participation_order_one_is_degree_pairs(g4):
    got = exact_walk_participation(g4, 1, exclude_endpoints=True).counts
    d = g4.degrees.astype(float)
    assert np.allclose(got, d * (d - 1))
    assert list(got) == [2.0, 2.0, 6.0, 0.0]


def test_participation_node_limit():
    g = random_graph(12, 0.3, seed=0)
    with pytest.raises(ScaleError):
        exact_walk_participation(g, 2, node_limit=10)


def test_running_estimate_is_batch_mean(g4):
    state = RunningState()
    batches = [batch_of([(0, 2), (1, 3)]), batch_of([(0, 3)]),
               batch_of([(1, 3), (0, 2), (0, 1)])]
    sums = []
    for b in batches:
        feats = cn_order_features(g4, b, 2)
        sums.append(np.asarray(as_dense(feats.combined)).sum(axis=0))
        update_running_participation(state, feats)
    counts = running_counts(state, 2)
    assert counts.mode == "running"
    assert np.allclose(counts.counts, np.mean(sums, axis=0))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.0, 1e6), min_size=1, max_size=30))
def test_running_gain_equals_arithmetic_mean(values):
    # the 1/(1+t) gain makes the scalar recurrence an exact running mean
    est = 0.0
    for t, v in enumerate(values):
        gamma = 1.0 / (1 + t)
        est = (1.0 - gamma) * est + gamma * v
    assert est == pytest.approx(np.mean(values), rel=1e-9, abs=1e-9)


def test_apply_normalization_divides_columns(g4):
    feats = cn_order_features(g4, batch_of([(0, 2), (1, 3)]), 1)
    part = exact_walk_participation(g4, 1, exclude_endpoints=False)
    normed = apply_normalization(feats, part)
    raw = as_dense(feats.combined)
    got = as_dense(normed.combined)
    expect = raw / np.maximum(part.counts, 1e-12)
    assert np.allclose(got, expect)
    assert (got[raw == 0] == 0).all()


def test_normalization_epsilon_guards_zero_columns(g4):
    feats = cn_order_features(g4, batch_of([(0, 2)]), 1)
    part = exact_walk_participation(g4, 1, exclude_endpoints=True)
    assert part.counts[3] == 0.0  # leaf never participates with endpoints excluded
    normed = apply_normalization(feats, part)
    assert np.isfinite(as_dense(normed.combined)).all()


def test_g4_degeneracy_hand_value(g4):
    # single common neighbor of degree 2: corrected term is 1/2
    assert normalized_cn_score(g4, 0, 2, 1, degree_corrected=True) == 0.5
    assert heuristic_score(g4, (0, 2), "ra") == 0.5


@pytest.mark.parametrize("seed", range(5))
def test_ra_degeneracy_on_random_graphs(seed):
    g = random_graph(10 + 8 * seed, 0.15, seed=seed)
    part = exact_walk_participation(g, 1, exclude_endpoints=True)
    for u, v in nonadjacent_pairs(g):
        ra = heuristic_score(g, (u, v), "ra")
        corrected = normalized_cn_score(g, u, v, 1, participation=part,
                                        degree_corrected=True)
        assert abs(ra - corrected) <= 1e-12


def test_normalized_score_zero_without_members():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert normalized_cn_score(g, 0, 2, 1) == 0.0


def test_participation_csv_round_trip(g4):
    part = exact_walk_participation(g4, 1)
    buf = io.StringIO()
    part.write_csv(buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "node,k,count,mode"
    assert len(lines) == g4.n + 1
    assert lines[1].startswith("0,1,")
