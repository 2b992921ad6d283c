import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import average_precision_score, roc_auc_score

import oracles
from hdgl.hdvec import ConstantZero, DimensionError, PackedHypervectors, SeededRandom, bind, hamming, random_hypervector
from hdgl.linkpred import (
    AdjacencyTooLarge,
    adjacency_rule,
    auc_roc,
    average_precision,
    build_edge_memory,
    full_adjacency,
    sample_non_edges,
    score_pairs,
)

TIE = SeededRandom(9)


def sigmoid(x):
    return 1 / (1 + np.exp(-x))


def table(n, dim=20000, seed=0):
    return PackedHypervectors.from_vectors([random_hypervector(dim, seed * 100_000 + i) for i in range(n)])


def test_single_edge_memory():
    Z = table(3, dim=500)
    em = build_edge_memory(Z, [(1, 2)], [(0, 1)], TIE)
    assert em.e_plus == bind(Z[1], Z[2])
    assert em.e_minus == bind(Z[0], Z[1])
    assert (em.pos_count, em.neg_count) == (1, 1)


def test_orientation_irrelevant():
    Z = table(8, dim=300)
    pos = [(1, 2), (3, 6), (5, 7), (0, 4)]
    a = build_edge_memory(Z, pos, [(0, 1)], TIE)
    b = build_edge_memory(Z, [(v, u) for u, v in pos], [(1, 0)], TIE)
    assert a == b


def test_memory_matches_counting_oracle(rng):
    Z = table(12, dim=150)
    pairs = [tuple(rng.choice(12, 2, replace=False).tolist()) for _ in range(6)]
    em = build_edge_memory(Z, pairs, pairs[:3], TIE)
    rows = [[int(b) for b in Z[i].bits()] for i in range(12)]
    bound = [oracles.xor(rows[u], rows[v]) for u, v in pairs]
    assert [int(b) for b in em.e_plus.bits()] == oracles.vote(bound, TIE, 1)
    assert [int(b) for b in em.e_minus.bits()] == oracles.vote(bound[:3], TIE, 2)


def test_empty_lists_rejected():
    Z = table(3, dim=64)
    with pytest.raises(ValueError):
        build_edge_memory(Z, [], [(0, 1)], TIE)
    with pytest.raises(ValueError):
        build_edge_memory(Z, [(0, 1)], [], TIE)


def test_seven_node_recovery():
    # nodes 1..7 with edges (1,2), (3,6), (5,7); index 0 unused
    Z = table(8)
    em = build_edge_memory(Z, [(1, 2), (3, 6), (5, 7)], [(1, 3)], TIE)
    probe = bind(em.e_plus, Z[1])
    d_true = hamming(probe, Z[2])
    assert all(d_true < hamming(probe, Z[j]) for j in range(1, 8) if j not in (1, 2))


def test_retrieval_k25():
    Z = table(200, seed=3)
    perm = np.random.default_rng(0).permutation(200)
    edges = perm[:50].reshape(25, 2)
    em = build_edge_memory(Z, edges, [(0, 1)], TIE)
    hits = 0
    for u, v in edges.tolist():
        probe = bind(em.e_plus, Z[u])
        d = np.array([hamming(probe, Z[j]) for j in range(200)])
        others = np.delete(d, [u, v])
        hits += d[v] < others.min()
    assert hits / 25 >= 0.95


def test_rule_examples():
    assert adjacency_rule(0.2, 0.6) == pytest.approx(sigmoid(1.4))
    assert adjacency_rule(0.2, 0.6) == pytest.approx(0.8022, abs=1e-4)
    assert adjacency_rule(0.6, 0.2) == pytest.approx(0.4502, abs=1e-4)
    for t in (0.0, 0.3, 0.5, 1.0):
        assert adjacency_rule(t, t) == pytest.approx(sigmoid(2 * t - 1))


def test_rule_range_endpoints_attained():
    assert adjacency_rule(0.0, 0.0) == pytest.approx(sigmoid(-1))
    assert adjacency_rule(0.0, 1.0) == pytest.approx(sigmoid(2))


unit = st.floats(0, 1, allow_nan=False)


@settings(max_examples=200)
@given(unit, unit)
def test_rule_range(dp, dm):
    a = float(adjacency_rule(dp, dm))
    assert sigmoid(-1) - 1e-12 <= a <= sigmoid(2) + 1e-12


@settings(max_examples=200)
@given(unit, unit, st.floats(1e-3, 0.2))
def test_rule_monotone_on_positive_branch(dp, dm, eps):
    # closer to e_plus than e_minus: lower d_plus or higher d_minus raises the score
    if dp + eps < dm:
        assert adjacency_rule(dp, dm) > adjacency_rule(dp + eps, dm)
        if dm + eps <= 1:
            assert adjacency_rule(dp, dm + eps) > adjacency_rule(dp, dm)


@settings(max_examples=200)
@given(unit, unit, st.floats(1e-3, 0.2))
def test_rule_increasing_in_d_minus_on_other_branch(dp, dm, eps):
    if dp >= dm + eps:
        assert adjacency_rule(dp, dm + eps) > adjacency_rule(dp, dm)


def test_scores_symmetric_and_finite():
    Z = table(20, dim=1000)
    em = build_edge_memory(Z, [(0, 1), (2, 3), (4, 5)], [(0, 7), (8, 9), (1, 3)], TIE)
    pairs = [(u, v) for u in range(20) for v in range(20)]
    s = score_pairs(Z, em, pairs)
    r = score_pairs(Z, em, [(v, u) for u, v in pairs])
    assert np.array_equal(s.a_hat, r.a_hat)
    assert np.isfinite(s.a_hat).all()
    assert ((0 <= s.d_plus) & (s.d_plus <= 1)).all()


def test_score_definition():
    Z = table(4, dim=700)
    em = build_edge_memory(Z, [(0, 1)], [(2, 3)], TIE)
    s = score_pairs(Z, em, [(1, 2)])
    assert s.d_plus[0] == hamming(bind(Z[1], em.e_plus), Z[2])
    assert s.d_minus[0] == hamming(bind(Z[1], em.e_minus), Z[2])


def test_full_adjacency_matches_pairs():
    Z = table(20, dim=900)
    em = build_edge_memory(Z, [(0, 1), (2, 3), (5, 6)], [(0, 9), (4, 8), (7, 3)], TIE)
    a = full_adjacency(Z, em)
    for u in range(20):
        for v in range(20):
            assert a[u, v] == score_pairs(Z, em, [(u, v)]).a_hat[0]


def test_full_adjacency_identical_embeddings_constant():
    z = random_hypervector(256, 1)
    Z = PackedHypervectors.from_vectors([z] * 3)
    em = build_edge_memory(Z, [(0, 1)], [(1, 2)], ConstantZero())
    a = full_adjacency(Z, em)
    assert np.all(a == a[0, 0])


def test_full_adjacency_guard():
    Z = table(30, dim=64)
    em = build_edge_memory(Z, [(0, 1)], [(1, 2)], TIE)
    with pytest.raises(AdjacencyTooLarge, match="30x30"):
        full_adjacency(Z, em, max_entries=100)


def test_dimension_mismatch():
    em = build_edge_memory(table(3, dim=64), [(0, 1)], [(1, 2)], TIE)
    with pytest.raises(DimensionError):
        score_pairs(table(3, dim=65), em, [(0, 1)])


def test_non_edge_sampling():
    edges = np.array([(0, 1), (1, 2), (2, 3)])
    neg = sample_non_edges(10, edges, 20, seed=3)
    assert len(neg) == 20
    keys = {tuple(p) for p in neg.tolist()}
    assert len(keys) == 20
    assert all(u < v for u, v in keys)
    assert not keys & {(0, 1), (1, 2), (2, 3)}
    assert np.array_equal(neg, sample_non_edges(10, edges, 20, seed=3))
    with pytest.raises(ValueError):
        sample_non_edges(4, edges, 4, seed=0)


def test_metric_examples():
    assert auc_roc([0.9, 0.8, 0.3], [1, 1, 0]) == 1.0
    assert average_precision([0.9, 0.8, 0.3], [1, 1, 0]) == 1.0
    assert auc_roc([0.9, 0.6, 0.2], [1, 0, 1]) == 0.5
    assert auc_roc([0.4] * 5, [1, 0, 1, 0, 0]) == 0.5


def test_metrics_need_both_classes():
    with pytest.raises(ValueError):
        auc_roc([0.1, 0.2], [1, 1])
    with pytest.raises(ValueError):
        average_precision([0.1, 0.2], [0, 0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 1)), min_size=2, max_size=40))
def test_metrics_match_oracles(rows):
    scores = [s / 6 for s, _ in rows]
    labels = [y for _, y in rows]
    if len(set(labels)) < 2:
        return
    assert auc_roc(scores, labels) == pytest.approx(oracles.pairwise_auc(scores, labels), abs=1e-12)
    assert auc_roc(scores, labels) == pytest.approx(roc_auc_score(labels, scores), abs=1e-12)
    assert average_precision(scores, labels) == pytest.approx(
        oracles.step_average_precision(scores, labels), abs=1e-12)
    assert average_precision(scores, labels) == pytest.approx(
        average_precision_score(labels, scores), abs=1e-12)
