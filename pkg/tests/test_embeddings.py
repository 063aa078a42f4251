import json
import math

import numpy as np
import pytest

from ripbench import embeddings as em
from ripbench import model_sets as ms


# ---------------------------------------------------------------------------
# distributions
# ---------------------------------------------------------------------------

def test_sparse_pm_q1_is_rademacher():
    x = em.sample_dist(em.sparse_pm(1.0), (10_000,), seed=1)
    assert set(np.unique(x)) == {-1.0, 1.0}
    assert np.all(x * x == 1.0)


def test_sparse_pm_q4_frequencies():
    x = em.sample_dist(em.sparse_pm(4.0), (1_000_000,), seed=2)
    assert abs(np.mean(x == 0.0) - 0.75) < 0.002
    assert abs(np.mean(x * x) - 1.0) < 0.01


def test_gaussian_fourth_moment():
    x = em.sample_dist(em.gaussian(), (1_000_000,), seed=3)
    assert abs(np.mean(x**4) - 3.0) < 0.05


def test_sparse_pm_moments_exact_enumeration():
    # three-point law: E X^{2k} = (1/q) * q^k = q^{k-1}
    for q in (1.0, 2.0, 4.0, 9.0):
        vals = np.array([0.0, math.sqrt(q), -math.sqrt(q)])
        probs = np.array([(q - 1.0) / q, 1.0 / (2.0 * q), 1.0 / (2.0 * q)])
        assert abs(probs.sum() - 1.0) < 1e-15
        assert abs(float(probs @ vals) - 0.0) < 1e-15
        for k in (1, 2, 3, 5):
            assert abs(float(probs @ vals ** (2 * k)) - q ** (k - 1)) < 1e-9 * q**k


def test_dist_rejects_bad_q():
    with pytest.raises(ValueError):
        em.sparse_pm(0.5)


# ---------------------------------------------------------------------------
# stage one
# ---------------------------------------------------------------------------

def test_stage_one_canonical_orthonormal():
    rows = np.eye(5)[:3]
    so = em.build_stage_one(rows)
    assert so.is_orthonormal
    np.testing.assert_allclose(so.gram, np.eye(3), atol=1e-12)


def test_stage_one_gram_values():
    rows = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]])
    so = em.build_stage_one(rows)
    np.testing.assert_allclose(so.gram, [[1.0, 1.0], [1.0, 2.0]], atol=1e-12)
    assert not so.is_orthonormal


def test_stage_one_random_condition_finite():
    rng = np.random.default_rng(5)
    so = em.build_stage_one(rng.standard_normal((4, 200)))
    assert np.isfinite(so.cond)


def test_stage_one_rejects_dependent_rows():
    rows = np.array([[1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(ValueError):
        em.build_stage_one(rows)


def test_b_norm_orthonormal_euclidean():
    so = em.build_stage_one(np.eye(4)[:2])
    assert abs(em.b_norm(so, np.array([3.0, 4.0])) - 5.0) < 1e-12


def test_b_norm_min_preimage_scaling():
    # rows {2 e1}: preimage of y=2 with least norm is e1
    so = em.build_stage_one(np.array([[2.0, 0.0]]))
    assert abs(em.b_norm(so, np.array([2.0])) - 1.0) < 1e-12


def test_b_norm_matches_projection_oracle():
    rng = np.random.default_rng(7)
    for _ in range(100):
        B = rng.standard_normal((3, 8))
        so = em.build_stage_one(B)
        P = B.T @ np.linalg.solve(so.gram, B)  # orthogonal projector onto the row span
        for _ in range(100):
            x = rng.standard_normal(8)
            lhs = em.b_norm(so, em.apply_stage_one(so, x))
            assert abs(lhs - np.linalg.norm(P @ x)) < 1e-10
            assert lhs <= np.linalg.norm(x) + 1e-12


def test_b_dual_norm_values():
    so = em.build_stage_one(np.eye(3)[:2])
    assert abs(em.b_dual_norm(so, np.array([1.0, 0.0])) - 1.0) < 1e-12
    so2 = em.build_stage_one(np.array([[2.0, 0.0]]))
    assert abs(em.b_dual_norm(so2, np.array([1.0])) - 2.0) < 1e-12


def test_b_holder_inequality():
    rng = np.random.default_rng(11)
    B = rng.standard_normal((4, 12))
    so = em.build_stage_one(B)
    for _ in range(10_000):
        a = rng.standard_normal(4)
        y = rng.standard_normal(4)
        assert abs(a @ y) <= em.b_dual_norm(so, a) * em.b_norm(so, y) + 1e-10


def test_stage_one_from_net_lower_bound():
    # V spanned by a net of S at radius eps*: ||b(x)||_b >= 1 - eps* on S
    pts = ms.sample_sparse_unit(10, 2, 200, seed=17)
    eps_star = 0.5
    net = ms.greedy_net(pts, eps_star)
    so = em.build_stage_one_from_span(np.array(net.centers))
    for x in pts:
        assert em.b_norm(so, em.apply_stage_one(so, x)) >= 1.0 - eps_star - 1e-10


# ---------------------------------------------------------------------------
# measurement maps
# ---------------------------------------------------------------------------

def test_two_stage_identity_variant():
    # matrix sqrt(m) * I with p=2 scaling 1/sqrt(m) acts as the identity
    n = 6
    L = em.MeasurementMap(
        variant="two_stage", m=n, dist=em.gaussian(), seed=0, p_scale=2,
        stage_one=None, ambient_dim=n, matrix=math.sqrt(n) * np.eye(n),
    )
    x = np.arange(1.0, n + 1.0)
    np.testing.assert_allclose(em.apply(L, x), x, atol=1e-12)


def test_two_stage_scaling_by_p():
    so = em.build_stage_one(np.eye(4)[:2])
    x = np.array([1.0, 2.0, 0.0, 0.0])
    L1 = em.two_stage_map(so, em.gaussian(), 9, p=1, seed=42)
    L2 = em.two_stage_map(so, em.gaussian(), 9, p=2, seed=42)
    np.testing.assert_array_equal(L1.matrix, L2.matrix)
    np.testing.assert_allclose(em.apply(L2, x), em.apply(L1, x) * 3.0, atol=1e-14)


def test_two_stage_m1_p1_no_scaling():
    L = em.two_stage_map(None, em.gaussian(), 1, p=1, seed=4, ambient_dim=3)
    x = np.array([1.0, -2.0, 0.5])
    assert abs(em.apply(L, x)[0] - float(L.matrix[0] @ x)) < 1e-14


def test_apply_zero_vector():
    L = em.two_stage_map(None, em.gaussian(), 8, p=2, seed=4, ambient_dim=5)
    np.testing.assert_array_equal(em.apply(L, np.zeros(5)), np.zeros(8))


def test_apply_kernel_of_stage_one():
    so = em.build_stage_one(np.eye(4)[:2])
    L = em.two_stage_map(so, em.gaussian(), 6, p=2, seed=4)
    x = np.array([0.0, 0.0, 1.0, -2.0])  # orthogonal to the span
    np.testing.assert_allclose(em.apply(L, x), np.zeros(6), atol=1e-14)


def test_apply_linearity():
    rng = np.random.default_rng(9)
    L = em.two_stage_map(None, em.sparse_pm(4.0), 16, p=2, seed=10, ambient_dim=12)
    for _ in range(50):
        x, y = rng.standard_normal(12), rng.standard_normal(12)
        a, b = rng.standard_normal(2)
        lhs = em.apply(L, a * x + b * y)
        rhs = a * em.apply(L, x) + b * em.apply(L, y)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * (np.linalg.norm(x) + np.linalg.norm(y))


def test_rank_one_bilinear_exact():
    L = em.rank_one_map(1, 3, 4, em.gaussian(), seed=6)
    M = np.arange(12.0).reshape(3, 4)
    want = float(L.a_vecs[0] @ M @ L.b_vecs[0])
    assert abs(em.apply(L, M)[0] - want) < 1e-12


def test_rank_one_single_entry_product():
    L = em.rank_one_map(500, 4, 4, em.gaussian(), seed=8)
    M = np.zeros((4, 4))
    M[0, 0] = 1.0
    y = em.apply(L, M) * 500
    np.testing.assert_allclose(y, L.a_vecs[:, 0] * L.b_vecs[:, 0], atol=1e-12)


def test_rank_one_storage_cost():
    L = em.rank_one_map(7, 5, 9, em.gaussian(), seed=1)
    assert em.storage_cost(L) == 7 * (5 + 9)


def test_rows_extendable_in_m():
    La = em.two_stage_map(None, em.gaussian(), 4, p=2, seed=33, ambient_dim=5)
    Lb = em.two_stage_map(None, em.gaussian(), 8, p=2, seed=33, ambient_dim=5)
    np.testing.assert_array_equal(La.matrix, Lb.matrix[:4])


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

def test_descriptor_roundtrip_two_stage():
    so = em.build_stage_one(np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]]))
    L = em.two_stage_map(so, em.sparse_pm(4.0), 10, p=1, seed=77)
    d = json.loads(em.map_to_descriptor(L))
    assert {"variant", "m", "dims", "dist", "seed", "p_scale"} <= set(d)
    back = em.map_from_descriptor(em.map_to_descriptor(L))
    np.testing.assert_array_equal(L.matrix, back.matrix)
    np.testing.assert_array_equal(L.stage_one.basis_block, back.stage_one.basis_block)
    x = np.array([0.3, -1.2, 0.0])
    np.testing.assert_array_equal(em.apply(L, x), em.apply(back, x))


def test_descriptor_roundtrip_rank_one():
    L = em.rank_one_map(6, 3, 5, em.gaussian(), seed=13)
    back = em.map_from_descriptor(em.map_to_descriptor(L))
    np.testing.assert_array_equal(L.a_vecs, back.a_vecs)
    np.testing.assert_array_equal(L.b_vecs, back.b_vecs)
