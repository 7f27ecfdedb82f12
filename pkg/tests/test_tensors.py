"""Tests for the 3x3 tensor kernels and samplers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rank1lab import (
    RankOnePerturbation,
    cof_directional_derivative,
    cof_rank_one_expansion,
    cofactor,
    det3,
    det_rank_one_update,
    dyad,
    dyad_compose,
    eig_sym3,
    eig_sym3_values,
    inverse,
    rank_one_factor,
    sample_gl_plus,
    sample_unit_vec,
    segment_in_gl_plus,
)
from rank1lab.errors import SamplerError, SingularMatrixError
from rank1lab.tensors import frob, gl_plus_from_rng, rng_from, unit_vec_from_rng

E1, E2, E3 = np.eye(3)

bounded = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
vec3s = arrays(np.float64, (3,), elements=bounded)
mat3s = arrays(np.float64, (3, 3), elements=bounded)
# Dyadic-rational entries: products of four of them are exact in float64,
# so identities that vanish algebraically vanish bit-exactly.
grid3s = arrays(np.float64, (3,), elements=st.integers(-16, 16).map(lambda k: k / 8.0))


# ---------------------------------------------------------------------------
# det3
# ---------------------------------------------------------------------------

def test_det_identity():
    assert det3(np.eye(3)) == 1.0


def test_det_diagonal():
    assert det3(np.diag([2.0, 3.0, 4.0])) == 24.0


def test_det_repeated_rows_singular():
    A = np.array([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    assert det3(A) == 0.0


@settings(derandomize=True, max_examples=200)
@given(mat3s)
def test_det_matches_numpy(A):
    assert det3(A) == pytest.approx(float(np.linalg.det(A)), rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------------------
# cofactor
# ---------------------------------------------------------------------------

def test_cofactor_identity():
    np.testing.assert_array_equal(cofactor(np.eye(3)), np.eye(3))


def test_cofactor_diagonal_hand_minors():
    # 2x2 minors of diag(2,3,4): (3*4, 2*4, 2*3)
    np.testing.assert_array_equal(cofactor(np.diag([2.0, 3.0, 4.0])), np.diag([12.0, 8.0, 6.0]))


@settings(derandomize=True, max_examples=200)
@given(grid3s, grid3s)
def test_cofactor_annihilates_dyads_exactly(a, b):
    np.testing.assert_array_equal(cofactor(dyad(a, b)), np.zeros((3, 3)))


@settings(derandomize=True, max_examples=200)
@given(vec3s, vec3s)
def test_cofactor_annihilates_dyads_to_ulp(a, b):
    # For arbitrary reals the vanishing minors cancel only up to rounding of
    # the intermediate products.
    scale = (np.linalg.norm(a) * np.linalg.norm(b)) ** 2
    assert np.abs(cofactor(dyad(a, b))).max() <= 1e-14 * (1.0 + scale)


@settings(derandomize=True, max_examples=200)
@given(mat3s)
def test_cofactor_defining_relation_incl_singular(A):
    lhs = A @ cofactor(A).T
    np.testing.assert_allclose(lhs, det3(A) * np.eye(3), atol=1e-12 * max(1.0, frob(A) ** 3))


def test_cofactor_multiplicative_on_samples():
    for i in range(200):
        rng = rng_from([3, i])
        A = gl_plus_from_rng(rng, 0.4)
        B = gl_plus_from_rng(rng, 0.4)
        err = frob(cofactor(A) @ cofactor(B) - cofactor(A @ B))
        assert err <= 1e-11 * frob(A) ** 2 * frob(B) ** 2


def test_cofactor_inverse_commutation_on_samples():
    for i in range(200):
        A = sample_gl_plus([4, i], 0.4)
        err = frob(inverse(cofactor(A)) - cofactor(inverse(A)))
        assert err <= 1e-11 * (1.0 + frob(inverse(A)) ** 2)


# ---------------------------------------------------------------------------
# inverse
# ---------------------------------------------------------------------------

def test_inverse_identity_exact():
    np.testing.assert_array_equal(inverse(np.eye(3)), np.eye(3))


def test_inverse_diagonal():
    np.testing.assert_allclose(
        inverse(np.diag([2.0, 4.0, 5.0])), np.diag([0.5, 0.25, 0.2]), rtol=1e-15
    )


def test_inverse_zero_matrix_raises():
    with pytest.raises(SingularMatrixError):
        inverse(np.zeros((3, 3)))


def test_inverse_scale_aware_threshold():
    # Large well-conditioned matrix must not trip the absolute threshold.
    A = 1e6 * np.eye(3)
    np.testing.assert_allclose(inverse(A), 1e-6 * np.eye(3))
    with pytest.raises(SingularMatrixError):
        inverse(1e-5 * dyad(E1, E1))


@settings(derandomize=True, max_examples=100)
@given(mat3s)
def test_inverse_roundtrip(A):
    try:
        Ainv = inverse(A)
    except SingularMatrixError:
        return
    np.testing.assert_allclose(A @ Ainv, np.eye(3), atol=1e-9 * (1.0 + frob(A) * frob(Ainv)))


# ---------------------------------------------------------------------------
# dyads
# ---------------------------------------------------------------------------

def test_dyad_basis():
    M = dyad(E1, E2)
    assert M[0, 1] == 1.0 and np.abs(M).sum() == 1.0


def test_dyad_zero_vector():
    np.testing.assert_array_equal(dyad(np.zeros(3), np.array([1.0, 2.0, 3.0])), np.zeros((3, 3)))


@settings(derandomize=True, max_examples=300)
@given(vec3s, vec3s)
def test_dyad_trace_identity(a, b):
    # <I, a(x)b> = <b, a>
    assert np.trace(dyad(a, b)) == pytest.approx(float(np.dot(b, a)), abs=1e-14)


def test_dyad_compose_basis_cases():
    np.testing.assert_array_equal(dyad_compose(E1, E2, E2, E3), dyad(E1, E3))
    np.testing.assert_array_equal(dyad_compose(E1, E2, E3, E1), np.zeros((3, 3)))


@settings(derandomize=True, max_examples=300)
@given(vec3s, vec3s, vec3s, vec3s)
def test_dyad_compose_matches_matrix_product(a, b, c, d):
    got = dyad_compose(a, b, c, d)
    want = dyad(a, b) @ dyad(c, d)
    scale = max(1.0, *(np.linalg.norm(v) for v in (a, b, c, d))) ** 4
    np.testing.assert_allclose(got, want, atol=1e-14 * scale)


# ---------------------------------------------------------------------------
# cofactor derivative and rank-one expansion
# ---------------------------------------------------------------------------

def test_cof_directional_derivative_at_identity():
    np.testing.assert_allclose(cof_directional_derivative(np.eye(3), np.eye(3)), 2.0 * np.eye(3))
    # traceless dyad: <I,H>=0 so the derivative is -H^T
    H = dyad(E1, E2)
    np.testing.assert_allclose(cof_directional_derivative(np.eye(3), H), -H.T)


def test_cof_directional_derivative_vs_fd():
    h = 1e-5
    for i in range(50):
        rng = rng_from([5, i])
        F = gl_plus_from_rng(rng, 0.4)
        H = rng.uniform(-1.0, 1.0, size=(3, 3))
        fd = (cofactor(F + h * H) - cofactor(F - h * H)) / (2.0 * h)
        closed = cof_directional_derivative(F, H)
        assert frob(closed - fd) <= 1e-6 * (1.0 + frob(closed))


def test_cof_directional_derivative_singular_raises():
    with pytest.raises(SingularMatrixError):
        cof_directional_derivative(dyad(E1, E1), np.eye(3))


def test_cof_rank_one_expansion_zero():
    np.testing.assert_array_equal(cof_rank_one_expansion(np.zeros((3, 3))), np.eye(3))


def test_cof_rank_one_expansion_basis_dyad():
    # I + (I - e1(x)e1) + 0 = diag(1,2,2) = cofactor(diag(2,1,1))
    got = cof_rank_one_expansion(dyad(E1, E1))
    np.testing.assert_array_equal(got, np.diag([1.0, 2.0, 2.0]))
    np.testing.assert_array_equal(got, cofactor(np.diag([2.0, 1.0, 1.0])))


@settings(derandomize=True, max_examples=300)
@given(mat3s)
def test_cof_rank_one_expansion_matches_cofactor(H):
    err = frob(cof_rank_one_expansion(H) - cofactor(np.eye(3) + H))
    assert err <= 1e-12 * (1.0 + frob(H) ** 2)


# ---------------------------------------------------------------------------
# rank-one updates of the determinant
# ---------------------------------------------------------------------------

def test_det_rank_one_update_identity_case():
    assert det_rank_one_update(np.eye(3), RankOnePerturbation(E1, E1)) == pytest.approx(2.0)


def test_det_rank_one_update_orthogonal_case():
    p = RankOnePerturbation(E1, E2)
    assert det_rank_one_update(np.diag([2.0, 3.0, 4.0]), p) == pytest.approx(24.0)


def test_det_rank_one_update_vs_det_oracle():
    for i in range(300):
        rng = rng_from([6, i])
        F = rng.uniform(-1.5, 1.5, size=(3, 3))  # arbitrary, possibly singular
        p = RankOnePerturbation(rng.standard_normal(3), rng.standard_normal(3))
        got = det_rank_one_update(F, p)
        want = det3(F + p.matrix)
        assert got == pytest.approx(want, abs=1e-12 * max(1.0, (frob(F) + p.amplitude) ** 3))


def test_det_affine_along_rank_one_line():
    for i in range(200):
        rng = rng_from([7, i])
        F = gl_plus_from_rng(rng, 0.4)
        p = RankOnePerturbation(unit_vec_from_rng(rng), unit_vec_from_rng(rng))
        P = p.matrix
        mid = det3(F + 0.5 * P)
        mean = 0.5 * (det3(F) + det3(F + P))
        assert mid == pytest.approx(mean, rel=1e-12, abs=1e-13)


def test_segment_in_gl_plus_cases():
    assert segment_in_gl_plus(np.eye(3), RankOnePerturbation(2 * E1, E1))
    assert not segment_in_gl_plus(np.eye(3), RankOnePerturbation(-2 * E1, E1))
    assert segment_in_gl_plus(np.eye(3), RankOnePerturbation.zero())


# ---------------------------------------------------------------------------
# RankOnePerturbation normalization
# ---------------------------------------------------------------------------

def test_perturbation_balances_norms():
    p = RankOnePerturbation(6.0 * E1, 2.0 * E2)
    assert np.linalg.norm(p.xi) == pytest.approx(np.linalg.norm(p.eta))
    assert p.amplitude == pytest.approx(12.0)
    np.testing.assert_allclose(p.matrix, 12.0 * dyad(E1, E2), rtol=1e-15)


def test_perturbation_zero_detection():
    assert RankOnePerturbation(np.zeros(3), E2).is_zero
    assert not RankOnePerturbation(E1, E2).is_zero


@settings(derandomize=True, max_examples=200)
@given(st.floats(min_value=-8.0, max_value=8.0).filter(lambda c: abs(c) > 1e-3))
def test_perturbation_gauge_invariance(c):
    xi = np.array([0.3, -1.2, 0.5])
    eta = np.array([1.0, 0.4, -0.2])
    p = RankOnePerturbation(xi, eta)
    q = RankOnePerturbation(c * xi, eta / c)
    np.testing.assert_allclose(q.matrix, p.matrix, rtol=1e-12, atol=1e-15)
    assert q.amplitude == pytest.approx(p.amplitude, rel=1e-12)


def test_perturbation_scaled():
    p = RankOnePerturbation(E1, E2)
    np.testing.assert_allclose(p.scaled(3.0).matrix, 3.0 * dyad(E1, E2), rtol=1e-15)
    np.testing.assert_allclose(p.scaled(-2.0).matrix, -2.0 * dyad(E1, E2), rtol=1e-15)
    assert p.scaled(0.0).is_zero


def test_perturbation_rejects_bad_input():
    with pytest.raises(ValueError):
        RankOnePerturbation(np.array([1.0, np.nan, 0.0]), E1)
    with pytest.raises(ValueError):
        RankOnePerturbation(np.zeros(2), E1)


# ---------------------------------------------------------------------------
# rank_one_factor
# ---------------------------------------------------------------------------

def test_rank_one_factor_scaled_basis_dyad():
    out = rank_one_factor(3.0 * dyad(E1, E2))
    assert out is not None
    a, b = out
    s = math.sqrt(3.0)
    sign = np.sign(a[0]) or 1.0
    np.testing.assert_allclose(sign * a, s * E1, atol=1e-12)
    np.testing.assert_allclose(sign * b, s * E2, atol=1e-12)


def test_rank_one_factor_full_rank_absent():
    assert rank_one_factor(np.eye(3)) is None


def test_rank_one_factor_zero_matrix():
    a, b = rank_one_factor(np.zeros((3, 3)))
    assert np.all(a == 0.0) and np.all(b == 0.0)


def test_rank_one_factor_reconstructs_random_dyads():
    for i in range(100):
        rng = rng_from([8, i])
        A = dyad(rng.standard_normal(3), rng.standard_normal(3))
        out = rank_one_factor(A)
        assert out is not None
        a, b = out
        assert frob(A - dyad(a, b)) <= 1e-9 * max(frob(A), 1e-30)
        assert np.linalg.norm(a) == pytest.approx(np.linalg.norm(b), rel=1e-12)


def test_rank_one_factor_rejects_rank_two():
    A = dyad(E1, E1) + dyad(E2, E2)
    assert rank_one_factor(A) is None


# ---------------------------------------------------------------------------
# symmetric eigensolver
# ---------------------------------------------------------------------------

def test_eig_sym3_matches_numpy_on_random_spd():
    for i in range(200):
        F = sample_gl_plus([9, i], 0.4)
        B = F @ F.T
        w, V = eig_sym3(B)
        w_np = np.linalg.eigvalsh(B)
        np.testing.assert_allclose(w, w_np, rtol=1e-10, atol=1e-12)
        for k in range(3):
            res = np.linalg.norm(B @ V[:, k] - w[k] * V[:, k])
            assert res <= 1e-12 * max(1.0, frob(B))
        np.testing.assert_allclose(V.T @ V, np.eye(3), atol=1e-10)


@pytest.mark.parametrize(
    "A",
    [
        np.diag([2.0, 2.0, 2.0]),
        np.diag([1.0, 1.0, 3.0]),
        np.diag([5.0, 1.0, 1.0]),
        np.zeros((3, 3)),
    ],
)
def test_eig_sym3_degenerate_spectra(A):
    w, V = eig_sym3(A)
    np.testing.assert_allclose(w, np.sort(np.linalg.eigvalsh(A)), atol=1e-14)
    for k in range(3):
        res = np.linalg.norm(A @ V[:, k] - w[k] * V[:, k])
        assert res <= 1e-12 * max(1.0, frob(A))
    np.testing.assert_allclose(V.T @ V, np.eye(3), atol=1e-12)


def test_eig_sym3_values_sorted():
    A = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 1.0]])
    w = eig_sym3_values(A)
    assert w[0] <= w[1] <= w[2]


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def test_sample_gl_plus_deterministic():
    np.testing.assert_array_equal(sample_gl_plus(123, 0.4), sample_gl_plus(123, 0.4))


def test_sample_gl_plus_small_spread_near_identity():
    F = sample_gl_plus(5, 0.001)
    assert frob(F - np.eye(3)) < 0.01


def test_sample_gl_plus_det_floor():
    # 10^4 draws at spread 0.4 all keep det >= 0.1 by rejection.
    dets = [det3(sample_gl_plus([10, i], 0.4)) for i in range(10000)]
    assert min(dets) >= 0.1


def test_sample_gl_plus_rejects_bad_spread():
    with pytest.raises(ValueError):
        sample_gl_plus(1, 0.0)
    with pytest.raises(ValueError):
        sample_gl_plus(1, 1.0)


def test_sampler_failure_when_budget_exhausted():
    # Hunt a seed whose first draw violates the det floor, then forbid retries.
    for seed in range(1000):
        rng = rng_from(seed)
        F = np.eye(3) + 0.99 * rng.uniform(-1.0, 1.0, size=(3, 3))
        if det3(F) < 0.1:
            with pytest.raises(SamplerError):
                gl_plus_from_rng(rng_from(seed), 0.99, max_tries=1)
            return
    pytest.fail("no rejecting seed found")


def test_sample_unit_vec_unit_norm_and_deterministic():
    v = sample_unit_vec(77)
    assert np.linalg.norm(v) == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_array_equal(v, sample_unit_vec(77))
