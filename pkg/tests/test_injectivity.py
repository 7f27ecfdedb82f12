"""Tests for the exchange identity, collision searches, twin checks, and the
pressure scans."""

import math

import numpy as np
import pytest

from rank1lab import (
    BlatzKoUniConstant,
    CompressibleNeoHooke,
    RankOnePerturbation,
    SaintVenantKirchhoff,
    ScanConfig,
    VolumetricCubic,
    blatzko_pressure_scan,
    cauchy,
    cauchy_gap_along_line,
    injectivity_search,
    pressure_compression_check,
    rank_one_factor,
    theorem_identity_gap,
    twin_check,
    twin_det_contradiction,
)
from rank1lab.errors import DomainError
from rank1lab.injectivity import sample_admissible_perturbation
from rank1lab.tensors import det3, frob, gl_plus_from_rng, rng_from

E1, E2, E3 = np.eye(3)

ALL_MODELS = [
    BlatzKoUniConstant(1.0),
    CompressibleNeoHooke(1.0, 1.0),
    SaintVenantKirchhoff(1.0, 1.0),
    VolumetricCubic(1.0),
]


# ---------------------------------------------------------------------------
# exchange identity
# ---------------------------------------------------------------------------

def test_theorem_identity_zero_perturbation_exact():
    for model in ALL_MODELS:
        assert theorem_identity_gap(model, np.eye(3), RankOnePerturbation.zero()) == 0.0


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.name)
def test_theorem_identity_holds_for_every_model(model):
    for i in range(1000):
        rng = rng_from([61, i])
        F = gl_plus_from_rng(rng, 0.4)
        p = sample_admissible_perturbation(rng, F)
        gap = theorem_identity_gap(model, F, p)
        assert gap <= 1e-9 * model.stress_scale * max(1.0, frob(F) ** 3)


def test_theorem_identity_volumetric_collision_both_sides_vanish():
    # at the closed-form collision both the stress difference and the
    # monotonicity gap vanish individually
    m = VolumetricCubic(1.0)
    p = RankOnePerturbation(2.0 * E1, E1)
    P = p.matrix
    sigma_gap = frob(cauchy(m, np.eye(3) + P) - cauchy(m, np.eye(3)))
    mono = float(np.multiply(m.piola(np.eye(3) + P) - m.piola(np.eye(3)), P).sum())
    assert sigma_gap <= 1e-12
    assert abs(mono) <= 1e-12
    assert theorem_identity_gap(m, np.eye(3), p) <= 1e-12


def test_theorem_identity_domain_error():
    with pytest.raises(DomainError):
        theorem_identity_gap(BlatzKoUniConstant(1.0), np.eye(3), RankOnePerturbation(-2.0 * E1, E1))


# ---------------------------------------------------------------------------
# Cauchy gap along a line
# ---------------------------------------------------------------------------

def test_cauchy_gap_zero_at_origin():
    m = BlatzKoUniConstant(1.0)
    p = RankOnePerturbation(E1, E2)
    out = cauchy_gap_along_line(m, np.eye(3), p, [0.0])
    assert out[0].gap == 0.0 and out[0].in_domain


def test_cauchy_gap_blatzko_positive_off_origin():
    m = BlatzKoUniConstant(1.0)
    s_values = [-1.0, -0.5, -0.1, 0.1, 0.5, 1.0]
    for i in range(100):
        rng = rng_from([62, i])
        F = gl_plus_from_rng(rng, 0.3)
        p = sample_admissible_perturbation(rng, F, s_lo=0.3, s_hi=0.8)
        for sample in cauchy_gap_along_line(m, F, p, s_values):
            if sample.in_domain:
                assert sample.gap > 0.0


def test_cauchy_gap_volumetric_collision_at_s2():
    m = VolumetricCubic(1.0)
    p = RankOnePerturbation(E1, E1)  # unit dyad
    out = cauchy_gap_along_line(m, np.eye(3), p, [2.0])
    assert out[0].in_domain
    assert out[0].gap <= 1e-14
    assert 2.0 * p.amplitude == pytest.approx(2.0)


def test_cauchy_gap_flags_inadmissible_amplitudes():
    m = BlatzKoUniConstant(1.0)
    p = RankOnePerturbation(E1, E1)
    out = cauchy_gap_along_line(m, np.eye(3), p, [-2.0, 0.5])
    assert not out[0].in_domain and out[0].gap is None
    assert out[1].in_domain


def test_cauchy_gap_requires_admissible_base():
    with pytest.raises(DomainError):
        cauchy_gap_along_line(
            BlatzKoUniConstant(1.0), np.diag([-1.0, 1.0, 1.0]), RankOnePerturbation(E1, E2), [0.1]
        )


# ---------------------------------------------------------------------------
# injectivity search
# ---------------------------------------------------------------------------

def test_injectivity_search_volumetric_cubic_certifies_collision():
    cfg = ScanConfig(seed=5, n_starts=64, probe_F=(np.eye(3),))
    res = injectivity_search(VolumetricCubic(1.0), cfg)
    assert res.starts == 64
    assert res.certificates, "expected at least one collision certificate"
    best = min(res.certificates, key=lambda c: c.residual)
    assert best.residual <= 1e-10 * 1.0
    assert best.perturbation_norm >= 0.1
    assert best.segment_ok
    assert best.is_valid
    np.testing.assert_array_equal(best.F, np.eye(3))


def test_injectivity_search_blatzko_finds_nothing():
    cfg = ScanConfig(seed=5, n_starts=128, n_F=2, probe_F=(np.eye(3),))
    res = injectivity_search(BlatzKoUniConstant(1.0), cfg)
    assert res.certificates == []
    assert res.min_residual_found > 1e-3


def test_injectivity_search_empty_amplitude_window():
    cfg = ScanConfig(seed=5, n_starts=64, s_max=0.05)
    res = injectivity_search(VolumetricCubic(1.0), cfg)
    assert res.certificates == [] and res.starts == 0
    assert res.min_residual_found == math.inf


def test_injectivity_search_certificates_have_noise_level_monotonicity_gap():
    # where stress injectivity fails, strict Piola monotonicity fails too:
    # the gap at every certified collision sits at the rounding floor
    from rank1lab import monotonicity_gap

    cfg = ScanConfig(seed=5, n_starts=64, probe_F=(np.eye(3),))
    res = injectivity_search(VolumetricCubic(1.0), cfg)
    assert res.certificates
    for cert in res.certificates:
        gap = monotonicity_gap(VolumetricCubic(1.0), cert.F, cert.p)
        assert abs(gap) <= 1e-10 * (1.0 + frob(cert.F) ** 2)


def test_injectivity_search_reproducible():
    cfg = ScanConfig(seed=6, n_starts=32, probe_F=(np.eye(3),))
    a = injectivity_search(VolumetricCubic(1.0), cfg)
    b = injectivity_search(VolumetricCubic(1.0), cfg)
    assert a.starts == b.starts
    assert a.min_residual_found == b.min_residual_found
    assert len(a.certificates) == len(b.certificates)
    for ca, cb in zip(a.certificates, b.certificates):
        assert ca.residual == cb.residual
        np.testing.assert_array_equal(ca.p.xi, cb.p.xi)


# ---------------------------------------------------------------------------
# twins
# ---------------------------------------------------------------------------

def test_twin_check_zero_perturbation():
    b_gap, verdict = twin_check(np.eye(3), RankOnePerturbation.zero())
    assert b_gap == 0.0 and verdict


def test_twin_check_hand_expansion():
    # (I + e1(x)e2)(I + e1(x)e2)^T - I = e1(x)e2 + e2(x)e1 + e1(x)e1
    b_gap, verdict = twin_check(np.eye(3), RankOnePerturbation(E1, E2))
    assert b_gap == pytest.approx(math.sqrt(3.0), rel=1e-15)
    assert verdict


def test_twin_check_no_near_misses_on_ensemble():
    worst = math.inf
    for i in range(5000):
        rng = rng_from([63, i])
        F = gl_plus_from_rng(rng, 0.4)
        p = sample_admissible_perturbation(rng, F)
        b_gap, verdict = twin_check(F, p)
        assert verdict
        worst = min(worst, b_gap / p.amplitude)
    assert worst > 1e-6


def test_twin_check_domain_error():
    with pytest.raises(DomainError):
        twin_check(np.eye(3), RankOnePerturbation(-2.0 * E1, E1))


def test_twin_det_contradiction_hand_case():
    # eta = e1 forces xi = -2 e1: det(I - 2 e1(x)e1) = -1 = -det I
    p = RankOnePerturbation(E2, E1)  # xi is ignored, eta = e1 after balancing
    got = twin_det_contradiction(np.eye(3), p)
    assert got == pytest.approx(-1.0, rel=1e-15)


def test_twin_det_contradiction_parity_on_ensemble():
    for i in range(2000):
        rng = rng_from([64, i])
        F = gl_plus_from_rng(rng, 0.4)
        p = RankOnePerturbation(rng.standard_normal(3), rng.standard_normal(3))
        got = twin_det_contradiction(F, p)
        assert abs(got + det3(F)) <= 1e-12 * abs(det3(F))


def test_twin_det_contradiction_rejects_zero_eta():
    with pytest.raises(DomainError):
        twin_det_contradiction(np.eye(3), RankOnePerturbation.zero())


# ---------------------------------------------------------------------------
# Blatz-Ko pressure scan
# ---------------------------------------------------------------------------

def spherical_oracle(mu, alpha):
    return mu * (alpha**-0.5 - alpha**-3.0)


def test_pressure_scan_reference_values():
    records, summary = blatzko_pressure_scan(1.0, 1.0, 4.0, 512)
    assert records[0].spherical == pytest.approx(0.0, abs=1e-15)  # t(1) = 0
    assert records[-1].spherical == pytest.approx(0.484375, rel=1e-12)  # t(4)
    assert not summary.is_monotone


def test_pressure_scan_argmax_against_stationarity_and_dense_scan():
    _, summary = blatzko_pressure_scan(1.0, 1.0, 4.0, 512)
    # stationarity: -1/2 a^-3/2 + 3 a^-4 = 0  =>  a = 6^(2/5)
    closed = 6.0 ** (2.0 / 5.0)
    assert summary.argmax_alpha == pytest.approx(closed, abs=1e-6)
    # independent dense-grid oracle
    grid = np.linspace(1.0, 4.0, 1_000_000)
    dense = grid[np.argmax(spherical_oracle(1.0, grid))]
    assert summary.argmax_alpha == pytest.approx(dense, abs=1e-5)
    assert summary.max_spherical == pytest.approx(
        6.0 ** (-1.0 / 5.0) - 6.0 ** (-6.0 / 5.0), rel=1e-10
    )


def test_pressure_scan_collision_pair():
    _, summary = blatzko_pressure_scan(2.0, 1.0, 4.0, 512)
    a1, a2 = summary.collision
    assert a1 < summary.argmax_alpha < a2
    assert abs(spherical_oracle(2.0, a1) - spherical_oracle(2.0, a2)) <= 1e-10 * 2.0
    # the colliding dilations are not rank-one connected
    F1 = math.sqrt(a1) * np.eye(3)
    F2 = math.sqrt(a2) * np.eye(3)
    assert rank_one_factor(F2 - F1) is None


def test_pressure_scan_records_match_response_function():
    records, _ = blatzko_pressure_scan(1.5, 0.5, 4.0, 100)
    for r in records:
        assert r.spherical == pytest.approx(spherical_oracle(1.5, r.alpha), rel=1e-12)


def test_pressure_scan_monotone_range_has_no_collision():
    _, summary = blatzko_pressure_scan(1.0, 2.5, 4.0, 64)
    assert summary.is_monotone
    assert summary.collision is None


def test_pressure_scan_rejects_bad_bounds():
    with pytest.raises(DomainError):
        blatzko_pressure_scan(1.0, -1.0, 4.0, 10)
    with pytest.raises(DomainError):
        blatzko_pressure_scan(1.0, 2.0, 1.0, 10)
    with pytest.raises(DomainError):
        blatzko_pressure_scan(1.0, 1.0, 4.0, 2)


# ---------------------------------------------------------------------------
# pressure-compression inequality
# ---------------------------------------------------------------------------

def test_pressure_compression_neo_hooke_passes():
    res = pressure_compression_check(CompressibleNeoHooke(1.0, 1.0), [0.2, 0.5, 2.0, 5.0])
    assert res.verdict
    assert all(pt.product > 0.0 for pt in res.points)


def test_pressure_compression_blatzko_products_closed_form():
    mu = 1.3
    res = pressure_compression_check(BlatzKoUniConstant(mu), [0.2, 0.5, 2.0, 5.0])
    assert res.verdict
    for pt in res.points:
        want = mu * (pt.lam**-1.0 - pt.lam**-6.0) * (pt.lam - 1.0)
        assert pt.product == pytest.approx(want, rel=1e-10)


def test_pressure_compression_blatzko_flags_non_monotone_with_interior_max():
    res = pressure_compression_check(BlatzKoUniConstant(1.0), np.geomspace(0.2, 5.0, 25))
    assert res.verdict  # the sign condition alone does not catch the defect
    assert not res.spherical_monotone
    assert res.spherical_argmax == pytest.approx(6.0 ** (1.0 / 5.0), abs=1e-6)


def test_pressure_compression_skips_near_unit_stretch():
    res = pressure_compression_check(BlatzKoUniConstant(1.0), [0.5, 1.0 + 1e-9, 2.0])
    flagged = [pt for pt in res.points if pt.skipped]
    assert len(flagged) == 1 and flagged[0].lam == pytest.approx(1.0)
    assert res.verdict


def test_pressure_compression_rejects_nonpositive_stretch():
    with pytest.raises(DomainError):
        pressure_compression_check(BlatzKoUniConstant(1.0), [0.5, -1.0])


def test_volumetric_cubic_fails_pressure_compression():
    # sigma = c (J-2)^2 I is nonnegative even in compression: the product
    # goes negative for lam < 1
    res = pressure_compression_check(VolumetricCubic(1.0), [0.5, 2.0])
    assert not res.verdict
