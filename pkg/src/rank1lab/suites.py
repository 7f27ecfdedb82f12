"""Seeded verification suites reused by the command-line driver and the
acceptance tests: tensor identities, analytic-vs-FD stress gradients, the
Piola/Cauchy exchange identity, and the left Cauchy-Green twin checks.

Each suite derives one RNG per sample from (master seed, stream, index), so
results are reproducible and independent of traversal order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .injectivity import sample_admissible_perturbation, twin_check, twin_det_contradiction
from .materials import MaterialModel, piola_fd
from .tensors import (
    IDENTITY,
    RankOnePerturbation,
    cof_directional_derivative,
    cof_rank_one_expansion,
    cofactor,
    det3,
    det_rank_one_update,
    dyad,
    dyad_compose,
    frob,
    gl_plus_from_rng,
    inner,
    inverse,
    rng_from,
    unit_vec_from_rng,
    vec_norm,
)


@dataclass
class CheckStat:
    """Worst scaled error of one identity over a sample ensemble."""

    tolerance: float
    max_scaled_error: float = 0.0
    failures: int = 0

    def record(self, scaled_error: float):
        if scaled_error > self.max_scaled_error:
            self.max_scaled_error = scaled_error
        if scaled_error > self.tolerance:
            self.failures += 1


@dataclass
class IdentitySuiteResult:
    seed: int
    samples: int
    checks: dict = field(default_factory=dict)

    @property
    def violations(self) -> int:
        return sum(c.failures for c in self.checks.values())


def identity_suite(seed: int, n_samples: int = 10000, spread: float = 0.4) -> IdentitySuiteResult:
    """Exercise the cofactor/determinant/dyad identities on random inputs.

    Algebraic identities are held to 1e-11 / 1e-12 scaled error; the
    finite-difference comparison of the cofactor derivative to 1e-6.
    """
    checks = {
        "cofactor_multiplicativity": CheckStat(1e-11),
        "cofactor_inverse_commutation": CheckStat(1e-11),
        "cofactor_defining_relation": CheckStat(1e-11),
        "cof_rank_one_expansion": CheckStat(1e-12),
        "cof_directional_derivative_fd": CheckStat(1e-6),
        "det_rank_one_update": CheckStat(1e-12),
        "det_affinity": CheckStat(1e-12),
        "cofactor_jump": CheckStat(1e-11),
        "dyad_compose_vs_matmul": CheckStat(1e-14),
        "dyad_trace_identity": CheckStat(1e-14),
        "rank_one_annihilation": CheckStat(1e-14),
    }
    result = IdentitySuiteResult(seed=seed, samples=n_samples, checks=checks)
    h_fd = 1e-5

    for i in range(n_samples):
        rng = rng_from([seed, 20, i])
        A = gl_plus_from_rng(rng, spread)
        B = gl_plus_from_rng(rng, spread)
        H = spread * rng.uniform(-1.0, 1.0, size=(3, 3))
        F = gl_plus_from_rng(rng, spread)
        p = sample_admissible_perturbation(rng, F)
        a = unit_vec_from_rng(rng)
        b = unit_vec_from_rng(rng)
        c = unit_vec_from_rng(rng)
        d = unit_vec_from_rng(rng)

        nA, nB = frob(A), frob(B)
        checks["cofactor_multiplicativity"].record(
            frob(cofactor(A) @ cofactor(B) - cofactor(A @ B)) / (nA * nA * nB * nB)
        )
        invA = inverse(A)
        checks["cofactor_inverse_commutation"].record(
            frob(inverse(cofactor(A)) - cofactor(invA)) / (1.0 + frob(invA) ** 2)
        )
        checks["cofactor_defining_relation"].record(
            frob(A @ cofactor(A).T - det3(A) * IDENTITY) / max(1.0, nA**3)
        )
        checks["cof_rank_one_expansion"].record(
            frob(cof_rank_one_expansion(H) - cofactor(IDENTITY + H)) / (1.0 + frob(H) ** 2)
        )
        fd = (cofactor(F + h_fd * H) - cofactor(F - h_fd * H)) / (2.0 * h_fd)
        closed = cof_directional_derivative(F, H)
        checks["cof_directional_derivative_fd"].record(frob(closed - fd) / (1.0 + frob(closed)))

        P = p.matrix
        det_scale = max(1.0, (frob(F) + p.amplitude) ** 3)
        checks["det_rank_one_update"].record(
            abs(det_rank_one_update(F, p) - det3(F + P)) / det_scale
        )
        checks["det_affinity"].record(
            abs(det3(F + 0.5 * P) - 0.5 * (det3(F) + det3(F + P))) / det_scale
        )
        jump_scale = (frob(F) + p.amplitude) ** 2 * (1.0 + math.sqrt(p.amplitude))
        checks["cofactor_jump"].record(
            vec_norm((cofactor(F + P) - cofactor(F)) @ p.eta) / jump_scale
        )

        checks["dyad_compose_vs_matmul"].record(
            frob(dyad_compose(a, b, c, d) - dyad(a, b) @ dyad(c, d))
        )
        checks["dyad_trace_identity"].record(
            abs(inner(IDENTITY, dyad(a, b)) - float(np.dot(b, a)))
        )
        checks["rank_one_annihilation"].record(frob(cofactor(dyad(a, b))))
    return result


@dataclass
class GradientModelStat:
    model: str
    n_F: int
    tolerance: float
    max_rel_error: float = 0.0
    richardson_ratio: float = 0.0
    failures: int = 0


@dataclass
class GradientSuiteResult:
    seed: int
    models: list = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(m.failures for m in self.models)


#: Richardson error ratio between h = 1e-3 and h = 1e-4 admits [50, 200] as O(h^2).
RICHARDSON_WINDOW = (50.0, 200.0)


def gradient_suite(
    seed: int, models: list[MaterialModel], n_F: int = 100, spread: float = 0.4
) -> GradientSuiteResult:
    """Compare analytic stress against central differences of the energy.

    The working comparison runs at h = 1e-5 (1 + ||F||) with relative
    tolerance 1e-6; the h = 1e-3 vs h = 1e-4 mean-error ratio near 100
    confirms second-order convergence for each model.
    """
    result = GradientSuiteResult(seed=seed)
    for mi, model in enumerate(models):
        stat = GradientModelStat(model=model.name, n_F=n_F, tolerance=1e-6)
        errs_coarse = []
        errs_fine = []
        for i in range(n_F):
            rng = rng_from([seed, 30, mi, i])
            F = gl_plus_from_rng(rng, spread)
            S = model.piola(F)
            scale = model.stress_scale + frob(S)
            h = 1e-5 * (1.0 + frob(F))
            rel = frob(piola_fd(model, F, h) - S) / scale
            if rel > stat.max_rel_error:
                stat.max_rel_error = rel
            if rel > stat.tolerance:
                stat.failures += 1
            errs_coarse.append(frob(piola_fd(model, F, 1e-3) - S))
            errs_fine.append(frob(piola_fd(model, F, 1e-4) - S))
        stat.richardson_ratio = float(np.mean(errs_coarse) / np.mean(errs_fine))
        if not RICHARDSON_WINDOW[0] <= stat.richardson_ratio <= RICHARDSON_WINDOW[1]:
            stat.failures += 1
        result.models.append(stat)
    return result


@dataclass
class TheoremIdentitySuiteResult:
    seed: int
    samples: int
    tolerance: float
    max_scaled_gap: float = 0.0
    failures: int = 0
    per_model_max: dict = field(default_factory=dict)

    @property
    def violations(self) -> int:
        return self.failures


def theorem_identity_suite(
    seed: int,
    models: list[MaterialModel],
    n_samples: int = 10000,
    spread: float = 0.4,
) -> TheoremIdentitySuiteResult:
    """Check the Piola/Cauchy exchange identity on random admissible lines.

    The identity is purely algebraic, so it must hold for every model,
    including the non-elliptic ones; residuals are scaled by
    stress_scale * max(1, ||F||^3) and held to 1e-9.
    """
    from .injectivity import theorem_identity_gap

    result = TheoremIdentitySuiteResult(seed=seed, samples=n_samples, tolerance=1e-9)
    for m in models:
        result.per_model_max[m.name] = 0.0
    for i in range(n_samples):
        model = models[i % len(models)]
        rng = rng_from([seed, 40, i])
        F = gl_plus_from_rng(rng, spread)
        p = sample_admissible_perturbation(rng, F)
        gap = theorem_identity_gap(model, F, p)
        scaled = gap / (model.stress_scale * max(1.0, frob(F) ** 3))
        if scaled > result.max_scaled_gap:
            result.max_scaled_gap = scaled
        if scaled > result.per_model_max[model.name]:
            result.per_model_max[model.name] = scaled
        if scaled > result.tolerance:
            result.failures += 1
    return result


@dataclass
class TwinSuiteResult:
    seed: int
    twin_samples: int
    det_samples: int
    min_gap_ratio: float = math.inf
    twin_failures: int = 0
    max_det_rel_error: float = 0.0
    det_failures: int = 0

    @property
    def violations(self) -> int:
        return self.twin_failures + self.det_failures


#: b_gap / dyad-norm ratios at or below this are counted as twin near misses.
TWIN_RATIO_FLOOR = 1e-6

#: Relative tolerance on det(F + xi (x) eta) = -det F for the forced twin shape.
TWIN_DET_RTOL = 1e-12


def twin_suite(
    seed: int,
    n_twin: int = 100000,
    n_det: int = 10000,
    spread: float = 0.4,
) -> TwinSuiteResult:
    """Sample the twin lemma and the determinant-parity contradiction.

    Every admissible sample with dyad norm >= 0.1 must keep its left
    Cauchy-Green tensor away from the base point's (ratio floor 1e-6), and
    the B-preserving candidate configuration must land exactly on -det F.
    """
    result = TwinSuiteResult(seed=seed, twin_samples=n_twin, det_samples=n_det)
    for i in range(n_twin):
        rng = rng_from([seed, 50, i])
        F = gl_plus_from_rng(rng, spread)
        p = sample_admissible_perturbation(rng, F)
        b_gap, verdict = twin_check(F, p)
        ratio = b_gap / p.amplitude
        if ratio < result.min_gap_ratio:
            result.min_gap_ratio = ratio
        if not verdict or ratio <= TWIN_RATIO_FLOOR:
            result.twin_failures += 1
    for i in range(n_det):
        rng = rng_from([seed, 51, i])
        F = gl_plus_from_rng(rng, spread)
        eta = unit_vec_from_rng(rng)
        p = RankOnePerturbation(unit_vec_from_rng(rng), eta)
        d = twin_det_contradiction(F, p)
        rel = abs(d + det3(F)) / abs(det3(F))
        if rel > result.max_det_rel_error:
            result.max_det_rel_error = rel
        if rel > TWIN_DET_RTOL:
            result.det_failures += 1
    return result
