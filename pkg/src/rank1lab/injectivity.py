"""Rank-one injectivity of the Cauchy stress, made executable.

Contains the exchange identity that converts Piola monotonicity along a
rank-one line into a Cauchy-stress difference, multi-start searches for
stress collisions sigma(F + xi (x) eta) = sigma(F), the left Cauchy-Green
twin checks, and the Blatz-Ko spherical pressure scan with its
pressure-compression companion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .convexity import ScanConfig, _angles_of, _unit_from_angles
from .errors import DomainError
from .materials import (
    MaterialModel,
    blatzko_cauchy_from_B,
    cauchy,
    spherical_stress,
)
from .tensors import (
    IDENTITY,
    Mat3,
    RankOnePerturbation,
    cofactor,
    det3,
    dyad,
    frob,
    gl_plus_from_rng,
    inner,
    rng_from,
    segment_in_gl_plus,
    unit_vec_from_rng,
)

#: Residual threshold for a certified collision, relative to the stress scale.
COLLISION_RTOL = 1e-8

#: Smallest dyad norm a certificate may carry (excludes the trivial basin).
MIN_CERT_NORM = 0.1

#: Multi-start budget spent per deformation gradient.
STARTS_PER_F = 64

#: Below this b_gap (and above it in dyad norm) a twin sample would be a near miss.
TWIN_NEAR_MISS_TOL = 1e-6


@dataclass
class CollisionCertificate:
    """A verified stress collision along a rank-one line."""

    model: str
    F: Mat3
    p: RankOnePerturbation
    residual: float
    perturbation_norm: float
    segment_ok: bool
    collision_tol: float

    @property
    def is_valid(self) -> bool:
        return (
            self.residual <= self.collision_tol
            and self.perturbation_norm >= MIN_CERT_NORM
            and self.segment_ok
        )


@dataclass
class InjectivitySearchResult:
    """Outcome of a multi-start collision search for one model."""

    certificates: list[CollisionCertificate] = field(default_factory=list)
    min_residual_found: float = math.inf
    starts: int = 0
    seed: int = 0


@dataclass(frozen=True)
class LineGapSample:
    s: float
    gap: float | None
    in_domain: bool


@dataclass(frozen=True)
class PressureScanRecord:
    alpha: float
    spherical: float


@dataclass(frozen=True)
class PressureScanSummary:
    is_monotone: bool
    argmax_alpha: float
    max_spherical: float
    collision: tuple | None  # (alpha_1, alpha_2) with equal spherical stress


@dataclass(frozen=True)
class PressureCompressionPoint:
    lam: float
    product: float
    skipped: bool


@dataclass(frozen=True)
class PressureCompressionResult:
    points: tuple
    verdict: bool
    spherical_monotone: bool
    spherical_argmax: float | None


def theorem_identity_gap(model: MaterialModel, F: Mat3, p: RankOnePerturbation) -> float:
    """Residual of the Piola/Cauchy exchange identity along a rank-one line.

    |<S1(F+P) - S1(F), xi (x) eta>  -  <sigma(F+P) - sigma(F), xi (x) (Cof F eta)>|
    vanishes for every stored-energy model, convex or not; only roundoff
    remains. Both endpoints must lie in GL+(3).
    """
    P = p.matrix
    if det3(F) <= 0.0 or det3(F + P) <= 0.0:
        raise DomainError("F and F + xi(x)eta must lie in GL+(3)")
    lhs = inner(model.piola(F + P) - model.piola(F), P)
    rhs = inner(cauchy(model, F + P) - cauchy(model, F), dyad(p.xi, cofactor(F) @ p.eta))
    return abs(lhs - rhs)


def cauchy_gap_along_line(
    model: MaterialModel, F: Mat3, p: RankOnePerturbation, s_values
) -> list[LineGapSample]:
    """||sigma(F + s * xi (x) eta) - sigma(F)|| sampled along the line.

    Amplitudes whose endpoint leaves GL+(3) are flagged rather than
    evaluated. The base point F itself must be admissible.
    """
    if det3(F) <= 0.0:
        raise DomainError("base point F must lie in GL+(3)")
    sigma0 = cauchy(model, F)
    P = p.matrix
    out = []
    for s in s_values:
        Fs = F + float(s) * P
        if det3(Fs) <= 0.0:
            out.append(LineGapSample(float(s), None, False))
            continue
        out.append(LineGapSample(float(s), frob(cauchy(model, Fs) - sigma0), True))
    return out


def _structured_starts(s_max: float):
    """Deterministic starts: basis dyads at moderate and collision-sized amplitude."""
    starts = []
    basis_angles = [(0.0, 0.5 * math.pi), (0.5 * math.pi, 0.5 * math.pi), (0.0, 0.0)]
    for a in basis_angles:
        for b in basis_angles:
            for s in (0.5, 2.0):
                if MIN_CERT_NORM <= s <= s_max:
                    starts.append(np.array([a[0], a[1], b[0], b[1], s]))
    return starts


def injectivity_search(model: MaterialModel, cfg: ScanConfig) -> InjectivitySearchResult:
    """Multi-start search for Cauchy-stress collisions along rank-one lines.

    Minimizes the squared Frobenius gap over unit (xi, eta) and amplitude
    s in [MIN_CERT_NORM, cfg.s_max], with the segment constraint enforced by
    penalty. Deformation gradients are cfg.probe_F first, then sampled; the
    total budget cfg.n_starts is spent STARTS_PER_F per gradient. Returns
    every distinct valid certificate plus the smallest admissible residual
    seen anywhere.
    """
    result = InjectivitySearchResult(seed=cfg.seed)
    if cfg.s_max < MIN_CERT_NORM or cfg.n_starts <= 0:
        return result

    n_F = max(0, -(-cfg.n_starts // STARTS_PER_F) - len(cfg.probe_F))
    F_list = list(cfg.probe_F) + [
        gl_plus_from_rng(rng_from([cfg.seed, 10, i]), cfg.spread) for i in range(n_F)
    ]
    tol = COLLISION_RTOL * model.stress_scale
    seen_keys = set()

    for fi, F in enumerate(F_list):
        if result.starts >= cfg.n_starts:
            break
        sigma0 = cauchy(model, F)
        J0 = det3(F)
        C0 = cofactor(F)
        penalty = 1e12 * model.stress_scale**2 * (1.0 + frob(F) ** 2)

        def objective(x, F=F, sigma0=sigma0, J0=J0, C0=C0, penalty=penalty):
            xi = _unit_from_angles(x[0], x[1])
            eta = _unit_from_angles(x[2], x[3])
            s = x[4]
            Js = J0 + s * float(xi @ C0 @ eta)  # det(F + s xi(x)eta), affine in s
            if Js <= 0.0:
                return penalty
            Fs = F + s * np.outer(xi, eta)
            sig = model._piola(Fs, Js) @ Fs.T / Js
            d = 0.5 * (sig + sig.T) - sigma0
            return float(np.multiply(d, d).sum())

        rng = rng_from([cfg.seed, 11, fi])
        starts = _structured_starts(cfg.s_max)
        while len(starts) < STARTS_PER_F:
            xi = unit_vec_from_rng(rng)
            eta = unit_vec_from_rng(rng)
            s = rng.uniform(MIN_CERT_NORM, min(cfg.s_max, 2.5))
            starts.append(np.array([*_angles_of(xi), *_angles_of(eta), s]))

        bounds = [(None, None)] * 4 + [(MIN_CERT_NORM, cfg.s_max)]
        for x0 in starts[:STARTS_PER_F]:
            if result.starts >= cfg.n_starts:
                break
            result.starts += 1
            res = minimize(
                objective,
                x0,
                method="Nelder-Mead",
                bounds=bounds,
                options=dict(maxiter=200, xatol=1e-10, fatol=1e-10),
            )
            x = res.x
            if tol * tol < res.fun < (1e-4 * model.stress_scale) ** 2:
                # Near-collision above certificate tolerance: polish with a
                # restarted tight simplex.
                res = minimize(
                    objective,
                    x,
                    method="Nelder-Mead",
                    bounds=bounds,
                    options=dict(maxiter=400, xatol=1e-13, fatol=1e-26),
                )
                x = res.x
            xi = _unit_from_angles(x[0], x[1])
            eta = _unit_from_angles(x[2], x[3])
            p = RankOnePerturbation.from_direction(xi, eta, x[4])
            if not segment_in_gl_plus(F, p):
                continue
            residual = frob(cauchy(model, F + p.matrix) - sigma0)
            result.min_residual_found = min(result.min_residual_found, residual)
            cert = CollisionCertificate(
                model=model.name,
                F=F,
                p=p,
                residual=residual,
                perturbation_norm=p.amplitude,
                segment_ok=True,
                collision_tol=tol,
            )
            if cert.is_valid:
                key = (fi,) + tuple(np.round(np.concatenate([p.xi, p.eta]), 3))
                if key not in seen_keys:
                    seen_keys.add(key)
                    result.certificates.append(cert)
    return result


def twin_check(F: Mat3, p: RankOnePerturbation) -> tuple[float, bool]:
    """Distance between the left Cauchy-Green tensors of F and F + xi (x) eta.

    Returns (b_gap, verdict) with b_gap = ||(F+P)(F+P)^T - F F^T||. Equal
    left Cauchy-Green tensors force a zero dyad when both endpoints are
    admissible, so the verdict (b_gap small implies dyad small) must always
    hold; a False verdict would witness a genuine near-twin.
    """
    P = p.matrix
    Fp = F + P
    if det3(F) <= 0.0 or det3(Fp) <= 0.0:
        raise DomainError("F and F + xi(x)eta must lie in GL+(3)")
    b_gap = frob(Fp @ Fp.T - F @ F.T)
    verdict = b_gap > TWIN_NEAR_MISS_TOL or p.amplitude <= TWIN_NEAR_MISS_TOL
    return b_gap, verdict


def twin_det_contradiction(F: Mat3, p: RankOnePerturbation) -> float:
    """det(F + xi (x) eta) for the B-preserving candidate xi = -2 F eta / ||eta||^2.

    This is the configuration a nonzero twin would have to adopt; its
    determinant equals -det F exactly, which is what expels it from GL+(3).
    """
    if det3(F) <= 0.0:
        raise DomainError("F must lie in GL+(3)")
    eta = p.eta
    ne2 = float(np.dot(eta, eta))
    if ne2 == 0.0:
        raise DomainError("eta must be nonzero")
    xi = -(2.0 / ne2) * (F @ eta)
    return det3(F + np.outer(xi, eta))


# ---------------------------------------------------------------------------
# Blatz-Ko spherical pressure scan and the pressure-compression inequality.
# ---------------------------------------------------------------------------

def _golden_max(f, a: float, b: float, tol: float = 1e-10) -> float:
    """Golden-section maximizer of a unimodal f on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol * (1.0 + abs(a) + abs(b)):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


def _bisect_level(f, target: float, a: float, b: float, iters: int = 200) -> float:
    """Bisection solve of f(x) = target on a bracket with a sign change."""
    fa = f(a) - target
    fb = f(b) - target
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise ValueError("bracket does not straddle the target level")
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = f(m) - target
        if fm == 0.0 or (b - a) < 4.0 * np.finfo(float).eps * max(1.0, abs(m)):
            return m
        if fa * fm < 0.0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def blatzko_pressure_scan(
    mu: float, alpha_min: float, alpha_max: float, n: int
) -> tuple[list[PressureScanRecord], PressureScanSummary]:
    """Spherical Cauchy stress of Blatz-Ko along B = alpha I on a log grid.

    Tabulates t(alpha) = tr(sigma)/3, detects non-monotonicity over the
    grid, refines the interior maximizer by golden section, and (when the
    maximum is interior) produces a collision pair alpha_1 != alpha_2 with
    equal spherical stress by bisecting both flanks at half the peak level.
    """
    if mu <= 0.0 or alpha_min <= 0.0 or alpha_max <= alpha_min:
        raise DomainError("require mu > 0 and 0 < alpha_min < alpha_max")
    if n < 3:
        raise DomainError("need at least 3 grid points")

    def t(alpha: float) -> float:
        return spherical_stress(blatzko_cauchy_from_B(mu, alpha * IDENTITY))

    alphas = np.exp(np.linspace(math.log(alpha_min), math.log(alpha_max), n))
    values = np.array([t(a) for a in alphas])
    records = [PressureScanRecord(float(a), float(v)) for a, v in zip(alphas, values)]

    diffs = np.diff(values)
    is_monotone = bool((diffs >= 0.0).all() or (diffs <= 0.0).all())
    k = int(values.argmax())
    if 0 < k < n - 1:
        lo, hi = float(alphas[k - 1]), float(alphas[k + 1])
        argmax = _golden_max(t, lo, hi)
    else:
        argmax = float(alphas[k])
    peak = t(argmax)

    collision = None
    if 0 < k < n - 1:
        half = 0.5 * peak
        a1 = _bisect_level(t, half, 1.0 + 1e-6, argmax)
        a2 = _bisect_level(t, half, argmax, 50.0)
        collision = (a1, a2)

    return records, PressureScanSummary(is_monotone, argmax, peak, collision)


def pressure_compression_check(
    model: MaterialModel, lambda_values, lam_tol: float = 1e-6
) -> PressureCompressionResult:
    """Sign check of tr(sigma(lambda I))/3 * (lambda - 1) over a stretch grid.

    Points with lambda within lam_tol of 1 are flagged and skipped (the
    inequality excludes the stress-free point). The verdict is True iff all
    remaining products are positive. The spherical stress is additionally
    traced on a dense internal grid to flag non-monotone pressure response
    and locate its interior maximizer.
    """
    lams = [float(lam) for lam in lambda_values]
    if any(lam <= 0.0 for lam in lams):
        raise DomainError("stretches must be positive")

    def t(lam: float) -> float:
        return spherical_stress(cauchy(model, lam * IDENTITY))

    points = []
    for lam in lams:
        points.append(
            PressureCompressionPoint(lam, t(lam) * (lam - 1.0), abs(lam - 1.0) <= lam_tol)
        )
    verdict = all(pt.product > 0.0 for pt in points if not pt.skipped)

    lo, hi = min(lams), max(lams)
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), 512))
    trace = np.array([t(x) for x in grid])
    diffs = np.diff(trace)
    monotone = bool((diffs >= 0.0).all() or (diffs <= 0.0).all())
    argmax = None
    if not monotone:
        k = int(trace.argmax())
        if 0 < k < len(grid) - 1:
            argmax = _golden_max(t, float(grid[k - 1]), float(grid[k + 1]))
    return PressureCompressionResult(tuple(points), verdict, monotone, argmax)


def sample_admissible_perturbation(
    rng, F: Mat3, s_lo: float = 0.1, s_hi: float = 1.0, max_tries: int = 100
) -> RankOnePerturbation:
    """Random unit-direction dyad with amplitude in [s_lo, s_hi] keeping the
    segment from F inside GL+(3)."""
    for _ in range(max_tries):
        xi = unit_vec_from_rng(rng)
        eta = unit_vec_from_rng(rng)
        s = rng.uniform(s_lo, s_hi)
        p = RankOnePerturbation.from_direction(xi, eta, s)
        if segment_in_gl_plus(F, p):
            return p
    raise DomainError(f"no admissible perturbation found in {max_tries} tries")
