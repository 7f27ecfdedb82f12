"""Numerical rank-one convexity analysis: segment convexity, stress
monotonicity along rank-one lines, directional second derivatives, the
acoustic tensor, Baker-Ericksen checks, and a seeded scan-and-refine search
for ellipticity violations.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, NotIsotropicError, Rank1LabError
from .materials import MaterialModel, cauchy
from .tensors import (
    IDENTITY,
    Mat3,
    RankOnePerturbation,
    Vec3,
    cofactor,
    det3,
    dyad,
    eig_sym3,
    frob,
    gl_plus_from_rng,
    inner,
    rng_from,
    segment_in_gl_plus,
    unit_vec_from_rng,
    vec_norm,
)

_EPS = float(np.finfo(float).eps)

#: Directions count as degenerate-stretch (Baker-Ericksen pair skipped) below this.
STRETCH_DISTINCT_RTOL = 1e-8

#: Acoustic tensor asymmetry allowed before symmetrization.
ACOUSTIC_SYM_RTOL = 1e-6

#: Nelder-Mead refinement budget (iterations / simplex tolerance).
REFINE_MAXITER = 200
REFINE_TOL = 1e-10


@dataclass(frozen=True)
class ScanConfig:
    """Seeded sampling budgets shared by the scan operations.

    ``n_F`` and ``n_dir`` size the ellipticity grid (directional probes =
    n_dir per sampled F); ``n_starts`` is the total multi-start budget of an
    injectivity search, spent 64 starts per deformation gradient. probe_F
    entries are explicit deformation gradients visited before any sampling.
    """

    seed: int = 0
    spread: float = 0.4
    n_F: int = 100
    n_dir: int = 100
    n_starts: int = 256
    s_max: float = 3.0
    probe_F: tuple = ()
    refine_k: int = 8

    def __post_init__(self):
        if not 0.0 < self.spread < 1.0:
            raise ValueError("spread must lie in (0, 1)")
        if min(self.n_F, self.n_dir, self.n_starts, self.refine_k) < 0:
            raise ValueError("budgets must be nonnegative")
        probes = tuple(np.asarray(P, dtype=float) for P in self.probe_F)
        for P in probes:
            if P.shape != (3, 3) or not np.isfinite(P).all():
                raise ValueError("probe_F entries must be finite 3x3 matrices")
            if det3(P) <= 0.0:
                raise ValueError("probe_F entries must lie in GL+(3)")
        object.__setattr__(self, "probe_F", probes)


@dataclass(frozen=True)
class SegmentProbe:
    """A point theta on the rank-one segment from F to F + xi (x) eta."""

    F: Mat3
    p: RankOnePerturbation
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")


@dataclass
class EllipticityViolation:
    F: Mat3
    xi: Vec3
    eta: Vec3
    value: float


@dataclass
class EllipticityReport:
    """Outcome of an ellipticity scan for one model."""

    model: str
    samples_tested: int
    min_second_derivative: float | None
    argmin: tuple | None  # (F, xi, eta)
    violations: list[EllipticityViolation] = field(default_factory=list)
    indeterminate: int = 0
    seed: int = 0


def fd_step(F: Mat3) -> float:
    """Step size for second differences: 1e-4 * (1 + ||F||)."""
    return 1e-4 * (1.0 + frob(F))


def second_derivative_noise_floor(model: MaterialModel, F: Mat3, h: float) -> float:
    """Roundoff floor of the central second difference, about eps * W / h^2."""
    scale = model.stress_scale * (1.0 + frob(F) ** 2)
    return _EPS * scale / (h * h)


def monotonicity_gap(model: MaterialModel, F: Mat3, p: RankOnePerturbation) -> float:
    """<S1(F + xi (x) eta) - S1(F), xi (x) eta>.

    Strict rank-one convexity demands this be positive for every admissible
    segment with a nonzero dyad.
    """
    if not segment_in_gl_plus(F, p):
        raise DomainError("segment F + t xi(x)eta leaves GL+(3) on [0, 1]")
    P = p.matrix
    return inner(model.piola(F + P) - model.piola(F), P)


def rank_one_second_derivative(
    model: MaterialModel, F: Mat3, xi: Vec3, eta: Vec3, h: float | None = None
) -> float:
    """Central second difference of t -> W(F + t xi (x) eta) at t = 0.

    xi and eta must be unit vectors; accuracy is O(h^2) with the default
    step fd_step(F).
    """
    if abs(vec_norm(xi) - 1.0) > 1e-9 or abs(vec_norm(eta) - 1.0) > 1e-9:
        raise ValueError("xi and eta must be unit vectors")
    if h is None:
        h = fd_step(F)
    P = dyad(xi, eta)
    Fp = F + h * P
    Fm = F - h * P
    if det3(Fp) <= 0.0 or det3(Fm) <= 0.0:
        raise DomainError("finite-difference probe left GL+(3)")
    w0 = model.energy(F)
    return (model.energy(Fp) - 2.0 * w0 + model.energy(Fm)) / (h * h)


def convexity_on_segment(model: MaterialModel, probe: SegmentProbe) -> float:
    """Convexity gap theta W(F) + (1-theta) W(F+P) - W(F + (1-theta) P).

    Zero at the endpoints and for a zero dyad; strictly positive inside the
    segment for strictly rank-one convex energies.
    """
    if not segment_in_gl_plus(probe.F, probe.p):
        raise DomainError("segment F + t xi(x)eta leaves GL+(3) on [0, 1]")
    P = probe.p.matrix
    th = probe.theta
    chord = th * model.energy(probe.F) + (1.0 - th) * model.energy(probe.F + P)
    return chord - model.energy(probe.F + (1.0 - th) * P)


def acoustic_tensor(
    model: MaterialModel, F: Mat3, eta: Vec3, h: float | None = None
) -> Mat3:
    """Symmetric 3x3 tensor Q(eta) with <Q xi, xi> = D^2 W(F)(xi(x)eta, xi(x)eta).

    Assembled column by column from central differences of the analytic
    stress along the basis dyads e_j (x) eta, then symmetrized; strong
    ellipticity at (F, eta) is positive definiteness of Q.
    """
    if abs(vec_norm(eta) - 1.0) > 1e-9:
        raise ValueError("eta must be a unit vector")
    if h is None:
        h = fd_step(F)
    Q = np.empty((3, 3))
    for j in range(3):
        P = dyad(IDENTITY[j], eta)
        dS = (model.piola(F + h * P) - model.piola(F - h * P)) / (2.0 * h)
        Q[:, j] = dS @ eta
    skew = frob(Q - Q.T)
    if skew > ACOUSTIC_SYM_RTOL * (model.stress_scale + frob(Q)):
        raise Rank1LabError(f"acoustic tensor asymmetry {skew:.3e} beyond tolerance")
    return 0.5 * (Q + Q.T)


def baker_ericksen_check(model: MaterialModel, F: Mat3) -> bool:
    """Co-monotonicity of principal Cauchy stresses and principal stretches.

    For isotropic models the Cauchy stress shares the eigenbasis of
    B = F F^T, so the principal stresses are read off as v^T sigma v over
    the eigenvectors of B. Pairs with stretches equal within
    STRETCH_DISTINCT_RTOL are vacuous and skipped, as are pairs whose
    stresses are tied to roundoff (a spherical stress state violates
    nothing: it is weakly co-monotone with any stretches).
    """
    if not model.is_isotropic:
        raise NotIsotropicError(f"model '{model.name}' is not isotropic")
    sigma = cauchy(model, F)
    B = F @ F.T
    evals, V = eig_sym3(B)
    stretches = np.sqrt(np.maximum(evals, 0.0))
    t = np.array([float(V[:, k] @ sigma @ V[:, k]) for k in range(3)])
    tol = STRETCH_DISTINCT_RTOL * (1.0 + stretches.max())
    t_tol = 1e-10 * (model.stress_scale + float(np.abs(t).max()))
    for i in range(3):
        for j in range(i + 1, 3):
            dl = stretches[i] - stretches[j]
            dt = t[i] - t[j]
            if abs(dl) <= tol or abs(dt) <= t_tol:
                continue
            if dt * dl < 0.0:
                return False
    return True


# ---------------------------------------------------------------------------
# Scan-and-refine search for ellipticity violations.
# ---------------------------------------------------------------------------

def _angles_of(v: Vec3) -> tuple[float, float]:
    """Spherical chart (azimuth, polar) of a unit vector."""
    return math.atan2(v[1], v[0]), math.acos(min(1.0, max(-1.0, v[2])))


def _unit_from_angles(theta: float, phi: float) -> Vec3:
    sp = math.sin(phi)
    return np.array([sp * math.cos(theta), sp * math.sin(theta), math.cos(phi)])


def _refine_direction(model, F, xi0, eta0, h, penalty):
    """Polish a candidate direction pair by Nelder-Mead on the 4-angle chart."""

    def objective(x):
        xi = _unit_from_angles(x[0], x[1])
        eta = _unit_from_angles(x[2], x[3])
        try:
            return rank_one_second_derivative(model, F, xi, eta, h)
        except DomainError:
            return penalty

    x0 = np.array([*_angles_of(xi0), *_angles_of(eta0)])
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options=dict(maxiter=REFINE_MAXITER, xatol=REFINE_TOL, fatol=REFINE_TOL),
    )
    xi = _unit_from_angles(res.x[0], res.x[1])
    eta = _unit_from_angles(res.x[2], res.x[3])
    return xi, eta, float(res.fun)


def ellipticity_scan(model: MaterialModel, cfg: ScanConfig) -> EllipticityReport:
    """Grid scan of D^2 W(F)(xi (x) eta, xi (x) eta) with local refinement.

    Probes cfg.probe_F first, then n_F sampled deformation gradients, with
    n_dir direction pairs each. The refine_k lowest grid candidates are
    polished by Nelder-Mead over the direction chart. Values below minus ten
    times the finite-difference noise floor are violations; values inside
    the noise band count as indeterminate, never as violations.
    """
    F_list = list(cfg.probe_F) + [
        gl_plus_from_rng(rng_from([cfg.seed, 0, i]), cfg.spread) for i in range(cfg.n_F)
    ]
    report = EllipticityReport(
        model=model.name,
        samples_tested=0,
        min_second_derivative=None,
        argmin=None,
        seed=cfg.seed,
    )
    if not F_list or cfg.n_dir <= 0:
        return report

    best = math.inf
    heap: list = []  # min-heap of (-value, fi, di): holds the k lowest probes
    payload: dict = {}  # (fi, di) -> (F, xi, eta) for heap members
    for fi, F in enumerate(F_list):
        h = fd_step(F)
        floor = second_derivative_noise_floor(model, F, h)
        rng_dir = rng_from([cfg.seed, 1, fi])
        # Cached pieces for the hot loop: the determinant is affine along a
        # rank-one line, so both probe determinants come from one matvec.
        J0 = det3(F)
        C0 = cofactor(F)
        W0 = model.energy(F)
        h2 = h * h
        for di in range(cfg.n_dir):
            xi = unit_vec_from_rng(rng_dir)
            eta = unit_vec_from_rng(rng_dir)
            dJ = h * float(xi @ C0 @ eta)
            if J0 + dJ <= 0.0 or J0 - dJ <= 0.0:
                continue
            P = h * np.outer(xi, eta)
            value = (model._energy(F + P, J0 + dJ) - 2.0 * W0 + model._energy(F - P, J0 - dJ)) / h2
            report.samples_tested += 1
            if value < best:
                best = value
                report.argmin = (F, xi, eta)
            if value < -10.0 * floor:
                report.violations.append(EllipticityViolation(F, xi, eta, value))
            elif abs(value) <= 10.0 * floor:
                report.indeterminate += 1
            entry = (-value, fi, di)
            if len(heap) < cfg.refine_k:
                heapq.heappush(heap, entry)
                payload[entry[1:]] = (F, xi, eta)
            elif entry > heap[0]:
                dropped = heapq.heapreplace(heap, entry)
                del payload[dropped[1:]]
                payload[entry[1:]] = (F, xi, eta)

    if report.samples_tested == 0:
        return report

    for neg, fi, di in sorted(heap, key=lambda e: (-e[0], e[1], e[2])):
        F, xi, eta = payload[(fi, di)]
        h = fd_step(F)
        floor = second_derivative_noise_floor(model, F, h)
        penalty = 1e6 * model.stress_scale * (1.0 + frob(F) ** 2)
        xi_r, eta_r, value = _refine_direction(model, F, xi, eta, h, penalty)
        if value >= penalty:
            continue
        if value < best:
            best = value
            report.argmin = (F, xi_r, eta_r)
        if value < -10.0 * floor:
            report.violations.append(EllipticityViolation(F, xi_r, eta_r, value))

    report.min_second_derivative = best
    return report
