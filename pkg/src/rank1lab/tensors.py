"""3x3 tensor kernels: determinants, cofactors, dyads, rank-one update
identities, a closed-form symmetric eigensolver, and seeded sampling of
GL+(3).

All matrix-valued functions take and return plain ``numpy`` arrays of shape
(3, 3) (vectors: shape (3,)). Determinant and cofactor are written out as
explicit minor expansions so they stay exact for singular and rank-one
inputs.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SamplerError, SingularMatrixError

# Shape aliases for annotations; invariants (finite entries) are enforced at
# construction sites, not on every kernel call.
Vec3 = np.ndarray
Mat3 = np.ndarray
Seed = int

IDENTITY = np.eye(3)
IDENTITY.setflags(write=False)

_EPS = float(np.finfo(float).eps)

#: Relative determinant threshold below which inversion refuses to proceed.
SINGULARITY_RTOL = 1e-12

#: rank_one_factor accepts rank <= 1 while the post-deflation residual stays
#: below RANK_ONE_RTOL times the dominant singular value.
RANK_ONE_RTOL = 1e-10

#: Rejection sampling keeps det F at or above this floor.
GL_SAMPLE_MIN_DET = 0.1


def inner(A: Mat3, B: Mat3) -> float:
    """Frobenius scalar product <A, B> = sum_ij A_ij B_ij."""
    return float(np.multiply(A, B).sum())


def frob(A: Mat3) -> float:
    """Frobenius norm ||A|| = sqrt(<A, A>)."""
    return math.sqrt(float(np.multiply(A, A).sum()))


def vec_norm(v: Vec3) -> float:
    return math.sqrt(float(np.dot(v, v)))


def det3(A: Mat3) -> float:
    """Determinant by explicit expansion along the first row."""
    return float(
        A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
        - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
        + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0])
    )


def cofactor(A: Mat3) -> Mat3:
    """Cofactor matrix from signed 2x2 minors.

    Satisfies A @ cofactor(A).T == det3(A) * I. Computed minor-by-minor
    (never as det * inv(A).T) so that singular and rank-one inputs are
    handled without amplification.
    """
    a, b, c = A[0, 0], A[0, 1], A[0, 2]
    d, e, f = A[1, 0], A[1, 1], A[1, 2]
    g, h, i = A[2, 0], A[2, 1], A[2, 2]
    return np.array(
        [
            [e * i - f * h, f * g - d * i, d * h - e * g],
            [c * h - b * i, a * i - c * g, b * g - a * h],
            [b * f - c * e, c * d - a * f, a * e - b * d],
        ]
    )


def inverse(A: Mat3) -> Mat3:
    """Inverse via the adjugate.

    Raises SingularMatrixError when |det A| <= SINGULARITY_RTOL * max(1, ||A||^3);
    the scale-aware threshold keeps the test independent of physical units.
    """
    d = det3(A)
    if abs(d) <= SINGULARITY_RTOL * max(1.0, frob(A) ** 3):
        raise SingularMatrixError(f"matrix is numerically singular (det={d:.3e})")
    return cofactor(A).T / d


def dyad(a: Vec3, b: Vec3) -> Mat3:
    """Dyadic (outer) product a (x) b with entries a_i * b_j."""
    return np.outer(a, b)


def dyad_compose(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Mat3:
    """Product of two dyads: (a (x) b)(c (x) d) = <b, c> (a (x) d)."""
    return float(np.dot(b, c)) * np.outer(a, d)


def cof_directional_derivative(F: Mat3, H: Mat3) -> Mat3:
    """Directional derivative of the cofactor map at F along H.

    Closed form (<F^-T, H> I - F^-T H^T) cofactor(F); requires F invertible.
    """
    Fit = inverse(F).T
    return (inner(Fit, H) * IDENTITY - Fit @ H.T) @ cofactor(F)


def cof_rank_one_expansion(H: Mat3) -> Mat3:
    """Exact quadratic expansion of cofactor(I + H).

    Returns I + (<I, H> I - H^T) + cofactor(H), which equals cofactor(I + H)
    as a polynomial identity (the cofactor map is quadratic in its argument).
    """
    tr = H[0, 0] + H[1, 1] + H[2, 2]
    return (1.0 + tr) * IDENTITY - H.T + cofactor(H)


class RankOnePerturbation:
    """A dyad direction xi (x) eta stored in balanced form ||xi|| == ||eta||.

    The matrix xi (x) eta is the invariant object; the pair (c*xi, eta/c)
    describes the same perturbation for any c != 0. Construction rescales by
    positive factors so both legs carry sqrt of the dyad's Frobenius norm,
    which keeps optimizers from drifting along the scaling gauge.
    """

    __slots__ = ("xi", "eta")

    def __init__(self, xi, eta):
        xi = np.array(xi, dtype=float)
        eta = np.array(eta, dtype=float)
        if xi.shape != (3,) or eta.shape != (3,):
            raise ValueError("xi and eta must be 3-vectors")
        if not (np.isfinite(xi).all() and np.isfinite(eta).all()):
            raise ValueError("xi and eta must be finite")
        nx = vec_norm(xi)
        ne = vec_norm(eta)
        if nx * ne == 0.0:
            self.xi = np.zeros(3)
            self.eta = np.zeros(3)
        else:
            self.xi = xi * math.sqrt(ne / nx)
            self.eta = eta * math.sqrt(nx / ne)
        self.xi.setflags(write=False)
        self.eta.setflags(write=False)

    @classmethod
    def zero(cls) -> "RankOnePerturbation":
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_direction(cls, xi_unit, eta_unit, amplitude: float) -> "RankOnePerturbation":
        """Perturbation with dyad amplitude * (xi_unit (x) eta_unit)."""
        return cls(amplitude * np.asarray(xi_unit, dtype=float), eta_unit)

    @property
    def matrix(self) -> Mat3:
        return np.outer(self.xi, self.eta)

    @property
    def amplitude(self) -> float:
        """Frobenius norm of the dyad, ||xi|| * ||eta||."""
        return vec_norm(self.xi) * vec_norm(self.eta)

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0.0

    def scaled(self, s: float) -> "RankOnePerturbation":
        """Perturbation whose dyad is s * (xi (x) eta)."""
        return RankOnePerturbation(s * self.xi, self.eta)

    def __repr__(self):
        return f"RankOnePerturbation(xi={self.xi.tolist()}, eta={self.eta.tolist()})"


def det_rank_one_update(F: Mat3, p: RankOnePerturbation) -> float:
    """det(F + xi (x) eta) evaluated as det F + <cofactor(F) eta, xi>.

    Valid for every F, including singular ones.
    """
    return det3(F) + float(np.dot(cofactor(F) @ p.eta, p.xi))


def segment_in_gl_plus(F: Mat3, p: RankOnePerturbation) -> bool:
    """True iff det(F + t * xi (x) eta) > 0 for all t in [0, 1].

    The determinant is affine in t along a rank-one line, so positivity at
    both endpoints settles the whole segment.
    """
    return det3(F) > 0.0 and det_rank_one_update(F, p) > 0.0


def rank_one_factor(A: Mat3):
    """Factor a numerically rank-<=1 matrix as a balanced dyad.

    Returns (a, b) with A ~= a (x) b and ||a|| == ||b|| (unique up to a
    simultaneous sign flip), the zero pair for A == 0, and None when the
    residual after removing the dominant singular pair exceeds
    RANK_ONE_RTOL times the dominant singular value (i.e. sigma_2 is not
    negligible against sigma_1).
    """
    AtA = A.T @ A
    w, V = eig_sym3(AtA)
    s1 = math.sqrt(max(w[2], 0.0))
    if s1 == 0.0:
        return np.zeros(3), np.zeros(3)
    v = V[:, 2]
    u = A @ v
    nu = vec_norm(u)
    if nu == 0.0:
        return None
    scale = math.sqrt(nu)
    a = (scale / nu) * u
    b = scale * v
    # Deflation residual equals sqrt(sigma_2^2 + sigma_3^2) up to roundoff;
    # measuring it directly keeps the rank test immune to eigenvalue noise
    # on the small end of the spectrum.
    if frob(A - np.outer(a, b)) > RANK_ONE_RTOL * s1:
        return None
    return a, b


# ---------------------------------------------------------------------------
# Closed-form symmetric 3x3 eigensolver (trigonometric Cardano on the
# deviatoric characteristic polynomial). Used for numerical-rank tests,
# acoustic-tensor definiteness, and principal-stretch extraction.
# ---------------------------------------------------------------------------

def eig_sym3_values(A: Mat3) -> np.ndarray:
    """Eigenvalues of a symmetric 3x3 matrix, ascending.

    Only the symmetric part of A is read. No iteration: the deviator is
    scaled to unit magnitude and its characteristic polynomial solved by the
    arccos form of Cardano's formula.
    """
    S = 0.5 * (A + A.T)
    q = (S[0, 0] + S[1, 1] + S[2, 2]) / 3.0
    D = S - q * IDENTITY
    p2 = float(np.multiply(D, D).sum())
    if p2 <= 0.0:
        return np.array([q, q, q])
    p = math.sqrt(p2 / 6.0)
    r = det3(D / p) / 2.0
    # acos is infinitely sensitive at +-1: a value a few ulps inside the
    # interval smears an exactly repeated eigenvalue by ~sqrt(eps). Snap.
    snap = 32.0 * _EPS
    if r >= 1.0 - snap:
        r = 1.0
    elif r <= -1.0 + snap:
        r = -1.0
    phi = math.acos(r) / 3.0
    hi = q + 2.0 * p * math.cos(phi)
    lo = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    mid = 3.0 * q - hi - lo
    return np.array([lo, mid, hi])


def _null_direction(M: Mat3, scale: float):
    """Best cross-product estimate of a unit null vector of symmetric M."""
    best = None
    best_n = 4e-16 * scale * scale  # below this the rows are numerically parallel
    for i in range(3):
        for j in range(i + 1, 3):
            c = np.cross(M[i], M[j])
            n = vec_norm(c)
            if n > best_n:
                best, best_n = c / n, n
    return best


def _perp_pair(u: Vec3):
    """Two unit vectors completing u to an orthonormal basis."""
    a = np.array([1.0, 0.0, 0.0]) if abs(u[0]) <= 0.9 else np.array([0.0, 1.0, 0.0])
    v = np.cross(u, a)
    v /= vec_norm(v)
    return v, np.cross(u, v)


def eig_sym3(A: Mat3):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns).

    Eigenvectors come from cross products of rows of S - lambda I; repeated
    eigenvalues fall back to an orthogonal completion of the isolated
    eigenvector's complement.
    """
    S = 0.5 * (A + A.T)
    w = eig_sym3_values(S)
    scale = max(frob(S), 1e-300)
    if w[2] - w[0] <= 1e-8 * scale:  # triple eigenvalue: S is (near) spherical
        return w, np.eye(3)

    V = np.empty((3, 3))
    u_lo = _null_direction(S - w[0] * IDENTITY, scale)
    u_hi = _null_direction(S - w[2] * IDENTITY, scale)
    if u_lo is not None and u_hi is not None:
        V[:, 0] = u_lo
        V[:, 2] = u_hi
        v = np.cross(u_lo, u_hi)
        n = vec_norm(v)
        V[:, 1] = v / n if n > 0 else _perp_pair(u_lo)[0]
        return w, V
    if u_lo is None and u_hi is None:  # pragma: no cover - excluded by spread check
        return w, np.eye(3)
    # One end is (near-)degenerate with the middle eigenvalue: keep the
    # isolated eigenvector and complete its orthogonal 2-D eigenspace.
    iso = 0 if u_lo is not None else 2
    u = u_lo if u_lo is not None else u_hi
    p1, p2 = _perp_pair(u)
    others = [k for k in range(3) if k != iso]
    V[:, iso] = u
    V[:, others[0]] = p1
    V[:, others[1]] = p2
    return w, V


# ---------------------------------------------------------------------------
# Seeded sampling. Samplers are pure functions of their seed; scan loops
# derive per-sample seeds as [master_seed, stream, index] so that results do
# not depend on traversal order or worker count.
# ---------------------------------------------------------------------------

def rng_from(seed) -> np.random.Generator:
    """Generator for an integer seed or a derived-seed sequence of integers."""
    return np.random.default_rng(seed)


def gl_plus_from_rng(rng: np.random.Generator, spread: float, max_tries: int = 1000) -> Mat3:
    """Draw F = I + spread * G, G ~ U[-1,1]^{3x3}, rejecting det F < 0.1."""
    if not 0.0 < spread < 1.0:
        raise ValueError(f"spread must lie in (0, 1), got {spread}")
    for _ in range(max_tries):
        F = IDENTITY + spread * rng.uniform(-1.0, 1.0, size=(3, 3))
        if det3(F) >= GL_SAMPLE_MIN_DET:
            return F
    raise SamplerError(
        f"no sample with det >= {GL_SAMPLE_MIN_DET} in {max_tries} tries (spread={spread})"
    )


def unit_vec_from_rng(rng: np.random.Generator) -> Vec3:
    """Uniform point on the unit sphere (normalized standard normal triple)."""
    while True:
        v = rng.standard_normal(3)
        n = vec_norm(v)
        if n > 1e-12:
            return v / n


def sample_gl_plus(seed, spread: float, max_tries: int = 1000) -> Mat3:
    """Seeded draw from the GL+(3) sampling region around the identity."""
    return gl_plus_from_rng(rng_from(seed), spread, max_tries)


def sample_unit_vec(seed) -> Vec3:
    """Seeded uniform draw from the unit sphere."""
    return unit_vec_from_rng(rng_from(seed))
