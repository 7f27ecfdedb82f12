"""Stored-energy material models with analytic first Piola-Kirchhoff stress
and the derived Cauchy stress sigma(F) = S1(F) cofactor(F)^-1.

Models are immutable after construction and all evaluations are pure, so
instances can be shared freely between threads. Energies are densities with
the units of the model's stress scale; deformation gradients must satisfy
det F > 0 (DomainError otherwise).
"""

from __future__ import annotations

import abc
import math

import numpy as np

from .errors import DomainError, Rank1LabError
from .tensors import (
    IDENTITY,
    Mat3,
    cofactor,
    det3,
    eig_sym3_values,
    frob,
    inner,
    rng_from,
    unit_vec_from_rng,
)

#: Cauchy stress must be symmetric to this relative level before symmetrization.
CAUCHY_SYM_RTOL = 1e-10


class MaterialModel(abc.ABC):
    """A hyperelastic stored-energy law W(F) with hand-derived stress.

    Subclasses provide ``_energy`` and ``_piola`` evaluated at an admissible
    F (the positive determinant is passed in so it is computed once).
    ``stress_scale`` is the natural stress magnitude of the model (mu or c),
    used to scale tolerances; ``expected_elliptic`` declares whether the
    model is supposed to be strictly rank-one convex on the sampled region.
    """

    name: str = "material"
    is_isotropic: bool = True
    expected_elliptic: bool = True

    def energy(self, F: Mat3) -> float:
        """Stored energy density W(F)."""
        return self._energy(F, self._admissible_det(F))

    def piola(self, F: Mat3) -> Mat3:
        """First Piola-Kirchhoff stress, the derivative of W with respect to F."""
        return self._piola(F, self._admissible_det(F))

    @property
    @abc.abstractmethod
    def stress_scale(self) -> float:
        ...

    @property
    @abc.abstractmethod
    def parameters(self) -> dict:
        ...

    @abc.abstractmethod
    def _energy(self, F: Mat3, J: float) -> float:
        ...

    @abc.abstractmethod
    def _piola(self, F: Mat3, J: float) -> Mat3:
        ...

    @staticmethod
    def _admissible_det(F: Mat3) -> float:
        J = det3(F)
        if J <= 0.0:
            raise DomainError(f"deformation gradient left GL+(3): det F = {J:.3e}")
        return J

    def __repr__(self):
        params = ", ".join(f"{k}={v}" for k, v in self.parameters.items())
        return f"{type(self).__name__}({params})"


class BlatzKoUniConstant(MaterialModel):
    """Uni-constant Blatz-Ko energy mu/2 (||F||^2 + 2/det F - 5).

    Strictly polyconvex on GL+(3); stress-free at the identity.
    """

    name = "blatz-ko"
    expected_elliptic = True

    def __init__(self, mu: float = 1.0):
        if mu <= 0.0:
            raise ValueError("mu must be positive")
        self.mu = float(mu)

    @property
    def stress_scale(self) -> float:
        return self.mu

    @property
    def parameters(self) -> dict:
        return {"mu": self.mu}

    def _energy(self, F, J):
        return 0.5 * self.mu * (frob(F) ** 2 + 2.0 / J - 5.0)

    def _piola(self, F, J):
        return self.mu * (F - cofactor(F) / (J * J))


class CompressibleNeoHooke(MaterialModel):
    """Compressible Neo-Hooke: mu/2 (||F||^2 - 3) - mu ln J + lam/2 (ln J)^2.

    Stress-free at the identity and rank-one convex for positive parameters
    on the sampled region; serves as the well-behaved reference law.
    """

    name = "neo-hooke"
    expected_elliptic = True

    def __init__(self, mu: float = 1.0, lam: float = 1.0):
        if mu <= 0.0 or lam <= 0.0:
            raise ValueError("mu and lam must be positive")
        self.mu = float(mu)
        self.lam = float(lam)

    @property
    def stress_scale(self) -> float:
        return self.mu

    @property
    def parameters(self) -> dict:
        return {"mu": self.mu, "lam": self.lam}

    def _energy(self, F, J):
        lnJ = math.log(J)
        return 0.5 * self.mu * (frob(F) ** 2 - 3.0) - self.mu * lnJ + 0.5 * self.lam * lnJ * lnJ

    def _piola(self, F, J):
        Fit = cofactor(F) / J  # F^-T for J > 0
        return self.mu * (F - Fit) + self.lam * math.log(J) * Fit


class SaintVenantKirchhoff(MaterialModel):
    """Saint Venant-Kirchhoff: lam/2 tr(E)^2 + mu ||E||^2, E = (F^T F - I)/2.

    The classical control case: isotropic and stress-free at the identity,
    but loses rank-one convexity under sufficient compression.
    """

    name = "svk"
    expected_elliptic = False

    def __init__(self, mu: float = 1.0, lam: float = 1.0):
        if mu <= 0.0 or lam <= 0.0:
            raise ValueError("mu and lam must be positive")
        self.mu = float(mu)
        self.lam = float(lam)

    @property
    def stress_scale(self) -> float:
        return self.mu

    @property
    def parameters(self) -> dict:
        return {"mu": self.mu, "lam": self.lam}

    def _energy(self, F, J):
        E = 0.5 * (F.T @ F - IDENTITY)
        trE = E[0, 0] + E[1, 1] + E[2, 2]
        return 0.5 * self.lam * trE * trE + self.mu * inner(E, E)

    def _piola(self, F, J):
        E = 0.5 * (F.T @ F - IDENTITY)
        trE = E[0, 0] + E[1, 1] + E[2, 2]
        return F @ (self.lam * trE * IDENTITY + 2.0 * self.mu * E)


class VolumetricCubic(MaterialModel):
    """Purely volumetric demo energy c (det F - 2)^3 / 3.

    Depends on F only through det F, so the Cauchy stress is the spherical
    tensor c (det F - 2)^2 I. Not stress-free at the identity (by design):
    det = 1 and det = 3 produce identical Cauchy stress, giving a closed-form
    collision along the rank-one line I + t * 2 e1 (x) e1.
    """

    name = "volumetric-cubic"
    expected_elliptic = False

    def __init__(self, c: float = 1.0):
        if c <= 0.0:
            raise ValueError("c must be positive")
        self.c = float(c)

    @property
    def stress_scale(self) -> float:
        return self.c

    @property
    def parameters(self) -> dict:
        return {"c": self.c}

    def _energy(self, F, J):
        return self.c * (J - 2.0) ** 3 / 3.0

    def _piola(self, F, J):
        return self.c * (J - 2.0) ** 2 * cofactor(F)


MODEL_REGISTRY = {
    "blatz-ko": BlatzKoUniConstant,
    "neo-hooke": CompressibleNeoHooke,
    "svk": SaintVenantKirchhoff,
    "volumetric-cubic": VolumetricCubic,
}


def canonical_model_name(name: str) -> str:
    return name.strip().lower().replace("_", "-")


def make_model(name: str, **params) -> MaterialModel:
    """Instantiate a registered model by name (underscores tolerated)."""
    key = canonical_model_name(name)
    if key not in MODEL_REGISTRY:
        raise KeyError(f"unknown model '{name}' (known: {sorted(MODEL_REGISTRY)})")
    return MODEL_REGISTRY[key](**params)


def piola_fd(model: MaterialModel, F: Mat3, h: float = 1e-6) -> Mat3:
    """Central-difference derivative of the energy, component by component.

    Oracle for the analytic stress: entry (i, j) is
    (W(F + h E_ij) - W(F - h E_ij)) / (2h). Every probe must stay in GL+(3).
    """
    S = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            Fp = F.copy()
            Fp[i, j] += h
            Fm = F.copy()
            Fm[i, j] -= h
            S[i, j] = (model.energy(Fp) - model.energy(Fm)) / (2.0 * h)
    return S


def cauchy(model: MaterialModel, F: Mat3) -> Mat3:
    """Cauchy stress sigma(F) = S1(F) cofactor(F)^-1, symmetrized.

    For frame-indifferent models the raw product is symmetric up to
    roundoff; the skew residual is checked against CAUCHY_SYM_RTOL before
    the symmetric part is returned.
    """
    J = MaterialModel._admissible_det(F)
    sigma = model.piola(F) @ F.T / J  # (Cof F)^-1 = F^T / det F
    skew = frob(sigma - sigma.T)
    if skew > CAUCHY_SYM_RTOL * (frob(sigma) + model.stress_scale):
        raise Rank1LabError(
            f"Cauchy stress of '{model.name}' lost symmetry (residual {skew:.3e})"
        )
    return 0.5 * (sigma + sigma.T)


def blatzko_cauchy_from_B(mu: float, B: Mat3) -> Mat3:
    """Isotropic Blatz-Ko Cauchy response mu/det B (sqrt(det B) B - I).

    B is the left Cauchy-Green tensor F F^T; it must be symmetric positive
    definite. For any F with F F^T = B this equals cauchy(BlatzKo(mu), F).
    """
    if frob(B - B.T) > 1e-8 * (1.0 + frob(B)):
        raise DomainError("B must be symmetric")
    evals = eig_sym3_values(B)
    if evals[0] <= 0.0:
        raise DomainError("B must be positive definite")
    dB = det3(B)
    return mu / dB * (math.sqrt(dB) * B - IDENTITY)


def spherical_stress(sigma: Mat3) -> float:
    """Spherical (mean normal) part tr(sigma) / 3."""
    return float(sigma[0, 0] + sigma[1, 1] + sigma[2, 2]) / 3.0


def rotation_from_rng(rng) -> Mat3:
    """Random rotation via Rodrigues' formula on a random axis and angle."""
    axis = unit_vec_from_rng(rng)
    theta = rng.uniform(0.0, math.pi)
    K = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return IDENTITY + math.sin(theta) * K + (1.0 - math.cos(theta)) * (K @ K)


def sample_rotation(seed) -> Mat3:
    """Seeded random rotation matrix."""
    return rotation_from_rng(rng_from(seed))
