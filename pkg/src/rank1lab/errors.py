"""Exception types shared across the package."""


class Rank1LabError(Exception):
    """Base class for all rank1lab errors."""


class DomainError(Rank1LabError):
    """A deformation state left the admissible set (det F > 0) or an input
    violated a physical precondition."""


class SingularMatrixError(Rank1LabError):
    """Matrix inversion requested for a (numerically) singular matrix."""


class NotIsotropicError(Rank1LabError):
    """An isotropy-only operation was called on a non-isotropic model."""


class SamplerError(Rank1LabError):
    """Rejection sampling exhausted its retry budget."""
