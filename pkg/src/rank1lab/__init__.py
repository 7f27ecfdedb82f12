"""rank1lab: numerical verification of rank-one convexity and Cauchy-stress
injectivity for hyperelastic constitutive laws."""

from .errors import (
    DomainError,
    NotIsotropicError,
    Rank1LabError,
    SamplerError,
    SingularMatrixError,
)
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
    eig_sym3,
    eig_sym3_values,
    inverse,
    rank_one_factor,
    sample_gl_plus,
    sample_unit_vec,
    segment_in_gl_plus,
)
from .materials import (
    BlatzKoUniConstant,
    CompressibleNeoHooke,
    MaterialModel,
    SaintVenantKirchhoff,
    VolumetricCubic,
    blatzko_cauchy_from_B,
    cauchy,
    make_model,
    piola_fd,
    spherical_stress,
)
from .convexity import (
    EllipticityReport,
    ScanConfig,
    SegmentProbe,
    acoustic_tensor,
    baker_ericksen_check,
    convexity_on_segment,
    ellipticity_scan,
    monotonicity_gap,
    rank_one_second_derivative,
)
from .injectivity import (
    CollisionCertificate,
    InjectivitySearchResult,
    PressureScanRecord,
    blatzko_pressure_scan,
    cauchy_gap_along_line,
    injectivity_search,
    pressure_compression_check,
    theorem_identity_gap,
    twin_check,
    twin_det_contradiction,
)

__version__ = "0.1.0"
