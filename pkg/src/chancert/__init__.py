"""Certify quantum channels against a standard device via fidelity bounds
between their Choi matrices."""

from .certify import (
    CertificationReport,
    FidelityCertifier,
    ShotConfig,
    estimate_overlap_shots,
    estimate_overlap_sq_shots,
    qubit_budget,
    ssfb_certify,
    vqfe_certify,
)
from .channels import (
    ChoiMatrix,
    DensityMatrix,
    KrausChannel,
    apply,
    choi_of,
    kraus_of,
    max_entangled,
    validate_cptp,
)
from .fidelity import (
    BoundsReport,
    TruncatedBounds,
    a_g2,
    bounds_report,
    cg_distance,
    fidelity,
    fidelity_spectrum,
    sub_fidelity,
    super_fidelity,
    truncated_bounds,
)
from .randchan import ginibre, make_rng, random_choi, random_density
from .vqsd import VariationalDiagonalizer, diagonalize, exact_oracle

__version__ = "0.1.0"
