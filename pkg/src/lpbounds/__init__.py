"""Landau-Pollak-type uncertainty bounds for POVMs and mixed states."""
__version__ = "0.1.0"

from ._accel import USE_NUMBA, backend_name
from .errors import *  # noqa: F401,F403
from .matcore import eigh, kron, op_norm, partial_trace, psd_sqrt
from .measure import (
    DensityOperator,
    DomainSpec,
    OverlapReport,
    Povm,
    TrialRecord,
    domain_contains,
    domain_spec,
    improved_bound,
    intrinsic_overlap,
    joint_overlap,
    lpi_check,
    max_prob,
    probabilities,
    uncertainty,
    validate_povm,
)
from .metrics import MetricKernel, builtin_kernel, f_inv, h_cf, triangle_check
from .randgen import (
    RngStream,
    haar_unitary,
    random_mixed_state,
    random_povm,
    random_pure_state,
    random_pvm,
)
