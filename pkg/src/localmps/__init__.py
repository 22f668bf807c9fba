"""Constant-bond-dimension MPS approximations of local properties of 1D states."""

from .construction import ConstructionParams, construct, select_params
from .entanglement import entropy, renyi_tail_bound, truncation_profile
from .errors import (
    DomainError,
    InternalError,
    LocalMpsError,
    NumericError,
    ResourceError,
    ShapeError,
    StateError,
)
from .metrics import ApproxReport, max_local_error
from .mps import LocalWindow, Mps, SchmidtSpectrum, canonicalize, from_dense, inner_product, to_dense
from .states import named_state, random_mps, tfim_exact_ground

__version__ = "0.1.0"
