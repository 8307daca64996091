"""Nonlinear entanglement witnesses built from envelopes of linear witness families."""

from .errors import EnvwitError
from .matcore import DEFAULT_TOL, BipartiteDims, Tolerance, partial_transpose
from .states import DensityMatrix, PureState, SchmidtWeights, bell, bell_diagonal, density_from_pure
from .witness import DeltaMatrix, delta_lambda, delta_t, family_delta, minor_hierarchy

__version__ = "0.1.0"

__all__ = [
    "EnvwitError",
    "DEFAULT_TOL",
    "BipartiteDims",
    "Tolerance",
    "partial_transpose",
    "DensityMatrix",
    "PureState",
    "SchmidtWeights",
    "bell",
    "bell_diagonal",
    "density_from_pure",
    "DeltaMatrix",
    "delta_lambda",
    "delta_t",
    "family_delta",
    "minor_hierarchy",
]
