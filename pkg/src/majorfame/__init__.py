"""Entanglement detection from majorization uncertainty bounds."""

__version__ = "0.1.0"

from .majorization import (  # noqa: E402
    compare,
    construct_bistochastic,
    f_divergence,
    hellinger_distance,
    lattice_join,
    schur_measure,
    variational_distance,
)
from .measurements import Povm, bell_basis, computational_basis, measure, product_povm, tensor_dist  # noqa: E402
from .tensor import DensityMatrix, HermitianOperator, HilbertSpec, PureState  # noqa: E402
