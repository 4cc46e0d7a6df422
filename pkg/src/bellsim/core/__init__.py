from .config import SimConfig
from .errors import BellSimError, ValidationError, DimensionMismatchError, SolverError
from .console import echo
from .tensor import (
    DimFactorization, as_dims, tensor, tensor_all, partial_trace, partial_transpose,
    permute_systems, eig_hermitian, is_hermitian, is_psd, min_eigenvalue,
)
