from .simplex import LpResult, phase_one
from .divergence import (
    MinimaxProblem, SolverRun, kl_bits, project_simplex, floor_weights,
    projected_subgradient, mirror_descent, multi_restart,
)
