"""Conjugate gradient solver with runtime checks of its defining identities."""
from .diagnostics import InvariantReport, run_all
from .errors import (BreakdownError, CGError, DimensionError, InvalidArgument, InvalidState,
                     IoError, NonFiniteError, ParseError, SingularMatrix, UnsupportedFormat)
from .linalg import (DenseMatrix, LinearSystem, SparseMatrixCSR, axpy, check_symmetry,
                     direct_solve, dot, generate_laplacian_1d, generate_random_spd, matvec,
                     random_vector)
from .solver import (IterationState, SolveReport, SolverConfig, StopReason, cg_step,
                     compute_alpha, compute_beta, init_state, solve, steepest_descent_solve)

__version__ = "0.1.0"
