"""Regularized Kaczmarz methods for sparse and low-rank recovery under the t-product."""

from .constraints import (masked_entries, matrix_entries, matrix_rows, tensor_slices,
                          vector_rows)
from .convex import Regularizer
from .solvers import (ControlSequence, DivergenceError, SolveConfig, SolveTrace, compute_beta,
                      dual_value, linbreg, solve, solve_batched, solve_noisy)

__all__ = ["Regularizer", "ControlSequence", "SolveConfig", "SolveTrace", "DivergenceError",
           "solve", "solve_noisy", "solve_batched", "linbreg", "compute_beta", "dual_value",
           "tensor_slices", "vector_rows", "matrix_rows", "matrix_entries", "masked_entries"]
