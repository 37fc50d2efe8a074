"""Numerical substrate: complex sparse operators, Kronecker products, ODE
integration and sparse direct solves.

Everything here is physics-agnostic.  Sparse operators are CSR matrices with
complex128 entries and sorted column indices; dense states are 1-D (vectors)
or 2-D (density matrices) complex ndarrays.  All functions are pure and their
outputs are safe to share across threads/processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import DimensionError, IntegrationError, LinearSolveError, SingularOperatorError

#: entries with |value| below this are purged after sparse arithmetic
ZERO_TOL = 1e-14

#: guard against runaway truncations: largest admissible matrix dimension
MAX_DIMENSION = 1 << 26

#: relative residual bound enforced by solve_sparse
SOLVE_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ODEControl:
    """Tolerance settings for :func:`integrate_ode`."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf


def as_operator(matrix) -> sp.csr_matrix:
    """Coerce a matrix-like object to a canonical complex CSR operator.

    Canonical means: complex128 dtype, sorted indices, no explicit zeros,
    and only finite entries (NaN/Inf are rejected).
    """
    op = sp.csr_matrix(matrix, dtype=np.complex128)
    op.sum_duplicates()
    op.sort_indices()
    if op.nnz and not np.all(np.isfinite(op.data)):
        raise ValueError("operator contains non-finite entries")
    return op


def identity(dim: int) -> sp.csr_matrix:
    return sp.identity(dim, dtype=np.complex128, format="csr")


def prune(op: sp.csr_matrix, tol: float = ZERO_TOL) -> sp.csr_matrix:
    """Drop entries with magnitude below ``tol`` (keeps sparsity stable)."""
    op = op.tocsr(copy=True)
    op.data[np.abs(op.data) < tol] = 0.0
    op.eliminate_zeros()
    op.sort_indices()
    return op


def kron(a, b) -> sp.csr_matrix:
    """Kronecker product of two sparse operators.

    Entry ``(i1*rows_b + i2, j1*cols_b + j2)`` equals ``a[i1, j1] * b[i2, j2]``.
    """
    a = as_operator(a)
    b = as_operator(b)
    if a.shape[0] * b.shape[0] > MAX_DIMENSION or a.shape[1] * b.shape[1] > MAX_DIMENSION:
        raise DimensionError(
            f"kron would produce a {a.shape[0] * b.shape[0]} x "
            f"{a.shape[1] * b.shape[1]} operator (max dimension {MAX_DIMENSION}); "
            "truncation is too large"
        )
    return sp.kron(a, b, format="csr")


def as_vector(v) -> np.ndarray:
    vec = np.asarray(v, dtype=np.complex128).reshape(-1)
    if not np.isfinite(vec).all():
        raise ValueError("vector contains non-finite entries")
    return vec


def matvec(op: sp.spmatrix, v) -> np.ndarray:
    """Sparse matrix-vector product with dimension checking."""
    vec = as_vector(v)
    if op.shape[1] != vec.shape[0]:
        raise DimensionError(f"operator has {op.shape[1]} columns, vector has dimension {vec.shape[0]}")
    return op @ vec


def integrate_ode(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t_grid: Sequence[float],
    ctrl: ODEControl | None = None,
) -> np.ndarray:
    """Propagate ``dy/dt = f(t, y)`` and sample the solution on ``t_grid``.

    Uses an adaptive embedded Runge-Kutta pair (DOP853).  ``t_grid`` must be
    strictly increasing; the returned array has shape ``(len(t_grid), dim)``
    with ``y(t_grid[0]) = y0``.

    Raises
    ------
    IntegrationError
        If the step size underflows (stiffness) or the solver otherwise
        fails; the failing time is included in the message.
    """
    ctrl = ctrl or ODEControl()
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("t_grid must be a non-empty 1-D sequence")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("t_grid must be strictly increasing")
    y0 = as_vector(y0)
    if t.size == 1:
        return y0[np.newaxis, :].copy()
    sol = solve_ivp(
        f,
        (t[0], t[-1]),
        y0,
        method="DOP853",
        t_eval=t,
        rtol=ctrl.rel_tol,
        atol=ctrl.abs_tol,
        max_step=ctrl.max_step,
        dense_output=False,
    )
    if not sol.success:
        t_fail = sol.t[-1] if sol.t.size else t[0]
        raise IntegrationError(f"ODE integration failed: {sol.message}", time=t_fail)
    return np.ascontiguousarray(sol.y.T)


def solve_sparse(a: sp.spmatrix, rhs) -> np.ndarray:
    """Solve ``a @ x = rhs`` with a sparse LU factorization (partial pivoting).

    One step of iterative refinement is applied if needed; the relative
    residual ``||a x - rhs||_2 / max(1, ||rhs||_2)`` must end up below
    ``SOLVE_RESIDUAL_TOL`` or :class:`LinearSolveError` is raised.
    """
    b = as_vector(rhs)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix is {a.shape[0]} x {a.shape[1]}, expected square")
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"matrix has {a.shape[0]} rows, rhs has dimension {b.shape[0]}")
    try:
        lu = spla.splu(sp.csc_matrix(a, dtype=np.complex128))
        x = lu.solve(b)
    except RuntimeError as exc:  # SuperLU signals exact singularity this way
        raise SingularOperatorError(f"sparse LU factorization failed: {exc}") from exc
    if not np.isfinite(x).all():
        raise SingularOperatorError("sparse solve produced non-finite values (singular to working precision)")
    scale = max(1.0, float(np.linalg.norm(b)))
    residual = float(np.linalg.norm(a @ x - b)) / scale
    if residual > SOLVE_RESIDUAL_TOL:
        x = x + lu.solve(b - a @ x)
        residual = float(np.linalg.norm(a @ x - b)) / scale
    if residual > SOLVE_RESIDUAL_TOL:
        raise LinearSolveError(
            f"linear solve residual {residual:.3e} exceeds {SOLVE_RESIDUAL_TOL:.1e} "
            "(matrix nearly singular or badly scaled)"
        )
    return x
