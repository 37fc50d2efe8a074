"""Propagation and stationary analysis.

Covers unitary Schrodinger evolution, Lindblad master-equation evolution on
the vectorized density matrix, direct steady-state solving, and two-time
correlators via the quantum regression theorem.

Vectorization convention: column stacking, ``vec(rho)[i + dim*j] = rho[i, j]``,
so the superoperator of ``A rho B`` is ``B.T (x) A`` and a dissipator
``D[o]rho = (2 o rho o' - rho o'o - o'o rho)/2`` maps to
``(conj(o) (x) o) - (I (x) o'o)/2 - ((o'o).T (x) I)/2``.

Propagation internally factors out the diagonal phases of the generator
(a rotating-frame change that is exact and is undone before sampling); this
keeps the adaptive step size tied to the physical coupling scales instead of
the largest level spacing.  Pass ``rotating=False`` to integrate the raw
generator instead.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import tensor
from .errors import (
    DegenerateSteadyStateError,
    DimensionError,
    IntegrationError,
    LinearSolveError,
    TruncationError,
)
from .model import Basis, DressedBasis, ModelConfig, OperatorSet, dressed_basis
from .tensor import ODEControl

#: default tolerances: tight pair for pure states, looser pair for superoperators
SCHRODINGER_CTRL = ODEControl(rel_tol=1e-9, abs_tol=1e-11)
MASTER_CTRL = ODEControl(rel_tol=1e-8, abs_tol=1e-10)

#: steady-state acceptance threshold on ||L rho_ss||_2
STEADY_RESIDUAL_TOL = 1e-9


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stack a density matrix."""
    return np.asarray(rho, dtype=np.complex128).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v, dtype=np.complex128).reshape((dim, dim), order="F")


@dataclass
class Liouvillian:
    """Vectorized master-equation generator ``rho_dot = superop @ vec(rho)``."""

    superop: sp.csr_matrix
    dim: int
    cfg: ModelConfig | None = None
    ops: OperatorSet | None = None


@dataclass
class SteadyState:
    """Stationary density matrix and the norm of its Liouvillian residual."""

    rho: np.ndarray
    residual: float


@dataclass
class EvolutionRecord:
    """Sampled evolution: states on a time grid plus dressed-basis populations.

    ``populations`` maps ``(k, l, sign)`` with sign in {"+", "-"} to the time
    series of ``P_{|k,l,sign>}``; it is empty when no model context is
    available (bare-generator toy problems).
    """

    times: np.ndarray
    states: list
    populations: dict = field(default_factory=dict)


def liouvillian_matrix(h: sp.spmatrix, collapse: list[tuple[float, sp.spmatrix]]) -> sp.csr_matrix:
    """Vectorized generator for Hamiltonian ``h`` and ``(rate, operator)`` channels."""
    h = tensor.as_operator(h)
    dim = h.shape[0]
    if h.shape[0] != h.shape[1]:
        raise DimensionError("Hamiltonian must be square")
    eye = tensor.identity(dim)
    gen = -1j * (tensor.kron(eye, h) - tensor.kron(h.T, eye))
    for rate, op in collapse:
        if rate == 0.0:
            continue
        op = tensor.as_operator(op)
        if op.shape != (dim, dim):
            raise DimensionError("collapse operator dimension mismatch")
        opdop = tensor.as_operator(op.conj().T @ op)
        gen = gen + rate * (
            tensor.kron(op.conj(), op)
            - 0.5 * tensor.kron(eye, opdop)
            - 0.5 * tensor.kron(opdop.T, eye)
        )
    return tensor.prune(tensor.as_operator(gen))


def build_liouvillian(ops: OperatorSet, cfg: ModelConfig | None = None) -> Liouvillian:
    """Master-equation generator with the three decay channels of the model."""
    cfg = cfg or ops.cfg
    collapse = [(cfg.kappa_a, ops.a), (cfg.kappa_b, ops.b), (cfg.gamma, ops.sigma_minus)]
    return Liouvillian(
        superop=liouvillian_matrix(ops.h_int, collapse),
        dim=ops.dim,
        cfg=cfg,
        ops=ops,
    )


def _propagate(generator: sp.csr_matrix, y0: np.ndarray, t_grid, ctrl: ODEControl, rotating: bool) -> np.ndarray:
    """Integrate ``dy/dt = generator @ y`` sampled on ``t_grid``.

    With ``rotating=True`` the imaginary part of the generator diagonal is
    transformed away before integration and restored on the samples; the
    result is identical up to integration tolerances.
    """
    t = np.asarray(t_grid, dtype=float)
    if not rotating:
        out = tensor.integrate_ode(lambda _t, y: generator @ y, y0, t, ctrl)
        return out
    freqs = -generator.diagonal().imag  # diag = -i*freqs + (real decay part)
    rest = tensor.as_operator(generator - sp.diags(-1j * freqs))
    t0 = t[0]

    def fun(tt, y):
        phase = np.exp((-1j * (tt - t0)) * freqs)
        return np.conj(phase) * (rest @ (phase * y))

    tilde = tensor.integrate_ode(fun, y0, t, ctrl)
    phases = np.exp((-1j * (t - t0))[:, None] * freqs[None, :])
    return phases * tilde


def dressed_populations(state: np.ndarray, basis: Basis, dressed: DressedBasis) -> np.ndarray:
    """Populations ``P[sign, k, l]`` with sign index 0 = "+", 1 = "-".

    ``state`` may be a pure state vector or a density matrix on ``basis``.
    """
    la, lb = basis.levels_a, basis.levels_b
    rot = np.array(
        [[dressed.c_plus, dressed.c_minus], [dressed.c_minus, -dressed.c_plus]],
        dtype=np.complex128,
    )
    state = np.asarray(state)
    if state.ndim == 1:
        amps = state.reshape(2, la, lb)
        dressed_amps = np.einsum("ds,skl->dkl", rot, amps)
        return np.abs(dressed_amps) ** 2
    blocks = state.reshape(2, la, lb, 2, la, lb)
    diag = np.einsum("sklrkl->srkl", blocks)
    return np.einsum("ds,dr,srkl->dkl", rot, rot.conj(), diag).real


def _population_dict(pop_series: np.ndarray, basis: Basis) -> dict:
    out = {}
    for d, sign in enumerate("+-"):
        for k in range(basis.levels_a):
            for l in range(basis.levels_b):
                out[(k, l, sign)] = np.ascontiguousarray(pop_series[:, d, k, l])
    return out


def evolve_schrodinger(
    ops: OperatorSet,
    psi0: np.ndarray,
    t_grid,
    ctrl: ODEControl | None = None,
    rotating: bool = True,
) -> EvolutionRecord:
    """Unitary evolution under the full rotating-frame Hamiltonian.

    ``psi0`` must be normalized; norm drift beyond 1e-5 at any sample raises
    :class:`IntegrationError` (tolerances too loose for the requested span).
    """
    psi0 = tensor.as_vector(psi0)
    if psi0.shape[0] != ops.dim:
        raise DimensionError(f"psi0 has dimension {psi0.shape[0]}, expected {ops.dim}")
    norm0 = np.linalg.norm(psi0)
    if abs(norm0 - 1.0) > 1e-10:
        raise ValueError(f"psi0 must be normalized (|norm - 1| = {abs(norm0 - 1.0):.2e})")
    ctrl = ctrl or SCHRODINGER_CTRL
    generator = tensor.as_operator(-1j * ops.h_int)
    states = _propagate(generator, psi0, t_grid, ctrl, rotating)
    norms = np.linalg.norm(states, axis=1)
    drift = float(np.max(np.abs(norms - 1.0)))
    if drift > 1e-5:
        raise IntegrationError(f"norm drift {drift:.2e} exceeds 1e-5; tighten tolerances")
    dressed = dressed_basis(ops.cfg)
    pops = np.stack([dressed_populations(s, ops.basis, dressed) for s in states])
    return EvolutionRecord(
        times=np.asarray(t_grid, dtype=float),
        states=[s for s in states],
        populations=_population_dict(pops, ops.basis),
    )


def evolve_master(
    liou: Liouvillian,
    rho0: np.ndarray,
    t_grid,
    ctrl: ODEControl | None = None,
    rotating: bool = True,
) -> EvolutionRecord:
    """Master-equation evolution of a density matrix sampled on ``t_grid``."""
    rho0 = np.asarray(rho0, dtype=np.complex128)
    if rho0.shape != (liou.dim, liou.dim):
        raise DimensionError(f"rho0 has shape {rho0.shape}, expected {(liou.dim, liou.dim)}")
    ctrl = ctrl or MASTER_CTRL
    vs = _propagate(liou.superop, vec(rho0), t_grid, ctrl, rotating)
    rhos = [unvec(v, liou.dim) for v in vs]
    traces = np.array([np.trace(r) for r in rhos])
    if np.max(np.abs(traces - np.trace(rho0))) > 1e-6:
        raise IntegrationError("trace drift exceeds 1e-6 along master-equation evolution")
    populations = {}
    if liou.ops is not None:
        dressed = dressed_basis(liou.ops.cfg)
        pops = np.stack([dressed_populations(r, liou.ops.basis, dressed) for r in rhos])
        populations = _population_dict(pops, liou.ops.basis)
    return EvolutionRecord(times=np.asarray(t_grid, dtype=float), states=rhos, populations=populations)


def _trace_indices(dim: int) -> np.ndarray:
    return np.arange(dim) * (dim + 1)


def _bordered_solve(superop: sp.csr_matrix, dim: int, border_row: int) -> np.ndarray:
    """Replace one trace-diagonal row with the trace constraint and solve."""
    n = dim * dim
    weight = np.mean(np.abs(superop.data)) if superop.nnz else 1.0
    lil = superop.tolil(copy=True)
    lil[border_row, :] = 0.0
    lil[border_row, _trace_indices(dim)] = weight
    bordered = lil.tocsr()
    rhs = np.zeros(n, dtype=np.complex128)
    rhs[border_row] = weight
    x = tensor.solve_sparse(bordered, rhs)
    rho = unvec(x, dim)
    return rho / np.trace(rho)


def solve_steady_state(liou: Liouvillian, check_unique: bool = False) -> SteadyState:
    """Stationary state of the Liouvillian by a bordered direct solve.

    One row of the vectorized system is replaced by the trace constraint
    (rows acting on the density-matrix diagonal are linearly dependent for a
    trace-preserving generator, so removing one loses nothing).  The result
    is checked for residual, hermiticity, unit trace and positivity.

    With ``check_unique=True`` a second bordered solve (different replaced
    row) probes for a multi-dimensional kernel: if the two solutions differ,
    their difference is itself (numerically) a stationary direction and
    :class:`DegenerateSteadyStateError` is raised.
    """
    dim = liou.dim
    rho = _bordered_solve(liou.superop, dim, border_row=0)
    herm_dev = float(np.max(np.abs(rho - rho.conj().T)))
    if herm_dev > 1e-10:
        raise LinearSolveError(f"steady state hermiticity deviation {herm_dev:.2e} exceeds 1e-10")
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = float(np.linalg.norm(liou.superop @ vec(rho)))
    if residual > STEADY_RESIDUAL_TOL:
        raise LinearSolveError(
            f"steady-state residual {residual:.2e} exceeds {STEADY_RESIDUAL_TOL:.1e}; "
            "the Liouvillian is ill-conditioned or its kernel is degenerate"
        )
    min_eig = float(np.linalg.eigvalsh(rho).min())
    if min_eig < -1e-8:
        raise LinearSolveError(f"steady state has negative eigenvalue {min_eig:.2e}")
    if check_unique:
        rho2 = _bordered_solve(liou.superop, dim, border_row=dim * dim - 1)
        diff = rho2 - rho
        diff_norm = float(np.linalg.norm(diff))
        if diff_norm > 1e-7:
            candidate = vec(diff) / diff_norm
            cand_residual = float(np.linalg.norm(liou.superop @ candidate))
            scale = float(np.mean(np.abs(liou.superop.data))) if liou.superop.nnz else 1.0
            if cand_residual < 1e-6 * scale:
                raise DegenerateSteadyStateError(
                    f"second stationary direction found (candidate residual {cand_residual:.2e})"
                )
            raise LinearSolveError(
                f"bordered solves disagree by {diff_norm:.2e} but the difference is not "
                f"stationary (residual {cand_residual:.2e}); solver conditioning is suspect"
            )
    return SteadyState(rho=rho, residual=residual)


def regression_correlator(
    liou: Liouvillian,
    rho_ss: SteadyState | np.ndarray,
    collapse_left: sp.spmatrix,
    measure,
    tau_grid,
    ctrl: ODEControl | None = None,
    rotating: bool = True,
) -> np.ndarray:
    """Two-time correlator kernel via the quantum regression theorem.

    Evolves the collapsed initial condition ``c rho_ss c'`` under the
    Liouvillian and returns ``Tr[measure . e^{L tau}(c rho_ss c')]`` on the
    delay grid.  ``measure`` may be one operator (returns shape
    ``(len(tau_grid),)``) or a sequence (returns ``(n_measures, len(tau))``).
    Values are validated to be real up to a 1e-10 imaginary residue, which is
    then discarded; tiny negative values from roundoff are preserved.
    """
    rho = rho_ss.rho if isinstance(rho_ss, SteadyState) else np.asarray(rho_ss)
    c = tensor.as_operator(collapse_left)
    sigma0 = c @ rho @ c.conj().T
    ctrl = ctrl or MASTER_CTRL
    vs = _propagate(liou.superop, vec(sigma0), tau_grid, ctrl, rotating)
    measures = measure if isinstance(measure, (list, tuple)) else [measure]
    rows = np.stack([vec(tensor.as_operator(M).T.toarray()) for M in measures])
    values = rows @ vs.T  # Tr(M sigma) = vec(M.T) . vec(sigma)
    residue = np.max(np.abs(values.imag) / np.maximum(1.0, np.abs(values.real)))
    if residue > 1e-10:
        raise IntegrationError(f"correlator imaginary residue {residue:.2e} exceeds 1e-10")
    out = values.real
    return out if isinstance(measure, (list, tuple)) else out[0]


@dataclass(frozen=True)
class TailReport:
    """Population stranded in the top Fock level of each mode."""

    tail_a: float
    tail_b: float

    @property
    def worst(self) -> float:
        return max(self.tail_a, self.tail_b)


def truncation_check(
    state: np.ndarray,
    cfg: ModelConfig,
    warn_above: float = 1e-5,
    error_above: float = 1e-3,
) -> TailReport:
    """Check how much population sits at the truncation edge.

    Warns above ``warn_above`` and raises :class:`TruncationError` above
    ``error_above``; accepts a state vector or a density matrix.
    """
    basis = cfg.basis
    state = np.asarray(state)
    if state.ndim == 1:
        weights = (np.abs(state) ** 2).reshape(2, basis.levels_a, basis.levels_b)
    else:
        weights = np.einsum("ii->i", state).real.reshape(2, basis.levels_a, basis.levels_b)
    report = TailReport(
        tail_a=float(weights[:, basis.trunc_a, :].sum()),
        tail_b=float(weights[:, :, basis.trunc_b].sum()),
    )
    if report.worst > error_above:
        raise TruncationError(
            f"population {report.worst:.2e} at the truncation edge exceeds {error_above:.1e}; "
            "increase trunc_a/trunc_b"
        )
    if report.worst > warn_above:
        warnings.warn(
            f"population {report.worst:.2e} at the truncation edge (above {warn_above:.1e})",
            RuntimeWarning,
            stacklevel=2,
        )
    return report
