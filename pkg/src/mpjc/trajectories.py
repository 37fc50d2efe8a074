"""Monte-Carlo wave-function (quantum-jump) unraveling of the master equation.

Between jumps the unnormalized state evolves under the non-Hermitian
effective Hamiltonian ``H - (i/2) sum_c rate_c o_c' o_c``; its squared norm
decays monotonically and a jump fires when it crosses a pre-drawn uniform
threshold.  The jump channel is selected with probability proportional to
``rate_c <o_c' o_c>`` and the state is collapsed and renormalized.

At the Hilbert-space sizes this package targets (dim of order 100) the
effective Hamiltonian is diagonalized once per trajectory configuration and
inter-jump propagation is evaluated in closed form; threshold crossings are
then bracketed on the output grid (the norm is monotone, so no crossing can
be missed) and refined by bisection.  Randomness comes from a counter-based
generator seeded per trajectory, so ensembles are reproducible regardless of
scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from . import tensor
from .dynamics import dressed_populations
from .errors import JumpRefinementError
from .model import ModelConfig, OperatorSet, build_operators, dressed_basis

#: accepted jumps must satisfy | ||psi||^2 - threshold | below this
NORM_BRACKET_TOL = 1e-8

#: bisection iteration cap for jump-time refinement
MAX_BISECTIONS = 60

CHANNEL_MODE_A = "mode_a"
CHANNEL_MODE_B = "mode_b"
CHANNEL_TLS = "tls"


@dataclass(frozen=True)
class JumpEvent:
    """One collapse: when, through which channel, at what pre-jump norm."""

    time: float
    channel: str
    pre_jump_norm: float


@dataclass
class Trajectory:
    """A single unraveling realization sampled on a time grid."""

    seed: int
    times: np.ndarray
    populations: dict
    jumps: list


@dataclass
class EnsembleResult:
    """Trajectory-averaged populations with per-point standard errors."""

    times: np.ndarray
    mean: dict
    stderr: dict
    n_traj: int


class _Propagator:
    """Closed-form evolution under a (generally non-Hermitian) Hamiltonian.

    Uses the eigendecomposition when it reconstructs the matrix to near
    machine precision, otherwise falls back to dense matrix exponentials.
    """

    def __init__(self, h_nh):
        self._h = np.asarray(h_nh.toarray() if hasattr(h_nh, "toarray") else h_nh, dtype=np.complex128)
        self._expm_cache: dict[float, np.ndarray] = {}
        self._eig_ok = False
        try:
            w, v = np.linalg.eig(self._h)
            vinv = np.linalg.inv(v)
            recon_err = np.max(np.abs((v * w) @ vinv - self._h))
            scale = max(1.0, float(np.max(np.abs(self._h))))
            if recon_err <= 1e-10 * scale:
                self._w, self._v, self._vinv = w, v, vinv
                self._eig_ok = True
        except np.linalg.LinAlgError:
            pass

    def advance(self, psi: np.ndarray, dt: float) -> np.ndarray:
        if dt == 0.0:
            return psi.copy()
        if self._eig_ok:
            return self._v @ (np.exp(-1j * self._w * dt) * (self._vinv @ psi))
        u = self._expm_cache.get(dt)
        if u is None:
            u = scipy.linalg.expm(-1j * self._h * dt)
            if len(self._expm_cache) < 8:  # cache only the repeating grid steps
                self._expm_cache[dt] = u
        return u @ psi


def _channels(ops: OperatorSet, cfg: ModelConfig):
    out = []
    for name, rate, op in (
        (CHANNEL_MODE_A, cfg.kappa_a, ops.a),
        (CHANNEL_MODE_B, cfg.kappa_b, ops.b),
        (CHANNEL_TLS, cfg.gamma, ops.sigma_minus),
    ):
        if rate > 0.0:
            out.append((name, rate, op, tensor.as_operator(op.conj().T @ op)))
    return out


def effective_hamiltonian(ops: OperatorSet, cfg: ModelConfig | None = None):
    """Non-Hermitian generator of the no-jump evolution."""
    cfg = cfg or ops.cfg
    h = ops.h_int.astype(np.complex128)
    for _, rate, _, opdop in _channels(ops, cfg):
        h = h - 0.5j * rate * opdop
    return tensor.as_operator(h)


def _refine_jump(prop: _Propagator, psi_anchor: np.ndarray, hi: float, threshold: float):
    """Bisect the norm-square threshold crossing inside ``(0, hi]``.

    The squared norm is non-increasing along the no-jump evolution, so a
    sign change over the bracket pins the crossing; bisection stops once the
    norm matches the threshold within ``NORM_BRACKET_TOL``.
    """
    lo = 0.0
    tau = hi
    psi = prop.advance(psi_anchor, tau)
    n2 = float(np.vdot(psi, psi).real)
    for _ in range(MAX_BISECTIONS):
        if abs(n2 - threshold) < NORM_BRACKET_TOL:
            return tau, psi, n2
        if n2 > threshold:
            lo = tau
        else:
            hi = tau
        tau = 0.5 * (lo + hi)
        psi = prop.advance(psi_anchor, tau)
        n2 = float(np.vdot(psi, psi).real)
    raise JumpRefinementError(
        f"jump-time bisection did not reach |norm^2 - threshold| < {NORM_BRACKET_TOL:g} "
        f"within {MAX_BISECTIONS} iterations (residual {abs(n2 - threshold):.2e})"
    )


def run_trajectory(
    ops: OperatorSet,
    cfg: ModelConfig,
    psi0: np.ndarray,
    t_grid,
    seed: int,
) -> Trajectory:
    """One quantum-jump realization, deterministic for a fixed seed."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1 or (t.size > 1 and not np.all(np.diff(t) > 0)):
        raise ValueError("t_grid must be non-empty and strictly increasing")
    psi = tensor.as_vector(psi0)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("psi0 must be normalized")
    channels = _channels(ops, cfg)
    prop = _Propagator(effective_hamiltonian(ops, cfg))
    rng = np.random.Generator(np.random.Philox(key=seed))
    dressed = dressed_basis(cfg)
    basis = ops.basis

    samples = np.empty((t.size, 2, basis.levels_a, basis.levels_b))
    samples[0] = dressed_populations(psi, basis, dressed)
    jumps: list[JumpEvent] = []
    threshold = rng.uniform() if channels else None
    t_cur = t[0]

    for idx in range(1, t.size):
        target = t[idx]
        while True:
            trial = prop.advance(psi, target - t_cur)
            if channels:
                n2 = float(np.vdot(trial, trial).real)
                if n2 <= threshold:
                    tau, psi_j, n2_j = _refine_jump(prop, psi, target - t_cur, threshold)
                    weights = np.array(
                        [rate * np.vdot(psi_j, opdop @ psi_j).real for _, rate, _, opdop in channels]
                    )
                    pick = int(np.searchsorted(np.cumsum(weights), rng.uniform() * weights.sum()))
                    pick = min(pick, len(channels) - 1)
                    name, _, op, _ = channels[pick]
                    t_cur += tau
                    jumps.append(JumpEvent(time=t_cur, channel=name, pre_jump_norm=float(np.sqrt(n2_j))))
                    collapsed = op @ psi_j
                    psi = collapsed / np.linalg.norm(collapsed)
                    threshold = rng.uniform()
                    continue
            psi, t_cur = trial, target
            break
        norm = np.linalg.norm(psi)
        samples[idx] = dressed_populations(psi / norm, basis, dressed)

    populations = {}
    for d, sign in enumerate("+-"):
        for k in range(basis.levels_a):
            for l in range(basis.levels_b):
                populations[(k, l, sign)] = np.ascontiguousarray(samples[:, d, k, l])
    return Trajectory(seed=seed, times=t, populations=populations, jumps=jumps)


def ensemble_average(trajectories: list[Trajectory]) -> EnsembleResult:
    """Mean populations and standard errors ``stddev/sqrt(N)`` over an ensemble.

    All trajectories must share one time grid.  With a single trajectory the
    mean is that trajectory and the standard error is zero.
    """
    if not trajectories:
        raise ValueError("ensemble is empty")
    times = trajectories[0].times
    for traj in trajectories[1:]:
        if traj.times.shape != times.shape or not np.allclose(traj.times, times):
            raise ValueError("trajectories do not share a common time grid")
    n = len(trajectories)
    mean, stderr = {}, {}
    for key in trajectories[0].populations:
        stack = np.stack([traj.populations[key] for traj in trajectories])
        mean[key] = stack.mean(axis=0)
        if n > 1:
            stderr[key] = stack.std(axis=0, ddof=1) / np.sqrt(n)
        else:
            stderr[key] = np.zeros_like(mean[key])
    return EnsembleResult(times=times, mean=mean, stderr=stderr, n_traj=n)


@lru_cache(maxsize=8)
def _cached_operators(cfg: ModelConfig) -> OperatorSet:
    return build_operators(cfg)


def _ensemble_worker(args) -> Trajectory:
    cfg, t_tuple, seed = args
    ops = _cached_operators(cfg)
    psi0 = ops.dressed_product_vector(0, 0, "+")
    return run_trajectory(ops, cfg, psi0, np.array(t_tuple), seed)


def run_ensemble(
    cfg: ModelConfig,
    t_grid,
    n_traj: int,
    base_seed: int,
    jobs: int = 1,
) -> list[Trajectory]:
    """Run ``n_traj`` trajectories from |0,0,+> with seeds ``base_seed + i``.

    Seed-per-trajectory isolation makes the result independent of ``jobs``.
    """
    t_tuple = tuple(float(x) for x in np.asarray(t_grid, dtype=float))
    arglist = [(cfg, t_tuple, base_seed + i) for i in range(n_traj)]
    if jobs > 1 and n_traj > 1:
        import multiprocessing

        with multiprocessing.Pool(processes=jobs) as pool:
            return pool.map(_ensemble_worker, arglist)
    return [_ensemble_worker(a) for a in arglist]
