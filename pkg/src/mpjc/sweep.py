"""Detuning sweeps over steady states.

At each grid point ``delta_a`` is moved while ``delta_b`` keeps its resonant
value and the atomic detuning follows the big-Delta relation; the steady
state is solved directly and the requested joint probabilities and
equal-time correlations are evaluated.  Points are independent, so they can
be dispatched to a worker pool; results always come back in grid order and
per-point failures are recorded instead of aborting the sweep.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dynamics import build_liouvillian, solve_steady_state, truncation_check
from .errors import SimulationError
from .model import ModelConfig, OperatorSet, build_operators
from .observables import g_equal_time, joint_distribution


@dataclass
class SweepPoint:
    """Observables of one steady state along the sweep."""

    delta_a: float
    pkl: dict
    gkl: dict
    tail: float
    error: str = ""


@lru_cache(maxsize=4)
def _operators_at(cfg: ModelConfig) -> OperatorSet:
    return build_operators(cfg)


def point_observables(
    cfg: ModelConfig,
    pkl_orders: tuple,
    gkl_orders: tuple,
    tail_error: float = 1e-3,
) -> SweepPoint:
    """Steady state and observables for a single configuration.

    ``tail_error`` is forwarded to the truncation check; degenerate
    multiphoton-ladder resonances populate a slowly decaying Fock tail and
    need either a larger truncation or an explicitly relaxed gate.
    """
    ops = _operators_at(cfg)
    liou = build_liouvillian(ops)
    steady = solve_steady_state(liou)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tail = truncation_check(steady.rho, cfg, error_above=tail_error).worst
    dist = joint_distribution(steady, ops.basis)
    probs = dist.clamped()
    pkl = {(k, l): float(probs[k, l]) for k, l in pkl_orders}
    gkl = {(k, l): g_equal_time(steady, ops, k, l) for k, l in gkl_orders}
    return SweepPoint(delta_a=cfg.delta_a, pkl=pkl, gkl=gkl, tail=tail)


def _sweep_worker(args) -> SweepPoint:
    base_cfg, delta_a, pkl_orders, gkl_orders, tail_error = args
    try:
        return point_observables(
            base_cfg.with_delta_a(delta_a), pkl_orders, gkl_orders, tail_error=tail_error
        )
    except SimulationError as exc:
        return SweepPoint(
            delta_a=delta_a,
            pkl={kl: float("nan") for kl in pkl_orders},
            gkl={kl: float("nan") for kl in gkl_orders},
            tail=float("nan"),
            error=f"{type(exc).__name__}: {exc}",
        )


def run_sweep(
    base_cfg: ModelConfig,
    delta_a_grid,
    pkl_orders,
    gkl_orders,
    jobs: int = 1,
    tail_error: float = 1e-3,
) -> list[SweepPoint]:
    """Sweep ``delta_a`` over a grid; rows return in grid order.

    ``base_cfg`` must carry ``big_delta_a``/``big_delta_b`` so the atomic
    detuning can be recomputed at each point.
    """
    grid = [float(x) for x in np.asarray(delta_a_grid, dtype=float)]
    pkl_orders = tuple(tuple(p) for p in pkl_orders)
    gkl_orders = tuple(tuple(p) for p in gkl_orders)
    arglist = [(base_cfg, x, pkl_orders, gkl_orders, tail_error) for x in grid]
    if jobs > 1 and len(grid) > 1:
        import multiprocessing

        with multiprocessing.Pool(processes=jobs) as pool:
            return pool.map(_sweep_worker, arglist)
    return [_sweep_worker(a) for a in arglist]


def local_maxima(grid: np.ndarray, values: np.ndarray) -> list[float]:
    """Positions of strict interior local maxima of a sampled curve."""
    out = []
    for i in range(1, len(grid) - 1):
        if values[i] > values[i - 1] and values[i] > values[i + 1]:
            out.append(float(grid[i]))
    return out


def local_minima(grid: np.ndarray, values: np.ndarray) -> list[float]:
    return local_maxima(grid, -np.asarray(values))
