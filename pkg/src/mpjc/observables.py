"""Measured quantities: joint photon-number distributions, equal-time
high-order cross-correlations, time-delayed second-order correlations, and
the bundle correlation with its minimum resolvable delay window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tensor
from .dynamics import Liouvillian, SteadyState, regression_correlator
from .errors import UndefinedCorrelationError
from .model import Basis, OperatorSet
from .tensor import ODEControl

#: probabilities above this negative floor are attributed to roundoff and
#: may be clamped to zero in reports (raw values are never altered)
CLAMP_FLOOR = -1e-12


@dataclass(frozen=True)
class JointDistribution:
    """Joint probability P[k, l] of k photons in mode a and l in mode b."""

    probs: np.ndarray

    def clamped(self) -> np.ndarray:
        """Copy for reporting with roundoff-negative entries set to zero."""
        out = self.probs.copy()
        out[(out < 0) & (out > CLAMP_FLOOR)] = 0.0
        return out

    def total(self) -> float:
        return float(self.probs.sum())


@dataclass(frozen=True)
class CorrelationCurve:
    """A correlation function sampled on a detuning or delay grid.

    ``kind`` is one of ``equal_time_kl``, ``delayed_pair``,
    ``delayed_bundle``; ``labels`` carries the (k, l) or (N, M) orders and,
    for pair curves, the mode names.  ``tau_min`` is the width of the
    ill-defined short-delay window of bundle curves (None otherwise).
    """

    abscissa: np.ndarray
    values: np.ndarray
    kind: str
    labels: tuple
    tau_min: float | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("correlation values must be finite")
        if self.kind in ("delayed_pair", "delayed_bundle"):
            t = self.abscissa
            if t.size and (t[0] < 0 or np.any(np.diff(t) <= 0)):
                raise ValueError("delay grid must be non-negative and increasing")

    def below_window(self) -> np.ndarray:
        """Boolean mask of samples inside the ill-defined window."""
        if self.tau_min is None:
            return np.zeros(self.abscissa.shape, dtype=bool)
        return self.abscissa < self.tau_min


def _as_rho(rho) -> np.ndarray:
    if isinstance(rho, SteadyState):
        return rho.rho
    return np.asarray(rho, dtype=np.complex128)


def joint_distribution(rho, basis: Basis) -> JointDistribution:
    """Two-mode photon-number distribution with the TLS traced out."""
    rho = _as_rho(rho)
    diag = np.einsum("ii->i", rho).real.reshape(2, basis.levels_a, basis.levels_b)
    return JointDistribution(probs=diag.sum(axis=0))


def _expect(op, rho: np.ndarray) -> float:
    val = complex((op @ rho).trace())
    return val.real


def g_equal_time(rho, ops: OperatorSet, k: int, l: int) -> float:
    """Equal-time cross-correlation ``<a'^k b'^l b^l a^k> / (<a'a>^k <b'b>^l)``.

    Mode-a and mode-b factors commute, so each mode is normally ordered on
    its own.  Vanishing mean occupation of a mode with nonzero order makes
    the normalization undefined.
    """
    if k < 0 or l < 0:
        raise ValueError("correlation orders must be non-negative")
    rho = _as_rho(rho)
    n_a = _expect(ops.num_a, rho)
    n_b = _expect(ops.num_b, rho)
    if (k > 0 and n_a <= 0.0) or (l > 0 and n_b <= 0.0):
        raise UndefinedCorrelationError(
            f"g^({k},{l}) undefined: <a'a>={n_a:.3e}, <b'b>={n_b:.3e}"
        )
    ak = _power(ops.a, k)
    bl = _power(ops.b, l)
    moment_op = (ak.conj().T @ bl.conj().T @ bl @ ak).tocsr()
    numerator = _expect(moment_op, rho)
    return numerator / (n_a**k * n_b**l)


def _power(op, exponent: int):
    out = tensor.identity(op.shape[0])
    for _ in range(exponent):
        out = tensor.as_operator(out @ op)
    return out


def g2_delayed(
    liou: Liouvillian,
    rho_ss: SteadyState,
    i: str,
    j: str,
    tau_grid,
    ctrl: ODEControl | None = None,
) -> CorrelationCurve:
    """Delayed second-order correlation ``g2_ij(tau)`` between modes i and j.

    Numerator ``<i'(0) j'j(tau) i(0)>`` from the regression kernel with the
    collapsed state ``i rho_ss i'``; at steady state the delayed intensity
    factor equals its stationary value, so the denominator is
    ``<i'i>_ss <j'j>_ss``.
    """
    ops = liou.ops
    if ops is None:
        raise ValueError("g2_delayed needs a Liouvillian built from an OperatorSet")
    op_i = ops.mode(i)
    num_j = ops.num_a if j == "a" else ops.num_b if j == "b" else None
    if num_j is None:
        raise ValueError(f"unknown mode {j!r}")
    n_i = _expect(ops.num_a if i == "a" else ops.num_b, rho_ss.rho)
    n_j = _expect(num_j, rho_ss.rho)
    if n_i <= 0.0 or n_j <= 0.0:
        raise UndefinedCorrelationError(f"g2_{i}{j} undefined: <i'i>={n_i:.3e}, <j'j>={n_j:.3e}")
    tau = np.asarray(tau_grid, dtype=float)
    numerator = regression_correlator(liou, rho_ss, op_i, num_j, tau, ctrl)
    return CorrelationCurve(
        abscissa=tau,
        values=numerator / (n_i * n_j),
        kind="delayed_pair",
        labels=(i, j),
    )


def g2_bundle(
    liou: Liouvillian,
    rho_ss: SteadyState,
    order_a: int,
    order_b: int,
    tau_grid,
    ctrl: ODEControl | None = None,
) -> CorrelationCurve:
    """Delayed second-order correlation between (N, M)-photon bundles.

    Uses the composite operator ``O = a^N b^M``: numerator
    ``<O'(0) [O'O](tau) O(0)>`` via regression, denominator ``<O'O>_ss^2``
    (the delayed factor is stationary).  The curve is physically ill-defined
    for ``tau < tau_min(N, M)``, recorded in the ``tau_min`` field; samples
    there are flagged, not dropped.
    """
    ops = liou.ops
    if ops is None:
        raise ValueError("g2_bundle needs a Liouvillian built from an OperatorSet")
    cfg = liou.cfg
    bundle_op = tensor.as_operator(_power(ops.a, order_a) @ _power(ops.b, order_b))
    moment = tensor.as_operator(bundle_op.conj().T @ bundle_op)
    g0 = _expect(moment, rho_ss.rho)
    if g0 <= 0.0:
        raise UndefinedCorrelationError(f"bundle moment <O'O> = {g0:.3e} is not positive")
    tau = np.asarray(tau_grid, dtype=float)
    numerator = regression_correlator(liou, rho_ss, bundle_op, moment, tau, ctrl)
    return CorrelationCurve(
        abscissa=tau,
        values=numerator / (g0 * g0),
        kind="delayed_bundle",
        labels=(order_a, order_b),
        tau_min=tau_min(order_a, order_b, cfg.kappa_a, cfg.kappa_b),
    )


def tau_min(order_a: int, order_b: int, kappa_a: float, kappa_b: float) -> float:
    """Duration of an (N, M)-photon bundle emission.

    Sum of the successive single-photon lifetimes ``1/(k kappa)`` while each
    mode empties; delayed bundle correlations are not meaningful below this.
    """
    if order_a < 0 or order_b < 0 or order_a + order_b == 0:
        raise ValueError("bundle orders must be non-negative with a positive sum")
    if (order_a > 0 and kappa_a <= 0.0) or (order_b > 0 and kappa_b <= 0.0):
        raise ValueError("decay rates of emitting modes must be positive")
    total = sum(1.0 / (k * kappa_a) for k in range(1, order_a + 1))
    total += sum(1.0 / (l * kappa_b) for l in range(1, order_b + 1))
    return total


def number_marginals(dist: JointDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Single-mode photon-number distributions implied by the joint one."""
    return dist.probs.sum(axis=1), dist.probs.sum(axis=0)
