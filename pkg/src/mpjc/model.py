"""Physics layer for the driven two-mode multiphoton Jaynes-Cummings model.

A two-level system (TLS) exchanges ``n`` photons of mode ``a`` and ``m``
photons of mode ``b`` per transition and is driven by a strong laser.  In the
laser rotating frame the Hamiltonian is

    H = (delta_sigma/2) sigma_z + delta_a a'a + delta_b b'b
        + g (a^n b^m sigma_+ + h.c.) + omega_L sigma_x

with mode detunings ``delta_a = omega_a - omega_L/(2n)``,
``delta_b = omega_b - omega_L/(2m)`` and the atomic detuning
``delta_sigma = omega_0 - omega_L``.  The alternative parameterization uses
``big_delta_a = omega_0/2 - n*omega_a`` and ``big_delta_b = omega_0/2 -
m*omega_b``; the two are linked by ``delta_sigma = big_delta_a + big_delta_b
+ n*delta_a + m*delta_b``.

This module builds the truncated-Fock-space operators, the laser-dressed TLS
basis, the detunings that make the zero-photon -> (n+m)-photon transition
resonant, and the effective two-state description of that transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple

import numpy as np
import scipy.sparse as sp

from . import tensor
from .errors import (
    DegenerateBasisError,
    PoleError,
    SingularConfigurationError,
    TruncationError,
)

#: TLS level ordering within the tensor factor: index 0 = excited, 1 = ground
TLS_EXCITED = 0
TLS_GROUND = 1

#: relative tolerance for the delta_sigma consistency cross-check
_DELTA_CONSISTENCY_TOL = 1e-9


class BasisIndex(NamedTuple):
    """A bare product state |k>_a |l>_b |s> and its flat index."""

    k: int
    l: int
    s: int
    flat: int


@dataclass(frozen=True)
class Basis:
    """Flat indexing of the TLS (x) mode-a (x) mode-b product space.

    The flat index is ``s*(trunc_a+1)*(trunc_b+1) + k*(trunc_b+1) + l`` with
    ``s`` in {0: excited, 1: ground}; the map is bijective on
    ``[0, 2*(trunc_a+1)*(trunc_b+1))``.
    """

    trunc_a: int
    trunc_b: int

    @property
    def levels_a(self) -> int:
        return self.trunc_a + 1

    @property
    def levels_b(self) -> int:
        return self.trunc_b + 1

    @property
    def dim(self) -> int:
        return 2 * self.levels_a * self.levels_b

    def flat(self, k: int, l: int, s: int) -> int:
        if not (0 <= k <= self.trunc_a and 0 <= l <= self.trunc_b and s in (0, 1)):
            raise IndexError(f"state (k={k}, l={l}, s={s}) outside truncated space")
        return (s * self.levels_a + k) * self.levels_b + l

    def index(self, k: int, l: int, s: int) -> BasisIndex:
        return BasisIndex(k, l, s, self.flat(k, l, s))

    def unflat(self, flat: int) -> BasisIndex:
        if not 0 <= flat < self.dim:
            raise IndexError(f"flat index {flat} outside [0, {self.dim})")
        s, rest = divmod(flat, self.levels_a * self.levels_b)
        k, l = divmod(rest, self.levels_b)
        return BasisIndex(k, l, s, flat)

    def states(self) -> Iterator[BasisIndex]:
        for flat in range(self.dim):
            yield self.unflat(flat)

    def bare_vector(self, k: int, l: int, s: int) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.complex128)
        vec[self.flat(k, l, s)] = 1.0
        return vec


def resonance_detunings(
    n: int,
    m: int,
    big_delta_a: float,
    big_delta_b: float,
    omega_L: float,
    branch: str = "plus",
) -> tuple[float, float]:
    """Mode detunings that make the (n+m)-photon transition resonant.

    ``branch="plus"`` targets |0,0,+> <-> |n,m,->, which requires
    ``n*delta_a + m*delta_b - Omega = 0``; ``branch="minus"`` targets
    |0,0,-> <-> |n,m,+> with the opposite sign.  For fixed
    ``(big_delta_a, big_delta_b, omega_L)`` the closed form has a single
    solution whose branch is set by the sign of ``big_delta_a + big_delta_b``
    (plus-branch for a negative sum); requesting the other branch raises
    :class:`SingularConfigurationError`.
    """
    if branch not in ("plus", "minus"):
        raise ValueError(f"unknown branch {branch!r}")
    if n < 1 or m < 1:
        raise SingularConfigurationError(
            "resonance detunings are defined for n >= 1 and m >= 1 "
            "(a zero photon index decouples that mode from the transition)"
        )
    total = big_delta_a + big_delta_b
    if total == 0.0:
        raise SingularConfigurationError(
            "big_delta_a + big_delta_b = 0: the resonance closed form is singular"
        )
    achievable = "plus" if total < 0 else "minus"
    if branch != achievable:
        raise SingularConfigurationError(
            f"the {branch}-branch resonance requires big_delta_a + big_delta_b "
            f"{'<' if branch == 'plus' else '>'} 0 (got {total:g})"
        )
    delta_a = ((big_delta_b - 3.0 * big_delta_a) * total - 4.0 * omega_L**2) / (4.0 * n * total)
    delta_b = ((big_delta_a - 3.0 * big_delta_b) * total - 4.0 * omega_L**2) / (4.0 * m * total)
    return delta_a, delta_b


def higher_order_detuning_sums(
    n: int,
    m: int,
    big_delta_a: float,
    big_delta_b: float,
    omega_L: float,
    mu: int,
) -> tuple[float, float]:
    """Both roots of ``n*delta_a + m*delta_b`` for the mu-th multiple transition.

    The returned pair ``(sum_plus, sum_minus)`` solves
    ``mu*(n*delta_a + m*delta_b) -+ Omega = 0`` for the transitions
    |0,0,+> <-> |mu*n, mu*m, -> (plus) and |0,0,-> <-> |mu*n, mu*m, +>
    (minus), with ``delta_sigma`` tied to the detunings through the
    big-Delta relation.
    """
    if mu < 2:
        raise ValueError(f"mu must be >= 2 (got {mu})")
    if n + m <= 0:
        raise ValueError("n + m must be positive")
    total = big_delta_a + big_delta_b
    disc = math.sqrt(mu**2 * total**2 + 4.0 * (mu**2 - 1) * omega_L**2)
    sum_plus = (total + disc) / (mu**2 - 1)
    sum_minus = (total - disc) / (mu**2 - 1)
    return sum_plus, sum_minus


def degenerate_ladder_detuning(n: int, m: int, delta_b: float) -> float:
    """delta_a at which same-branch multiphoton transitions are degenerate.

    Transitions |0,0,s> <-> |nu*n, nu*m, s> (same dressed state) all have
    transition frequency ``nu*(n*delta_a + m*delta_b)``; they are
    simultaneously resonant when the weighted detuning sum vanishes.
    """
    if n < 1:
        raise SingularConfigurationError("degenerate-ladder detuning needs n >= 1")
    return -m * delta_b / n


@dataclass(frozen=True)
class ModelConfig:
    """Physical parameters plus Fock truncations.

    All rates and detunings share one unit (declared by ``unit``, e.g. the
    coupling ``g`` for unitary runs or ``kappa_a`` for dissipative ones).
    ``trunc_a``/``trunc_b`` are the largest retained Fock levels; ``None``
    selects ``max(2n+2, 6)`` / ``max(2m+2, 6)``, which contains the doubled
    (2n, 2m) photon sector plus a guard level.
    """

    n: int
    m: int
    g: float
    omega_L: float
    delta_a: float
    delta_b: float
    delta_sigma: float
    kappa_a: float = 0.0
    kappa_b: float = 0.0
    gamma: float = 0.0
    big_delta_a: float | None = None
    big_delta_b: float | None = None
    trunc_a: int | None = None
    trunc_b: int | None = None
    unit: str = "g"

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError("photon numbers n, m must be natural numbers")
        if self.n + self.m <= 0:
            raise ValueError("n + m must be positive")
        for name in ("kappa_a", "kappa_b", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("g", "omega_L", "delta_a", "delta_b", "delta_sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.trunc_a is None:
            object.__setattr__(self, "trunc_a", max(2 * self.n + 2, 6))
        if self.trunc_b is None:
            object.__setattr__(self, "trunc_b", max(2 * self.m + 2, 6))
        if self.trunc_a < 2 * self.n + 1:
            raise TruncationError(f"trunc_a={self.trunc_a} below minimum {2 * self.n + 1}")
        if self.trunc_b < 2 * self.m + 1:
            raise TruncationError(f"trunc_b={self.trunc_b} below minimum {2 * self.m + 1}")
        if self.big_delta_a is not None and self.big_delta_b is not None:
            implied = self.big_delta_a + self.big_delta_b + self.delta_sum
            scale = max(1.0, abs(self.delta_sigma))
            if abs(implied - self.delta_sigma) > _DELTA_CONSISTENCY_TOL * scale:
                raise ValueError(
                    f"delta_sigma={self.delta_sigma:g} inconsistent with "
                    f"big_delta_a + big_delta_b + n*delta_a + m*delta_b = {implied:g}"
                )

    @property
    def delta_sum(self) -> float:
        """The weighted detuning sum ``n*delta_a + m*delta_b``."""
        return self.n * self.delta_a + self.m * self.delta_b

    @property
    def basis(self) -> Basis:
        return Basis(self.trunc_a, self.trunc_b)

    @classmethod
    def from_resonance(
        cls,
        n: int,
        m: int,
        g: float,
        omega_L: float,
        big_delta_a: float,
        big_delta_b: float,
        branch: str = "plus",
        **kwargs,
    ) -> "ModelConfig":
        """Build a config with detunings on the (n+m)-photon resonance."""
        delta_a, delta_b = resonance_detunings(n, m, big_delta_a, big_delta_b, omega_L, branch)
        delta_sigma = big_delta_a + big_delta_b + n * delta_a + m * delta_b
        return cls(
            n=n,
            m=m,
            g=g,
            omega_L=omega_L,
            delta_a=delta_a,
            delta_b=delta_b,
            delta_sigma=delta_sigma,
            big_delta_a=big_delta_a,
            big_delta_b=big_delta_b,
            **kwargs,
        )

    def with_delta_a(self, delta_a: float) -> "ModelConfig":
        """Copy with a new ``delta_a``; ``delta_sigma`` follows the big-Delta relation.

        Used by detuning sweeps, which vary ``delta_a`` at fixed laser and
        atomic frequencies (so ``big_delta_a``/``big_delta_b`` stay put while
        ``delta_sigma`` is recomputed).
        """
        if self.big_delta_a is None or self.big_delta_b is None:
            raise ValueError("with_delta_a requires big_delta_a and big_delta_b to be set")
        delta_sigma = self.big_delta_a + self.big_delta_b + self.n * delta_a + self.m * self.delta_b
        return replace(self, delta_a=delta_a, delta_sigma=delta_sigma)


@dataclass(frozen=True)
class DressedBasis:
    """Eigendata of the driven TLS ``(delta_sigma/2) sigma_z + omega_L sigma_x``.

    ``|+> = c_plus|e> + c_minus|g>`` and ``|-> = c_minus|e> - c_plus|g>`` with
    energies ``+-omega_gen/2``; ``a_sr = <s|sigma_-|r>`` are the TLS-side
    transition amplitudes between the dressed states.
    """

    omega_gen: float
    e_plus: float
    e_minus: float
    c_plus: float
    c_minus: float
    a_pp: float = field(init=False)
    a_pm: float = field(init=False)
    a_mp: float = field(init=False)
    a_mm: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "a_pp", self.c_plus * self.c_minus)
        object.__setattr__(self, "a_pm", self.c_minus**2)
        object.__setattr__(self, "a_mp", -self.c_plus**2)
        object.__setattr__(self, "a_mm", -self.c_plus * self.c_minus)

    @property
    def plus_vector(self) -> np.ndarray:
        """|+> in the bare (excited, ground) TLS basis."""
        return np.array([self.c_plus, self.c_minus], dtype=np.complex128)

    @property
    def minus_vector(self) -> np.ndarray:
        """|-> in the bare (excited, ground) TLS basis."""
        return np.array([self.c_minus, -self.c_plus], dtype=np.complex128)


def dressed_basis(cfg: ModelConfig) -> DressedBasis:
    """Dressed two-level basis for the configured drive.

    Raises :class:`DegenerateBasisError` when the generalized Rabi frequency
    vanishes (undriven, resonant TLS), where |+-> are undefined.
    """
    return _dressed(cfg.delta_sigma, cfg.omega_L)


def _dressed(delta_sigma: float, omega_L: float) -> DressedBasis:
    omega = math.hypot(delta_sigma, 2.0 * omega_L)
    if omega == 0.0:
        raise DegenerateBasisError("omega_L = 0 and delta_sigma = 0: dressed basis undefined")
    if omega_L == 0.0:
        # limit of the closed form: |+> is whichever bare state lies higher
        c_plus, c_minus = (1.0, 0.0) if delta_sigma > 0 else (0.0, 1.0)
    else:
        c_plus = math.sqrt(2.0 * omega_L**2 / (omega**2 - omega * delta_sigma))
        c_minus = math.sqrt(2.0 * omega_L**2 / (omega**2 + omega * delta_sigma))
    return DressedBasis(
        omega_gen=omega,
        e_plus=0.5 * omega,
        e_minus=-0.5 * omega,
        c_plus=c_plus,
        c_minus=c_minus,
    )


def _effective_pieces(cfg: ModelConfig) -> tuple[float, float, float, float]:
    """Shared quantities for the effective two-state reduction.

    Returns ``(coupling, eps1, eps2, denom)`` where ``coupling`` is the
    effective transfer frequency between |0,0,+> and |n,m,->, ``eps1``/``eps2``
    their second-order-shifted energies, and ``denom`` the elimination
    denominator whose zero is a genuine pole of the reduction.
    """
    dressed = dressed_basis(cfg)
    fact = float(math.factorial(cfg.n) * math.factorial(cfg.m))
    s = cfg.delta_sum
    e_plus, e_minus = dressed.e_plus, dressed.e_minus
    denom = cfg.g**2 * fact * dressed.c_minus**4 - (s + e_plus) * e_minus
    if denom == 0.0:
        raise PoleError("effective-coupling denominator vanishes for these parameters")
    coupling = math.sqrt(fact) * cfg.g * dressed.c_plus**2 * (s + e_plus) * e_minus / denom
    shift = cfg.g**2 * fact * dressed.c_plus**2 * dressed.c_minus**2 / denom
    eps1 = shift * e_minus + e_plus
    eps2 = shift * (s + e_plus) + (s + e_minus)
    return coupling, eps1, eps2, denom


def omega_eff(cfg: ModelConfig) -> float:
    """Effective oscillation frequency of the zero- to (n+m)-photon transfer.

    The populations exchange as ``sin^2(omega_eff * t)`` when the two-state
    reduction is resonant; the sign of the returned value is a phase
    convention and carries no physics.
    """
    return _effective_pieces(cfg)[0]


def effective_two_level(cfg: ModelConfig) -> np.ndarray:
    """2x2 effective Hamiltonian on the basis (|0,0,+>, |n,m,->).

    Off-diagonal entries are :func:`omega_eff`; the diagonal carries the
    second-order level shifts of the two retained states.
    """
    coupling, eps1, eps2, _ = _effective_pieces(cfg)
    return np.array([[eps1, coupling], [coupling, eps2]], dtype=float)


@dataclass(frozen=True)
class OperatorSet:
    """Sparse operators of the model on the truncated product space.

    Ordering is TLS (x) mode-a (x) mode-b (see :class:`Basis`).  ``h_int`` is
    the full rotating-frame Hamiltonian including drive and multiphoton
    coupling; ``h0_prime`` omits the coupling term (its eigenstates are the
    dressed product states).
    """

    cfg: ModelConfig
    basis: Basis
    a: sp.csr_matrix
    a_dag: sp.csr_matrix
    b: sp.csr_matrix
    b_dag: sp.csr_matrix
    num_a: sp.csr_matrix
    num_b: sp.csr_matrix
    sigma_minus: sp.csr_matrix
    sigma_plus: sp.csr_matrix
    sigma_z: sp.csr_matrix
    sigma_x: sp.csr_matrix
    h_int: sp.csr_matrix
    h0_prime: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.basis.dim

    def mode(self, name: str) -> sp.csr_matrix:
        """Annihilation operator of mode 'a' or 'b'."""
        if name == "a":
            return self.a
        if name == "b":
            return self.b
        raise ValueError(f"unknown mode {name!r}")

    def dressed_product_vector(self, k: int, l: int, sign: str) -> np.ndarray:
        """State vector |k>_a |l>_b |+-> embedded in the full space."""
        dressed = dressed_basis(self.cfg)
        tls = dressed.plus_vector if sign == "+" else dressed.minus_vector
        vec = np.zeros(self.dim, dtype=np.complex128)
        vec[self.basis.flat(k, l, TLS_EXCITED)] = tls[TLS_EXCITED]
        vec[self.basis.flat(k, l, TLS_GROUND)] = tls[TLS_GROUND]
        return vec


def _destroy(levels: int) -> sp.csr_matrix:
    amp = np.sqrt(np.arange(1, levels, dtype=float))
    return tensor.as_operator(sp.diags(amp, offsets=1))


def _mat_power(op: sp.csr_matrix, power: int) -> sp.csr_matrix:
    out = tensor.identity(op.shape[0])
    for _ in range(power):
        out = tensor.as_operator(out @ op)
    return out


def build_operators(cfg: ModelConfig) -> OperatorSet:
    """Assemble all sparse operators for ``cfg`` on the truncated space."""
    basis = cfg.basis
    ia = tensor.identity(basis.levels_a)
    ib = tensor.identity(basis.levels_b)
    i2 = tensor.identity(2)

    a1 = _destroy(basis.levels_a)
    b1 = _destroy(basis.levels_b)
    # TLS operators in the (excited, ground) ordering
    sm1 = tensor.as_operator(np.array([[0.0, 0.0], [1.0, 0.0]]))
    sz1 = tensor.as_operator(np.array([[1.0, 0.0], [0.0, -1.0]]))
    sx1 = tensor.as_operator(np.array([[0.0, 1.0], [1.0, 0.0]]))

    a = tensor.kron(i2, tensor.kron(a1, ib))
    b = tensor.kron(i2, tensor.kron(ia, b1))
    sigma_minus = tensor.kron(sm1, tensor.kron(ia, ib))
    sigma_z = tensor.kron(sz1, tensor.kron(ia, ib))
    sigma_x = tensor.kron(sx1, tensor.kron(ia, ib))
    a_dag = tensor.as_operator(a.conj().T)
    b_dag = tensor.as_operator(b.conj().T)
    sigma_plus = tensor.as_operator(sigma_minus.conj().T)
    num_a = tensor.as_operator(a_dag @ a)
    num_b = tensor.as_operator(b_dag @ b)

    a_n = tensor.kron(i2, tensor.kron(_mat_power(a1, cfg.n), ib))
    b_m = tensor.kron(i2, tensor.kron(ia, _mat_power(b1, cfg.m)))
    coupling = cfg.g * (a_n @ b_m @ sigma_plus)
    coupling = tensor.as_operator(coupling + coupling.conj().T)

    h0_prime = tensor.prune(
        tensor.as_operator(
            0.5 * cfg.delta_sigma * sigma_z
            + cfg.delta_a * num_a
            + cfg.delta_b * num_b
            + cfg.omega_L * sigma_x
        )
    )
    h_int = tensor.prune(tensor.as_operator(h0_prime + coupling))
    for name, h in (("h_int", h_int), ("h0_prime", h0_prime)):
        dev = abs(h - h.conj().T)
        if dev.nnz and dev.max() > 1e-13:
            raise AssertionError(f"{name} lost hermiticity during assembly")

    return OperatorSet(
        cfg=cfg,
        basis=basis,
        a=a,
        a_dag=a_dag,
        b=b,
        b_dag=b_dag,
        num_a=num_a,
        num_b=num_b,
        sigma_minus=sigma_minus,
        sigma_plus=sigma_plus,
        sigma_z=sigma_z,
        sigma_x=sigma_x,
        h_int=h_int,
        h0_prime=h0_prime,
    )
