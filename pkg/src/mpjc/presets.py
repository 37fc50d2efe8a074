"""Canonical demonstration parameter sets.

Two families, one per unit system:

* ``rabi_model``: lossless configurations in units of the coupling ``g`` with
  a strong drive, used to demonstrate the coherent zero- to (n+m)-photon
  population transfer.
* ``dissipative_model``: configurations in units of ``kappa_a`` with
  ``g = 0.3``, ``gamma = 0.1`` and ``kappa_b = 1``, used for steady-state
  photon statistics, delayed correlations and jump trajectories.

The shipped ``configs/*.json`` files are the (n, m) = (1, 1) members of these
families; the remaining cases are generated here.
"""

from __future__ import annotations

from .model import ModelConfig

#: drive parameters for the lossless transfer demonstrations (unit: g)
RABI_DRIVES: dict[tuple[int, int], dict] = {
    (1, 1): {"big_delta_a": -55.0, "big_delta_b": -70.0, "omega_L": 90.0},
    (2, 1): {"big_delta_a": -115.0, "big_delta_b": -70.0, "omega_L": 100.0},
    (1, 2): {"big_delta_a": -55.0, "big_delta_b": -145.0, "omega_L": 100.0},
    (2, 2): {"big_delta_a": -115.0, "big_delta_b": -145.0, "omega_L": 110.0},
}

#: drive parameters for the dissipative demonstrations (unit: kappa_a)
DISSIPATIVE_DRIVES: dict[tuple[int, int], dict] = {
    (1, 1): {"big_delta_a": -16.5, "big_delta_b": -21.0, "omega_L": 27.0},
    (2, 1): {"big_delta_a": -34.5, "big_delta_b": -21.0, "omega_L": 30.0},
    (1, 2): {"big_delta_a": -16.5, "big_delta_b": -43.5, "omega_L": 30.0},
    (2, 2): {"big_delta_a": -34.5, "big_delta_b": -43.5, "omega_L": 33.0},
}

DISSIPATIVE_RATES = {"kappa_a": 1.0, "kappa_b": 1.0, "gamma": 0.1}
DISSIPATIVE_COUPLING = 0.3

#: detuning sweep ranges (in kappa_a) bracketing every documented feature
SWEEP_RANGES: dict[tuple[int, int], tuple[float, float]] = {
    (1, 1): (-90.0, 40.0),
    (2, 1): (-55.0, 25.0),
    (1, 2): (-125.0, 25.0),
    (2, 2): (-70.0, 20.0),
}


def rabi_model(n: int, m: int) -> ModelConfig:
    """Lossless resonant configuration for the (n, m) transfer demo."""
    drive = RABI_DRIVES[(n, m)]
    return ModelConfig.from_resonance(n=n, m=m, g=1.0, unit="g", **drive)


def dissipative_model(n: int, m: int, delta_a: float | None = None) -> ModelConfig:
    """Dissipative configuration; optionally off resonance in ``delta_a``.

    With ``delta_a=None`` both detunings sit on the (n+m)-photon resonance.
    Otherwise ``delta_b`` keeps its resonant value while ``delta_a`` is moved
    and the atomic detuning follows (the sweep protocol).
    """
    drive = DISSIPATIVE_DRIVES[(n, m)]
    cfg = ModelConfig.from_resonance(
        n=n,
        m=m,
        g=DISSIPATIVE_COUPLING,
        unit="kappa_a",
        **drive,
        **DISSIPATIVE_RATES,
    )
    if delta_a is not None:
        cfg = cfg.with_delta_a(delta_a)
    return cfg
