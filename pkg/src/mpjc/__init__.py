"""Driven two-mode multiphoton Jaynes-Cummings simulator.

A two-level emitter exchanges n photons of one cavity mode and m of another
per transition while being strongly driven.  The package reproduces the
coherent zero- to (n+m)-photon population transfer, steady-state joint
photon statistics under dissipation, delayed second-order and bundle
correlation functions, and quantum-jump trajectories of the emission
cascade, plus a CLI that writes deterministic CSV tables.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateBasisError,
    DegenerateSteadyStateError,
    DimensionError,
    IntegrationError,
    JumpRefinementError,
    LinearSolveError,
    PoleError,
    SimulationError,
    SingularConfigurationError,
    SingularOperatorError,
    TruncationError,
    UndefinedCorrelationError,
)
from .model import (
    Basis,
    BasisIndex,
    DressedBasis,
    ModelConfig,
    OperatorSet,
    build_operators,
    degenerate_ladder_detuning,
    dressed_basis,
    effective_two_level,
    higher_order_detuning_sums,
    omega_eff,
    resonance_detunings,
)
from .dynamics import (
    EvolutionRecord,
    Liouvillian,
    SteadyState,
    build_liouvillian,
    dressed_populations,
    evolve_master,
    evolve_schrodinger,
    liouvillian_matrix,
    regression_correlator,
    solve_steady_state,
    truncation_check,
    unvec,
    vec,
)
from .observables import (
    CorrelationCurve,
    JointDistribution,
    g2_bundle,
    g2_delayed,
    g_equal_time,
    joint_distribution,
    number_marginals,
    tau_min,
)
from .tensor import ODEControl, integrate_ode, kron, matvec, solve_sparse
from .trajectories import (
    EnsembleResult,
    JumpEvent,
    Trajectory,
    ensemble_average,
    run_ensemble,
    run_trajectory,
)
