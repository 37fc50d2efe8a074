"""Run-configuration ingestion: JSON file -> validated :class:`RunConfig`.

Configs are validated against the shipped JSON schema (unknown keys are
rejected at every level), then cross-checked semantically: the model must be
parameterized either through the resonance closed form (``big_delta_a``,
``big_delta_b``, ``branch``) or through explicit detunings (``delta_a``,
``delta_b``, ``delta_sigma``); when both are present the explicit values win
and the resonance pair is only used for consistency checks and sweeps.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError, SimulationError
from .model import ModelConfig, resonance_detunings

SCENARIOS = ("resonance", "rabi", "sweep", "g2tau", "trajectory")


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    points: int

    def values(self):
        if self.points < 2:
            raise ConfigError("grids need at least 2 points")
        if not self.stop > self.start:
            raise ConfigError("grid stop must exceed start")
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    points: int

    def values(self):
        return GridSpec(self.start, self.stop, self.points).values()


@dataclass(frozen=True)
class EnsembleSpec:
    n_traj: int = 1
    base_seed: int = 0


@dataclass(frozen=True)
class ObservableSpec:
    """Which correlation orders and populations the CLI reports."""

    pkl: tuple = ()
    gkl: tuple = ()
    bundle: tuple | None = None
    populations: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig
    scenario: str
    branch: str = "plus"
    sweep: SweepSpec | None = None
    time_grid: GridSpec | None = None
    tau_grid: GridSpec | None = None
    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    observables: ObservableSpec = field(default_factory=ObservableSpec)
    output_dir: str | None = None


def _schema() -> dict:
    text = resources.files("mpjc").joinpath("schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _default_orders(n: int, m: int, trunc_a: int, trunc_b: int) -> ObservableSpec:
    pkl = tuple((k, l) for k in range(min(3, trunc_a) + 1) for l in range(min(3, trunc_b) + 1))
    gkl = tuple((k, l) for k in range(1, 4) for l in range(1, 4))
    populations = tuple((k, l) for k in range(n + 1) for l in range(m + 1))
    return ObservableSpec(pkl=pkl, gkl=gkl, bundle=(max(n, 0), max(m, 0)), populations=populations)


def parse_config(doc: dict) -> RunConfig:
    """Validate a parsed JSON document and assemble a :class:`RunConfig`."""
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config field '{path}': {exc.message}") from exc

    raw = dict(doc["model"])
    branch = raw.pop("branch", "plus")
    explicit = all(key in raw for key in ("delta_a", "delta_b", "delta_sigma"))
    has_big = "big_delta_a" in raw and "big_delta_b" in raw
    try:
        if not explicit:
            if not has_big:
                raise ConfigError(
                    "model needs either (delta_a, delta_b, delta_sigma) or "
                    "(big_delta_a, big_delta_b [, branch])"
                )
            delta_a, delta_b = resonance_detunings(
                raw["n"], raw["m"], raw["big_delta_a"], raw["big_delta_b"], raw["omega_L"], branch
            )
            raw["delta_a"] = delta_a
            raw["delta_b"] = delta_b
            raw["delta_sigma"] = (
                raw["big_delta_a"] + raw["big_delta_b"] + raw["n"] * delta_a + raw["m"] * delta_b
            )
        model = ModelConfig(**raw)
    except ConfigError:
        raise
    except (SimulationError, ValueError) as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from exc

    scenario = doc["scenario"]
    sweep = SweepSpec(**doc["sweep"]) if "sweep" in doc else None
    time_grid = GridSpec(**doc["time_grid"]) if "time_grid" in doc else None
    tau_grid = GridSpec(**doc["tau_grid"]) if "tau_grid" in doc else None
    ensemble = EnsembleSpec(**doc.get("ensemble", {}))

    if "observables" in doc:
        obs_raw = doc["observables"]
        defaults = _default_orders(model.n, model.m, model.trunc_a, model.trunc_b)
        observables = ObservableSpec(
            pkl=tuple(tuple(p) for p in obs_raw.get("pkl", defaults.pkl)),
            gkl=tuple(tuple(p) for p in obs_raw.get("gkl", defaults.gkl)),
            bundle=tuple(obs_raw["bundle"]) if "bundle" in obs_raw else defaults.bundle,
            populations=tuple(tuple(p) for p in obs_raw.get("populations", defaults.populations)),
        )
    else:
        observables = _default_orders(model.n, model.m, model.trunc_a, model.trunc_b)

    for k, l in observables.pkl + observables.populations:
        if k > model.trunc_a or l > model.trunc_b:
            raise ConfigError(f"requested order ({k},{l}) exceeds truncation "
                              f"({model.trunc_a},{model.trunc_b})")
    if observables.bundle is not None and (
        observables.bundle[0] > model.trunc_a or observables.bundle[1] > model.trunc_b
    ):
        raise ConfigError("bundle order exceeds truncation")

    if scenario == "sweep":
        if sweep is None:
            raise ConfigError("sweep scenario requires a 'sweep' block")
        if model.big_delta_a is None or model.big_delta_b is None:
            raise ConfigError("sweep scenario requires big_delta_a/big_delta_b "
                              "(delta_sigma is recomputed at each grid point)")
    if scenario in ("rabi", "trajectory") and time_grid is None:
        raise ConfigError(f"{scenario} scenario requires a 'time_grid' block")
    if scenario == "g2tau":
        if tau_grid is None:
            raise ConfigError("g2tau scenario requires a 'tau_grid' block")
        if tau_grid.start < 0:
            raise ConfigError("tau_grid must start at a non-negative delay")

    return RunConfig(
        model=model,
        scenario=scenario,
        branch=branch,
        sweep=sweep,
        time_grid=time_grid,
        tau_grid=tau_grid,
        ensemble=ensemble,
        observables=observables,
        output_dir=doc.get("output_dir"),
    )


def load_config(path) -> RunConfig:
    """Parse and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return parse_config(doc)


def config_to_dict(cfg: RunConfig) -> dict:
    """Canonical JSON-ready form of a resolved RunConfig (round-trips)."""
    model = {k: v for k, v in asdict(cfg.model).items() if v is not None}
    doc: dict = {"scenario": cfg.scenario, "model": model}
    if cfg.branch != "plus":
        doc["model"]["branch"] = cfg.branch
    for name in ("sweep", "time_grid", "tau_grid"):
        spec = getattr(cfg, name)
        if spec is not None:
            doc[name] = asdict(spec)
    doc["ensemble"] = asdict(cfg.ensemble)
    obs = {
        "pkl": [list(p) for p in cfg.observables.pkl],
        "gkl": [list(p) for p in cfg.observables.gkl],
        "populations": [list(p) for p in cfg.observables.populations],
    }
    if cfg.observables.bundle is not None:
        obs["bundle"] = list(cfg.observables.bundle)
    doc["observables"] = obs
    if cfg.output_dir is not None:
        doc["output_dir"] = cfg.output_dir
    return doc
