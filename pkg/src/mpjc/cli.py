"""Command-line interface.

Subcommands reproduce the five scenario families from JSON configs and write
deterministic CSV tables::

    mpjc resonance|rabi|sweep|g2tau|trajectory --config cfg.json --out dir [--jobs N] [--seed S]

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig, config_to_dict, load_config
from .dynamics import build_liouvillian, evolve_schrodinger, solve_steady_state
from .errors import ConfigError, SimulationError
from .model import (
    build_operators,
    degenerate_ladder_detuning,
    higher_order_detuning_sums,
    dressed_basis,
    omega_eff,
)
from .observables import g2_bundle, g2_delayed, tau_min
from .output import OutputTable
from .sweep import run_sweep
from .trajectories import ensemble_average, run_ensemble


def _metadata(cfg: RunConfig) -> dict:
    return {"scenario": cfg.scenario, "config": config_to_dict(cfg)}


def _pop_name(k: int, l: int, sign: str, prefix: str = "pop") -> str:
    return f"{prefix}_{k}_{l}_{'plus' if sign == '+' else 'minus'}"


def cmd_resonance(cfg: RunConfig) -> OutputTable:
    """Resonance arithmetic summary for the configured drive."""
    model = cfg.model
    dressed = dressed_basis(model)
    header = ["delta_a", "delta_b", "delta_sigma", "omega_gen", "omega_eff", "delta_a_degenerate"]
    row = [
        model.delta_a,
        model.delta_b,
        model.delta_sigma,
        dressed.omega_gen,
        omega_eff(model),
        degenerate_ladder_detuning(model.n, model.m, model.delta_b),
    ]
    if model.big_delta_a is not None and model.big_delta_b is not None:
        for mu in (2, 3):
            sums = higher_order_detuning_sums(
                model.n, model.m, model.big_delta_a, model.big_delta_b, model.omega_L, mu
            )
            for label, total in zip(("plus", "minus"), sums):
                header.append(f"delta_a_mu{mu}_{label}")
                row.append((total - model.m * model.delta_b) / model.n)
    return OutputTable(header=header, rows=[row], metadata=_metadata(cfg))


def cmd_rabi(cfg: RunConfig) -> OutputTable:
    """Coherent transfer between |0,0,+> and |n,m,->, with the closed-form curve."""
    model = cfg.model
    ops = build_operators(model)
    t = cfg.time_grid.values()
    record = evolve_schrodinger(ops, ops.dressed_product_vector(0, 0, "+"), t)
    freq = omega_eff(model)
    analytic = np.sin(freq * t) ** 2
    p00 = record.populations[(0, 0, "+")]
    pnm = record.populations[(model.n, model.m, "-")]
    header = ["t", _pop_name(0, 0, "+"), _pop_name(model.n, model.m, "-"), "analytic_transfer"]
    rows = [[t[i], p00[i], pnm[i], analytic[i]] for i in range(t.size)]
    return OutputTable(header=header, rows=rows, metadata=_metadata(cfg))


def cmd_sweep(cfg: RunConfig, jobs: int = 1) -> OutputTable:
    """Steady-state observables along a detuning sweep."""
    points = run_sweep(
        cfg.model,
        cfg.sweep.values(),
        cfg.observables.pkl,
        cfg.observables.gkl,
        jobs=jobs,
    )
    header = ["delta_a"]
    header += [f"P_{k}_{l}" for k, l in cfg.observables.pkl]
    header += [f"g_{k}_{l}" for k, l in cfg.observables.gkl]
    header += ["tail", "error"]
    rows = []
    for pt in points:
        row = [pt.delta_a]
        row += [pt.pkl[(k, l)] for k, l in cfg.observables.pkl]
        row += [pt.gkl[(k, l)] for k, l in cfg.observables.gkl]
        row += [pt.tail, pt.error]
        rows.append(row)
    return OutputTable(header=header, rows=rows, metadata=_metadata(cfg))


def cmd_g2tau(cfg: RunConfig) -> OutputTable:
    """Delayed pair and bundle correlations at the configured detunings."""
    model = cfg.model
    ops = build_operators(model)
    liou = build_liouvillian(ops)
    steady = solve_steady_state(liou)
    tau = cfg.tau_grid.values()
    curves = {
        "g2_aa": g2_delayed(liou, steady, "a", "a", tau),
        "g2_bb": g2_delayed(liou, steady, "b", "b", tau),
        "g2_ab": g2_delayed(liou, steady, "a", "b", tau),
    }
    order_a, order_b = cfg.observables.bundle
    bundle = g2_bundle(liou, steady, order_a, order_b, tau)
    window = tau_min(order_a, order_b, model.kappa_a, model.kappa_b)
    header = ["tau", "g2_aa", "g2_bb", "g2_ab", "g2_bundle", "below_tau_min"]
    rows = []
    for i in range(tau.size):
        rows.append(
            [
                tau[i],
                curves["g2_aa"].values[i],
                curves["g2_bb"].values[i],
                curves["g2_ab"].values[i],
                bundle.values[i],
                bool(tau[i] < window),
            ]
        )
    meta = _metadata(cfg)
    meta["tau_min"] = window
    return OutputTable(header=header, rows=rows, metadata=meta)


def cmd_trajectory(cfg: RunConfig, jobs: int = 1) -> tuple[OutputTable, OutputTable]:
    """Quantum-jump unraveling: mean populations table plus jump-event table."""
    model = cfg.model
    t = cfg.time_grid.values()
    trajectories = run_ensemble(model, t, cfg.ensemble.n_traj, cfg.ensemble.base_seed, jobs=jobs)
    ensemble = ensemble_average(trajectories)
    tracked = [(k, l) for k, l in cfg.observables.populations]
    header = ["t"]
    for k, l in tracked:
        for sign in "+-":
            header.append(_pop_name(k, l, sign))
            header.append(_pop_name(k, l, sign, prefix="se"))
    rows = []
    for i in range(t.size):
        row = [t[i]]
        for k, l in tracked:
            for sign in "+-":
                row.append(ensemble.mean[(k, l, sign)][i])
                row.append(ensemble.stderr[(k, l, sign)][i])
        rows.append(row)
    pop_table = OutputTable(header=header, rows=rows, metadata=_metadata(cfg))

    jump_rows = []
    for idx, traj in enumerate(trajectories):
        for event in traj.jumps:
            jump_rows.append([idx, traj.seed, event.time, event.channel, event.pre_jump_norm])
    jump_table = OutputTable(
        header=["trajectory", "seed", "time", "channel", "pre_jump_norm"],
        rows=jump_rows,
        metadata=_metadata(cfg),
    )
    return pop_table, jump_table


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpjc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("resonance", "rabi", "sweep", "g2tau", "trajectory"):
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker processes for sweeps/ensembles")
        p.add_argument("--seed", type=int, default=None,
                       help="override the ensemble base seed")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.scenario != args.command:
            raise ConfigError(
                f"config declares scenario '{cfg.scenario}' but command is '{args.command}'"
            )
        if args.seed is not None:
            cfg = replace(cfg, ensemble=replace(cfg.ensemble, base_seed=args.seed))
        out_dir = Path(args.out if args.out != "." or cfg.output_dir is None else cfg.output_dir)
        if args.command == "resonance":
            table = cmd_resonance(cfg)
            path = table.write(out_dir / "resonance.csv")
            print(table.render(), end="")
        elif args.command == "rabi":
            path = cmd_rabi(cfg).write(out_dir / "rabi.csv")
        elif args.command == "sweep":
            path = cmd_sweep(cfg, jobs=args.jobs).write(out_dir / "sweep.csv")
        elif args.command == "g2tau":
            path = cmd_g2tau(cfg).write(out_dir / "g2tau.csv")
        else:
            pops, jumps = cmd_trajectory(cfg, jobs=args.jobs)
            path = pops.write(out_dir / "trajectory_populations.csv")
            jump_path = jumps.write(out_dir / "trajectory_jumps.csv")
            print(f"wrote {jump_path}", file=sys.stderr)
        print(f"wrote {path}", file=sys.stderr)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
