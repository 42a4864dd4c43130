"""Command-line interface.

Subcommands:
  run        one scenario -> events.json + timeseries.csv
  ensemble   Monte Carlo ensemble -> summary.json
  diagnose   near-singularity diagnostics at a control point
  copula-fit fit a dependence model to an existing ensemble summary
  stability  perturbation experiment on the component partition

Exit codes: 0 success, 2 configuration/usage error, 3 aborted-replicate
fraction above the configured limit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import _jsonio, __version__
from .cascade import ScenarioAbort, structural_stability_experiment
from .config import ConfigError, load_config
from .copula import Family, PseudoObservations, fit_by_tau
from .diagnostics import diagnose_equilibrium
from .network import find_equilibria
from .paths import simulate_path
from .runner import run_configured_scenario, run_ensemble, write_report

from scipy import stats as _scipy_stats


def _common_flags(sp):
    sp.add_argument("--seed", type=int, default=None,
                    help="override the configured seed")
    sp.add_argument("--out-dir", default=None,
                    help="override the configured output directory")
    sp.add_argument("--format", choices=("csv", "json"), default=None,
                    help="time-series format (default from config)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="catnet",
        description="coupled catastrophe network simulator")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", help="run a single scenario")
    sp.add_argument("config")
    _common_flags(sp)

    sp = sub.add_parser("ensemble", help="run a Monte Carlo ensemble")
    sp.add_argument("config")
    sp.add_argument("--workers", type=int, default=1,
                    help="replicate worker processes")
    _common_flags(sp)

    sp = sub.add_parser("diagnose",
                        help="diagnostics at a fixed control point")
    sp.add_argument("config")
    sp.add_argument("--at", nargs="+", type=float, required=True,
                    metavar="ALPHA", help="control coordinates")
    _common_flags(sp)

    sp = sub.add_parser("copula-fit",
                        help="fit a copula to an ensemble summary")
    sp.add_argument("summary")
    sp.add_argument("--family", choices=[f.value for f in Family],
                    default="clayton")
    _common_flags(sp)

    sp = sub.add_parser("stability",
                        help="perturbation stability of the partition")
    sp.add_argument("config")
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--trials", type=int, required=True)
    _common_flags(sp)
    return ap


def _cmd_run(args) -> int:
    config = load_config(args.config)
    try:
        report = run_configured_scenario(config, args.seed)
    except ScenarioAbort as abort:
        print(f"error: {abort}", file=sys.stderr)
        return 3
    fmt = args.format or config.out_format
    out_dir = args.out_dir or config.out_dir
    files = write_report(report, out_dir, fmt)
    print(_jsonio.dumps({
        "files": files,
        "n_events": len(report.events),
        "apocalyptic_times": [
            {"time": at.time, "size": at.size,
             "triggered_component": sorted(at.triggered_component)}
            for at in report.apocalyptic_times],
        "edges": [list(e) for e in sorted(report.graph.edges)],
        "hypothesis_flags": config.hypothesis_flags(),
    }))
    return 0


def _cmd_ensemble(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.base_seed = args.seed
    if args.format is not None:
        config.out_format = args.format
    summary = run_ensemble(config, out_dir=args.out_dir,
                           workers=max(1, args.workers))
    stats = summary["ensemble"]
    print(_jsonio.dumps({"ensemble": stats,
                         "hypothesis_flags": summary["hypothesis_flags"]}))
    if stats["abort_fraction"] > config.abort_fraction_limit:
        print(f"error: abort fraction {stats['abort_fraction']:.3f} exceeds "
              f"limit {config.abort_fraction_limit}", file=sys.stderr)
        return 3
    return 0


def _cmd_diagnose(args) -> int:
    config = load_config(args.config)
    system = config.system()
    alpha = np.asarray(args.at, dtype=float)
    if alpha.shape != (system.p,):
        raise ConfigError(
            f"--at needs {system.p} control coordinates, got {alpha.shape[0]}")
    eqs = find_equilibria(system, alpha, config.search_box)
    payload = []
    for eq in eqs:
        diag = diagnose_equilibrium(system, eq)
        payload.append({
            "x": eq.x.tolist(),
            "sector_signatures": [list(s) for s in eq.sector_signatures],
            "full_min_singular_value": eq.full_min_singular_value,
            "singular_values_H": diag.singular_values_H.tolist(),
            "corank": diag.corank,
            "dpi_codim": diag.dpi_codim,
            "involved_sectors": list(diag.involved_sectors),
            "discriminant_normals": [
                None if n is None else n.tolist()
                for n in diag.discriminant_normals],
            "pairwise_angles": diag.pairwise_angles.tolist(),
        })
    print(_jsonio.dumps({"alpha": alpha.tolist(), "equilibria": payload}))
    return 0


def _cmd_copula_fit(args) -> int:
    path = Path(args.summary)
    if not path.exists():
        raise ConfigError(f"summary file not found: {path}")
    summary = json.loads(path.read_text())
    intensities = np.asarray(summary.get("intensities", []), dtype=float)
    if intensities.ndim != 2 or intensities.shape[0] < 10:
        raise ConfigError(
            "summary has no usable intensity matrix (need >= 10 replicates)")
    n = intensities.shape[0]
    u = np.empty_like(intensities)
    for i in range(intensities.shape[1]):
        u[:, i] = _scipy_stats.rankdata(intensities[:, i],
                                        method="average") / (n + 1)
    degenerate = [i for i in range(intensities.shape[1])
                  if np.all(intensities[:, i] == 0.0)]
    fit = fit_by_tau(PseudoObservations(u, intensities, tuple(degenerate)),
                     Family(args.family))
    print(_jsonio.dumps({
        "family": fit.model.family.value,
        "theta": fit.model.theta,
        "tau": fit.tau,
        "fell_back_to_independence": fit.fell_back_to_independence,
        "saturated": fit.saturated,
        "degenerate_sectors": degenerate,
    }))
    return 0


def _cmd_stability(args) -> int:
    config = load_config(args.config)
    system = config.system()
    spec = config.path_spec(args.seed)
    path = simulate_path(spec, config.alpha0)
    fraction = structural_stability_experiment(
        system, path, config.x0(), args.eta, args.trials,
        seed=args.seed if args.seed is not None else config.base_seed,
        tau_sync=config.tau_sync, threshold=config.threshold,
        angle_max=config.angle_max, escape_radius=config.escape_radius,
        basin_jump_tol=config.basin_jump_tol,
        attribution_tol=config.attribution_tol, refine=config.refine)
    print(_jsonio.dumps({"eta": args.eta, "trials": args.trials,
                         "preserved_fraction": fraction}))
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "ensemble": _cmd_ensemble,
    "diagnose": _cmd_diagnose,
    "copula-fit": _cmd_copula_fit,
    "stability": _cmd_stability,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
