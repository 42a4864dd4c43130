"""Ensemble orchestration and persistence.

Runs scenarios (single or Monte Carlo ensembles), digests reports into
a summary with ensemble statistics, fitted copulas, and diagnostics
histograms, and writes the deterministic JSON/CSV outputs.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import _jsonio
from .cascade import (CascadeReport, Mechanism, ScenarioAbort,
                      cascade_coverage_check, run_scenario)
from .config import SCHEMA_VERSION, ScenarioConfig
from .copula import Family, fit_by_tau, intensities_from_reports, kendall_tau_matrix
from .paths import replicate_seed, simulate_path

_ANGLE_BINS = [0.0, 5.0, 10.0, 20.0, 30.0, 45.0, 60.0, 75.0, 90.0]
_MINSV_BINS = [0.0, 1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0, 10.0, 100.0]


def run_configured_scenario(config: ScenarioConfig,
                            seed: int | None = None) -> CascadeReport:
    """Run one scenario exactly as configured (one replicate)."""
    sys = config.system()
    spec = config.path_spec(seed)
    path = simulate_path(spec, config.alpha0)
    return run_scenario(
        sys, path, config.x0(), config.tau_sync, config.threshold,
        angle_max=config.angle_max, escape_radius=config.escape_radius,
        basin_jump_tol=config.basin_jump_tol,
        attribution_tol=config.attribution_tol, refine=config.refine)


def _event_record(e) -> dict:
    return {
        "time": e.time,
        "sector": e.sector,
        "mechanism": e.mechanism.value,
        "pre_signature": {"negative_eigenvalues": e.pre_signature[0],
                          "min_abs_eigenvalue": e.pre_signature[1]},
        "post_signature": {"negative_eigenvalues": e.post_signature[0],
                           "min_abs_eigenvalue": e.post_signature[1]},
        "jump_size": e.jump_size,
        "step": e.step,
    }


def events_payload(report: CascadeReport) -> list:
    return [_event_record(e) for e in report.events]


def timeseries_rows(report: CascadeReport):
    """Rows t, alpha[...], x[...], phi, in_A[...] for every path step."""
    S = report.times.shape[0]
    k = report.k
    for t in range(S):
        tt = float(report.times[t])
        members = report.A_of_t(tt)
        row = [tt]
        row.extend(report.alphas[t].tolist())
        row.extend(report.states[t].tolist())
        row.append(len(members) / k)
        row.extend(1 if i in members else 0 for i in range(k))
        yield row


def timeseries_header(report: CascadeReport) -> list[str]:
    p = report.alphas.shape[1]
    n = report.states.shape[1]
    return (["t"] + [f"alpha[{j}]" for j in range(p)]
            + [f"x[{j}]" for j in range(n)] + ["phi"]
            + [f"in_A[{i}]" for i in range(report.k)])


def write_report(report: CascadeReport, out_dir, fmt: str = "csv") -> dict:
    """Write events.json and the time series; returns the file map."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    events_path = out / "events.json"
    _jsonio.dump(events_payload(report), events_path)
    files["events"] = str(events_path)
    header = timeseries_header(report)
    if fmt == "csv":
        ts_path = out / "timeseries.csv"
        _jsonio.write_csv(ts_path, header, timeseries_rows(report))
    else:
        ts_path = out / "timeseries.json"
        _jsonio.dump({"columns": header,
                      "rows": [list(r) for r in timeseries_rows(report)]},
                     ts_path)
    files["timeseries"] = str(ts_path)
    return files


class _ReplicateOutcome:
    """Compact per-replicate digest plus the samples the summary needs."""

    def __init__(self, r: int, seed: int, report: CascadeReport | None,
                 abort: ScenarioAbort | None, k: int, tau_sync: float):
        self.r = r
        self.seed = seed
        self.aborted = abort is not None
        self.events = [] if report is None else report.events
        self.intensity = np.zeros(k)
        for e in self.events:
            if e.jump_size > self.intensity[e.sector]:
                self.intensity[e.sector] = e.jump_size
        times = sorted((e.time, e.sector) for e in self.events)
        self.co_event = any(
            abs(a[0] - b[0]) <= tau_sync and a[1] != b[1]
            for i, a in enumerate(times) for b in times[i + 1:])
        self.digest = {
            "replicate": r,
            "seed": seed,
            "aborted": self.aborted,
            "abort_reason": abort.reason if abort else None,
            "n_events": len(self.events),
            "events_per_sector": [
                sum(1 for e in self.events if e.sector == i) for i in range(k)],
            "n_folds": sum(1 for e in self.events
                           if e.mechanism is Mechanism.FOLD_DISAPPEARANCE),
            "co_event": self.co_event,
            "n_apocalyptic": 0,
            "first_apocalyptic_time": None,
            "coverage_pass": None,
            "max_phi": 0.0,
            "intensity": self.intensity.tolist(),
            "edges": [],
        }
        self.angles = []
        self.pre_event_min_eigs = []
        if report is not None:
            ats = report.apocalyptic_times
            self.digest["n_apocalyptic"] = len(ats)
            if ats:
                self.digest["first_apocalyptic_time"] = ats[0].time
                self.digest["coverage_pass"] = cascade_coverage_check(report)
            if report.events:
                self.digest["max_phi"] = max(
                    report.phi_of_t(e.time) for e in report.events)
            self.digest["edges"] = [list(pair)
                                    for pair in sorted(report.graph.edges)]
            self.angles = [d.min_alignment_angle
                           for d in report.graph.edges.values()
                           if d.min_alignment_angle is not None]
            for e in report.events:
                step = (e.step - 1
                        if e.mechanism is Mechanism.FOLD_DISAPPEARANCE
                        else e.step)
                self.pre_event_min_eigs.append(
                    float(report.sector_minabs[step, e.sector]))


def _run_replicate(config: ScenarioConfig, r: int,
                   log_dir: str | None) -> _ReplicateOutcome:
    seed = replicate_seed(config.base_seed, r)
    k = len(config.sectors)
    try:
        report = run_configured_scenario(config, seed)
    except ScenarioAbort as abort:
        return _ReplicateOutcome(r, seed, None, abort, k, config.tau_sync)
    if log_dir is not None:
        write_report(report, Path(log_dir) / f"r{r:05d}", config.out_format)
    return _ReplicateOutcome(r, seed, report, None, k, config.tau_sync)


def _histogram(values, edges) -> dict:
    counts, _ = np.histogram(np.asarray(values, dtype=float), bins=edges)
    return {"edges": list(edges), "counts": counts.tolist()}


def run_ensemble(config: ScenarioConfig, out_dir=None,
                 workers: int = 1) -> dict:
    """Run the configured ensemble and write summary.json.

    Replicates are seeded independently (base_seed XOR splitmix64(r)) so
    results do not depend on execution order; the reduction sorts by
    replicate index. Aborted replicates are recorded, not fatal.
    """
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log_dir = str(out / "replicates") if config.keep_replicate_logs else None

    indices = list(range(config.replicates))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_replicate, [config] * len(indices),
                                     indices, [log_dir] * len(indices),
                                     chunksize=8))
    else:
        outcomes = [_run_replicate(config, r, log_dir) for r in indices]
    outcomes.sort(key=lambda o: o.r)

    k = len(config.sectors)
    n_rep = len(outcomes)
    aborted = sum(1 for o in outcomes if o.aborted)
    completed = [o for o in outcomes if not o.aborted]
    hitting = sum(1 for o in completed if o.digest["n_events"] > 0)
    co_events = sum(1 for o in completed if o.co_event)
    apocalyptic = [o for o in completed if o.digest["n_apocalyptic"] > 0]
    covered = sum(1 for o in apocalyptic if o.digest["coverage_pass"])

    n_done = max(len(completed), 1)
    ensemble_stats = {
        "replicates": n_rep,
        "completed": len(completed),
        "aborted": aborted,
        "abort_fraction": aborted / n_rep,
        "event_rate": float(np.mean([o.digest["n_events"]
                                     for o in completed])) if completed else 0.0,
        "hitting_fraction": hitting / n_done,
        "co_event_fraction": co_events / n_done,
        "apocalyptic_fraction": len(apocalyptic) / n_done,
        "coverage_fraction": (covered / len(apocalyptic)
                              if apocalyptic else None),
        "mean_max_phi": float(np.mean([o.digest["max_phi"]
                                       for o in completed])) if completed else 0.0,
    }

    intensities = np.array([o.intensity for o in completed]) \
        if completed else np.zeros((0, k))
    copula_block: dict = {"tau_matrix": None, "fits": {},
                          "degenerate_sectors": []}
    if len(completed) >= 10 and k >= 2:
        class _Stub:
            def __init__(self, events):
                self.events = events
        pseudo = intensities_from_reports(
            [_Stub(o.events) for o in completed], k)
        copula_block["degenerate_sectors"] = list(pseudo.degenerate_sectors)
        copula_block["tau_matrix"] = kendall_tau_matrix(pseudo.u).tolist()
        for family in (Family.CLAYTON, Family.GUMBEL):
            try:
                fit = fit_by_tau(pseudo, family)
                copula_block["fits"][family.value] = {
                    "family": fit.model.family.value,
                    "theta": fit.model.theta,
                    "tau": fit.tau,
                    "fell_back_to_independence": fit.fell_back_to_independence,
                    "saturated": fit.saturated,
                }
            except ValueError as exc:
                copula_block["fits"][family.value] = {"error": str(exc)}

    angles = [a for o in outcomes for a in o.angles]
    min_eigs = [m for o in outcomes for m in o.pre_event_min_eigs]
    summary = {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "hypothesis_flags": config.hypothesis_flags(),
        "ensemble": ensemble_stats,
        "replicates": [o.digest for o in outcomes],
        "intensities": intensities.tolist(),
        "copula": copula_block,
        "diagnostics_histograms": {
            "pre_event_min_block_eig": _histogram(min_eigs, _MINSV_BINS),
            "alignment_angles": _histogram(angles, _ANGLE_BINS),
        },
    }
    _jsonio.dump(summary, out / "summary.json")
    return summary
