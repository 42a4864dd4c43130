"""Scenario configuration: JSON schema, validation, defaults.

A scenario file describes the sector network, the control path, the
cascade parameters, and the ensemble settings. ``load_config`` fills
every default, validates field by field (errors name the offending
field), and computes the two hypothesis flags: nontrivial coupling and
uniformly elliptic controls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cascade import (ANGLE_MAX, ATTRIBUTION_TOL, BASIN_JUMP_TOL,
                      ESCAPE_RADIUS, REFINE)
from .forms import NormalForm
from .network import CouplingSpec, NetworkSystem
from .paths import (ELLIPTICITY_FLOOR, ControlPathSpec, Diffusion, Ramp,
                    ellipticity_check)

SCHEMA_VERSION = 1
RELAX_FROM_ORIGIN = "relax-from-origin"

_SECTOR_NAMES = {f.value: f for f in NormalForm}


class ConfigError(ValueError):
    """A scenario file failed validation; the message names the field."""


def _require(cond: bool, fieldname: str, msg: str) -> None:
    if not cond:
        raise ConfigError(f"config field '{fieldname}': {msg}")


def _get(d: dict, fieldname: str, default=None, required: bool = False):
    if fieldname.split(".")[-1] not in d:
        if required:
            raise ConfigError(f"config field '{fieldname}': missing")
        return default
    return d[fieldname.split(".")[-1]]


def _as_floats(v, fieldname: str, length: int | None = None) -> np.ndarray:
    try:
        arr = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"config field '{fieldname}': not numeric") from None
    if arr.ndim != 1:
        raise ConfigError(f"config field '{fieldname}': expected a flat list")
    if length is not None and arr.shape[0] != length:
        raise ConfigError(
            f"config field '{fieldname}': expected length {length}, "
            f"got {arr.shape[0]}")
    return arr


@dataclass
class ScenarioConfig:
    """A fully validated scenario with every default filled in."""

    sectors: tuple[NormalForm, ...]
    epsilon: float
    lam: np.ndarray
    path_kind: str                       # "ramp" | "diffusion"
    alpha0: np.ndarray
    alpha_end: np.ndarray | None
    drift: np.ndarray | None
    covariance: np.ndarray | None
    horizon: float
    dt: float
    path_seed: int
    ellipticity_floor: float
    initial_state: np.ndarray | None     # None = relax from origin
    tau_sync: float
    threshold: int | float
    angle_max: float
    search_box: tuple[float, float]
    escape_radius: float
    basin_jump_tol: float
    attribution_tol: float
    refine: int
    replicates: int
    base_seed: int
    keep_replicate_logs: bool
    abort_fraction_limit: float
    out_dir: str
    out_format: str
    metadata: dict = field(default_factory=dict)

    # hypothesis flags, computed at load time
    nontrivial_coupling: bool = False
    elliptic_controls: bool = False

    def system(self) -> NetworkSystem:
        return NetworkSystem(self.sectors, CouplingSpec(self.epsilon, self.lam))

    def path_spec(self, seed: int | None = None) -> ControlPathSpec:
        if self.path_kind == "ramp":
            kind = Ramp(self.alpha0, self.alpha_end)
        else:
            kind = Diffusion(self.drift, self.covariance)
        return ControlPathSpec(kind, self.horizon, self.dt,
                               self.path_seed if seed is None else seed,
                               self.ellipticity_floor)

    def x0(self) -> np.ndarray:
        n = sum(f.behavior_dim for f in self.sectors)
        if self.initial_state is None:
            return np.zeros(n)
        return self.initial_state.copy()

    def hypothesis_flags(self) -> dict:
        return {"nontrivial_coupling": self.nontrivial_coupling,
                "elliptic_controls": self.elliptic_controls}

    def to_dict(self) -> dict:
        """Echo of the config with every default made explicit; loading
        the echo reproduces this config exactly."""
        path: dict = {"kind": self.path_kind,
                      "alpha0": self.alpha0.tolist()}
        if self.path_kind == "ramp":
            path["alpha_end"] = self.alpha_end.tolist()
        else:
            path["drift"] = self.drift.tolist()
            path["covariance"] = self.covariance.tolist()
        path["horizon"] = self.horizon
        path["dt"] = self.dt
        path["seed"] = self.path_seed
        path["ellipticity_floor"] = self.ellipticity_floor
        threshold = ({"count": self.threshold}
                     if isinstance(self.threshold, int)
                     else {"fraction": self.threshold})
        return {
            "schema_version": SCHEMA_VERSION,
            "system": {
                "sectors": [f.value for f in self.sectors],
                "epsilon": self.epsilon,
                "lambda": self.lam.tolist(),
            },
            "path": path,
            "initial_state": (RELAX_FROM_ORIGIN if self.initial_state is None
                              else self.initial_state.tolist()),
            "cascade": {
                "tau_sync": self.tau_sync,
                "threshold": threshold,
                "angle_max": self.angle_max,
                "search_box": list(self.search_box),
                "escape_radius": self.escape_radius,
                "basin_jump_tol": self.basin_jump_tol,
                "attribution_tol": self.attribution_tol,
                "refine": self.refine,
            },
            "ensemble": {
                "replicates": self.replicates,
                "base_seed": self.base_seed,
                "keep_replicate_logs": self.keep_replicate_logs,
                "abort_fraction_limit": self.abort_fraction_limit,
            },
            "output": {"dir": self.out_dir, "format": self.out_format},
            "metadata": self.metadata,
            "hypothesis_flags": self.hypothesis_flags(),
        }

    def __eq__(self, other):
        if not isinstance(other, ScenarioConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def parse_config(raw: dict) -> ScenarioConfig:
    """Validate a parsed JSON document into a ScenarioConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("config field '<root>': expected a JSON object")
    version = raw.get("schema_version", SCHEMA_VERSION)
    _require(version == SCHEMA_VERSION, "schema_version",
             f"unsupported version {version}")
    known = {"schema_version", "system", "path", "initial_state", "cascade",
             "ensemble", "output", "metadata", "hypothesis_flags"}
    for key in raw:
        _require(key in known, key, "unknown field")

    system = raw.get("system")
    _require(isinstance(system, dict), "system", "missing or not an object")
    names = system.get("sectors")
    _require(isinstance(names, list) and names, "system.sectors",
             "must be a nonempty list of sector kind names")
    sectors = []
    for i, name in enumerate(names):
        _require(name in _SECTOR_NAMES, f"system.sectors[{i}]",
                 f"unknown kind {name!r}; one of {sorted(_SECTOR_NAMES)}")
        sectors.append(_SECTOR_NAMES[name])
    sectors = tuple(sectors)
    k = len(sectors)
    n = sum(f.behavior_dim for f in sectors)
    p = sum(f.control_dim for f in sectors)

    epsilon = system.get("epsilon", 0.0)
    _require(isinstance(epsilon, (int, float)) and epsilon >= 0.0,
             "system.epsilon", "must be a nonnegative number")
    lam_raw = system.get("lambda")
    if lam_raw is None:
        lam = np.zeros((k, k))
    else:
        try:
            lam = np.asarray(lam_raw, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("config field 'system.lambda': not numeric") from None
        _require(lam.shape == (k, k), "system.lambda",
                 f"must be a {k}x{k} matrix")
        _require(bool(np.array_equal(lam, lam.T)), "system.lambda",
                 "must be symmetric")
        _require(not np.any(np.diag(lam) != 0.0), "system.lambda",
                 "diagonal must be zero")

    path = raw.get("path")
    _require(isinstance(path, dict), "path", "missing or not an object")
    kind = path.get("kind")
    _require(kind in ("ramp", "diffusion"), "path.kind",
             "must be 'ramp' or 'diffusion'")
    alpha0 = _as_floats(path.get("alpha0", np.zeros(p)), "path.alpha0", p)
    horizon = path.get("horizon")
    _require(isinstance(horizon, (int, float)) and horizon > 0,
             "path.horizon", "must be a positive number")
    horizon = float(horizon)
    dt = path.get("dt")
    _require(isinstance(dt, (int, float)) and 0 < dt < horizon, "path.dt",
             "must satisfy 0 < dt < horizon")
    dt = float(dt)
    path_seed = path.get("seed", 0)
    _require(isinstance(path_seed, int), "path.seed", "must be an integer")
    floor = path.get("ellipticity_floor", ELLIPTICITY_FLOOR)
    _require(isinstance(floor, (int, float)) and floor > 0,
             "path.ellipticity_floor", "must be positive")

    alpha_end = drift = covariance = None
    elliptic = False
    if kind == "ramp":
        alpha_end = _as_floats(path.get("alpha_end"), "path.alpha_end", p) \
            if path.get("alpha_end") is not None else None
        _require(alpha_end is not None, "path.alpha_end",
                 "required for ramps")
    else:
        drift = _as_floats(path.get("drift", np.zeros(p)), "path.drift", p)
        cov_raw = path.get("covariance")
        _require(cov_raw is not None, "path.covariance",
                 "required for diffusions")
        try:
            covariance = np.asarray(cov_raw, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(
                "config field 'path.covariance': not numeric") from None
        _require(covariance.shape == (p, p), "path.covariance",
                 f"must be a {p}x{p} matrix")
        try:
            elliptic = ellipticity_check(covariance, floor)
        except ValueError as exc:
            raise ConfigError(
                f"config field 'path.covariance': {exc}") from None
        _require(elliptic, "path.covariance",
                 "not uniformly elliptic (aligned-control-shocks hypothesis "
                 f"(iii) requires min eigenvalue >= {floor})")

    init_raw = raw.get("initial_state", RELAX_FROM_ORIGIN)
    if init_raw == RELAX_FROM_ORIGIN:
        initial_state = None
    else:
        initial_state = _as_floats(init_raw, "initial_state", n)

    cascade = raw.get("cascade", {})
    _require(isinstance(cascade, dict), "cascade", "must be an object")
    tau_sync = cascade.get("tau_sync", 0.05 * horizon)
    _require(isinstance(tau_sync, (int, float)) and tau_sync > 0,
             "cascade.tau_sync", "must be positive")
    thr_raw = cascade.get("threshold", {"count": min(2, k)})
    _require(isinstance(thr_raw, dict) and len(thr_raw) == 1
             and next(iter(thr_raw)) in ("count", "fraction"),
             "cascade.threshold",
             'must be {"count": int} or {"fraction": float}')
    if "count" in thr_raw:
        threshold = thr_raw["count"]
        _require(isinstance(threshold, int) and 1 <= threshold <= k,
                 "cascade.threshold.count", f"must be an integer in [1, {k}]")
    else:
        threshold = thr_raw["fraction"]
        _require(isinstance(threshold, float) and 0.0 < threshold <= 1.0,
                 "cascade.threshold.fraction", "must be a float in (0, 1]")
    angle_max = cascade.get("angle_max", ANGLE_MAX)
    _require(isinstance(angle_max, (int, float)) and 0 < angle_max <= 90,
             "cascade.angle_max", "must be in (0, 90]")
    box = cascade.get("search_box", [-3.0, 3.0])
    box_arr = _as_floats(box, "cascade.search_box", 2)
    _require(box_arr[0] < box_arr[1], "cascade.search_box",
             "must be [lo, hi] with lo < hi")
    escape_radius = cascade.get("escape_radius", ESCAPE_RADIUS)
    _require(isinstance(escape_radius, (int, float)) and escape_radius > 0,
             "cascade.escape_radius", "must be positive")
    basin_jump_tol = cascade.get("basin_jump_tol", BASIN_JUMP_TOL)
    _require(isinstance(basin_jump_tol, (int, float)) and basin_jump_tol > 0,
             "cascade.basin_jump_tol", "must be positive")
    attribution_tol = cascade.get("attribution_tol", ATTRIBUTION_TOL)
    _require(isinstance(attribution_tol, (int, float)) and attribution_tol > 0,
             "cascade.attribution_tol", "must be positive")
    refine = cascade.get("refine", REFINE)
    _require(isinstance(refine, int) and refine >= 1, "cascade.refine",
             "must be an integer >= 1")

    ensemble = raw.get("ensemble", {})
    _require(isinstance(ensemble, dict), "ensemble", "must be an object")
    replicates = ensemble.get("replicates", 100)
    _require(isinstance(replicates, int) and replicates >= 1,
             "ensemble.replicates", "must be a positive integer")
    base_seed = ensemble.get("base_seed", 0)
    _require(isinstance(base_seed, int) and base_seed >= 0,
             "ensemble.base_seed", "must be a nonnegative integer")
    keep_logs = ensemble.get("keep_replicate_logs", False)
    _require(isinstance(keep_logs, bool), "ensemble.keep_replicate_logs",
             "must be a boolean")
    abort_limit = ensemble.get("abort_fraction_limit", 0.5)
    _require(isinstance(abort_limit, (int, float)) and 0 <= abort_limit <= 1,
             "ensemble.abort_fraction_limit", "must be in [0, 1]")

    output = raw.get("output", {})
    _require(isinstance(output, dict), "output", "must be an object")
    out_dir = output.get("dir", "out")
    _require(isinstance(out_dir, str), "output.dir", "must be a string")
    out_format = output.get("format", "csv")
    _require(out_format in ("csv", "json"), "output.format",
             "must be 'csv' or 'json'")

    metadata = raw.get("metadata", {})
    _require(isinstance(metadata, dict), "metadata", "must be an object")

    nontrivial = bool(epsilon > 0.0 and np.any(lam != 0.0))
    return ScenarioConfig(
        sectors=sectors, epsilon=float(epsilon), lam=lam,
        path_kind=kind, alpha0=alpha0, alpha_end=alpha_end, drift=drift,
        covariance=covariance, horizon=horizon, dt=dt,
        path_seed=path_seed, ellipticity_floor=float(floor),
        initial_state=initial_state, tau_sync=float(tau_sync),
        threshold=threshold, angle_max=float(angle_max),
        search_box=(float(box_arr[0]), float(box_arr[1])),
        escape_radius=float(escape_radius),
        basin_jump_tol=float(basin_jump_tol),
        attribution_tol=float(attribution_tol), refine=refine,
        replicates=replicates, base_seed=base_seed,
        keep_replicate_logs=keep_logs,
        abort_fraction_limit=float(abort_limit),
        out_dir=out_dir, out_format=out_format, metadata=metadata,
        nontrivial_coupling=nontrivial, elliptic_controls=elliptic)


def load_config(path) -> ScenarioConfig:
    """Load and validate a scenario JSON file."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc}") from None
    return parse_config(raw)
