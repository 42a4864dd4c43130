"""Control trajectories: deterministic ramps and Ito diffusions.

Diffusions are integrated with Euler-Maruyama at fixed step (the last
step is truncated to land on the horizon exactly) and must have a
uniformly elliptic instantaneous covariance; paths are reproducible
bitwise from the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ELLIPTICITY_FLOOR = 1e-6
_MASK64 = (1 << 64) - 1


def splitmix64(v: int) -> int:
    """SplitMix64 mixing function (used to derive replicate seeds)."""
    v = (v + 0x9E3779B97F4A7C15) & _MASK64
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (v ^ (v >> 31)) & _MASK64


def replicate_seed(base_seed: int, replicate: int) -> int:
    """Seed for replicate r: base_seed XOR splitmix64(r)."""
    return (int(base_seed) ^ splitmix64(int(replicate))) & _MASK64


def ellipticity_check(covariance, floor: float) -> bool:
    """True when the symmetric matrix has min eigenvalue >= floor."""
    cov = np.asarray(covariance, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be a square matrix")
    if np.max(np.abs(cov - cov.T)) > 1e-12:
        raise ValueError("covariance must be symmetric (to 1e-12)")
    return bool(np.min(np.linalg.eigvalsh(cov)) >= floor)


@dataclass(frozen=True)
class Ramp:
    """Linear control sweep. alpha_start=None means start from the
    trajectory's initial point."""

    alpha_start: np.ndarray | None
    alpha_end: np.ndarray

    def __post_init__(self):
        if self.alpha_start is not None:
            object.__setattr__(self, "alpha_start",
                               np.asarray(self.alpha_start, dtype=float))
        object.__setattr__(self, "alpha_end",
                           np.asarray(self.alpha_end, dtype=float))


@dataclass(frozen=True)
class Diffusion:
    """Constant-coefficient Ito diffusion d(alpha) = drift dt + L dW."""

    drift: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "drift", np.asarray(self.drift, dtype=float))
        object.__setattr__(self, "covariance",
                           np.asarray(self.covariance, dtype=float))


@dataclass(frozen=True)
class ControlPathSpec:
    """Recipe for a control trajectory over [0, T] at fixed step dt."""

    kind: Ramp | Diffusion
    horizon: float
    dt: float
    seed: int = 0
    ellipticity_floor: float = ELLIPTICITY_FLOOR

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise ValueError("horizon must be positive")
        if not 0.0 < self.dt < self.horizon:
            raise ValueError("dt must satisfy 0 < dt < horizon")
        if isinstance(self.kind, Diffusion):
            cov = self.kind.covariance
            if cov.shape != (self.kind.drift.shape[0],) * 2:
                raise ValueError("covariance shape does not match drift")
            if not ellipticity_check(cov, self.ellipticity_floor):
                raise ValueError(
                    "covariance is not uniformly elliptic: min eigenvalue "
                    f"below floor {self.ellipticity_floor}")

    @property
    def steps(self) -> int:
        return math.ceil(self.horizon / self.dt)


@dataclass(frozen=True)
class ControlPath:
    """A realized trajectory: times[0] = 0, times[-1] = T."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or values.ndim != 2 or values.shape[0] != times.shape[0]:
            raise ValueError("times and values have inconsistent shapes")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def p(self) -> int:
        return self.values.shape[1]


def _time_grid(spec: ControlPathSpec) -> np.ndarray:
    steps = spec.steps
    times = np.arange(steps + 1, dtype=float) * spec.dt
    times[-1] = spec.horizon
    return times


def simulate_path(spec: ControlPathSpec, alpha0) -> ControlPath:
    """Realize a control path from its spec and initial point.

    Ramps interpolate linearly (their own alpha_start overrides alpha0
    when set). Diffusions run Euler-Maruyama with the Cholesky factor of
    the covariance and a seeded generator: the same (spec, alpha0, seed)
    reproduces the path bitwise.
    """
    alpha0 = np.atleast_1d(np.asarray(alpha0, dtype=float))
    times = _time_grid(spec)
    if isinstance(spec.kind, Ramp):
        start = spec.kind.alpha_start if spec.kind.alpha_start is not None else alpha0
        end = spec.kind.alpha_end
        if start.shape != end.shape or start.shape != alpha0.shape:
            raise ValueError("ramp endpoints do not match alpha0 length")
        frac = times / spec.horizon
        values = start[None, :] + frac[:, None] * (end - start)[None, :]
        return ControlPath(times, values)

    drift = spec.kind.drift
    if alpha0.shape != drift.shape:
        raise ValueError("alpha0 length does not match the diffusion dimension")
    L = np.linalg.cholesky(spec.kind.covariance)
    rng = np.random.default_rng(spec.seed)
    z = rng.standard_normal((spec.steps, drift.shape[0]))
    values = np.empty((spec.steps + 1, drift.shape[0]))
    values[0] = alpha0
    for i in range(spec.steps):
        h = times[i + 1] - times[i]
        values[i + 1] = values[i] + drift * h + math.sqrt(h) * (L @ z[i])
    return ControlPath(times, values)
