"""Archimedean copulas over cascade-event intensities.

Generator/inverse pairs and joint CDFs for the Independence, Clayton,
and Gumbel families, frailty-construction sampling, Kendall-tau moment
fitting, and the rank transform that turns per-replicate event
intensities into pseudo-observations. Frank is deliberately left out
(its tau link needs a Debye integral); the family enum is the extension
point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

THETA_MAX = 50.0   # saturation cap when tau -> 1


class Family(enum.Enum):
    INDEPENDENCE = "independence"
    CLAYTON = "clayton"
    GUMBEL = "gumbel"


@dataclass(frozen=True)
class CopulaModel:
    """An Archimedean family tag plus its generator parameter."""

    family: Family
    theta: float | None = None

    def __post_init__(self):
        if self.family is Family.INDEPENDENCE:
            if self.theta is not None:
                raise ValueError("independence copula takes no theta")
        elif self.family is Family.CLAYTON:
            if self.theta is None or not self.theta > 0.0:
                raise ValueError("Clayton needs theta > 0")
        elif self.family is Family.GUMBEL:
            if self.theta is None or not self.theta >= 1.0:
                raise ValueError("Gumbel needs theta >= 1")


@dataclass(frozen=True)
class PseudoObservations:
    """Rank-transformed intensities in (0, 1); column i is sector i.

    degenerate_sectors lists columns whose raw intensities were all
    zero (no events anywhere): their ranks are all ties and carry no
    dependence information.
    """

    u: np.ndarray
    intensities: np.ndarray
    degenerate_sectors: tuple[int, ...] = ()


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0) or np.any(t > 1.0):
        raise ValueError("generator argument must lie in (0, 1]")
    return t


def generator(model: CopulaModel, t):
    """Generator psi(t): strictly decreasing on (0, 1] with psi(1) = 0."""
    t = _check_t(t)
    if model.family is Family.INDEPENDENCE:
        out = -np.log(t)
    elif model.family is Family.CLAYTON:
        out = (t ** (-model.theta) - 1.0) / model.theta
    else:
        out = (-np.log(t)) ** model.theta
    return float(out) if out.ndim == 0 else out


def generator_inverse(model: CopulaModel, s):
    """Closed-form inverse of the generator on [0, inf)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0):
        raise ValueError("generator inverse argument must be >= 0")
    if model.family is Family.INDEPENDENCE:
        out = np.exp(-s)
    elif model.family is Family.CLAYTON:
        out = (1.0 + model.theta * s) ** (-1.0 / model.theta)
    else:
        out = np.exp(-(s ** (1.0 / model.theta)))
    return float(out) if out.ndim == 0 else out


def copula_cdf(model: CopulaModel, u) -> float:
    """Joint CDF at u: psi_inverse(sum_i psi(u_i))."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    _check_t(u)
    return float(generator_inverse(model, np.sum(generator(model, u))))


def _positive_stable(alpha: float, n: int, rng: np.random.Generator):
    """One-sided stable S(alpha) with Laplace transform exp(-s**alpha),
    by the Chambers-Mallows-Stuck construction."""
    v = rng.uniform(0.0, math.pi, n)
    w = rng.standard_exponential(n)
    return (np.sin(alpha * v) / np.sin(v) ** (1.0 / alpha)
            * (np.sin((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))


def sample(model: CopulaModel, k: int, n: int, seed: int) -> np.ndarray:
    """Draw n joint samples of dimension k with uniform marginals.

    Frailty construction: U_i = phi(E_i / M) with phi the Laplace
    transform of the mixing variable M (Gamma for Clayton, positive
    stable for Gumbel, degenerate for independence) and E_i independent
    standard exponentials. Deterministic under the seed.
    """
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 and n >= 1")
    rng = np.random.default_rng(seed)
    e = rng.standard_exponential((n, k))
    if model.family is Family.INDEPENDENCE:
        return np.exp(-e)
    if model.family is Family.CLAYTON:
        m = rng.gamma(1.0 / model.theta, 1.0, n)
        return (1.0 + e / m[:, None]) ** (-1.0 / model.theta)
    if model.theta == 1.0:
        return np.exp(-e)
    m = _positive_stable(1.0 / model.theta, n, rng)
    return np.exp(-((e / m[:, None]) ** (1.0 / model.theta)))


def tau_from_theta(family: Family, theta: float) -> float:
    """Closed-form Kendall tau of the family."""
    if family is Family.INDEPENDENCE:
        return 0.0
    if family is Family.CLAYTON:
        return theta / (theta + 2.0)
    return 1.0 - 1.0 / theta


@dataclass(frozen=True)
class FitResult:
    model: CopulaModel
    tau: float
    fell_back_to_independence: bool = False
    saturated: bool = False


def kendall_tau_matrix(u: np.ndarray) -> np.ndarray:
    """Pairwise empirical Kendall tau between columns."""
    u = np.asarray(u, dtype=float)
    k = u.shape[1]
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            t = stats.kendalltau(u[:, i], u[:, j]).statistic
            out[i, j] = out[j, i] = t
    return out


def fit_by_tau(pseudo: PseudoObservations, family: Family) -> FitResult:
    """Moment-match theta to the empirical Kendall tau.

    Pairwise taus are averaged for k > 2. Nonpositive tau with Clayton
    or Gumbel requested falls back to independence (flagged); tau -> 1
    saturates at THETA_MAX (flagged). Columns that are entirely ties
    carry no rank information and raise.
    """
    u = np.asarray(pseudo.u, dtype=float)
    if u.ndim != 2 or u.shape[1] < 2:
        raise ValueError("need an (n, k) matrix with k >= 2")
    if u.shape[0] < 10:
        raise ValueError("need at least 10 observations")
    for col in range(u.shape[1]):
        if np.all(u[:, col] == u[0, col]):
            raise ValueError(f"column {col} is degenerate (all ties)")
    taus = []
    for i in range(u.shape[1]):
        for j in range(i + 1, u.shape[1]):
            taus.append(stats.kendalltau(u[:, i], u[:, j]).statistic)
    tau = float(np.mean(taus))

    if family is Family.INDEPENDENCE:
        return FitResult(CopulaModel(Family.INDEPENDENCE), tau)
    if tau <= 0.0:
        return FitResult(CopulaModel(Family.INDEPENDENCE), tau,
                         fell_back_to_independence=True)
    saturated = False
    if family is Family.CLAYTON:
        if tau >= 1.0:
            theta, saturated = THETA_MAX, True
        else:
            theta = 2.0 * tau / (1.0 - tau)
            if theta > THETA_MAX:
                theta, saturated = THETA_MAX, True
        return FitResult(CopulaModel(Family.CLAYTON, theta), tau,
                         saturated=saturated)
    if tau >= 1.0:
        theta, saturated = THETA_MAX, True
    else:
        theta = 1.0 / (1.0 - tau)
        if theta > THETA_MAX:
            theta, saturated = THETA_MAX, True
    return FitResult(CopulaModel(Family.GUMBEL, theta), tau,
                     saturated=saturated)


def intensities_from_reports(reports, k: int) -> PseudoObservations:
    """Per-replicate, per-sector event intensities, rank-transformed.

    The intensity of sector i in a replicate is the jump size of its
    largest event (0 when it had none). Ranks are average-tied and
    scaled by 1/(n+1) so pseudo-observations stay inside (0, 1).
    """
    reports = list(reports)
    if len(reports) < 10:
        raise ValueError("need an ensemble of at least 10 replicate reports")
    n = len(reports)
    intens = np.zeros((n, k))
    for r, rep in enumerate(reports):
        for e in rep.events:
            if e.jump_size > intens[r, e.sector]:
                intens[r, e.sector] = e.jump_size
    degenerate = tuple(i for i in range(k) if np.all(intens[:, i] == 0.0))
    u = np.empty_like(intens)
    for i in range(k):
        u[:, i] = stats.rankdata(intens[:, i], method="average") / (n + 1)
    return PseudoObservations(u, intens, degenerate)
