"""Coupled catastrophe networks.

Assembles the network potential (sum of sector normal-form potentials
plus a bilinear coupling on each sector's first behavior coordinate),
its block gradient and full Hessian with constant cross-blocks, and
provides equilibrium finding and parameter continuation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels as K
from .forms import NormalForm, TOL_DEGENERACY, TOL_MERGE, critical_points

TOL_EQUILIBRIUM = 1e-9
NEWTON_MAX_ITER = 50
COND_LIMIT = 1e12
_CORNER_DIM_CAP = 10   # skip corner starts beyond 2**10 of them


@dataclass(frozen=True)
class CouplingSpec:
    """Coupling strength and symmetric weight matrix between sectors.

    ``lam[i, j]`` weights the bilinear product of the first behavior
    coordinates of sectors i and j; the diagonal must be zero.
    """

    epsilon: float
    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
            raise ValueError("lam must be a square matrix")
        if not np.array_equal(lam, lam.T):
            raise ValueError("lam must be symmetric")
        if np.any(np.diag(lam) != 0.0):
            raise ValueError("lam must have a zero diagonal")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be nonnegative")
        object.__setattr__(self, "lam", lam)

    @property
    def nontrivial(self) -> bool:
        """True when coupling can actually move anything: positive epsilon
        and at least one nonzero weight."""
        return self.epsilon > 0.0 and bool(np.any(self.lam != 0.0))


@dataclass
class NetworkSystem:
    """k coupled sectors, each an elementary catastrophe normal form."""

    sectors: tuple[NormalForm, ...]
    coupling: CouplingSpec

    def __post_init__(self):
        self.sectors = tuple(self.sectors)
        if len(self.sectors) < 1:
            raise ValueError("need at least one sector")
        if self.coupling.lam.shape[0] != len(self.sectors):
            raise ValueError("lam size does not match the sector count")

    @property
    def k(self) -> int:
        return len(self.sectors)

    @cached_property
    def n(self) -> int:
        return int(sum(f.behavior_dim for f in self.sectors))

    @cached_property
    def p(self) -> int:
        return int(sum(f.control_dim for f in self.sectors))

    @cached_property
    def behavior_offsets(self) -> np.ndarray:
        return np.cumsum([0] + [f.behavior_dim for f in self.sectors[:-1]]).astype(np.int32)

    @cached_property
    def control_offsets(self) -> np.ndarray:
        return np.cumsum([0] + [f.control_dim for f in self.sectors[:-1]]).astype(np.int32)

    @cached_property
    def packed(self):
        """Kernel-ready packed representation (see catnet._kernels)."""
        kinds = np.array([f.code for f in self.sectors], dtype=np.int32)
        ci, cj, cw = [], [], []
        eps = self.coupling.epsilon
        lam = self.coupling.lam
        for i in range(self.k):
            for j in range(i + 1, self.k):
                w = eps * lam[i, j]
                if w != 0.0:
                    ci.append(i)
                    cj.append(j)
                    cw.append(w)
        return (kinds, self.behavior_offsets, self.control_offsets,
                np.array(ci, dtype=np.int32), np.array(cj, dtype=np.int32),
                np.array(cw, dtype=float))

    def sector_slices(self):
        """Per-sector (behavior slice, control slice) pairs."""
        out = []
        for i, f in enumerate(self.sectors):
            xo = int(self.behavior_offsets[i])
            ao = int(self.control_offsets[i])
            out.append((slice(xo, xo + f.behavior_dim), slice(ao, ao + f.control_dim)))
        return out


@dataclass(frozen=True)
class NetworkEquilibrium:
    """A zero of the network gradient with its stability bookkeeping.

    ``sector_signatures[i]`` is (negative eigencount, min |eigenvalue|)
    of sector i's diagonal Hessian block; ``full_min_singular_value`` is
    the smallest singular value of the full coupled Hessian.
    """

    x: np.ndarray
    alpha: np.ndarray
    sector_signatures: tuple[tuple[int, float], ...]
    full_min_singular_value: float


@dataclass(frozen=True)
class FoldSignal:
    """Continuation outcome marking a fold: the tracked branch ended.

    reason is one of 'no_convergence', 'singular', 'jump', 'degenerate'.
    """

    reason: str
    alpha: np.ndarray
    x_last: np.ndarray


def _check_xa(sys: NetworkSystem, x, alpha):
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if x.shape != (sys.n,):
        raise ValueError(f"behavior vector has length {x.shape}, need {sys.n}")
    if alpha.shape != (sys.p,):
        raise ValueError(f"control vector has length {alpha.shape}, need {sys.p}")
    return x, alpha


def network_potential(sys: NetworkSystem, x, alpha) -> float:
    x, alpha = _check_xa(sys, x, alpha)
    return float(K.potential(*sys.packed, x, alpha))


def network_gradient(sys: NetworkSystem, x, alpha) -> np.ndarray:
    x, alpha = _check_xa(sys, x, alpha)
    out = np.empty(sys.n)
    K.gradient(*sys.packed, x, alpha, out)
    return out


def network_hessian(sys: NetworkSystem, x, alpha) -> np.ndarray:
    x, alpha = _check_xa(sys, x, alpha)
    out = np.empty((sys.n, sys.n))
    K.hessian(*sys.packed, x, alpha, out)
    return out


def sector_signatures(sys: NetworkSystem, x, alpha):
    """Per-sector Hessian-block signatures and the full min |eigenvalue|."""
    x, alpha = _check_xa(sys, x, alpha)
    neg = np.empty(sys.k, dtype=np.int32)
    minabs = np.empty(sys.k)
    fullmin = K.signatures(*sys.packed, x, alpha, neg, minabs)
    sigs = tuple((int(neg[i]), float(minabs[i])) for i in range(sys.k))
    return sigs, float(fullmin)


def make_equilibrium(sys: NetworkSystem, x, alpha) -> NetworkEquilibrium:
    """Package an equilibrium; the caller asserts the residual is small."""
    x, alpha = _check_xa(sys, x, alpha)
    sigs, fullmin = sector_signatures(sys, x, alpha)
    return NetworkEquilibrium(x.copy(), alpha.copy(), sigs, fullmin)


def control_jacobian_full(sys: NetworkSystem, x, alpha) -> np.ndarray:
    """The n-by-p mixed second-derivative block d(gradient)/d(alpha).

    Block diagonal sector-wise: the bilinear coupling term has no
    control dependence.
    """
    from .forms import SectorPoint, control_jacobian

    x, alpha = _check_xa(sys, x, alpha)
    B = np.zeros((sys.n, sys.p))
    for i, (xs, as_) in enumerate(sys.sector_slices()):
        B[xs, as_] = control_jacobian(
            sys.sectors[i], SectorPoint(x[xs], alpha[as_]))
    return B


def find_equilibria(sys: NetworkSystem, alpha, search_box: tuple[float, float],
                    tol_merge: float = TOL_MERGE) -> list[NetworkEquilibrium]:
    """Find network equilibria by Newton iteration from a deterministic
    start set: Cartesian products of each sector's uncoupled critical
    points, the box corners, and the box center.

    Empty results are valid (nothing to find). Results are deduplicated
    and sorted by behavior coordinates.
    """
    _, alpha = _check_xa(sys, np.zeros(sys.n), alpha)
    lo, hi = float(search_box[0]), float(search_box[1])
    if not lo < hi:
        raise ValueError("search_box must be a nonempty interval (lo, hi)")

    sector_roots = []
    for i, (xs, as_) in enumerate(sys.sector_slices()):
        pts = critical_points(sys.sectors[i], alpha[as_], (lo, hi))
        sector_roots.append([pt.x for pt, _ in pts])

    starts: list[np.ndarray] = []
    if all(sector_roots):
        for combo in itertools.product(*sector_roots):
            starts.append(np.concatenate(combo))
    if sys.n <= _CORNER_DIM_CAP:
        for corner in itertools.product((lo, hi), repeat=sys.n):
            starts.append(np.array(corner))
    starts.append(np.full(sys.n, 0.5 * (lo + hi)))

    found: list[np.ndarray] = []
    for start in starts:
        x = start.copy()
        st, _ = K.newton(*sys.packed, x, alpha, TOL_EQUILIBRIUM,
                         NEWTON_MAX_ITER, np.inf, COND_LIMIT)
        if st != K.NEWTON_OK:
            continue
        # Polish: near a degenerate root, Newton can stop anywhere inside a
        # flat residual pocket much wider than tol_merge; extra zero-target
        # iterations contract such points onto the root so they deduplicate.
        K.newton(*sys.packed, x, alpha, 0.0, 50, np.inf, COND_LIMIT)
        if np.any(x < lo - tol_merge) or np.any(x > hi + tol_merge):
            continue
        if all(np.linalg.norm(x - y) > tol_merge for y in found):
            found.append(x)
    found.sort(key=tuple)
    return [make_equilibrium(sys, x, alpha) for x in found]


def continue_equilibrium(sys: NetworkSystem, eq: NetworkEquilibrium,
                         alpha_new, max_step_norm: float | None = None,
                         tol_degeneracy: float = TOL_DEGENERACY,
                         ) -> NetworkEquilibrium | FoldSignal:
    """Newton-correct an equilibrium to a nearby control point.

    Returns the corrected equilibrium or a FoldSignal when the branch
    terminates: Newton fails, the full Hessian is numerically degenerate
    at the corrected point, or (when max_step_norm is given) the
    corrected point is too far to be the same branch.
    """
    _, alpha_new = _check_xa(sys, np.zeros(sys.n), alpha_new)
    x = eq.x.copy()
    guard = np.inf if max_step_norm is None else float(max_step_norm)
    st, _ = K.newton(*sys.packed, x, alpha_new, TOL_EQUILIBRIUM,
                     NEWTON_MAX_ITER, guard, COND_LIMIT)
    if st != K.NEWTON_OK:
        reason = {K.NEWTON_NO_CONVERGENCE: "no_convergence",
                  K.NEWTON_SINGULAR: "singular",
                  K.NEWTON_JUMP: "jump"}[st]
        return FoldSignal(reason, alpha_new.copy(), x)
    eq_new = make_equilibrium(sys, x, alpha_new)
    if eq_new.full_min_singular_value < tol_degeneracy:
        return FoldSignal("degenerate", alpha_new.copy(), x)
    return eq_new
