"""Near-singularity diagnostics.

Corank of the network Hessian, the codimension of the control-space
projection of the critical manifold's tangent space, and discriminant
normals in control space with their alignment angles. These quantify
how degenerate an equilibrium is and whether several sectors are
degenerating along the same control direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .network import (COND_LIMIT, TOL_EQUILIBRIUM, NetworkEquilibrium,
                      NetworkSystem, control_jacobian_full, network_gradient,
                      network_hessian)

TOL_RANK = 1e-8          # relative singular-value cutoff
FD_STEP_REL = 1e-5       # finite-difference step, relative to control size
BRANCH_RADIUS = 0.25     # max displacement for "same branch" continuation
_BRANCH_NEWTON_TOL = 1e-12
_BRANCH_NEWTON_ITER = 100
_ACCEPT_RESIDUAL = 1e-9


@dataclass(frozen=True)
class DegenerateIsolated:
    """Signal: no smooth discriminant normal exists at this point (for
    example at a cusp vertex, where the discriminant has no tangent)."""

    sector: int


@dataclass(frozen=True)
class SingularityDiagnostics:
    """Bundle of near-singularity indicators at one equilibrium.

    ``discriminant_normals[i]`` is the unit control-space normal for
    involved sector i (None when degenerate-isolated); angles are in
    degrees, NaN where a normal is undefined.
    """

    singular_values_H: np.ndarray
    corank: int
    dpi_codim: int
    involved_sectors: tuple[int, ...]
    discriminant_normals: tuple[np.ndarray | None, ...]
    pairwise_angles: np.ndarray


def corank(H, tol_rank: float = TOL_RANK) -> int:
    """Number of singular values below tol_rank * max(sigma_max, 1)."""
    H = np.asarray(H, dtype=float)
    svals = np.linalg.svd(H, compute_uv=False)
    thresh = tol_rank * max(float(svals[0]) if svals.size else 0.0, 1.0)
    return int(np.sum(svals < thresh))


def _numerical_rank(M: np.ndarray, tol_rank: float) -> int:
    svals = np.linalg.svd(M, compute_uv=False)
    if svals.size == 0:
        return 0
    thresh = tol_rank * max(float(svals[0]), 1.0)
    return int(np.sum(svals >= thresh))


def _check_equilibrium(sys: NetworkSystem, eq: NetworkEquilibrium) -> None:
    res = float(np.max(np.abs(network_gradient(sys, eq.x, eq.alpha))))
    if res >= TOL_EQUILIBRIUM:
        raise ValueError(
            f"not an equilibrium: gradient residual {res:.3e} >= {TOL_EQUILIBRIUM}")


def dpi_codim(sys: NetworkSystem, eq: NetworkEquilibrium,
              tol_rank: float = TOL_RANK) -> int:
    """Codimension of the control-space image of the critical manifold's
    tangent space at an equilibrium.

    The tangent space is the null space of [H | B] (B the behavior-by-
    control mixed derivative block); its projection onto the control
    coordinates has rank p minus the returned codimension. Zero in the
    implicit-function regime (nondegenerate H), m >= 2 on multi-singular
    strata.
    """
    _check_equilibrium(sys, eq)
    H = network_hessian(sys, eq.x, eq.alpha)
    B = control_jacobian_full(sys, eq.x, eq.alpha)
    M = np.hstack([H, B])
    u, s, vt = np.linalg.svd(M)
    thresh = tol_rank * max(float(s[0]) if s.size else 0.0, 1.0)
    rank_M = int(np.sum(s >= thresh))
    null_basis = vt[rank_M:].T            # (n + p) x d
    alpha_part = null_basis[sys.n:, :]    # p x d
    return sys.p - _numerical_rank(alpha_part, tol_rank)


def _continue_branch(sys: NetworkSystem, x0: np.ndarray, alpha: np.ndarray,
                     branch_radius: float, vnull: np.ndarray | None = None,
                     nudge: float = 0.0) -> np.ndarray | None:
    """Newton-continue the equilibrium branch to a perturbed control
    point; None when the branch does not survive there.

    Newton cannot start from an exactly degenerate point (singular
    Hessian), so when the direct start fails, retry from starts nudged
    along the Hessian null direction: past a fold the branch moves like
    the square root of the control offset, which is what ``nudge``
    should be scaled to.
    """
    starts = [x0]
    if vnull is not None and nudge > 0.0:
        for c in (1.0, 4.0, 16.0):
            starts.append(x0 + c * nudge * vnull)
            starts.append(x0 - c * nudge * vnull)
    for start in starts:
        x = start.copy()
        st, _ = K.newton(*sys.packed, x, alpha, _BRANCH_NEWTON_TOL,
                         _BRANCH_NEWTON_ITER, branch_radius, COND_LIMIT)
        if st == K.NEWTON_JUMP or st == K.NEWTON_SINGULAR:
            continue
        if st == K.NEWTON_NO_CONVERGENCE:
            res = float(np.max(np.abs(network_gradient(sys, x, alpha))))
            if res > _ACCEPT_RESIDUAL:
                continue
        if float(np.max(np.abs(x - x0))) <= branch_radius:
            return x
    return None


def discriminant_normal(sys: NetworkSystem, eq: NetworkEquilibrium,
                        sector: int, fd_step_rel: float = FD_STEP_REL,
                        branch_radius: float = BRANCH_RADIUS,
                        ) -> np.ndarray | DegenerateIsolated:
    """Unit normal of the discriminant in sector ``sector``'s control
    space at a near-degenerate equilibrium.

    Estimated from one/two-sided finite differences of the squared
    Hessian determinant along the continued branch. The square is the
    differentiable object across a fold (det H itself varies like the
    square root of the distance to the fold, which biases component-wise
    one-sided slopes); on the smooth part of the branch it changes the
    gradient only by a positive factor, and the sign is canonicalized
    anyway (first nonzero component positive). Returns
    DegenerateIsolated when no direction yields a usable slope, e.g. at
    a cusp vertex where the two one-sided estimates contradict each
    other in every direction.
    """
    _check_equilibrium(sys, eq)
    if not 0 <= sector < sys.k:
        raise ValueError(f"sector index {sector} out of range")
    a_slice = sys.sector_slices()[sector][1]
    idx = range(a_slice.start, a_slice.stop)

    H0 = network_hessian(sys, eq.x, eq.alpha)
    d0 = float(np.linalg.det(H0))
    s0 = d0 * d0
    eigvals, eigvecs = np.linalg.eigh(H0)
    vnull = eigvecs[:, int(np.argmin(np.abs(eigvals)))]

    def probe(j: int, offset: float) -> float | None:
        alpha_try = eq.alpha.copy()
        alpha_try[j] += offset
        x_try = _continue_branch(sys, eq.x, alpha_try, branch_radius,
                                 vnull, np.sqrt(abs(offset)))
        if x_try is None:
            return None
        d = float(np.linalg.det(network_hessian(sys, x_try, alpha_try)))
        return (d * d - s0) / offset

    slopes: list[float | None] = []
    for j in idx:
        h = fd_step_rel * max(1.0, abs(float(eq.alpha[j])))
        sided = {}
        for sign in (1.0, -1.0):
            near = probe(j, sign * h)
            if near is None:
                continue
            # Richardson step in sqrt(h): past a fold the squared
            # determinant varies like g*da + c*da**(3/2), so pairing the
            # slopes at h and 4h cancels the sqrt term exactly.
            far = probe(j, sign * 4.0 * h)
            sided[sign] = near if far is None else 2.0 * near - far
        if not sided:
            slopes.append(None)
        elif len(sided) == 1:
            slopes.append(next(iter(sided.values())))
        else:
            fwd, bwd = sided[1.0], sided[-1.0]
            small = 1e-12 * max(1.0, abs(fwd), abs(bwd))
            if abs(fwd) < small or abs(bwd) < small or (fwd > 0) == (bwd > 0):
                slopes.append(0.5 * (fwd + bwd))
            else:
                # the two sides contradict: no smooth normal along this axis
                slopes.append(0.0)
    if all(s is None for s in slopes):
        return DegenerateIsolated(sector)
    g = np.array([0.0 if s is None else s for s in slopes])
    norm = float(np.linalg.norm(g))
    if norm == 0.0:
        return DegenerateIsolated(sector)
    g /= norm
    for v in g:
        if v != 0.0:
            if v < 0.0:
                g = -g
            break
    return g + 0.0   # normalize any -0.0 components


def normal_alignment_angle(u, v) -> float:
    """Undirected angle in degrees between two discriminant normals.

    Vectors of different lengths are compared slot-by-slot: the shorter
    one is zero-padded to the longer one's length.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if u.ndim != 1 or v.ndim != 1:
        raise ValueError("normals must be vectors")
    width = max(u.shape[0], v.shape[0])
    up = np.zeros(width)
    vp = np.zeros(width)
    up[:u.shape[0]] = u
    vp[:v.shape[0]] = v
    nu = float(np.linalg.norm(up))
    nv = float(np.linalg.norm(vp))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("normals must be nonzero")
    c = abs(float(up @ vp)) / (nu * nv)
    return float(np.degrees(np.arccos(min(c, 1.0))))


def diagnose_equilibrium(sys: NetworkSystem, eq: NetworkEquilibrium,
                         tol_rank: float = TOL_RANK,
                         involve_tol: float = 1e-3) -> SingularityDiagnostics:
    """Full diagnostics bundle at one equilibrium.

    Involved sectors are those whose Hessian block has min |eigenvalue|
    below involve_tol, plus always the most degenerate one.
    """
    _check_equilibrium(sys, eq)
    H = network_hessian(sys, eq.x, eq.alpha)
    svals = np.sort(np.linalg.svd(H, compute_uv=False))[::-1]
    co = corank(H, tol_rank)
    codim = dpi_codim(sys, eq, tol_rank)

    minabs = [sig[1] for sig in eq.sector_signatures]
    involved = sorted({int(np.argmin(minabs))}
                      | {i for i, m in enumerate(minabs) if m < involve_tol})
    normals = []
    for i in involved:
        nrm = discriminant_normal(sys, eq, i)
        normals.append(None if isinstance(nrm, DegenerateIsolated) else nrm)
    m = len(involved)
    angles = np.full((m, m), np.nan)
    for a in range(m):
        angles[a, a] = 0.0
        for b in range(a + 1, m):
            if normals[a] is not None and normals[b] is not None:
                ang = normal_alignment_angle(normals[a], normals[b])
                angles[a, b] = ang
                angles[b, a] = ang
    return SingularityDiagnostics(svals, co, codim, tuple(involved),
                                  tuple(normals), angles)
