"""Elementary catastrophe normal forms.

The seven stable polynomial normal forms (four with one behavior
variable, three umbilics with two), their potentials, analytic
derivatives, and critical-point machinery. Everything here is a pure
function of its inputs.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

TOL_DEGENERACY = 1e-8   # |eigenvalue| below which a critical point is degenerate
TOL_MERGE = 1e-6        # Euclidean radius for deduplicating roots
NEWTON_TOL = 1e-9
NEWTON_MAX_ITER = 50
_GRID_POINTS = 21       # Newton-start grid per axis for the umbilics
_IMAG_TOL = 1e-7        # relative imaginary-part cutoff for companion roots


class NormalForm(enum.Enum):
    """The seven normal forms, keyed by their conventional names."""

    FOLD = "fold"
    CUSP = "cusp"
    SWALLOWTAIL = "swallowtail"
    BUTTERFLY = "butterfly"
    ELLIPTIC_UMBILIC = "elliptic_umbilic"
    HYPERBOLIC_UMBILIC = "hyperbolic_umbilic"
    PARABOLIC_UMBILIC = "parabolic_umbilic"

    @property
    def code(self) -> int:
        return _CODE[self]

    @property
    def behavior_dim(self) -> int:
        return _BEHAVIOR_DIM[self]

    @property
    def control_dim(self) -> int:
        return _CONTROL_DIM[self]


_CODE = {
    NormalForm.FOLD: 0,
    NormalForm.CUSP: 1,
    NormalForm.SWALLOWTAIL: 2,
    NormalForm.BUTTERFLY: 3,
    NormalForm.ELLIPTIC_UMBILIC: 4,
    NormalForm.HYPERBOLIC_UMBILIC: 5,
    NormalForm.PARABOLIC_UMBILIC: 6,
}
_BEHAVIOR_DIM = {
    NormalForm.FOLD: 1,
    NormalForm.CUSP: 1,
    NormalForm.SWALLOWTAIL: 1,
    NormalForm.BUTTERFLY: 1,
    NormalForm.ELLIPTIC_UMBILIC: 2,
    NormalForm.HYPERBOLIC_UMBILIC: 2,
    NormalForm.PARABOLIC_UMBILIC: 2,
}
_CONTROL_DIM = {
    NormalForm.FOLD: 1,
    NormalForm.CUSP: 2,
    NormalForm.SWALLOWTAIL: 3,
    NormalForm.BUTTERFLY: 4,
    NormalForm.ELLIPTIC_UMBILIC: 3,
    NormalForm.HYPERBOLIC_UMBILIC: 3,
    NormalForm.PARABOLIC_UMBILIC: 4,
}


@dataclass(frozen=True)
class SectorPoint:
    """A behavior/control point (x, alpha) for one sector."""

    x: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, dtype=float)))


class PointKind(enum.Enum):
    MINIMUM = "minimum"
    MAXIMUM = "maximum"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class CriticalPointClass:
    """Stability signature of a critical point.

    ``DEGENERATE`` takes precedence whenever the smallest |eigenvalue| of
    the Hessian falls below the degeneracy tolerance; otherwise the kind
    follows the negative-eigenvalue count (0 = minimum, all = maximum,
    in between = saddle).
    """

    kind: PointKind
    negative_eigenvalues: int
    min_abs_eigenvalue: float


def _check_dims(form: NormalForm, p: SectorPoint) -> None:
    if p.x.shape != (form.behavior_dim,):
        raise ValueError(
            f"behavior vector has length {p.x.shape[0]}, "
            f"{form.name} needs {form.behavior_dim}")
    if p.alpha.shape != (form.control_dim,):
        raise ValueError(
            f"control vector has length {p.alpha.shape[0]}, "
            f"{form.name} needs {form.control_dim}")


def potential(form: NormalForm, p: SectorPoint) -> float:
    """Evaluate the normal-form potential at (x, alpha)."""
    _check_dims(form, p)
    a = p.alpha
    if form is NormalForm.FOLD:
        x = p.x[0]
        return x ** 3 / 3.0 + a[0] * x
    if form is NormalForm.CUSP:
        x = p.x[0]
        return 0.25 * x ** 4 + 0.5 * a[0] * x ** 2 + a[1] * x
    if form is NormalForm.SWALLOWTAIL:
        x = p.x[0]
        return x ** 5 / 5.0 + a[0] * x ** 3 / 3.0 + 0.5 * a[1] * x ** 2 + a[2] * x
    if form is NormalForm.BUTTERFLY:
        x = p.x[0]
        return (x ** 6 / 6.0 + 0.25 * a[0] * x ** 4 + a[1] * x ** 3 / 3.0
                + 0.5 * a[2] * x ** 2 + a[3] * x)
    u, v = p.x
    if form is NormalForm.ELLIPTIC_UMBILIC:
        return u ** 3 - 3.0 * u * v ** 2 + a[0] * (u ** 2 + v ** 2) + a[1] * u + a[2] * v
    if form is NormalForm.HYPERBOLIC_UMBILIC:
        return u ** 3 + v ** 3 + a[0] * u * v + a[1] * u + a[2] * v
    return u ** 2 * v + v ** 4 + a[0] * u ** 2 + a[1] * v ** 2 + a[2] * u + a[3] * v


def gradient(form: NormalForm, p: SectorPoint) -> np.ndarray:
    """Analytic behavior-space gradient of the potential."""
    _check_dims(form, p)
    a = p.alpha
    if form is NormalForm.FOLD:
        x = p.x[0]
        return np.array([x ** 2 + a[0]])
    if form is NormalForm.CUSP:
        x = p.x[0]
        return np.array([x ** 3 + a[0] * x + a[1]])
    if form is NormalForm.SWALLOWTAIL:
        x = p.x[0]
        return np.array([x ** 4 + a[0] * x ** 2 + a[1] * x + a[2]])
    if form is NormalForm.BUTTERFLY:
        x = p.x[0]
        return np.array([x ** 5 + a[0] * x ** 3 + a[1] * x ** 2 + a[2] * x + a[3]])
    u, v = p.x
    if form is NormalForm.ELLIPTIC_UMBILIC:
        return np.array([3.0 * u ** 2 - 3.0 * v ** 2 + 2.0 * a[0] * u + a[1],
                         -6.0 * u * v + 2.0 * a[0] * v + a[2]])
    if form is NormalForm.HYPERBOLIC_UMBILIC:
        return np.array([3.0 * u ** 2 + a[0] * v + a[1],
                         3.0 * v ** 2 + a[0] * u + a[2]])
    return np.array([2.0 * u * v + 2.0 * a[0] * u + a[2],
                     u ** 2 + 4.0 * v ** 3 + 2.0 * a[1] * v + a[3]])


def hessian(form: NormalForm, p: SectorPoint) -> np.ndarray:
    """Analytic behavior-space Hessian (symmetric by construction)."""
    _check_dims(form, p)
    a = p.alpha
    if form is NormalForm.FOLD:
        return np.array([[2.0 * p.x[0]]])
    if form is NormalForm.CUSP:
        return np.array([[3.0 * p.x[0] ** 2 + a[0]]])
    if form is NormalForm.SWALLOWTAIL:
        x = p.x[0]
        return np.array([[4.0 * x ** 3 + 2.0 * a[0] * x + a[1]]])
    if form is NormalForm.BUTTERFLY:
        x = p.x[0]
        return np.array([[5.0 * x ** 4 + 3.0 * a[0] * x ** 2 + 2.0 * a[1] * x + a[2]]])
    u, v = p.x
    if form is NormalForm.ELLIPTIC_UMBILIC:
        off = -6.0 * v
        return np.array([[6.0 * u + 2.0 * a[0], off],
                         [off, -6.0 * u + 2.0 * a[0]]])
    if form is NormalForm.HYPERBOLIC_UMBILIC:
        off = a[0]
        return np.array([[6.0 * u, off], [off, 6.0 * v]])
    off = 2.0 * u
    return np.array([[2.0 * v + 2.0 * a[0], off],
                     [off, 12.0 * v ** 2 + 2.0 * a[1]]])


def control_jacobian(form: NormalForm, p: SectorPoint) -> np.ndarray:
    """d(gradient)/d(alpha), the behavior-by-control mixed second
    derivatives of the potential."""
    _check_dims(form, p)
    if form is NormalForm.FOLD:
        return np.array([[1.0]])
    if form is NormalForm.CUSP:
        return np.array([[p.x[0], 1.0]])
    if form is NormalForm.SWALLOWTAIL:
        x = p.x[0]
        return np.array([[x ** 2, x, 1.0]])
    if form is NormalForm.BUTTERFLY:
        x = p.x[0]
        return np.array([[x ** 3, x ** 2, x, 1.0]])
    u, v = p.x
    if form is NormalForm.ELLIPTIC_UMBILIC:
        return np.array([[2.0 * u, 1.0, 0.0], [2.0 * v, 0.0, 1.0]])
    if form is NormalForm.HYPERBOLIC_UMBILIC:
        return np.array([[v, 1.0, 0.0], [u, 0.0, 1.0]])
    return np.array([[2.0 * u, 0.0, 1.0, 0.0], [0.0, 2.0 * v, 0.0, 1.0]])


def classify(form: NormalForm, p: SectorPoint,
             tol_degeneracy: float = TOL_DEGENERACY) -> CriticalPointClass:
    """Classify a critical point from the eigenvalues of its Hessian."""
    H = hessian(form, p)
    eigs = np.linalg.eigvalsh(H)
    neg = int(np.sum(eigs < 0.0))
    min_abs = float(np.min(np.abs(eigs)))
    if min_abs < tol_degeneracy:
        kind = PointKind.DEGENERATE
    elif neg == 0:
        kind = PointKind.MINIMUM
    elif neg == form.behavior_dim:
        kind = PointKind.MAXIMUM
    else:
        kind = PointKind.SADDLE
    return CriticalPointClass(kind, neg, min_abs)


def _gradient_coeffs(form: NormalForm, alpha: np.ndarray) -> list[float]:
    """Descending coefficients of the (monic) gradient polynomial for the
    one-variable forms."""
    a = list(map(float, alpha))
    if form is NormalForm.FOLD:
        return [1.0, 0.0, a[0]]
    if form is NormalForm.CUSP:
        return [1.0, 0.0, a[0], a[1]]
    if form is NormalForm.SWALLOWTAIL:
        return [1.0, 0.0, a[0], a[1], a[2]]
    if form is NormalForm.BUTTERFLY:
        return [1.0, 0.0, a[0], a[1], a[2], a[3]]
    raise ValueError(f"{form.name} has no univariate gradient polynomial")


def _dedupe(points: list[np.ndarray], tol: float) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for q in points:
        if all(np.linalg.norm(q - r) > tol for r in kept):
            kept.append(q)
    return kept


def critical_points(form: NormalForm, alpha, search_box: tuple[float, float],
                    tol_degeneracy: float = TOL_DEGENERACY,
                    tol_merge: float = TOL_MERGE,
                    ) -> list[tuple[SectorPoint, CriticalPointClass]]:
    """Find and classify the critical points of a normal form.

    One-variable forms are solved completely inside the box through the
    companion matrix of the gradient polynomial. The umbilics use Newton
    iteration from a deterministic 21x21 grid of starts, so completeness
    for them is best effort; starts that fail to converge are dropped.
    Results are sorted by behavior coordinates.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.shape != (form.control_dim,):
        raise ValueError(
            f"control vector has length {alpha.shape[0]}, "
            f"{form.name} needs {form.control_dim}")
    lo, hi = float(search_box[0]), float(search_box[1])
    if not lo < hi:
        raise ValueError("search_box must be a nonempty interval (lo, hi)")

    roots: list[np.ndarray] = []
    if form.behavior_dim == 1:
        gc = np.array(_gradient_coeffs(form, alpha))
        hc = np.polyder(gc)
        tc = np.polyder(hc)
        for z in np.roots(gc):
            if abs(z.imag) > _IMAG_TOL * max(1.0, abs(z)):
                continue
            x = float(z.real)
            for _ in range(3):
                h = float(np.polyval(hc, x))
                if abs(h) < 1e-12:
                    break
                x -= float(np.polyval(gc, x)) / h
            if abs(np.polyval(hc, x)) < 1e-6:
                # Companion roots are only sqrt(eps)-accurate at repeated
                # roots; snap onto the nearby Hessian zero when it is still
                # a gradient root, so exact degeneracies classify as such.
                x2 = x
                for _ in range(30):
                    t3 = float(np.polyval(tc, x2))
                    if abs(t3) < 1e-12:
                        break
                    step = float(np.polyval(hc, x2)) / t3
                    x2 -= step
                    if abs(step) < 1e-15:
                        break
                if abs(np.polyval(gc, x2)) <= 1e-9:
                    x = x2
            roots.append(np.array([x]))
    else:
        grid = np.linspace(lo, hi, _GRID_POINTS)
        for u0, v0 in itertools.product(grid, grid):
            x = np.array([u0, v0])
            converged = False
            for _ in range(NEWTON_MAX_ITER):
                pt = SectorPoint(x, alpha)
                g = gradient(form, pt)
                if np.max(np.abs(g)) <= NEWTON_TOL:
                    converged = True
                    break
                H = hessian(form, pt)
                try:
                    dx = np.linalg.solve(H, -g)
                except np.linalg.LinAlgError:
                    break
                x = x + dx
                if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > 1e6:
                    break
            if converged:
                roots.append(x)

    margin = tol_merge
    roots = [r for r in roots if np.all(r >= lo - margin) and np.all(r <= hi + margin)]
    roots = _dedupe(roots, tol_merge)
    roots.sort(key=tuple)
    out = []
    for r in roots:
        pt = SectorPoint(r, alpha)
        out.append((pt, classify(form, pt, tol_degeneracy)))
    return out


def cusp_discriminant(a: float, b: float) -> float:
    """Residual 4*a**3 + 27*b**2 of the cusp equilibrium polynomial; zero
    exactly when x**3 + a*x + b has a repeated real root."""
    return 4.0 * a ** 3 + 27.0 * b ** 2
