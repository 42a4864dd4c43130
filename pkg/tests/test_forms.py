import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from catnet.forms import (CriticalPointClass, NormalForm, PointKind,
                          SectorPoint, classify, control_jacobian,
                          critical_points, cusp_discriminant, gradient,
                          hessian, potential)

ALL_FORMS = list(NormalForm)

# (behavior_dim, control_dim) per form, straight from the catalogue
DIM_TABLE = {
    NormalForm.FOLD: (1, 1),
    NormalForm.CUSP: (1, 2),
    NormalForm.SWALLOWTAIL: (1, 3),
    NormalForm.BUTTERFLY: (1, 4),
    NormalForm.ELLIPTIC_UMBILIC: (2, 3),
    NormalForm.HYPERBOLIC_UMBILIC: (2, 3),
    NormalForm.PARABOLIC_UMBILIC: (2, 4),
}


def rand_point(form, rng, scale=1.5):
    return SectorPoint(rng.uniform(-scale, scale, form.behavior_dim),
                       rng.uniform(-scale, scale, form.control_dim))


# ---------------------------------------------------------------------------
# independent oracles

def polyval_potential(form, x, alpha):
    """One-variable potentials via numpy.polyval on explicit coefficients."""
    a = list(alpha)
    if form is NormalForm.FOLD:
        coeffs = [1 / 3, 0.0, a[0], 0.0]
    elif form is NormalForm.CUSP:
        coeffs = [0.25, 0.0, 0.5 * a[0], a[1], 0.0]
    elif form is NormalForm.SWALLOWTAIL:
        coeffs = [0.2, 0.0, a[0] / 3, 0.5 * a[1], a[2], 0.0]
    elif form is NormalForm.BUTTERFLY:
        coeffs = [1 / 6, 0.0, 0.25 * a[0], a[1] / 3, 0.5 * a[2], a[3], 0.0]
    else:
        raise ValueError(form)
    return np.polyval(coeffs, x)


def fd_gradient(form, p, h=1e-6):
    out = np.empty(form.behavior_dim)
    for i in range(form.behavior_dim):
        xp = p.x.copy()
        xm = p.x.copy()
        xp[i] += h
        xm[i] -= h
        out[i] = (potential(form, SectorPoint(xp, p.alpha))
                  - potential(form, SectorPoint(xm, p.alpha))) / (2 * h)
    return out


def fd_hessian(form, p, h=1e-6):
    d = form.behavior_dim
    out = np.empty((d, d))
    for i in range(d):
        xp = p.x.copy()
        xm = p.x.copy()
        xp[i] += h
        xm[i] -= h
        out[:, i] = (gradient(form, SectorPoint(xp, p.alpha))
                     - gradient(form, SectorPoint(xm, p.alpha))) / (2 * h)
    return out


def fd_control_jacobian(form, p, h=1e-6):
    out = np.empty((form.behavior_dim, form.control_dim))
    for j in range(form.control_dim):
        ap = p.alpha.copy()
        am = p.alpha.copy()
        ap[j] += h
        am[j] -= h
        out[:, j] = (gradient(form, SectorPoint(p.x, ap))
                     - gradient(form, SectorPoint(p.x, am))) / (2 * h)
    return out


def bisect_root_count(coeffs, lo, hi, n_grid=20001):
    """Sign-change count of a polynomial on a fine grid (crude but
    independent of the companion-matrix path)."""
    xs = np.linspace(lo, hi, n_grid)
    vals = np.polyval(coeffs, xs)
    count = 0
    for i in range(len(xs) - 1):
        if vals[i] == 0.0:
            count += 1
        elif vals[i] * vals[i + 1] < 0:
            count += 1
    if vals[-1] == 0.0:
        count += 1
    return count


# ---------------------------------------------------------------------------
# table + example values

@pytest.mark.parametrize("form", ALL_FORMS)
def test_dimension_table(form):
    assert (form.behavior_dim, form.control_dim) == DIM_TABLE[form]


def test_potential_examples():
    assert potential(NormalForm.FOLD, SectorPoint([0.0], [0.0])) == 0.0
    assert potential(NormalForm.CUSP, SectorPoint([1.0], [-3.0, 2.0])) == 0.75
    assert potential(NormalForm.ELLIPTIC_UMBILIC,
                     SectorPoint([1.0, 1.0], [0.0, 0.0, 0.0])) == -2.0


def test_gradient_examples():
    assert_allclose(gradient(NormalForm.FOLD, SectorPoint([1.0], [-1.0])), [0.0])
    assert_allclose(gradient(NormalForm.CUSP, SectorPoint([1.0], [-3.0, 2.0])),
                    [0.0], atol=1e-15)
    assert_allclose(
        gradient(NormalForm.BUTTERFLY, SectorPoint([0.0], [0, 0, 0, 5.0])),
        [5.0])


def test_hessian_examples():
    assert_allclose(hessian(NormalForm.FOLD, SectorPoint([0.0], [3.0])), [[0.0]])
    assert_allclose(hessian(NormalForm.CUSP, SectorPoint([1.0], [-3.0, 2.0])),
                    [[0.0]])
    assert_allclose(
        hessian(NormalForm.ELLIPTIC_UMBILIC,
                SectorPoint([0.0, 0.0], [1.0, 0.0, 0.0])),
        [[2.0, 0.0], [0.0, 2.0]])


@pytest.mark.parametrize("form", [NormalForm.FOLD, NormalForm.CUSP,
                                  NormalForm.SWALLOWTAIL, NormalForm.BUTTERFLY])
def test_potential_matches_polyval_oracle(form):
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = rand_point(form, rng)
        assert_allclose(potential(form, p),
                        polyval_potential(form, p.x[0], p.alpha),
                        rtol=1e-13, atol=1e-13)


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        potential(NormalForm.CUSP, SectorPoint([1.0, 2.0], [0.0, 0.0]))
    with pytest.raises(ValueError):
        gradient(NormalForm.FOLD, SectorPoint([1.0], [0.0, 0.0]))
    with pytest.raises(ValueError):
        hessian(NormalForm.PARABOLIC_UMBILIC,
                SectorPoint([1.0, 2.0], [0.0, 0.0, 0.0]))


# ---------------------------------------------------------------------------
# derivative consistency (finite differences as the oracle)

@pytest.mark.parametrize("form", ALL_FORMS)
def test_gradient_matches_finite_differences(form):
    rng = np.random.default_rng(form.code)
    for _ in range(100):
        p = rand_point(form, rng)
        an = gradient(form, p)
        fd = fd_gradient(form, p)
        assert np.all(np.abs(an - fd) <= 1e-5 * np.maximum(1.0, np.abs(an)))


@pytest.mark.parametrize("form", ALL_FORMS)
def test_hessian_matches_finite_differences(form):
    rng = np.random.default_rng(form.code + 10)
    for _ in range(100):
        p = rand_point(form, rng)
        an = hessian(form, p)
        fd = fd_hessian(form, p)
        assert np.all(np.abs(an - fd) <= 1e-5 * np.maximum(1.0, np.abs(an)))


@pytest.mark.parametrize("form", ALL_FORMS)
def test_control_jacobian_matches_finite_differences(form):
    rng = np.random.default_rng(form.code + 20)
    for _ in range(50):
        p = rand_point(form, rng)
        an = control_jacobian(form, p)
        fd = fd_control_jacobian(form, p)
        assert np.all(np.abs(an - fd) <= 1e-5 * np.maximum(1.0, np.abs(an)))


@pytest.mark.parametrize("form", [NormalForm.ELLIPTIC_UMBILIC,
                                  NormalForm.HYPERBOLIC_UMBILIC,
                                  NormalForm.PARABOLIC_UMBILIC])
def test_hessian_bitwise_symmetric(form):
    rng = np.random.default_rng(3)
    for _ in range(100):
        H = hessian(form, rand_point(form, rng))
        assert H[0, 1] == H[1, 0]


# ---------------------------------------------------------------------------
# critical points

def test_fold_critical_points():
    pts = critical_points(NormalForm.FOLD, [-1.0], (-3, 3))
    assert [(p.x[0], c.kind) for p, c in pts] == [
        (-1.0, PointKind.MAXIMUM), (1.0, PointKind.MINIMUM)]
    assert critical_points(NormalForm.FOLD, [1.0], (-3, 3)) == []


def test_cusp_critical_points_bistable():
    pts = critical_points(NormalForm.CUSP, [-1.0, 0.0], (-3, 3))
    kinds = [(p.x[0], c.kind) for p, c in pts]
    assert kinds == [(-1.0, PointKind.MINIMUM), (0.0, PointKind.MAXIMUM),
                     (1.0, PointKind.MINIMUM)]


def test_cusp_critical_points_double_root():
    # x**3 - 3x + 2 = (x - 1)**2 (x + 2): repeated root is degenerate
    pts = critical_points(NormalForm.CUSP, [-3.0, 2.0], (-4, 4))
    assert len(pts) == 2
    by_x = {round(p.x[0], 6): c for p, c in pts}
    assert by_x[-2.0].kind is PointKind.MINIMUM
    assert by_x[1.0].kind is PointKind.DEGENERATE


def test_elliptic_umbilic_critical_points():
    # a=1, b=c=0: four critical points, found from the Newton grid
    pts = critical_points(NormalForm.ELLIPTIC_UMBILIC, [1.0, 0.0, 0.0], (-2, 2))
    assert len(pts) == 4
    for p, _ in pts:
        assert np.max(np.abs(gradient(NormalForm.ELLIPTIC_UMBILIC, p))) < 1e-8
    xs = sorted(round(p.x[0], 4) for p, _ in pts)
    assert xs == [round(-2 / 3, 4), 0.0, round(1 / 3, 4), round(1 / 3, 4)]


@pytest.mark.parametrize("form", [NormalForm.FOLD, NormalForm.CUSP,
                                  NormalForm.SWALLOWTAIL, NormalForm.BUTTERFLY])
def test_univariate_count_matches_bisection_oracle(form):
    rng = np.random.default_rng(form.code + 40)
    box = (-4.0, 4.0)
    for _ in range(30):
        alpha = rng.uniform(-2, 2, form.control_dim)
        pts = critical_points(form, alpha, box)
        coeffs = [1.0, 0.0] + list(alpha)
        oracle = bisect_root_count(coeffs, *box)
        # the grid oracle cannot split near-double roots; allow them through
        min_gap = min((abs(p.x[0] - q.x[0])
                       for (p, _), (q, _) in zip(pts, pts[1:])), default=1.0)
        if min_gap > 1e-3:
            assert len(pts) == oracle


def test_cusp_count_tracks_discriminant_sign():
    grid = np.linspace(-2, 2, 50)
    for a in grid:
        for b in grid:
            disc = cusp_discriminant(a, b)
            if abs(disc) < 1e-6:
                continue
            pts = critical_points(NormalForm.CUSP, [a, b], (-4, 4))
            assert len(pts) == (3 if disc < 0 else 1), (a, b, disc)


def test_cusp_discriminant_examples():
    assert cusp_discriminant(0.0, 0.0) == 0.0
    assert cusp_discriminant(-3.0, 2.0) == 0.0
    assert cusp_discriminant(-1.0, 0.0) == -4.0


@given(st.floats(-5, 5), st.floats(-5, 5))
@settings(max_examples=200, deadline=None)
def test_cusp_discriminant_root_structure(a, b):
    """Sign of 4a^3 + 27b^2 determines the real-root count of the cusp
    equilibrium polynomial (companion matrix as the oracle here)."""
    disc = cusp_discriminant(a, b)
    roots = np.roots([1.0, 0.0, a, b])
    n_real = int(np.sum(np.abs(roots.imag) < 1e-9 * np.maximum(1, np.abs(roots))))
    if abs(disc) > 1e-6:
        assert n_real == (3 if disc < 0 else 1)


def test_classify_boundaries():
    c = classify(NormalForm.CUSP, SectorPoint([1.0], [-3.0, 2.0]))
    assert c.kind is PointKind.DEGENERATE and c.min_abs_eigenvalue == 0.0
    c = classify(NormalForm.ELLIPTIC_UMBILIC,
                 SectorPoint([0.5, 0.5], [0.0, 0.0, 0.0]))
    assert isinstance(c, CriticalPointClass)
    assert 0 <= c.negative_eigenvalues <= 2
