import numpy as np
import pytest
from numpy.testing import assert_allclose

from catnet import CouplingSpec, NetworkSystem, NormalForm
from catnet.diagnostics import (DegenerateIsolated, SingularityDiagnostics,
                                corank, diagnose_equilibrium,
                                discriminant_normal, dpi_codim,
                                normal_alignment_angle)
from catnet.network import (control_jacobian_full, make_equilibrium,
                            network_hessian)
from conftest import single, two_cusps


def dpi_codim_oracle(sys, eq, tol=1e-8):
    """Independent route: with H symmetric, the control image of the
    tangent space is {da : B da orthogonal to null(H)}, so the
    codimension equals rank(V0^T B) for V0 an eigen-basis of null(H)."""
    H = network_hessian(sys, eq.x, eq.alpha)
    B = control_jacobian_full(sys, eq.x, eq.alpha)
    w, V = np.linalg.eigh(H)
    scale = max(np.max(np.abs(w)), 1.0)
    V0 = V[:, np.abs(w) < tol * scale]
    if V0.shape[1] == 0:
        return 0
    M = V0.T @ B
    svals = np.linalg.svd(M, compute_uv=False)
    thresh = tol * max(float(svals[0]) if svals.size else 0.0, 1.0)
    return int(np.sum(svals >= thresh))


def cusp_fold_equilibrium(sys1, t):
    """Exact double-root equilibrium of the cusp at parameter t != 0."""
    return make_equilibrium(sys1, [t], [-3 * t * t, 2 * t ** 3])


def test_corank_examples():
    assert corank([[1.0, 0.0], [0.0, 1e-12]], 1e-8) == 1
    assert corank(np.zeros((2, 2))) == 2
    assert corank([[0.0, 0.5], [0.5, 0.0]]) == 0


def test_corank_orthogonal_invariance():
    rng = np.random.default_rng(21)
    H = np.diag([2.0, 1e-11, 0.5, 1e-10])
    base = corank(H)
    assert base == 2
    for _ in range(100):
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        assert corank(Q @ H @ Q.T) == base


# fixture systems for the codimension checks, k <= 3
def k3_chain(eps=0.0):
    lam = np.zeros((3, 3))
    lam[0, 1] = lam[1, 0] = 1.0
    lam[1, 2] = lam[2, 1] = 1.0
    return NetworkSystem((NormalForm.CUSP,) * 3, CouplingSpec(eps, lam))


def coupled_pair_equilibrium(eps, lam12, x, a):
    """Construct an exact coupled-cusp equilibrium by solving for the
    linear controls."""
    sys = two_cusps(eps, lam12)
    w = eps * lam12
    b1 = -(x[0] ** 3 + a[0] * x[0] + w * x[1])
    b2 = -(x[1] ** 3 + a[1] * x[1] + w * x[0])
    return sys, make_equilibrium(sys, x, [a[0], b1, a[1], b2])


DPI_CASES = []


def _case(label, builder):
    DPI_CASES.append(pytest.param(builder, id=label))


_case("regular-single-cusp",
      lambda: (single(NormalForm.CUSP),
               make_equilibrium(single(NormalForm.CUSP), [1.0], [-1.0, 0.0]),
               0))
_case("fold-single-cusp",
      lambda: (single(NormalForm.CUSP),
               cusp_fold_equilibrium(single(NormalForm.CUSP), 1.0),
               1))
_case("double-cusp-point",
      lambda: (two_cusps(), make_equilibrium(two_cusps(), [0.0, 0.0],
                                             np.zeros(4)), 2))
_case("fold-times-regular",
      lambda: (two_cusps(),
               make_equilibrium(two_cusps(), [1.0, 1.0],
                                [-3.0, 2.0, -1.0, 0.0]), 1))
_case("triple-cusp-point",
      lambda: (k3_chain(), make_equilibrium(k3_chain(), np.zeros(3),
                                            np.zeros(6)), 3))
_case("coupled-pair-regular",
      lambda: (*coupled_pair_equilibrium(0.3, 1.0, [0.9, -0.8], [-1.0, -1.0]),
               0))
_case("coupled-pair-near-fold",
      lambda: (*coupled_pair_equilibrium(0.3, 1.0,
                                         [1 / np.sqrt(3), 1 / np.sqrt(3)],
                                         [-1.0, -1.0]), None))


@pytest.mark.parametrize("builder", DPI_CASES)
def test_dpi_codim_matches_oracle(builder):
    sys, eq, expected = builder()
    got = dpi_codim(sys, eq)
    assert got == dpi_codim_oracle(sys, eq)
    if expected is not None:
        assert got == expected


def test_dpi_codim_zero_when_nondegenerate():
    rng = np.random.default_rng(31)
    sys = two_cusps(0.2, -1.0)
    count = 0
    for _ in range(50):
        x = rng.uniform(-2, 2, 2)
        a = rng.uniform(-2, -0.5, 2)
        sys2, eq = coupled_pair_equilibrium(0.2, -1.0, x, a)
        if eq.full_min_singular_value > 1e-4:
            assert dpi_codim(sys2, eq) == 0
            count += 1
    assert count > 30


def test_dpi_codim_requires_equilibrium():
    sys = single(NormalForm.CUSP)
    bad = make_equilibrium(sys, [0.5], [-1.0, 0.7])
    with pytest.raises(ValueError):
        dpi_codim(sys, bad)


def test_discriminant_normal_fold():
    sysf = single(NormalForm.FOLD)
    eq = make_equilibrium(sysf, [0.0], [0.0])
    assert_allclose(discriminant_normal(sysf, eq, 0), [1.0])


def test_discriminant_normal_cusp_fold_point():
    sys1 = single(NormalForm.CUSP)
    eq = cusp_fold_equilibrium(sys1, 1.0)
    n = discriminant_normal(sys1, eq, 0)
    assert_allclose(n, np.array([1.0, 1.0]) / np.sqrt(2), atol=1e-4)


def test_discriminant_normal_matches_analytic_gradient():
    """50 sampled fold points: agreement with the analytic direction of
    grad(4 a^3 + 27 b^2) to better than 1e-4 radians."""
    sys1 = single(NormalForm.CUSP)
    worst = 0.0
    for t in np.linspace(0.25, 1.5, 50):
        eq = cusp_fold_equilibrium(sys1, t)
        n = discriminant_normal(sys1, eq, 0)
        assert not isinstance(n, DegenerateIsolated)
        a, b = eq.alpha
        analytic = np.array([12 * a * a, 54 * b])
        analytic /= np.linalg.norm(analytic)
        angle = np.arccos(min(1.0, abs(float(n @ analytic))))
        worst = max(worst, angle)
    assert worst < 1e-4


def test_discriminant_normal_cusp_vertex_isolated():
    sys1 = single(NormalForm.CUSP)
    eq = make_equilibrium(sys1, [0.0], [0.0, 0.0])
    out = discriminant_normal(sys1, eq, 0)
    assert isinstance(out, DegenerateIsolated)


def test_normal_alignment_angle_examples():
    assert normal_alignment_angle([1, 0], [0, 1]) == 90.0
    assert normal_alignment_angle([1, 0], [-1, 0]) == 0.0
    assert_allclose(normal_alignment_angle([1, 0], np.array([1, 1]) / np.sqrt(2)),
                    45.0, atol=1e-12)
    # padding: a fold-sector normal against a cusp-sector normal
    assert_allclose(normal_alignment_angle([1.0], [1.0, 1.0]), 45.0, atol=1e-12)
    with pytest.raises(ValueError):
        normal_alignment_angle([0.0, 0.0], [1.0, 0.0])


def test_diagnose_equilibrium_bundle():
    sys = two_cusps()
    eq = make_equilibrium(sys, [0.0, 0.0], np.zeros(4))
    diag = diagnose_equilibrium(sys, eq)
    assert isinstance(diag, SingularityDiagnostics)
    assert diag.corank == 2
    assert diag.dpi_codim == 2
    assert diag.involved_sectors == (0, 1)
    assert all(n is None for n in diag.discriminant_normals)
    assert diag.pairwise_angles.shape == (2, 2)
    assert diag.pairwise_angles[0, 0] == 0.0
    # descending singular values
    sv = diag.singular_values_H
    assert np.all(np.diff(sv) <= 0)
