import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from catnet import (CouplingSpec, FoldSignal, NetworkSystem, NormalForm,
                    continue_equilibrium, find_equilibria, network_gradient,
                    network_hessian, network_potential)
from catnet.forms import critical_points
from catnet.network import TOL_EQUILIBRIUM, make_equilibrium
from conftest import mixed_system, single, two_cusps


def fd_network_gradient(sys, x, alpha, h=1e-6):
    out = np.empty(sys.n)
    for i in range(sys.n):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        out[i] = (network_potential(sys, xp, alpha)
                  - network_potential(sys, xm, alpha)) / (2 * h)
    return out


def fd_network_hessian(sys, x, alpha, h=1e-6):
    out = np.empty((sys.n, sys.n))
    for i in range(sys.n):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        out[:, i] = (network_gradient(sys, xp, alpha)
                     - network_gradient(sys, xm, alpha)) / (2 * h)
    return out


def test_coupling_spec_validation():
    with pytest.raises(ValueError):
        CouplingSpec(0.1, np.array([[0.0, 1.0], [2.0, 0.0]]))   # asymmetric
    with pytest.raises(ValueError):
        CouplingSpec(0.1, np.array([[1.0, 0.0], [0.0, 0.0]]))   # diagonal
    with pytest.raises(ValueError):
        CouplingSpec(-0.1, np.zeros((2, 2)))
    assert not CouplingSpec(0.5, np.zeros((2, 2))).nontrivial
    assert not CouplingSpec(0.0, np.array([[0.0, 1.0], [1.0, 0.0]])).nontrivial
    assert CouplingSpec(0.5, np.array([[0.0, 1.0], [1.0, 0.0]])).nontrivial


def test_network_potential_examples():
    assert network_potential(two_cusps(), np.zeros(2), np.zeros(4)) == 0.0
    sys = two_cusps(1.0, 2.0)
    assert network_potential(sys, [1.0, 1.0], np.zeros(4)) == 2.5


def test_network_gradient_examples():
    sys = two_cusps(0.5, 1.0)   # eps*lam = 0.5
    g = network_gradient(sys, [0.0, 0.0], [0.3, 0.0, -0.7, 0.0])
    assert_allclose(g, [0.0, 0.0])
    g = network_gradient(sys, [0.0, 1.0], [0.0, 0.0, -1.0, 0.5])
    assert g[0] == 0.5
    # decoupling: eps = 0 reduces to the concatenated sector gradients
    sys0 = two_cusps(0.0, 1.0)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.uniform(-2, 2, 2)
        alpha = rng.uniform(-2, 2, 4)
        g = network_gradient(sys0, x, alpha)
        expect = [x[0] ** 3 + alpha[0] * x[0] + alpha[1],
                  x[1] ** 3 + alpha[2] * x[1] + alpha[3]]
        assert_allclose(g, expect, rtol=1e-14, atol=1e-14)


def test_network_hessian_examples():
    sys = two_cusps(0.5, 1.0)
    H = network_hessian(sys, [0.0, 0.0], [1.0, 0.0, 1.0, 0.0])
    assert_allclose(H, [[1.0, 0.5], [0.5, 1.0]])
    assert_allclose(np.linalg.det(H), 0.75)
    H = network_hessian(sys, [1.0, 1.0], [-3.0, 0.0, -3.0, 0.0])
    assert_allclose(H, [[0.0, 0.5], [0.5, 0.0]])


def test_coupled_cusp_determinant_identity():
    """det H equals (3 x1^2 + a1)(3 x2^2 + a2) - (eps lam)^2 on random data."""
    rng = np.random.default_rng(42)
    for _ in range(1000):
        w = rng.uniform(0.0, 1.0)
        sys = two_cusps(1.0, w)
        x = rng.uniform(-2, 2, 2)
        alpha = rng.uniform(-2, 2, 4)
        det = np.linalg.det(network_hessian(sys, x, alpha))
        formula = ((3 * x[0] ** 2 + alpha[0]) * (3 * x[1] ** 2 + alpha[1 + 1])
                   - w ** 2)
        assert abs(det - formula) <= 1e-12


def test_gradient_hessian_finite_differences_k4():
    sys = mixed_system()
    rng = np.random.default_rng(9)
    for _ in range(100):
        x = rng.uniform(-1.5, 1.5, sys.n)
        alpha = rng.uniform(-1.5, 1.5, sys.p)
        g = network_gradient(sys, x, alpha)
        fd = fd_network_gradient(sys, x, alpha)
        assert np.all(np.abs(g - fd) <= 1e-5 * np.maximum(1.0, np.abs(g)))
        H = network_hessian(sys, x, alpha)
        fdH = fd_network_hessian(sys, x, alpha)
        assert np.all(np.abs(H - fdH) <= 1e-5 * np.maximum(1.0, np.abs(H)))
        assert np.array_equal(H, H.T)


def test_find_equilibria_product_counts():
    sys = two_cusps(0.0, 0.0)
    eqs = find_equilibria(sys, [-1.0, 0.0, -1.0, 0.0], (-3, 3))
    assert len(eqs) == 9
    eqs = find_equilibria(sys, [1.0, 0.0, 1.0, 0.0], (-3, 3))
    assert len(eqs) == 1
    assert_allclose(eqs[0].x, [0.0, 0.0], atol=1e-9)

    # two folds with a > 0: no equilibria even with weak coupling
    lam = np.array([[0.0, 1.0], [1.0, 0.0]])
    sysf = NetworkSystem((NormalForm.FOLD, NormalForm.FOLD),
                         CouplingSpec(0.01, lam))
    assert find_equilibria(sysf, [1.0, 1.0], (-3, 3)) == []


def test_find_equilibria_decoupled_matches_sector_products():
    """eps = 0: equilibria are exactly the Cartesian products of the
    per-sector critical points."""
    sys = two_cusps(0.0, 0.0)
    rng = np.random.default_rng(11)
    for _ in range(10):
        alpha = rng.uniform(-1.5, 1.5, 4)
        eqs = find_equilibria(sys, alpha, (-4, 4))
        pts1 = critical_points(NormalForm.CUSP, alpha[:2], (-4, 4))
        pts2 = critical_points(NormalForm.CUSP, alpha[2:], (-4, 4))
        expected = sorted(
            (p1.x[0], p2.x[0])
            for (p1, _), (p2, _) in itertools.product(pts1, pts2))
        got = sorted((eq.x[0], eq.x[1]) for eq in eqs)
        assert len(got) == len(expected)
        for g, e in zip(got, expected):
            assert_allclose(g, e, atol=1e-6)


def test_equilibria_satisfy_invariant():
    sys = two_cusps(0.4, -1.0)
    rng = np.random.default_rng(13)
    for _ in range(10):
        alpha = rng.uniform(-1.5, 1.5, 4)
        for eq in find_equilibria(sys, alpha, (-4, 4)):
            res = np.max(np.abs(network_gradient(sys, eq.x, eq.alpha)))
            assert res <= TOL_EQUILIBRIUM
            assert len(eq.sector_signatures) == 2
            assert eq.full_min_singular_value >= 0.0


def test_continue_equilibrium_fold_branch():
    sysf = single(NormalForm.FOLD)
    eq = make_equilibrium(sysf, [1.0], [-1.0])
    out = continue_equilibrium(sysf, eq, [-0.99])
    assert not isinstance(out, FoldSignal)
    assert_allclose(out.x, [np.sqrt(0.99)], atol=1e-12)

    eq_near = make_equilibrium(sysf, [0.1], [-0.01])
    out = continue_equilibrium(sysf, eq_near, [0.01])
    assert isinstance(out, FoldSignal)


def test_continue_equilibrium_decoupled_acts_sectorwise():
    sys = two_cusps(0.0, 0.0)
    eq = make_equilibrium(sys, [1.0, -1.0], [-1.0, 0.0, -1.0, 0.0])
    out = continue_equilibrium(sys, eq, [-1.05, 0.0, -1.0, 0.0])
    single_sys = single(NormalForm.CUSP)
    eq1 = make_equilibrium(single_sys, [1.0], [-1.0, 0.0])
    out1 = continue_equilibrium(single_sys, eq1, [-1.05, 0.0])
    assert_allclose(out.x[0], out1.x[0], atol=1e-12)
    assert_allclose(out.x[1], -1.0, atol=1e-9)


def test_continue_equilibrium_jump_guard():
    sys = single(NormalForm.CUSP)
    eq = make_equilibrium(sys, [1.0], [-1.0, 0.0])
    out = continue_equilibrium(sys, eq, [-1.0, 0.5], max_step_norm=0.2)
    assert isinstance(out, FoldSignal) and out.reason == "jump"
