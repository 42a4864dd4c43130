"""Backend kernels: agreement with the reference formulas and between
the compiled and pure-Python implementations."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from catnet import NormalForm, SectorPoint
from catnet import forms
from catnet._kernels import _pykernels
from conftest import BACKENDS, mixed_system, single, two_cusps


def eval_all(K, sys, x, alpha):
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    v = K.potential(*sys.packed, x, alpha)
    g = np.empty(sys.n)
    K.gradient(*sys.packed, x, alpha, g)
    H = np.empty((sys.n, sys.n))
    K.hessian(*sys.packed, x, alpha, H)
    return v, g, H


def composed_reference(sys, x, alpha):
    """Potential/gradient/Hessian assembled from the single-form module
    plus the explicit bilinear coupling (independent of the kernels)."""
    v = 0.0
    g = np.zeros(sys.n)
    H = np.zeros((sys.n, sys.n))
    for i, (xs, as_) in enumerate(sys.sector_slices()):
        pt = SectorPoint(x[xs], alpha[as_])
        v += forms.potential(sys.sectors[i], pt)
        g[xs] = forms.gradient(sys.sectors[i], pt)
        H[xs, xs] = forms.hessian(sys.sectors[i], pt)
    eps = sys.coupling.epsilon
    lam = sys.coupling.lam
    off = sys.behavior_offsets
    for i in range(sys.k):
        for j in range(i + 1, sys.k):
            w = eps * lam[i, j]
            if w:
                v += w * x[off[i]] * x[off[j]]
                g[off[i]] += w * x[off[j]]
                g[off[j]] += w * x[off[i]]
                H[off[i], off[j]] += w
                H[off[j], off[i]] += w
    return v, g, H


@pytest.mark.parametrize("K", BACKENDS, ids=lambda m: m.__name__.split(".")[-1])
def test_eval_matches_composition(K):
    sys = mixed_system()
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = rng.uniform(-1.5, 1.5, sys.n)
        alpha = rng.uniform(-1.5, 1.5, sys.p)
        v, g, H = eval_all(K, sys, x, alpha)
        vr, gr, Hr = composed_reference(sys, x, alpha)
        assert_allclose(v, vr, rtol=1e-13, atol=1e-13)
        assert_allclose(g, gr, rtol=1e-13, atol=1e-13)
        assert_allclose(H, Hr, rtol=1e-13, atol=1e-13)
        assert np.array_equal(H, H.T)


@pytest.mark.parametrize("K", BACKENDS, ids=lambda m: m.__name__.split(".")[-1])
def test_newton_converges_and_reports(K):
    sys = two_cusps()
    alpha = np.array([-1.0, 0.0, -1.0, 0.0])
    x = np.array([0.9, -1.1])
    st, it = K.newton(*sys.packed, x, alpha, 1e-9, 50, np.inf, 1e12)
    assert st == K.NEWTON_OK
    assert_allclose(x, [1.0, -1.0], atol=1e-9)

    # no real critical point: fold with a > 0
    sysf = single(NormalForm.FOLD)
    x = np.array([0.5])
    st, _ = K.newton(*sysf.packed, x, np.array([1.0]), 1e-9, 50, np.inf, 1e12)
    assert st != K.NEWTON_OK

    # guard: starting far from the basin triggers the jump status
    x = np.array([3.0, 3.0])
    st, _ = K.newton(*sys.packed, x, alpha, 1e-9, 50, 0.05, 1e12)
    assert st == K.NEWTON_JUMP


@pytest.mark.parametrize("K", BACKENDS, ids=lambda m: m.__name__.split(".")[-1])
def test_relax_finds_minimum(K):
    sys = two_cusps(0.3, -1.0)
    alpha = np.array([-1.0, 0.0, -1.0, 0.0])
    x = np.array([0.7, 1.3])
    st, steps = K.relax(*sys.packed, x, alpha, 1e-9, 100_000, 50.0)
    assert st == K.RELAX_OK
    g = np.empty(2)
    K.gradient(*sys.packed, x, alpha, g)
    assert np.max(np.abs(g)) <= 1e-9
    neg = np.empty(2, dtype=np.int32)
    minabs = np.empty(2)
    K.signatures(*sys.packed, x, alpha, neg, minabs)
    assert list(neg) == [0, 0]


@pytest.mark.parametrize("K", BACKENDS, ids=lambda m: m.__name__.split(".")[-1])
def test_relax_escapes_nonconfining(K):
    sysf = single(NormalForm.FOLD)
    x = np.array([-0.5])
    st, _ = K.relax(*sysf.packed, x, np.array([1.0]), 1e-9, 100_000, 25.0)
    assert st == K.RELAX_ESCAPED


@pytest.mark.parametrize("K", BACKENDS, ids=lambda m: m.__name__.split(".")[-1])
def test_signatures_block_values(K):
    sys = two_cusps(0.5, 1.0)   # eps*lam = 0.5
    x = np.array([0.0, 0.0])
    alpha = np.array([1.0, 0.0, 1.0, 0.0])
    neg = np.empty(2, dtype=np.int32)
    minabs = np.empty(2)
    fullmin = K.signatures(*sys.packed, x, alpha, neg, minabs)
    # blocks are [1]; full H = [[1, .5], [.5, 1]] with eigenvalues .5, 1.5
    assert list(neg) == [0, 0]
    assert_allclose(minabs, [1.0, 1.0])
    assert_allclose(fullmin, 0.5)


def run_track(K, sys, alphas, x0, guard=0.5):
    S = alphas.shape[0]
    out = dict(x=np.empty((S, sys.n)), neg=np.empty((S, sys.k), np.int32),
               minabs=np.empty((S, sys.k)), fullmin=np.empty(S),
               fold=np.zeros(S, np.int8), relaxed=np.zeros(S, np.int8))
    x = np.asarray(x0, dtype=float).copy()
    st, steps = K.track_path(*sys.packed, alphas, x, 1e-9, 50, guard, 1e12,
                             1e-8, 16, 1e-9, 100_000, 50.0, out["x"],
                             out["neg"], out["minabs"], out["fullmin"],
                             out["fold"], out["relaxed"])
    return st, steps, out


def ramp_alphas(start, end, steps):
    frac = np.linspace(0.0, 1.0, steps + 1)[:, None]
    return np.asarray(start) + frac * (np.asarray(end) - np.asarray(start))


def test_track_detects_fold_at_known_locus():
    sys = single(NormalForm.CUSP)
    alphas = ramp_alphas([-1.0, -1.0], [-1.0, 1.0], 1000)
    for K in BACKENDS:
        st, steps, out = run_track(K, sys, alphas, [1.3])
        assert st == K.TRACK_OK and steps == 1001
        fold_steps = np.nonzero(out["fold"])[0]
        assert len(fold_steps) == 1
        b_event = alphas[fold_steps[0], 1]
        assert abs(b_event - math.sqrt(4 / 27)) <= 2 * 2e-3


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
def test_backends_agree_on_stochastic_path():
    sys = two_cusps(0.3, -1.0)
    rng = np.random.default_rng(123)
    steps = 2000
    alphas = np.empty((steps + 1, 4))
    alphas[0] = [-1.0, 0.0, -1.0, 0.0]
    alphas[1:] = alphas[0] + np.cumsum(
        math.sqrt(1e-2) * rng.standard_normal((steps, 4)), axis=0)
    st_p, n_p, out_p = run_track(BACKENDS[0], sys, alphas, [1.0, 1.0])
    st_c, n_c, out_c = run_track(BACKENDS[1], sys, alphas, [1.0, 1.0])
    assert (st_p, n_p) == (st_c, n_c)
    assert np.array_equal(out_p["fold"], out_c["fold"])
    assert np.array_equal(out_p["neg"], out_c["neg"])
    assert_allclose(out_p["x"], out_c["x"], atol=1e-10)
    assert_allclose(out_p["minabs"], out_c["minabs"], atol=1e-10)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
def test_backends_agree_on_umbilic_system():
    # exercises the n > 2 eigenvalue path (Jacobi vs LAPACK)
    sys = mixed_system()
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.uniform(-1.0, 1.0, sys.n)
        alpha = rng.uniform(-1.0, 1.0, sys.p)
        res = []
        for K in BACKENDS:
            neg = np.empty(sys.k, dtype=np.int32)
            minabs = np.empty(sys.k)
            fullmin = K.signatures(*sys.packed, x, alpha, neg, minabs)
            res.append((list(neg), minabs.copy(), fullmin))
        assert res[0][0] == res[1][0]
        assert_allclose(res[0][1], res[1][1], atol=1e-10)
        assert_allclose(res[0][2], res[1][2], atol=1e-10)
