# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Mirror of ``catnet._kernels._pykernels`` (same signatures, same
semantics, same status codes); see that module for the packed-system
layout and the algorithm notes.
"""

from libc.math cimport fabs, sqrt, atan2, cos, sin
import numpy as np

FOLD, CUSP, SWALLOWTAIL, BUTTERFLY = 0, 1, 2, 3
ELLIPTIC_UMBILIC, HYPERBOLIC_UMBILIC, PARABOLIC_UMBILIC = 4, 5, 6

NEWTON_OK = 0
NEWTON_NO_CONVERGENCE = 1
NEWTON_SINGULAR = 2
NEWTON_JUMP = 3
RELAX_OK = 0
RELAX_BUDGET = 1
RELAX_ESCAPED = 2
TRACK_OK = 0
TRACK_RELAX_FAILED = 1
TRACK_ESCAPED = 2

cdef int C_NEWTON_OK = 0
cdef int C_NEWTON_NO_CONVERGENCE = 1
cdef int C_NEWTON_SINGULAR = 2
cdef int C_NEWTON_JUMP = 3
cdef int C_RELAX_OK = 0
cdef int C_RELAX_BUDGET = 1
cdef int C_RELAX_ESCAPED = 2

cdef double _ARMIJO = 1e-4
cdef double _POLISH_GATE = 1e-5
cdef double _POLISH_STEP_MAX = 0.25
cdef double _FLOW_STEP_MAX = 0.25
cdef double _FLOW_STEP_MIN = 1e-14
cdef double _INF = float("inf")


cdef inline int _xdim(int kind) noexcept nogil:
    return 1 if kind < 4 else 2


# ---------------------------------------------------------------------------
# sector evaluation

cdef inline double c_sector_potential(int kind, double[::1] x, int o,
                                      double[::1] a, int ao) noexcept nogil:
    cdef double x1, x2, x3, u, v
    if kind == 0:
        x1 = x[o]
        return x1 * x1 * x1 / 3.0 + a[ao] * x1
    if kind == 1:
        x1 = x[o]
        x2 = x1 * x1
        return 0.25 * x2 * x2 + 0.5 * a[ao] * x2 + a[ao + 1] * x1
    if kind == 2:
        x1 = x[o]
        x2 = x1 * x1
        return (x2 * x2 * x1 / 5.0 + a[ao] * x2 * x1 / 3.0
                + 0.5 * a[ao + 1] * x2 + a[ao + 2] * x1)
    if kind == 3:
        x1 = x[o]
        x2 = x1 * x1
        x3 = x2 * x1
        return (x3 * x3 / 6.0 + 0.25 * a[ao] * x2 * x2 + a[ao + 1] * x3 / 3.0
                + 0.5 * a[ao + 2] * x2 + a[ao + 3] * x1)
    u = x[o]
    v = x[o + 1]
    if kind == 4:
        return (u * u * u - 3.0 * u * v * v + a[ao] * (u * u + v * v)
                + a[ao + 1] * u + a[ao + 2] * v)
    if kind == 5:
        return (u * u * u + v * v * v + a[ao] * u * v
                + a[ao + 1] * u + a[ao + 2] * v)
    return (u * u * v + v * v * v * v + a[ao] * u * u + a[ao + 1] * v * v
            + a[ao + 2] * u + a[ao + 3] * v)


cdef inline void c_sector_gradient(int kind, double[::1] x, int o,
                                   double[::1] a, int ao,
                                   double[::1] g) noexcept nogil:
    cdef double x1, x2, u, v
    if kind == 0:
        x1 = x[o]
        g[o] = x1 * x1 + a[ao]
    elif kind == 1:
        x1 = x[o]
        g[o] = x1 * x1 * x1 + a[ao] * x1 + a[ao + 1]
    elif kind == 2:
        x1 = x[o]
        x2 = x1 * x1
        g[o] = x2 * x2 + a[ao] * x2 + a[ao + 1] * x1 + a[ao + 2]
    elif kind == 3:
        x1 = x[o]
        x2 = x1 * x1
        g[o] = (x2 * x2 * x1 + a[ao] * x2 * x1 + a[ao + 1] * x2
                + a[ao + 2] * x1 + a[ao + 3])
    elif kind == 4:
        u = x[o]
        v = x[o + 1]
        g[o] = 3.0 * u * u - 3.0 * v * v + 2.0 * a[ao] * u + a[ao + 1]
        g[o + 1] = -6.0 * u * v + 2.0 * a[ao] * v + a[ao + 2]
    elif kind == 5:
        u = x[o]
        v = x[o + 1]
        g[o] = 3.0 * u * u + a[ao] * v + a[ao + 1]
        g[o + 1] = 3.0 * v * v + a[ao] * u + a[ao + 2]
    else:
        u = x[o]
        v = x[o + 1]
        g[o] = 2.0 * u * v + 2.0 * a[ao] * u + a[ao + 2]
        g[o + 1] = u * u + 4.0 * v * v * v + 2.0 * a[ao + 1] * v + a[ao + 3]


cdef inline void c_sector_hessian(int kind, double[::1] x, int o,
                                  double[::1] a, int ao,
                                  double[:, ::1] H) noexcept nogil:
    cdef double x1, x2, u, v, off
    if kind == 0:
        H[o, o] = 2.0 * x[o]
    elif kind == 1:
        H[o, o] = 3.0 * x[o] * x[o] + a[ao]
    elif kind == 2:
        x1 = x[o]
        H[o, o] = 4.0 * x1 * x1 * x1 + 2.0 * a[ao] * x1 + a[ao + 1]
    elif kind == 3:
        x1 = x[o]
        x2 = x1 * x1
        H[o, o] = (5.0 * x2 * x2 + 3.0 * a[ao] * x2 + 2.0 * a[ao + 1] * x1
                   + a[ao + 2])
    elif kind == 4:
        u = x[o]
        v = x[o + 1]
        off = -6.0 * v
        H[o, o] = 6.0 * u + 2.0 * a[ao]
        H[o, o + 1] = off
        H[o + 1, o] = off
        H[o + 1, o + 1] = -6.0 * u + 2.0 * a[ao]
    elif kind == 5:
        off = a[ao]
        H[o, o] = 6.0 * x[o]
        H[o, o + 1] = off
        H[o + 1, o] = off
        H[o + 1, o + 1] = 6.0 * x[o + 1]
    else:
        u = x[o]
        v = x[o + 1]
        off = 2.0 * u
        H[o, o] = 2.0 * v + 2.0 * a[ao]
        H[o, o + 1] = off
        H[o + 1, o] = off
        H[o + 1, o + 1] = 12.0 * v * v + 2.0 * a[ao + 1]


# ---------------------------------------------------------------------------
# network assembly

cdef double c_potential(int[::1] kinds, int[::1] xoff, int[::1] aoff,
                        int[::1] ci, int[::1] cj, double[::1] cw,
                        double[::1] x, double[::1] a) noexcept nogil:
    cdef double v = 0.0
    cdef Py_ssize_t s, m
    for s in range(kinds.shape[0]):
        v += c_sector_potential(kinds[s], x, xoff[s], a, aoff[s])
    for m in range(cw.shape[0]):
        v += cw[m] * x[xoff[ci[m]]] * x[xoff[cj[m]]]
    return v


cdef void c_gradient(int[::1] kinds, int[::1] xoff, int[::1] aoff,
                     int[::1] ci, int[::1] cj, double[::1] cw,
                     double[::1] x, double[::1] a, double[::1] g) noexcept nogil:
    cdef Py_ssize_t s, m
    cdef int fi, fj
    cdef double w
    for s in range(kinds.shape[0]):
        c_sector_gradient(kinds[s], x, xoff[s], a, aoff[s], g)
    for m in range(cw.shape[0]):
        fi = xoff[ci[m]]
        fj = xoff[cj[m]]
        w = cw[m]
        g[fi] += w * x[fj]
        g[fj] += w * x[fi]


cdef void c_hessian(int[::1] kinds, int[::1] xoff, int[::1] aoff,
                    int[::1] ci, int[::1] cj, double[::1] cw,
                    double[::1] x, double[::1] a, double[:, ::1] H) noexcept nogil:
    cdef Py_ssize_t s, m, r, c
    cdef int n = x.shape[0]
    cdef int fi, fj
    cdef double w
    for r in range(n):
        for c in range(n):
            H[r, c] = 0.0
    for s in range(kinds.shape[0]):
        c_sector_hessian(kinds[s], x, xoff[s], a, aoff[s], H)
    for m in range(cw.shape[0]):
        fi = xoff[ci[m]]
        fj = xoff[cj[m]]
        w = cw[m]
        H[fi, fj] += w
        H[fj, fi] += w


cdef int c_solve(double[:, ::1] H, double[::1] b, int n,
                 double cond_limit) noexcept nogil:
    """In-place LU solve with partial pivoting; 0 ok, 1 singular/ill."""
    cdef double max_piv = 0.0
    cdef double min_piv = _INF
    cdef int col, r, c2, piv_row
    cdef double piv_val, v, pv, apv, inv, f, s, tmp
    for col in range(n):
        piv_row = col
        piv_val = fabs(H[col, col])
        for r in range(col + 1, n):
            v = fabs(H[r, col])
            if v > piv_val:
                piv_val = v
                piv_row = r
        if piv_row != col:
            for c2 in range(n):
                tmp = H[col, c2]
                H[col, c2] = H[piv_row, c2]
                H[piv_row, c2] = tmp
            tmp = b[col]
            b[col] = b[piv_row]
            b[piv_row] = tmp
        pv = H[col, col]
        apv = fabs(pv)
        if apv == 0.0 or apv != apv:
            return 1
        if apv > max_piv:
            max_piv = apv
        if apv < min_piv:
            min_piv = apv
        inv = 1.0 / pv
        for r in range(col + 1, n):
            f = H[r, col] * inv
            if f != 0.0:
                H[r, col] = 0.0
                for c2 in range(col + 1, n):
                    H[r, c2] -= f * H[col, c2]
                b[r] -= f * b[col]
    if max_piv > cond_limit * min_piv:
        return 1
    for col in range(n - 1, -1, -1):
        s = b[col]
        for c2 in range(col + 1, n):
            s -= H[col, c2] * b[c2]
        b[col] = s / H[col, col]
    return 0


cdef inline void c_sym2_eigs(double h00, double h01, double h11,
                             double *e1, double *e2) noexcept nogil:
    cdef double t = 0.5 * (h00 + h11)
    cdef double d = 0.5 * (h00 - h11)
    cdef double r = sqrt(d * d + h01 * h01)
    e1[0] = t - r
    e2[0] = t + r


cdef double c_jacobi_min_abs(double[:, ::1] A, int n) noexcept nogil:
    """Min |eigenvalue| of symmetric A via cyclic Jacobi; A is destroyed."""
    cdef int sweep, p, q, i
    cdef double off, frob, apq, theta, c, s, app, aqq, aip, aiq, best
    for sweep in range(60):
        off = 0.0
        frob = 0.0
        for p in range(n):
            for q in range(n):
                frob += A[p, q] * A[p, q]
                if p != q:
                    off += A[p, q] * A[p, q]
        if off <= 1e-28 * (frob if frob > 1.0 else 1.0):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if fabs(apq) < 1e-300:
                    continue
                theta = 0.5 * atan2(2.0 * apq, A[q, q] - A[p, p])
                c = cos(theta)
                s = sin(theta)
                for i in range(n):
                    aip = A[i, p]
                    aiq = A[i, q]
                    A[i, p] = c * aip - s * aiq
                    A[i, q] = s * aip + c * aiq
                for i in range(n):
                    aip = A[p, i]
                    aiq = A[q, i]
                    A[p, i] = c * aip - s * aiq
                    A[q, i] = s * aip + c * aiq
    best = fabs(A[0, 0])
    for p in range(1, n):
        if fabs(A[p, p]) < best:
            best = fabs(A[p, p])
    return best


cdef double c_signatures(int[::1] kinds, int[::1] xoff, int[::1] aoff,
                         int[::1] ci, int[::1] cj, double[::1] cw,
                         double[::1] x, double[::1] a, double[:, ::1] Hw,
                         double[:, ::1] Jw, int[::1] out_neg,
                         double[::1] out_minabs) noexcept nogil:
    cdef int n = x.shape[0]
    cdef int k = kinds.shape[0]
    cdef int s, o, neg, r, c
    cdef double e1, e2, m1, m2
    c_hessian(kinds, xoff, aoff, ci, cj, cw, x, a, Hw)
    for s in range(k):
        o = xoff[s]
        if _xdim(kinds[s]) == 1:
            e1 = Hw[o, o]
            out_neg[s] = 1 if e1 < 0.0 else 0
            out_minabs[s] = fabs(e1)
        else:
            c_sym2_eigs(Hw[o, o], Hw[o, o + 1], Hw[o + 1, o + 1], &e1, &e2)
            neg = 0
            if e1 < 0.0:
                neg += 1
            if e2 < 0.0:
                neg += 1
            out_neg[s] = neg
            m1 = fabs(e1)
            m2 = fabs(e2)
            out_minabs[s] = m1 if m1 < m2 else m2
    if n == 1:
        return fabs(Hw[0, 0])
    if n == 2:
        c_sym2_eigs(Hw[0, 0], Hw[0, 1], Hw[1, 1], &e1, &e2)
        m1 = fabs(e1)
        m2 = fabs(e2)
        return m1 if m1 < m2 else m2
    for r in range(n):
        for c in range(n):
            Jw[r, c] = Hw[r, c]
    return c_jacobi_min_abs(Jw, n)


# ---------------------------------------------------------------------------
# newton / relax

cdef int c_newton(int[::1] kinds, int[::1] xoff, int[::1] aoff,
                  int[::1] ci, int[::1] cj, double[::1] cw,
                  double[::1] x, double[::1] a, double tol, int max_iter,
                  double guard, double cond_limit, double[::1] x0,
                  double[::1] g, double[:, ::1] Hw, double[::1] b,
                  int *iters) noexcept nogil:
    cdef int n = x.shape[0]
    cdef int it = 0
    cdef int i
    cdef double gn, av, disp, d
    for i in range(n):
        x0[i] = x[i]
    while True:
        c_gradient(kinds, xoff, aoff, ci, cj, cw, x, a, g)
        gn = 0.0
        for i in range(n):
            av = fabs(g[i])
            if av > gn:
                gn = av
        if gn != gn:
            iters[0] = it
            return C_NEWTON_SINGULAR
        if gn <= tol:
            iters[0] = it
            return C_NEWTON_OK
        if it >= max_iter:
            iters[0] = it
            return C_NEWTON_NO_CONVERGENCE
        c_hessian(kinds, xoff, aoff, ci, cj, cw, x, a, Hw)
        for i in range(n):
            b[i] = -g[i]
        if c_solve(Hw, b, n, cond_limit):
            iters[0] = it
            return C_NEWTON_SINGULAR
        disp = 0.0
        for i in range(n):
            x[i] += b[i]
            d = fabs(x[i] - x0[i])
            if d > disp:
                disp = d
        it += 1
        if disp != disp or disp == _INF:
            iters[0] = it
            return C_NEWTON_SINGULAR
        if disp > guard:
            iters[0] = it
            return C_NEWTON_JUMP


cdef int c_relax(int[::1] kinds, int[::1] xoff, int[::1] aoff,
                 int[::1] ci, int[::1] cj, double[::1] cw,
                 double[::1] x, double[::1] a, double tol, long max_steps,
                 double escape_radius, double[::1] g, double[:, ::1] Hw,
                 double[::1] b, double[::1] xt, long *steps_out) noexcept nogil:
    cdef int n = x.shape[0]
    cdef double dt = 0.05
    cdef long steps = 0
    cdef int i, accepted
    cdef double gn, gsq, av, dn, v0, vt, xn
    while steps < max_steps:
        c_gradient(kinds, xoff, aoff, ci, cj, cw, x, a, g)
        gn = 0.0
        gsq = 0.0
        for i in range(n):
            av = fabs(g[i])
            if av > gn:
                gn = av
            gsq += g[i] * g[i]
        if gn != gn:
            steps_out[0] = steps
            return C_RELAX_BUDGET
        if gn <= tol:
            steps_out[0] = steps
            return C_RELAX_OK
        if gn <= _POLISH_GATE:
            c_hessian(kinds, xoff, aoff, ci, cj, cw, x, a, Hw)
            for i in range(n):
                b[i] = -g[i]
            if c_solve(Hw, b, n, 1e12) == 0:
                dn = 0.0
                for i in range(n):
                    av = fabs(b[i])
                    if av > dn:
                        dn = av
                if dn <= _POLISH_STEP_MAX:
                    for i in range(n):
                        x[i] += b[i]
                    steps += 1
                    continue
        v0 = c_potential(kinds, xoff, aoff, ci, cj, cw, x, a)
        accepted = 0
        while dt >= _FLOW_STEP_MIN:
            for i in range(n):
                xt[i] = x[i] - dt * g[i]
            vt = c_potential(kinds, xoff, aoff, ci, cj, cw, xt, a)
            if vt <= v0 - _ARMIJO * dt * gsq:
                for i in range(n):
                    x[i] = xt[i]
                dt = dt * 2.0
                if dt > _FLOW_STEP_MAX:
                    dt = _FLOW_STEP_MAX
                accepted = 1
                break
            dt *= 0.5
        steps += 1
        if not accepted:
            steps_out[0] = steps
            return C_RELAX_BUDGET
        xn = 0.0
        for i in range(n):
            av = fabs(x[i])
            if av > xn:
                xn = av
        if xn > escape_radius:
            steps_out[0] = steps
            return C_RELAX_ESCAPED
    steps_out[0] = steps
    return C_RELAX_BUDGET


# ---------------------------------------------------------------------------
# public wrappers

def _as_packed(kinds, xoff, aoff, ci, cj, cw):
    return (np.ascontiguousarray(kinds, dtype=np.int32),
            np.ascontiguousarray(xoff, dtype=np.int32),
            np.ascontiguousarray(aoff, dtype=np.int32),
            np.ascontiguousarray(ci, dtype=np.int32),
            np.ascontiguousarray(cj, dtype=np.int32),
            np.ascontiguousarray(cw, dtype=np.float64))


def potential(kinds, xoff, aoff, ci, cj, cw, x, alpha):
    cdef int[::1] kv, xv, av, civ, cjv
    cdef double[::1] cwv, xx, aa
    kv, xv, av, civ, cjv, cwv = _as_packed(kinds, xoff, aoff, ci, cj, cw)
    xx = np.ascontiguousarray(x, dtype=np.float64)
    aa = np.ascontiguousarray(alpha, dtype=np.float64)
    return c_potential(kv, xv, av, civ, cjv, cwv, xx, aa)


def gradient(kinds, xoff, aoff, ci, cj, cw, x, alpha, out):
    cdef int[::1] kv, xv, av, civ, cjv
    cdef double[::1] cwv, xx, aa, g
    kv, xv, av, civ, cjv, cwv = _as_packed(kinds, xoff, aoff, ci, cj, cw)
    xx = np.ascontiguousarray(x, dtype=np.float64)
    aa = np.ascontiguousarray(alpha, dtype=np.float64)
    g = out
    c_gradient(kv, xv, av, civ, cjv, cwv, xx, aa, g)


def hessian(kinds, xoff, aoff, ci, cj, cw, x, alpha, out):
    cdef int[::1] kv, xv, av, civ, cjv
    cdef double[::1] cwv, xx, aa
    cdef double[:, ::1] H
    kv, xv, av, civ, cjv, cwv = _as_packed(kinds, xoff, aoff, ci, cj, cw)
    xx = np.ascontiguousarray(x, dtype=np.float64)
    aa = np.ascontiguousarray(alpha, dtype=np.float64)
    H = out
    c_hessian(kv, xv, av, civ, cjv, cwv, xx, aa, H)


def newton(kinds, xoff, aoff, ci, cj, cw, x, alpha, tol, max_iter, guard,
           cond_limit):
    """Newton-correct x (in place) to a critical point at fixed alpha.

    Returns (status, iterations); statuses NEWTON_*.
    """
    cdef int[::1] kv, xv, av, civ, cjv
    cdef double[::1] cwv, xx, aa, x0, g, b
    cdef double[:, ::1] Hw
    cdef int iters = 0
    cdef int st
    kv, xv, av, civ, cjv, cwv = _as_packed(kinds, xoff, aoff, ci, cj, cw)
    n = x.shape[0]
    xbuf = np.array(x, dtype=np.float64)
    xx = xbuf
    aa = np.ascontiguousarray(alpha, dtype=np.float64)
    x0 = np.empty(n)
    g = np.empty(n)
    b = np.empty(n)
    Hw = np.empty((n, n))
    st = c_newton(kv, xv, av, civ, cjv, cwv, xx, aa, tol, max_iter, guard,
                  cond_limit, x0, g, Hw, b, &iters)
    x[:] = xbuf
    return st, iters


def relax(kinds, xoff, aoff, ci, cj, cw, x, alpha, tol, max_steps,
          escape_radius):
    """Gradient-flow x (in place) to the equilibrium of its basin.

    Returns (status, steps); statuses RELAX_*.
    """
    cdef int[::1] kv, xv, av, civ, cjv
    cdef double[::1] cwv, xx, aa, g, b, xt
    cdef double[:, ::1] Hw
    cdef long steps = 0
    cdef int st
    kv, xv, av, civ, cjv, cwv = _as_packed(kinds, xoff, aoff, ci, cj, cw)
    n = x.shape[0]
    xbuf = np.array(x, dtype=np.float64)
    xx = xbuf
    aa = np.ascontiguousarray(alpha, dtype=np.float64)
    g = np.empty(n)
    b = np.empty(n)
    xt = np.empty(n)
    Hw = np.empty((n, n))
    st = c_relax(kv, xv, av, civ, cjv, cwv, xx, aa, tol, max_steps,
                 escape_radius, g, Hw, b, xt, &steps)
    x[:] = xbuf
    return st, steps


def signatures(kinds, xoff, aoff, ci, cj, cw, x, alpha, out_neg, out_minabs):
    """Per-sector (negative eigencount, min |eig|) of the Hessian diagonal
    blocks; returns the minimum |eigenvalue| of the full Hessian."""
    cdef int[::1] kv, xv, av, civ, cjv
    cdef double[::1] cwv, xx, aa, minabs
    cdef double[:, ::1] Hw, Jw
    cdef int[::1] neg
    kv, xv, av, civ, cjv, cwv = _as_packed(kinds, xoff, aoff, ci, cj, cw)
    n = x.shape[0]
    xx = np.ascontiguousarray(x, dtype=np.float64)
    aa = np.ascontiguousarray(alpha, dtype=np.float64)
    negbuf = np.empty(len(kinds), dtype=np.int32)
    minbuf = np.empty(len(kinds))
    neg = negbuf
    minabs = minbuf
    Hw = np.empty((n, n))
    Jw = np.empty((n, n))
    fullmin = c_signatures(kv, xv, av, civ, cjv, cwv, xx, aa, Hw, Jw, neg,
                           minabs)
    out_neg[:] = negbuf
    out_minabs[:] = minbuf
    return fullmin


def track_path(kinds, xoff, aoff, ci, cj, cw, alphas, x, newton_tol,
               newton_max_iter, guard, cond_limit, deg_tol, refine,
               relax_tol, relax_max_steps, escape_radius,
               out_x, out_neg, out_minabs, out_fullmin, out_fold,
               out_relaxed):
    """Track the occupied equilibrium along a control path.

    Same contract as the pure-Python backend; see
    ``catnet._kernels._pykernels.track_path``.
    """
    cdef int[::1] kv, xv, av, civ, cjv
    cdef double[::1] cwv, xl, aa, x0w, g, b, xt, minabs, asub, xprev, xs
    cdef double[:, ::1] Hw, Jw, arows, ox
    cdef double[:, ::1] ominabs
    cdef double[::1] ofullmin
    cdef int[:, ::1] oneg
    cdef signed char[::1] ofold, orelaxed
    cdef int[::1] neg
    cdef int n, k, p, S, st, i, s, t, r, nref
    cdef int iters = 0
    cdef long steps = 0
    cdef double fullmin, f
    cdef int fold, ok

    kv, xv, av, civ, cjv, cwv = _as_packed(kinds, xoff, aoff, ci, cj, cw)
    arows = np.ascontiguousarray(alphas, dtype=np.float64)
    S = arows.shape[0]
    p = arows.shape[1]
    n = x.shape[0]
    k = kv.shape[0]
    nref = refine

    xbuf = np.array(x, dtype=np.float64)
    xl = xbuf
    x0w = np.empty(n)
    g = np.empty(n)
    b = np.empty(n)
    xt = np.empty(n)
    xprev = np.empty(n)
    xs = np.empty(n)
    asub = np.empty(p)
    Hw = np.empty((n, n))
    Jw = np.empty((n, n))
    negbuf = np.empty(k, dtype=np.int32)
    neg = negbuf
    minabs = np.empty(k)

    ox = out_x
    oneg = out_neg
    ominabs = out_minabs
    ofullmin = out_fullmin
    ofold = out_fold
    orelaxed = out_relaxed

    st = c_relax(kv, xv, av, civ, cjv, cwv, xl, arows[0], relax_tol,
                 relax_max_steps, escape_radius, g, Hw, b, xt, &steps)
    if st != RELAX_OK:
        x[:] = xbuf
        return (TRACK_ESCAPED if st == RELAX_ESCAPED
                else TRACK_RELAX_FAILED), 0
    fullmin = c_signatures(kv, xv, av, civ, cjv, cwv, xl, arows[0], Hw, Jw,
                           neg, minabs)
    for i in range(n):
        ox[0, i] = xl[i]
    for s in range(k):
        oneg[0, s] = neg[s]
        ominabs[0, s] = minabs[s]
    ofullmin[0] = fullmin
    ofold[0] = 0
    orelaxed[0] = 1

    for t in range(1, S):
        for i in range(n):
            xprev[i] = xl[i]
        st = c_newton(kv, xv, av, civ, cjv, cwv, xl, arows[t], newton_tol,
                      newton_max_iter, guard, cond_limit, x0w, g, Hw, b,
                      &iters)
        ok = 1 if st == NEWTON_OK else 0
        fold = 0
        if ok:
            fullmin = c_signatures(kv, xv, av, civ, cjv, cwv, xl, arows[t],
                                   Hw, Jw, neg, minabs)
            if fullmin < deg_tol:
                ok = 0
        if not ok:
            for i in range(n):
                xl[i] = xprev[i]
            for r in range(1, nref + 1):
                f = (<double> r) / nref
                for i in range(p):
                    asub[i] = arows[t - 1, i] + f * (arows[t, i]
                                                     - arows[t - 1, i])
                for i in range(n):
                    xs[i] = xl[i]
                st = c_newton(kv, xv, av, civ, cjv, cwv, xs, asub,
                              newton_tol, newton_max_iter, guard,
                              cond_limit, x0w, g, Hw, b, &iters)
                if st != NEWTON_OK:
                    fold = 1
                    break
                for i in range(n):
                    xl[i] = xs[i]
                fullmin = c_signatures(kv, xv, av, civ, cjv, cwv, xl, asub,
                                       Hw, Jw, neg, minabs)
                if fullmin < deg_tol:
                    fold = 1
                    break
            if fold:
                st = c_relax(kv, xv, av, civ, cjv, cwv, xl, arows[t],
                             relax_tol, relax_max_steps, escape_radius, g,
                             Hw, b, xt, &steps)
                if st != RELAX_OK:
                    x[:] = xbuf
                    return (TRACK_ESCAPED if st == RELAX_ESCAPED
                            else TRACK_RELAX_FAILED), t
        fullmin = c_signatures(kv, xv, av, civ, cjv, cwv, xl, arows[t], Hw,
                               Jw, neg, minabs)
        for i in range(n):
            ox[t, i] = xl[i]
        for s in range(k):
            oneg[t, s] = neg[s]
            ominabs[t, s] = minabs[s]
        ofullmin[t] = fullmin
        ofold[t] = fold
        orelaxed[t] = fold
    x[:] = xbuf
    return TRACK_OK, S
