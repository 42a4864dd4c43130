"""Pure-Python numerical kernels (fallback backend).

Call signatures and semantics mirror the compiled extension
``catnet._kernels._ckernels``. Inner loops work on plain Python floats
and lists, which keeps interpreter overhead tolerable for desk-scale
runs; the compiled backend is one to two orders of magnitude faster on
long path scans.

Packed system layout (shared with the compiled backend):

    kinds : int32[k]    sector normal-form codes, see _XDIM below
    xoff  : int32[k]    offset of each sector in the behavior vector
    aoff  : int32[k]    offset of each sector in the control vector
    ci/cj : int32[m]    coupled sector pairs (i < j, nonzero weight only)
    cw    : float64[m]  coupling weights, epsilon * lambda[i, j]

Coupling acts bilinearly on the first behavior coordinate of each
sector.
"""

from __future__ import annotations

import math

import numpy as np

# Normal-form codes.
FOLD, CUSP, SWALLOWTAIL, BUTTERFLY = 0, 1, 2, 3
ELLIPTIC_UMBILIC, HYPERBOLIC_UMBILIC, PARABOLIC_UMBILIC = 4, 5, 6

_XDIM = (1, 1, 1, 1, 2, 2, 2)  # behavior dimension per code

# newton() statuses
NEWTON_OK = 0
NEWTON_NO_CONVERGENCE = 1
NEWTON_SINGULAR = 2
NEWTON_JUMP = 3

# relax() statuses
RELAX_OK = 0
RELAX_BUDGET = 1
RELAX_ESCAPED = 2

# track_path() statuses
TRACK_OK = 0
TRACK_RELAX_FAILED = 1
TRACK_ESCAPED = 2

_ARMIJO = 1e-4
_POLISH_GATE = 1e-5
_POLISH_STEP_MAX = 0.25
_FLOW_STEP_MAX = 0.25
_FLOW_STEP_MIN = 1e-14


# ---------------------------------------------------------------------------
# sector evaluation on plain lists

def _sector_potential(kind, x, o, a, ao):
    if kind == FOLD:
        x1 = x[o]
        return x1 * x1 * x1 / 3.0 + a[ao] * x1
    if kind == CUSP:
        x1 = x[o]
        x2 = x1 * x1
        return 0.25 * x2 * x2 + 0.5 * a[ao] * x2 + a[ao + 1] * x1
    if kind == SWALLOWTAIL:
        x1 = x[o]
        x2 = x1 * x1
        return (x2 * x2 * x1 / 5.0 + a[ao] * x2 * x1 / 3.0
                + 0.5 * a[ao + 1] * x2 + a[ao + 2] * x1)
    if kind == BUTTERFLY:
        x1 = x[o]
        x2 = x1 * x1
        x3 = x2 * x1
        return (x3 * x3 / 6.0 + 0.25 * a[ao] * x2 * x2 + a[ao + 1] * x3 / 3.0
                + 0.5 * a[ao + 2] * x2 + a[ao + 3] * x1)
    u = x[o]
    v = x[o + 1]
    if kind == ELLIPTIC_UMBILIC:
        return (u * u * u - 3.0 * u * v * v + a[ao] * (u * u + v * v)
                + a[ao + 1] * u + a[ao + 2] * v)
    if kind == HYPERBOLIC_UMBILIC:
        return (u * u * u + v * v * v + a[ao] * u * v
                + a[ao + 1] * u + a[ao + 2] * v)
    # parabolic umbilic
    return (u * u * v + v * v * v * v + a[ao] * u * u + a[ao + 1] * v * v
            + a[ao + 2] * u + a[ao + 3] * v)


def _sector_gradient(kind, x, o, a, ao, g):
    if kind == FOLD:
        x1 = x[o]
        g[o] = x1 * x1 + a[ao]
    elif kind == CUSP:
        x1 = x[o]
        g[o] = x1 * x1 * x1 + a[ao] * x1 + a[ao + 1]
    elif kind == SWALLOWTAIL:
        x1 = x[o]
        x2 = x1 * x1
        g[o] = x2 * x2 + a[ao] * x2 + a[ao + 1] * x1 + a[ao + 2]
    elif kind == BUTTERFLY:
        x1 = x[o]
        x2 = x1 * x1
        g[o] = (x2 * x2 * x1 + a[ao] * x2 * x1 + a[ao + 1] * x2
                + a[ao + 2] * x1 + a[ao + 3])
    elif kind == ELLIPTIC_UMBILIC:
        u = x[o]
        v = x[o + 1]
        g[o] = 3.0 * u * u - 3.0 * v * v + 2.0 * a[ao] * u + a[ao + 1]
        g[o + 1] = -6.0 * u * v + 2.0 * a[ao] * v + a[ao + 2]
    elif kind == HYPERBOLIC_UMBILIC:
        u = x[o]
        v = x[o + 1]
        g[o] = 3.0 * u * u + a[ao] * v + a[ao + 1]
        g[o + 1] = 3.0 * v * v + a[ao] * u + a[ao + 2]
    else:
        u = x[o]
        v = x[o + 1]
        g[o] = 2.0 * u * v + 2.0 * a[ao] * u + a[ao + 2]
        g[o + 1] = u * u + 4.0 * v * v * v + 2.0 * a[ao + 1] * v + a[ao + 3]


def _sector_hessian(kind, x, o, a, ao, H):
    if kind == FOLD:
        H[o][o] = 2.0 * x[o]
    elif kind == CUSP:
        H[o][o] = 3.0 * x[o] * x[o] + a[ao]
    elif kind == SWALLOWTAIL:
        x1 = x[o]
        H[o][o] = 4.0 * x1 * x1 * x1 + 2.0 * a[ao] * x1 + a[ao + 1]
    elif kind == BUTTERFLY:
        x1 = x[o]
        x2 = x1 * x1
        H[o][o] = (5.0 * x2 * x2 + 3.0 * a[ao] * x2 + 2.0 * a[ao + 1] * x1
                   + a[ao + 2])
    elif kind == ELLIPTIC_UMBILIC:
        u = x[o]
        v = x[o + 1]
        off = -6.0 * v
        H[o][o] = 6.0 * u + 2.0 * a[ao]
        H[o][o + 1] = off
        H[o + 1][o] = off
        H[o + 1][o + 1] = -6.0 * u + 2.0 * a[ao]
    elif kind == HYPERBOLIC_UMBILIC:
        off = a[ao]
        H[o][o] = 6.0 * x[o]
        H[o][o + 1] = off
        H[o + 1][o] = off
        H[o + 1][o + 1] = 6.0 * x[o + 1]
    else:
        u = x[o]
        v = x[o + 1]
        off = 2.0 * u
        H[o][o] = 2.0 * v + 2.0 * a[ao]
        H[o][o + 1] = off
        H[o + 1][o] = off
        H[o + 1][o + 1] = 12.0 * v * v + 2.0 * a[ao + 1]


# ---------------------------------------------------------------------------
# network assembly on plain lists

def _potential(kinds, xoff, aoff, ci, cj, cw, x, a):
    v = 0.0
    for s in range(len(kinds)):
        v += _sector_potential(kinds[s], x, xoff[s], a, aoff[s])
    for m in range(len(cw)):
        v += cw[m] * x[xoff[ci[m]]] * x[xoff[cj[m]]]
    return v


def _gradient(kinds, xoff, aoff, ci, cj, cw, x, a, g):
    for s in range(len(kinds)):
        _sector_gradient(kinds[s], x, xoff[s], a, aoff[s], g)
    for m in range(len(cw)):
        fi = xoff[ci[m]]
        fj = xoff[cj[m]]
        w = cw[m]
        g[fi] += w * x[fj]
        g[fj] += w * x[fi]


def _hessian(kinds, xoff, aoff, ci, cj, cw, x, a, H):
    n = len(x)
    for r in range(n):
        row = H[r]
        for c in range(n):
            row[c] = 0.0
    for s in range(len(kinds)):
        _sector_hessian(kinds[s], x, xoff[s], a, aoff[s], H)
    for m in range(len(cw)):
        fi = xoff[ci[m]]
        fj = xoff[cj[m]]
        w = cw[m]
        H[fi][fj] += w
        H[fj][fi] += w


def _solve(H, b, cond_limit):
    """Gaussian elimination with partial pivoting; None when the pivot
    ratio exceeds cond_limit (crude condition estimate) or a pivot
    vanishes. H and b are destroyed."""
    n = len(b)
    max_piv = 0.0
    min_piv = math.inf
    for col in range(n):
        piv_row = col
        piv_val = abs(H[col][col])
        for r in range(col + 1, n):
            v = abs(H[r][col])
            if v > piv_val:
                piv_val = v
                piv_row = r
        if piv_row != col:
            H[col], H[piv_row] = H[piv_row], H[col]
            b[col], b[piv_row] = b[piv_row], b[col]
        pv = H[col][col]
        apv = abs(pv)
        if apv == 0.0 or apv != apv:
            return None
        if apv > max_piv:
            max_piv = apv
        if apv < min_piv:
            min_piv = apv
        inv = 1.0 / pv
        row_c = H[col]
        for r in range(col + 1, n):
            row = H[r]
            f = row[col] * inv
            if f != 0.0:
                row[col] = 0.0
                for c2 in range(col + 1, n):
                    row[c2] -= f * row_c[c2]
                b[r] -= f * b[col]
    if max_piv > cond_limit * min_piv:
        return None
    for col in range(n - 1, -1, -1):
        s = b[col]
        row = H[col]
        for c2 in range(col + 1, n):
            s -= row[c2] * b[c2]
        b[col] = s / row[col]
    return b


def _sym2_eigs(h00, h01, h11):
    t = 0.5 * (h00 + h11)
    d = 0.5 * (h00 - h11)
    r = math.sqrt(d * d + h01 * h01)
    return t - r, t + r


def _block_signature(kind, x, o, H):
    """(negative eigenvalue count, min |eigenvalue|) of a sector block."""
    if _XDIM[kind] == 1:
        e = H[o][o]
        return (1 if e < 0.0 else 0), abs(e)
    e1, e2 = _sym2_eigs(H[o][o], H[o][o + 1], H[o + 1][o + 1])
    neg = (1 if e1 < 0.0 else 0) + (1 if e2 < 0.0 else 0)
    m1 = abs(e1)
    m2 = abs(e2)
    return neg, (m1 if m1 < m2 else m2)


def _full_min_abs_eig(H, n):
    if n == 1:
        return abs(H[0][0])
    if n == 2:
        e1, e2 = _sym2_eigs(H[0][0], H[0][1], H[1][1])
        return min(abs(e1), abs(e2))
    w = np.linalg.eigvalsh(np.array(H))
    return float(np.min(np.abs(w)))


def _signatures(kinds, xoff, aoff, ci, cj, cw, x, a, out_neg, out_minabs):
    n = len(x)
    H = [[0.0] * n for _ in range(n)]
    _hessian(kinds, xoff, aoff, ci, cj, cw, x, a, H)
    for s in range(len(kinds)):
        neg, minabs = _block_signature(kinds[s], x, xoff[s], H)
        out_neg[s] = neg
        out_minabs[s] = minabs
    return _full_min_abs_eig(H, n)


# ---------------------------------------------------------------------------
# newton / relax cores

def _newton(kinds, xoff, aoff, ci, cj, cw, x, a, tol, max_iter, guard,
            cond_limit):
    n = len(x)
    x0 = x[:]
    g = [0.0] * n
    it = 0
    while True:
        _gradient(kinds, xoff, aoff, ci, cj, cw, x, a, g)
        gn = 0.0
        for v in g:
            av = abs(v)
            if av > gn:
                gn = av
        if gn != gn:
            return NEWTON_SINGULAR, it
        if gn <= tol:
            return NEWTON_OK, it
        if it >= max_iter:
            return NEWTON_NO_CONVERGENCE, it
        H = [[0.0] * n for _ in range(n)]
        _hessian(kinds, xoff, aoff, ci, cj, cw, x, a, H)
        dx = _solve(H, [-v for v in g], cond_limit)
        if dx is None:
            return NEWTON_SINGULAR, it
        disp = 0.0
        for i in range(n):
            x[i] += dx[i]
            d = abs(x[i] - x0[i])
            if d > disp:
                disp = d
        it += 1
        if disp != disp or disp == math.inf:
            return NEWTON_SINGULAR, it
        if disp > guard:
            return NEWTON_JUMP, it


def _relax(kinds, xoff, aoff, ci, cj, cw, x, a, tol, max_steps,
           escape_radius):
    """Gradient-flow descent (adaptive explicit Euler with an Armijo
    acceptance rule) plus a guarded Newton polish near the bottom."""
    n = len(x)
    g = [0.0] * n
    dt = 0.05
    steps = 0
    while steps < max_steps:
        _gradient(kinds, xoff, aoff, ci, cj, cw, x, a, g)
        gn = 0.0
        gsq = 0.0
        for v in g:
            av = abs(v)
            if av > gn:
                gn = av
            gsq += v * v
        if gn != gn:
            return RELAX_BUDGET, steps
        if gn <= tol:
            return RELAX_OK, steps
        if gn <= _POLISH_GATE:
            H = [[0.0] * n for _ in range(n)]
            _hessian(kinds, xoff, aoff, ci, cj, cw, x, a, H)
            dx = _solve(H, [-v for v in g], 1e12)
            if dx is not None:
                dn = 0.0
                for v in dx:
                    av = abs(v)
                    if av > dn:
                        dn = av
                if dn <= _POLISH_STEP_MAX:
                    for i in range(n):
                        x[i] += dx[i]
                    steps += 1
                    continue
        v0 = _potential(kinds, xoff, aoff, ci, cj, cw, x, a)
        accepted = False
        while dt >= _FLOW_STEP_MIN:
            xt = [x[i] - dt * g[i] for i in range(n)]
            vt = _potential(kinds, xoff, aoff, ci, cj, cw, xt, a)
            if vt <= v0 - _ARMIJO * dt * gsq:
                x[:] = xt
                dt = min(dt * 2.0, _FLOW_STEP_MAX)
                accepted = True
                break
            dt *= 0.5
        steps += 1
        if not accepted:
            return RELAX_BUDGET, steps
        xn = 0.0
        for v in x:
            av = abs(v)
            if av > xn:
                xn = av
        if xn > escape_radius:
            return RELAX_ESCAPED, steps
    return RELAX_BUDGET, steps


# ---------------------------------------------------------------------------
# public wrappers (numpy in / numpy out)

def _unpack(kinds, xoff, aoff, ci, cj, cw):
    return (kinds.tolist(), xoff.tolist(), aoff.tolist(),
            ci.tolist(), cj.tolist(), cw.tolist())


def potential(kinds, xoff, aoff, ci, cj, cw, x, alpha):
    pk = _unpack(kinds, xoff, aoff, ci, cj, cw)
    return _potential(*pk, list(map(float, x)), list(map(float, alpha)))


def gradient(kinds, xoff, aoff, ci, cj, cw, x, alpha, out):
    pk = _unpack(kinds, xoff, aoff, ci, cj, cw)
    g = [0.0] * len(x)
    _gradient(*pk, list(map(float, x)), list(map(float, alpha)), g)
    out[:] = g


def hessian(kinds, xoff, aoff, ci, cj, cw, x, alpha, out):
    pk = _unpack(kinds, xoff, aoff, ci, cj, cw)
    n = len(x)
    H = [[0.0] * n for _ in range(n)]
    _hessian(*pk, list(map(float, x)), list(map(float, alpha)), H)
    for r in range(n):
        out[r, :] = H[r]


def newton(kinds, xoff, aoff, ci, cj, cw, x, alpha, tol, max_iter, guard,
           cond_limit):
    """Newton-correct x (in place) to a critical point at fixed alpha.

    Returns (status, iterations); statuses NEWTON_*.
    """
    pk = _unpack(kinds, xoff, aoff, ci, cj, cw)
    xl = list(map(float, x))
    st, it = _newton(*pk, xl, list(map(float, alpha)), tol, max_iter,
                     guard, cond_limit)
    x[:] = xl
    return st, it


def relax(kinds, xoff, aoff, ci, cj, cw, x, alpha, tol, max_steps,
          escape_radius):
    """Gradient-flow x (in place) to the equilibrium of its basin.

    Returns (status, steps); statuses RELAX_*.
    """
    pk = _unpack(kinds, xoff, aoff, ci, cj, cw)
    xl = list(map(float, x))
    st, steps = _relax(*pk, xl, list(map(float, alpha)), tol, max_steps,
                       escape_radius)
    x[:] = xl
    return st, steps


def signatures(kinds, xoff, aoff, ci, cj, cw, x, alpha, out_neg, out_minabs):
    """Per-sector (negative eigencount, min |eig|) of the Hessian diagonal
    blocks; returns the minimum |eigenvalue| of the full Hessian."""
    pk = _unpack(kinds, xoff, aoff, ci, cj, cw)
    k = len(kinds)
    neg = [0] * k
    minabs = [0.0] * k
    fullmin = _signatures(*pk, list(map(float, x)), list(map(float, alpha)),
                          neg, minabs)
    out_neg[:] = neg
    out_minabs[:] = minabs
    return fullmin


def track_path(kinds, xoff, aoff, ci, cj, cw, alphas, x, newton_tol,
               newton_max_iter, guard, cond_limit, deg_tol, refine,
               relax_tol, relax_max_steps, escape_radius,
               out_x, out_neg, out_minabs, out_fullmin, out_fold,
               out_relaxed):
    """Track the occupied equilibrium along a control path.

    Step 0 relaxes from the initial state; each later step Newton-continues
    the previous equilibrium. A continuation is treated as a fold when
    Newton fails, the corrected point is further than `guard` away, or the
    full Hessian is numerically degenerate; suspicion is confirmed by
    re-walking the step in `refine` substeps (fast-but-smooth branch moves
    are then accepted without an event). On a confirmed fold the state
    re-relaxes by gradient flow from the last surviving position.

    Outputs are per-step state, per-sector Hessian-block signatures, full
    minimum |eigenvalue|, fold flags, and relaxation flags. Returns
    (status, steps_recorded); statuses TRACK_*.
    """
    pk = _unpack(kinds, xoff, aoff, ci, cj, cw)
    kindsl, xoffl, aoffl, cil, cjl, cwl = pk
    S = alphas.shape[0]
    n = len(x)
    k = len(kindsl)
    al = alphas.tolist()
    xl = list(map(float, x))
    neg = [0] * k
    minabs = [0.0] * k

    def record(t, a_row, relaxed, fold):
        fullmin = _signatures(kindsl, xoffl, aoffl, cil, cjl, cwl, xl, a_row,
                              neg, minabs)
        for i in range(n):
            out_x[t, i] = xl[i]
        for s in range(k):
            out_neg[t, s] = neg[s]
            out_minabs[t, s] = minabs[s]
        out_fullmin[t] = fullmin
        out_fold[t] = fold
        out_relaxed[t] = relaxed
        return fullmin

    st, _ = _relax(kindsl, xoffl, aoffl, cil, cjl, cwl, xl, al[0], relax_tol,
                   relax_max_steps, escape_radius)
    if st != RELAX_OK:
        x[:] = xl
        return (TRACK_ESCAPED if st == RELAX_ESCAPED else TRACK_RELAX_FAILED,
                0)
    record(0, al[0], 1, 0)

    for t in range(1, S):
        a_row = al[t]
        xprev = xl[:]
        st, _ = _newton(kindsl, xoffl, aoffl, cil, cjl, cwl, xl, a_row,
                        newton_tol, newton_max_iter, guard, cond_limit)
        ok = st == NEWTON_OK
        if ok:
            fullmin = _signatures(kindsl, xoffl, aoffl, cil, cjl, cwl, xl,
                                  a_row, neg, minabs)
            ok = fullmin >= deg_tol
        if not ok:
            # Refinement pass: re-walk the step in substeps to separate a
            # genuine fold from a fast but smooth branch move.
            xl[:] = xprev
            a_prev = al[t - 1]
            fold = False
            for r in range(1, refine + 1):
                f = r / refine
                a_sub = [a_prev[i] + f * (a_row[i] - a_prev[i])
                         for i in range(len(a_row))]
                xs = xl[:]
                st, _ = _newton(kindsl, xoffl, aoffl, cil, cjl, cwl, xs,
                                a_sub, newton_tol, newton_max_iter, guard,
                                cond_limit)
                if st != NEWTON_OK:
                    fold = True
                    break
                xl[:] = xs
                fullmin = _signatures(kindsl, xoffl, aoffl, cil, cjl, cwl,
                                      xl, a_sub, neg, minabs)
                if fullmin < deg_tol:
                    fold = True
                    break
            if fold:
                st, _ = _relax(kindsl, xoffl, aoffl, cil, cjl, cwl, xl,
                               a_row, relax_tol, relax_max_steps,
                               escape_radius)
                if st != RELAX_OK:
                    x[:] = xl
                    return (TRACK_ESCAPED if st == RELAX_ESCAPED
                            else TRACK_RELAX_FAILED, t)
                record(t, a_row, 1, 1)
                continue
        record(t, a_row, 0, 0)
    x[:] = xl
    return TRACK_OK, S
