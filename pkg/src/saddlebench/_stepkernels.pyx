# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled iteration loops for the closed-form instance family.

Mirrors the float operations of the pure-Python step rule exactly (same
expressions, same order) so both backends agree to rounding error; the
build disables FMA contraction for the same reason.
"""

from libc.math cimport sqrt, isfinite

import numpy as np


cdef inline void _project(int kind, const double[::1] a, const double[::1] bnd,
                          double rad, double[::1] p, double[::1] scratch,
                          Py_ssize_t m) noexcept:
    cdef Py_ssize_t i, j, rho
    cdef double nrm, scale, acc, theta, u
    if kind == 0:  # whole space
        return
    if kind == 1:  # box: a = lower, bnd = upper
        for i in range(m):
            if p[i] < a[i]:
                p[i] = a[i]
            elif p[i] > bnd[i]:
                p[i] = bnd[i]
        return
    if kind == 2:  # ball: a = center, rad = radius
        nrm = 0.0
        for i in range(m):
            scratch[i] = p[i] - a[i]
            nrm += scratch[i] * scratch[i]
        nrm = sqrt(nrm)
        if nrm <= rad:
            return
        scale = rad / nrm
        for i in range(m):
            p[i] = a[i] + scratch[i] * scale
        return
    # simplex: sort-based projection
    for i in range(m):
        scratch[i] = p[i]
    # insertion sort, descending
    for i in range(1, m):
        u = scratch[i]
        j = i - 1
        while j >= 0 and scratch[j] < u:
            scratch[j + 1] = scratch[j]
            j -= 1
        scratch[j + 1] = u
    acc = 0.0
    rho = 0
    theta = 0.0
    for i in range(m):
        acc += scratch[i]
        if scratch[i] - (acc - 1.0) / (i + 1.0) > 0.0:
            rho = i
            theta = (acc - 1.0) / (i + 1.0)
    for i in range(m):
        u = p[i] - theta
        p[i] = u if u > 0.0 else 0.0


cdef inline void _grads(const double[:, ::1] P, const double[:, ::1] A, const double[::1] b,
                        const double[:, ::1] Q, const double[::1] c,
                        double sx, double sy, double hx, double hy,
                        const double[::1] x, const double[::1] y,
                        double[::1] gx, double[::1] gy,
                        Py_ssize_t n, Py_ssize_t d) noexcept:
    cdef Py_ssize_t i, j
    cdef double px, ay, atx, qy, x1, y1, extra
    for i in range(n):
        px = 0.0
        for j in range(n):
            px += P[i, j] * x[j]
        ay = 0.0
        for j in range(d):
            ay += A[i, j] * y[j]
        gx[i] = (px + ay) + b[i]
    for i in range(d):
        atx = 0.0
        for j in range(n):
            atx += A[j, i] * x[j]
        qy = 0.0
        for j in range(d):
            qy += Q[i, j] * y[j]
        gy[i] = (atx - qy) - c[i]
    x1 = x[0]
    y1 = y[0]
    extra = 0.0
    if sx != 0.0:
        extra += 3.0 * sx * (x1 * x1 - 1.0) * y1
    if sy != 0.0:
        extra += sy * (y1 * y1 * y1 - 3.0 * y1)
    if hx != 0.0:
        extra += hx * x1 * y1
    if hy != 0.0:
        extra += 0.5 * hy * y1 * y1
    if extra != 0.0:
        gx[0] += extra
    extra = 0.0
    if sx != 0.0:
        extra += sx * (x1 * x1 * x1 - 3.0 * x1)
    if sy != 0.0:
        extra += 3.0 * sy * (y1 * y1 - 1.0) * x1
    if hx != 0.0:
        extra += 0.5 * hx * x1 * x1
    if hy != 0.0:
        extra += hy * y1 * x1
    if extra != 0.0:
        gy[0] += extra


cdef inline bint _all_finite(const double[::1] p, Py_ssize_t m) noexcept:
    cdef Py_ssize_t i
    for i in range(m):
        if not isfinite(p[i]):
            return 0
    return 1


def run_loop(int kind,
             const double[:, ::1] P, const double[:, ::1] A, const double[::1] b,
             const double[:, ::1] Q, const double[::1] c,
             double sx, double sy, double hx, double hy,
             int setx_kind, const double[::1] xa, const double[::1] xb, double xrad,
             int sety_kind, const double[::1] ya, const double[::1] yb, double yrad,
             double r_x, double r_y, double eta_x, double eta_y,
             double beta_x, double beta_y,
             const double[::1] x0, const double[::1] y0,
             const long[::1] snap_ts,
             double[:, ::1] out_x, double[:, ::1] out_y,
             double[:, ::1] out_z, double[:, ::1] out_v):
    """Run the requested algorithm for T = snap_ts[-1] iterations.

    kind: 0 ds_ogda, 1 ds_gda, 2 ogda, 3 eg, 4 gda. Snapshots of
    (x, y, z, v) are written at the iterations listed in snap_ts.
    Returns -1 on success or the iteration index at which a non-finite
    coordinate appeared.
    """
    cdef Py_ssize_t n = x0.shape[0]
    cdef Py_ssize_t d = y0.shape[0]
    cdef long T = snap_ts[snap_ts.shape[0] - 1]
    cdef Py_ssize_t nsnap = snap_ts.shape[0]
    cdef bint smoothed = kind == 0 or kind == 1
    cdef bint optimistic = kind == 0 or kind == 2

    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef double[::1] y = np.array(y0, dtype=np.float64)
    cdef double[::1] z = np.array(x0, dtype=np.float64)
    cdef double[::1] v = np.array(y0, dtype=np.float64)
    cdef double[::1] gx = np.empty(n)
    cdef double[::1] gy = np.empty(d)
    cdef double[::1] Gx = np.empty(n)
    cdef double[::1] Gy = np.empty(d)
    cdef double[::1] pGx = np.empty(n)
    cdef double[::1] pGy = np.empty(d)
    cdef double[::1] xt = np.empty(n)
    cdef double[::1] yt = np.empty(d)
    cdef double[::1] xm = np.empty(n)
    cdef double[::1] ym = np.empty(d)
    cdef double[::1] sn = np.empty(n)   # projection scratch
    cdef double[::1] sd = np.empty(d)

    cdef Py_ssize_t i, k = 0
    cdef long t
    cdef double gneg

    # previous operator at the initial point (x^{-1} = x^0)
    _grads(P, A, b, Q, c, sx, sy, hx, hy, x, y, gx, gy, n, d)
    if smoothed:
        for i in range(n):
            pGx[i] = gx[i] + r_x * (x[i] - z[i])
        for i in range(d):
            pGy[i] = (-gy[i]) + r_y * (y[i] - v[i])
    else:
        for i in range(n):
            pGx[i] = gx[i]
        for i in range(d):
            pGy[i] = -gy[i]

    for t in range(1, T + 1):
        if kind == 3:  # eg: evaluate at base, step to midpoint, re-evaluate
            _grads(P, A, b, Q, c, sx, sy, hx, hy, x, y, gx, gy, n, d)
            for i in range(n):
                xm[i] = x[i] - eta_x * gx[i]
            for i in range(d):
                gneg = -gy[i]
                ym[i] = y[i] - eta_y * gneg
            _project(setx_kind, xa, xb, xrad, xm, sn, n)
            _project(sety_kind, ya, yb, yrad, ym, sd, d)
            _grads(P, A, b, Q, c, sx, sy, hx, hy, xm, ym, gx, gy, n, d)
            for i in range(n):
                Gx[i] = gx[i]
                xt[i] = x[i] - eta_x * Gx[i]
            for i in range(d):
                Gy[i] = -gy[i]
                yt[i] = y[i] - eta_y * Gy[i]
        else:
            _grads(P, A, b, Q, c, sx, sy, hx, hy, x, y, gx, gy, n, d)
            if smoothed:
                for i in range(n):
                    Gx[i] = gx[i] + r_x * (x[i] - z[i])
                for i in range(d):
                    Gy[i] = (-gy[i]) + r_y * (y[i] - v[i])
            else:
                for i in range(n):
                    Gx[i] = gx[i]
                for i in range(d):
                    Gy[i] = -gy[i]
            if optimistic:
                for i in range(n):
                    xt[i] = x[i] - eta_x * (2.0 * Gx[i] - pGx[i])
                for i in range(d):
                    yt[i] = y[i] - eta_y * (2.0 * Gy[i] - pGy[i])
            else:
                for i in range(n):
                    xt[i] = x[i] - eta_x * Gx[i]
                for i in range(d):
                    yt[i] = y[i] - eta_y * Gy[i]
        _project(setx_kind, xa, xb, xrad, xt, sn, n)
        _project(sety_kind, ya, yb, yrad, yt, sd, d)
        if smoothed:
            # anchors move from the pre-step primal-dual pair
            for i in range(n):
                z[i] = z[i] + beta_x * (x[i] - z[i])
            for i in range(d):
                v[i] = v[i] + beta_y * (y[i] - v[i])
        for i in range(n):
            x[i] = xt[i]
            pGx[i] = Gx[i]
        for i in range(d):
            y[i] = yt[i]
            pGy[i] = Gy[i]
        if not (_all_finite(x, n) and _all_finite(y, d)
                and _all_finite(z, n) and _all_finite(v, d)):
            return t
        if k < nsnap and t == snap_ts[k]:
            for i in range(n):
                out_x[k, i] = x[i]
                out_z[k, i] = z[i]
            for i in range(d):
                out_y[k, i] = y[i]
                out_v[k, i] = v[i]
            k += 1
    return -1
