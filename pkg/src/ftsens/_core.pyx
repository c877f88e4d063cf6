# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: RK4 for the slowed torus flow and greedy separated sets."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, floor, fabs, M_PI

cnp.import_array()


cdef inline void _field(double x, double y, double p0, double p1, double alpha,
                        double *vx, double *vy) noexcept nogil:
    cdef double s1 = sin(M_PI * (x - p0))
    cdef double s2 = sin(M_PI * (y - p1))
    cdef double g = s1 * s1 + s2 * s2
    vx[0] = g
    vy[0] = g * alpha


def rk4_advance(double[:, ::1] pts, long nsteps, double h, double p0, double p1, double alpha):
    """Advance every row of ``pts`` (cover coordinates) by ``nsteps`` RK4 steps, in place."""
    cdef Py_ssize_t i, n = pts.shape[0]
    cdef long s
    cdef double x, y, k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y, hh = 0.5 * h
    with nogil:
        for i in range(n):
            x = pts[i, 0]
            y = pts[i, 1]
            for s in range(nsteps):
                _field(x, y, p0, p1, alpha, &k1x, &k1y)
                _field(x + hh * k1x, y + hh * k1y, p0, p1, alpha, &k2x, &k2y)
                _field(x + hh * k2x, y + hh * k2y, p0, p1, alpha, &k3x, &k3y)
                _field(x + h * k3x, y + h * k3y, p0, p1, alpha, &k4x, &k4y)
                x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
                y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            pts[i, 0] = x
            pts[i, 1] = y


cdef inline double _cdist(double a, double b, double period) noexcept nogil:
    cdef double d = fabs(a - b)
    if period > 0:
        d = d - period * floor(d / period)
        if period - d < d:
            d = period - d
    return d


def greedy_separated(double[:, :, ::1] orbits, double delta, double period):
    """Greedy (n, delta)-separated subset of a pool of 2-d orbits.

    ``orbits[p, k]`` is the k-th iterate of candidate p. A candidate is kept
    when, for every kept point, some iterate is more than ``delta`` away in
    the sup metric (circle distance per coordinate when ``period > 0``).
    Kept points are bucketed by their last iterate on a grid of cells no
    smaller than ``delta``, so only the 3x3 neighbouring cells are scanned.
    """
    cdef Py_ssize_t P = orbits.shape[0], T = orbits.shape[1]
    cdef Py_ssize_t p, q, t, last = T - 1
    cdef double span = period if period > 0 else 1.0
    cdef long G = <long>floor(span / delta) if delta > 0 else 1
    if G < 1:
        G = 1
    if G > 4096:
        G = 4096
    cdef double cell = span / G
    cdef cnp.ndarray[cnp.int64_t, ndim=1] head_arr = np.full(G * G, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] nxt_arr = np.full(P, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] kept_arr = np.empty(P, dtype=np.int64)
    cdef cnp.int64_t[::1] head = head_arr
    cdef cnp.int64_t[::1] nxt = nxt_arr
    cdef cnp.int64_t[::1] kept = kept_arr
    cdef Py_ssize_t nkept = 0
    cdef long cx, cy, ox, oy, gx, gy, span_n
    cdef double u, v
    cdef bint ok, sep
    span_n = 3 if G >= 3 else G
    with nogil:
        for p in range(P):
            u = orbits[p, last, 0]
            v = orbits[p, last, 1]
            if period > 0:
                u = u - period * floor(u / period)
                v = v - period * floor(v / period)
            cx = <long>floor(u / cell)
            cy = <long>floor(v / cell)
            if period <= 0:
                cx = min(max(cx, 0), G - 1)
                cy = min(max(cy, 0), G - 1)
            cx = cx % G
            cy = cy % G
            ok = True
            for ox in range(span_n):
                if not ok:
                    break
                gx = cx - 1 + ox if G >= 3 else ox
                if period > 0:
                    gx = ((gx % G) + G) % G
                elif gx < 0 or gx >= G:
                    continue
                for oy in range(span_n):
                    gy = cy - 1 + oy if G >= 3 else oy
                    if period > 0:
                        gy = ((gy % G) + G) % G
                    elif gy < 0 or gy >= G:
                        continue
                    q = head[gx * G + gy]
                    while q >= 0:
                        sep = False
                        for t in range(T):
                            if _cdist(orbits[p, t, 0], orbits[q, t, 0], period) > delta or \
                               _cdist(orbits[p, t, 1], orbits[q, t, 1], period) > delta:
                                sep = True
                                break
                        if not sep:
                            ok = False
                            break
                        q = nxt[q]
                    if not ok:
                        break
            if ok:
                kept[nkept] = p
                nkept += 1
                nxt[p] = head[cx * G + cy]
                head[cx * G + cy] = p
    return kept_arr[:nkept].copy()
