# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; semantics match ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()


def ising_site_products(couplings, times, double kappa):
    cdef const double[:, ::1] J = np.ascontiguousarray(couplings, dtype=np.float64)
    cdef const double[::1] t = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t n = J.shape[0], nt = t.shape[0]
    out_arr = np.empty((nt, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, i, j
    cdef double p, s
    with nogil:
        for k in range(nt):
            s = kappa * t[k]
            for i in range(n):
                p = 1.0
                for j in range(n):
                    if j != i:
                        p *= cos(s * J[i, j])
                out[k, i] = p
    return out_arr


def precess_frames(fields, dt):
    cdef const double[:, :, ::1] b = np.ascontiguousarray(fields, dtype=np.float64)
    cdef const double[::1] h = np.ascontiguousarray(dt, dtype=np.float64)
    cdef Py_ssize_t ns = b.shape[0], nt = b.shape[1]
    out_arr = np.empty((ns, nt, 3, 3), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef double R[3][3]
    cdef double Q[3][3]
    cdef double rot[3][3]
    cdef double wx, wy, wz, ang, nx, ny, nz, sa, oc
    cdef Py_ssize_t s, k, i, j, m
    with nogil:
        for s in range(ns):
            for i in range(3):
                for j in range(3):
                    R[i][j] = 1.0 if i == j else 0.0
                    out[s, 0, i, j] = R[i][j]
            for k in range(nt - 1):
                wx = 0.5 * (b[s, k, 0] + b[s, k + 1, 0]) * h[k]
                wy = 0.5 * (b[s, k, 1] + b[s, k + 1, 1]) * h[k]
                wz = 0.5 * (b[s, k, 2] + b[s, k + 1, 2]) * h[k]
                ang = sqrt(wx * wx + wy * wy + wz * wz)
                if ang > 0.0:
                    nx = wx / ang
                    ny = wy / ang
                    nz = wz / ang
                else:
                    nx = 0.0
                    ny = 0.0
                    nz = 0.0
                sa = sin(ang)
                oc = 1.0 - cos(ang)
                # Rodrigues: I + sin(a) K + (1 - cos(a)) K^2, K = [n]_x
                rot[0][0] = 1.0 - oc * (ny * ny + nz * nz)
                rot[0][1] = -sa * nz + oc * nx * ny
                rot[0][2] = sa * ny + oc * nx * nz
                rot[1][0] = sa * nz + oc * nx * ny
                rot[1][1] = 1.0 - oc * (nx * nx + nz * nz)
                rot[1][2] = -sa * nx + oc * ny * nz
                rot[2][0] = -sa * ny + oc * nx * nz
                rot[2][1] = sa * nx + oc * ny * nz
                rot[2][2] = 1.0 - oc * (nx * nx + ny * ny)
                for i in range(3):
                    for j in range(3):
                        Q[i][j] = 0.0
                        for m in range(3):
                            Q[i][j] += rot[i][m] * R[m][j]
                for i in range(3):
                    for j in range(3):
                        R[i][j] = Q[i][j]
                        out[s, k + 1, i, j] = R[i][j]
    return out_arr


def cluster_autocorrelators(states, int n):
    cdef const double complex[:, :, ::1] U = np.ascontiguousarray(states, dtype=np.complex128)
    cdef Py_ssize_t ns = U.shape[0], d = U.shape[1]
    out_arr = np.zeros((3, n, ns), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, s, c, e, m
    cdef double complex u, f
    cdef double px, py, pz, p, q, inv = 1.0 / d
    with nogil:
        for s in range(ns):
            for i in range(n):
                m = 1 << i
                px = 0.0
                py = 0.0
                pz = 0.0
                for c in range(d):
                    for e in range(d):
                        u = U[s, c, e]
                        f = U[s, c ^ m, e ^ m]
                        p = u.real * f.real + u.imag * f.imag
                        q = u.real * u.real + u.imag * u.imag
                        px += p
                        if ((c >> i) & 1) == ((e >> i) & 1):
                            py += p
                            pz += q
                        else:
                            py -= p
                            pz -= q
                out[0, i, s] = px * inv
                out[1, i, s] = py * inv
                out[2, i, s] = pz * inv
    return out_arr


def rotate_sites(states, ops):
    # complex arrays viewed as interleaved (re, im) doubles
    cdef double[:, :, ::1] X = states.view(np.float64)
    cdef const double[:, :, :, ::1] O = np.ascontiguousarray(ops, dtype=np.complex128).view(np.float64)
    cdef Py_ssize_t ns = X.shape[0], d = X.shape[1], nk = X.shape[2] // 2, n = O.shape[1]
    cdef Py_ssize_t s, i, c, k, m, c1
    cdef double ar, ai, br, bi, cr, ci, dr, di, xr, xi, yr, yi
    with nogil:
        for s in range(ns):
            for i in range(n):
                m = 1 << i
                # ops[s, i] viewed as (2, 4): row 0 = a00, a01; row 1 = a10, a11
                ar = O[s, i, 0, 0]
                ai = O[s, i, 0, 1]
                br = O[s, i, 0, 2]
                bi = O[s, i, 0, 3]
                cr = O[s, i, 1, 0]
                ci = O[s, i, 1, 1]
                dr = O[s, i, 1, 2]
                di = O[s, i, 1, 3]
                for c in range(d):
                    if c & m:
                        continue
                    c1 = c | m
                    for k in range(nk):
                        xr = X[s, c, 2 * k]
                        xi = X[s, c, 2 * k + 1]
                        yr = X[s, c1, 2 * k]
                        yi = X[s, c1, 2 * k + 1]
                        X[s, c, 2 * k] = ar * xr - ai * xi + br * yr - bi * yi
                        X[s, c, 2 * k + 1] = ar * xi + ai * xr + br * yi + bi * yr
                        X[s, c1, 2 * k] = cr * xr - ci * xi + dr * yr - di * yi
                        X[s, c1, 2 * k + 1] = cr * xi + ci * xr + dr * yi + di * yr
    return states
