# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mass-transfer and energy kernels.

Signatures and semantics mirror ``_kernels_py``; arrays are C-contiguous
float64 with node/edge rows and ``m`` columns.
"""
from libc.math cimport sqrt


def send(double[:, ::1] y, double[::1] s, double[:, ::1] sigma_y,
         double[::1] sigma_s, Py_ssize_t i, double denom):
    cdef Py_ssize_t k, m = y.shape[1]
    for k in range(m):
        y[i, k] = y[i, k] / denom
        sigma_y[i, k] = sigma_y[i, k] + y[i, k]
    s[i] = s[i] / denom
    sigma_s[i] = sigma_s[i] + s[i]


def receive(double[:, ::1] y, double[::1] s, const double[:, ::1] sigma_y,
            const double[::1] sigma_s, double[:, ::1] rho_y, double[::1] rho_s,
            Py_ssize_t src, Py_ssize_t dst, Py_ssize_t e):
    cdef Py_ssize_t k, m = y.shape[1]
    for k in range(m):
        y[dst, k] = y[dst, k] + (sigma_y[src, k] - rho_y[e, k])
        rho_y[e, k] = sigma_y[src, k]
    s[dst] = s[dst] + (sigma_s[src] - rho_s[e])
    rho_s[e] = sigma_s[src]


def node_energy(const double[:, ::1] y, const double[::1] s):
    cdef Py_ssize_t i, k, n = y.shape[0], m = y.shape[1]
    cdef double total = 0.0, sq, xk
    for i in range(n):
        if s[i] > 0.0:
            sq = 0.0
            for k in range(m):
                xk = y[i, k] / s[i]
                sq = sq + xk * xk
            total = total + 0.5 * s[i] * sq
    return total


def edge_energy(const double[:, ::1] sigma_y, const double[::1] sigma_s,
                const double[:, ::1] rho_y, const double[::1] rho_s,
                const Py_ssize_t[::1] src):
    cdef Py_ssize_t e, k, i, n_e = rho_y.shape[0], m = rho_y.shape[1]
    cdef double total = 0.0, sq, se, xk
    for e in range(n_e):
        i = src[e]
        se = sigma_s[i] - rho_s[e]
        if se > 0.0:
            sq = 0.0
            for k in range(m):
                xk = (sigma_y[i, k] - rho_y[e, k]) / se
                sq = sq + xk * xk
            total = total + 0.5 * se * sq
    return total


def node_sq_dist(const double[:, ::1] y, const double[::1] s, const double[::1] x):
    cdef Py_ssize_t i, k, n = y.shape[0], m = y.shape[1]
    cdef double total = 0.0, sq, d
    for i in range(n):
        if s[i] > 0.0:
            sq = 0.0
            for k in range(m):
                d = x[k] - y[i, k] / s[i]
                sq = sq + d * d
            total = total + 0.5 * s[i] * sq
    return total


def edge_sq_dist(const double[:, ::1] sigma_y, const double[::1] sigma_s,
                 const double[:, ::1] rho_y, const double[::1] rho_s,
                 const Py_ssize_t[::1] src, const double[::1] x):
    cdef Py_ssize_t e, k, i, n_e = rho_y.shape[0], m = rho_y.shape[1]
    cdef double total = 0.0, sq, se, d
    for e in range(n_e):
        i = src[e]
        se = sigma_s[i] - rho_s[e]
        if se > 0.0:
            sq = 0.0
            for k in range(m):
                d = x[k] - (sigma_y[i, k] - rho_y[e, k]) / se
                sq = sq + d * d
            total = total + 0.5 * se * sq
    return total


def inflight_totals(const double[:, ::1] sigma_y, const double[::1] sigma_s,
                    const double[:, ::1] rho_y, const double[::1] rho_s,
                    const Py_ssize_t[::1] src, double[::1] out_y):
    cdef Py_ssize_t e, k, i, n_e = rho_y.shape[0], m = rho_y.shape[1]
    cdef double total = 0.0
    for k in range(m):
        out_y[k] = 0.0
    for e in range(n_e):
        i = src[e]
        total = total + (sigma_s[i] - rho_s[e])
        for k in range(m):
            out_y[k] = out_y[k] + (sigma_y[i, k] - rho_y[e, k])
    return total


def node_spread(const double[:, ::1] y, const double[::1] s):
    cdef Py_ssize_t i, j, k, n = y.shape[0], m = y.shape[1]
    cdef double best = 0.0, sq, d
    for i in range(n):
        for j in range(i + 1, n):
            sq = 0.0
            for k in range(m):
                d = y[i, k] / s[i] - y[j, k] / s[j]
                sq = sq + d * d
            if sq > best:
                best = sq
    return sqrt(best)
