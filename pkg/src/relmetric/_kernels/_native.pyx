# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled versions of the hot kernels.

Semantics must match ../pure.py exactly; the test suite cross-checks the
two backends. Keep any change in lockstep.
"""

import numpy as np

from libc.math cimport fabs

BACKEND = "native"


def mahalanobis_cross(object X_in, object Y_in, object M_in):
    """All squared Mahalanobis distances (x_i - y_j)^T M (x_i - y_j).

    Returns an (n, m) array, clamped at 0. The two matrix products go
    through BLAS; the self-terms and the combine/clamp pass are fused C
    loops, so no (n, m) broadcast temporaries are built.
    """
    X_arr = np.ascontiguousarray(X_in, dtype=np.float64)
    Y_arr = np.ascontiguousarray(Y_in, dtype=np.float64)
    M_arr = np.ascontiguousarray(M_in, dtype=np.float64)
    cdef const double[:, ::1] X = X_arr
    cdef const double[:, ::1] Y = Y_arr
    cdef Py_ssize_t n = X.shape[0], m = Y.shape[0], d = X.shape[1]
    XM_arr = np.dot(X_arr, M_arr)
    YM_arr = np.dot(Y_arr, M_arr)
    cdef const double[:, ::1] XM = XM_arr
    cdef const double[:, ::1] YM = YM_arr
    xx_arr = np.empty(n, dtype=np.float64)
    yy_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] xx = xx_arr
    cdef double[::1] yy = yy_arr
    cdef Py_ssize_t i, j, a
    cdef double acc, val
    for i in range(n):
        acc = 0.0
        for a in range(d):
            acc += XM[i, a] * X[i, a]
        xx[i] = acc
    for j in range(m):
        acc = 0.0
        for a in range(d):
            acc += YM[j, a] * Y[j, a]
        yy[j] = acc
    out_arr = np.dot(XM_arr, Y_arr.T)
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        for j in range(m):
            val = xx[i] + yy[j] - 2.0 * out[i, j]
            out[i, j] = val if val > 0.0 else 0.0
    return out_arr


def itml_sweep(
    object A_in,
    object X_in,
    object ci_in,
    object cj_in,
    object delta_in,
    object bhat_in,
    object lambdas_in,
    double slack,
    double gamma_proj,
):
    """One cyclic pass of rank-one threshold projections, in place.

    Same contract as the pure version: updates A, bhat, lambdas in place
    and returns (max |multiplier change|, skipped count).
    """
    cdef double[:, ::1] A = A_in
    cdef const double[:, ::1] X = X_in
    cdef const long long[::1] ci = ci_in
    cdef const long long[::1] cj = cj_in
    cdef const long long[::1] delta = delta_in
    cdef double[::1] bhat = bhat_in
    cdef double[::1] lambdas = lambdas_in
    cdef Py_ssize_t n_c = ci.shape[0], d = X.shape[1]
    v_arr = np.empty(d, dtype=np.float64)
    av_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] v = v_arr
    cdef double[::1] Av = av_arr
    cdef Py_ssize_t t, a, b
    cdef long long i, j
    cdef double p, alpha, beta, denom, change, max_change = 0.0, acc
    cdef long skipped = 0
    for t in range(n_c):
        i = ci[t]
        j = cj[t]
        for a in range(d):
            v[a] = X[i, a] - X[j, a]
        p = 0.0
        for a in range(d):
            acc = 0.0
            for b in range(d):
                acc += A[a, b] * v[b]
            Av[a] = acc
            p += v[a] * acc
        if p < 1e-12:
            skipped += 1
            continue
        if delta[t] == 1:
            alpha = gamma_proj * (1.0 / p - 1.0 / bhat[t])
            if lambdas[t] < alpha:
                alpha = lambdas[t]
            denom = 1.0 - alpha * p
            if fabs(denom) <= 1e-12:
                skipped += 1
                continue
            lambdas[t] -= alpha
            beta = alpha / denom
            bhat[t] = 1.0 / (1.0 / bhat[t] + alpha / slack)
        else:
            alpha = gamma_proj * (1.0 / bhat[t] - 1.0 / p)
            if lambdas[t] < alpha:
                alpha = lambdas[t]
            denom = 1.0 + alpha * p
            if fabs(denom) <= 1e-12:
                skipped += 1
                continue
            lambdas[t] -= alpha
            beta = -alpha / denom
            bhat[t] = 1.0 / (1.0 / bhat[t] - alpha / slack)
        for a in range(d):
            for b in range(d):
                A[a, b] += beta * Av[a] * Av[b]
        change = fabs(alpha)
        if change > max_change:
            max_change = change
    return max_change, skipped
