"""Compiled numeric kernels.

Mirrors cevarep._kernels_py; that module's docstrings are authoritative
for the semantics.  Keep the two in lockstep.
"""

from libc.math cimport NAN, sqrt

import numpy as np


def eval_one(const double[:, ::1] A, const double[::1] a,
             const double[::1] B, double b, const double[::1] x):
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t n = A.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    cdef double beta = b
    num = np.empty(m, dtype=np.float64)
    cdef double[::1] nv = num
    for j in range(n):
        beta += B[j] * x[j]
    for i in range(m):
        acc = a[i]
        for j in range(n):
            acc += A[i, j] * x[j]
        nv[i] = acc
    return num, beta


def eval_many(const double[:, ::1] A, const double[::1] a,
              const double[::1] B, double b, const double[:, ::1] X):
    cdef Py_ssize_t k = X.shape[0]
    cdef Py_ssize_t n = X.shape[1]
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t i, j, r
    cdef double acc, bt
    Y = np.empty((k, m), dtype=np.float64)
    beta = np.empty(k, dtype=np.float64)
    cdef double[:, ::1] Yv = Y
    cdef double[::1] bv = beta
    for i in range(k):
        bt = b
        for j in range(n):
            bt += B[j] * X[i, j]
        bv[i] = bt
        for r in range(m):
            acc = a[r]
            for j in range(n):
                acc += A[r, j] * X[i, j]
            Yv[i, r] = acc / bt
    return Y, beta


def seg_coord_one(const double[::1] a, const double[::1] b,
                  const double[::1] p):
    cdef Py_ssize_t d = a.shape[0]
    cdef Py_ssize_t j
    cdef double l2 = 0.0, dot = 0.0, e2 = 0.0, r2 = 0.0
    cdef double dj, ej, rj, s
    for j in range(d):
        dj = b[j] - a[j]
        ej = p[j] - a[j]
        l2 += dj * dj
        dot += ej * dj
        e2 += ej * ej
    if l2 == 0.0:
        return NAN, sqrt(e2), 0.0
    s = dot / l2
    for j in range(d):
        dj = b[j] - a[j]
        ej = p[j] - a[j]
        rj = ej - s * dj
        r2 += rj * rj
    return s, sqrt(r2), sqrt(l2)


def chord_stats(const double[:, ::1] P, const double[:, ::1] Q,
                const double[:, ::1] M):
    cdef Py_ssize_t k = P.shape[0]
    cdef Py_ssize_t d = P.shape[1]
    cdef Py_ssize_t i, j
    cdef double l2, dot, e2, r2, p2, q2, dj, ej, rj, sv
    s = np.empty(k, dtype=np.float64)
    resid = np.empty(k, dtype=np.float64)
    seglen = np.empty(k, dtype=np.float64)
    gap = np.empty(k, dtype=np.float64)
    pnorm = np.empty(k, dtype=np.float64)
    qnorm = np.empty(k, dtype=np.float64)
    cdef double[::1] s_v = s, resid_v = resid, seglen_v = seglen
    cdef double[::1] gap_v = gap, pn_v = pnorm, qn_v = qnorm
    for i in range(k):
        l2 = 0.0
        dot = 0.0
        e2 = 0.0
        p2 = 0.0
        q2 = 0.0
        for j in range(d):
            dj = Q[i, j] - P[i, j]
            ej = M[i, j] - P[i, j]
            l2 += dj * dj
            dot += ej * dj
            e2 += ej * ej
            p2 += P[i, j] * P[i, j]
            q2 += Q[i, j] * Q[i, j]
        gap_v[i] = sqrt(e2)
        pn_v[i] = sqrt(p2)
        qn_v[i] = sqrt(q2)
        if l2 == 0.0:
            s_v[i] = NAN
            resid_v[i] = NAN
            seglen_v[i] = 0.0
            continue
        sv = dot / l2
        s_v[i] = sv
        seglen_v[i] = sqrt(l2)
        r2 = 0.0
        for j in range(d):
            dj = Q[i, j] - P[i, j]
            ej = M[i, j] - P[i, j]
            rj = ej - sv * dj
            r2 += rj * rj
        resid_v[i] = sqrt(r2)
    return s, resid, seglen, gap, pnorm, qnorm
