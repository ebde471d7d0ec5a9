"""Plain numpy implementations of the hot numeric kernels.

Used when the compiled extension is unavailable; see cevarep.kernels for
the selection logic.  Semantics must match cevarep._kernels exactly.
"""

import numpy as np


def eval_one(A, a, B, b, x):
    """Numerator vector and denominator value of a ratio-of-affine map
    at a single point.  The division is left to the caller so it can
    check the denominator sign first."""
    num = A @ x + a
    beta = float(B @ x + b)
    return num, beta


def eval_many(A, a, B, b, X):
    """Row-wise images Y and denominators beta for a (k, n) batch X.

    Rows with nonpositive beta still get divided; callers must inspect
    beta before trusting those rows.
    """
    beta = X @ B + b
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        Y = (X @ A.T + a) / beta[:, None]
    return Y, beta


def seg_coord_one(a, b, p):
    """Least-squares coordinate of p along the segment a -> b.

    Returns (s, resid, seglen) with p ~ a + s*(b - a), resid the
    orthogonal distance from the line, seglen = |b - a|.  Degenerate
    endpoints give (nan, resid-from-a, 0.0).
    """
    d = b - a
    e = p - a
    l2 = float(d @ d)
    if l2 == 0.0:
        return float("nan"), float(np.sqrt(e @ e)), 0.0
    s = float(e @ d) / l2
    r = e - s * d
    return s, float(np.sqrt(r @ r)), float(np.sqrt(l2))


def chord_stats(P, Q, M):
    """Vectorized seg_coord_one over rows plus norms used for scaling.

    Returns (s, resid, seglen, gap, pnorm, qnorm); gap = |M - P| row-wise.
    Degenerate rows (P == Q) get s = resid = nan, seglen = 0.
    """
    D = Q - P
    E = M - P
    l2 = np.einsum("ij,ij->i", D, D)
    seglen = np.sqrt(l2)
    gap = np.sqrt(np.einsum("ij,ij->i", E, E))
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.einsum("ij,ij->i", E, D) / l2
        R = E - s[:, None] * D
        resid = np.sqrt(np.einsum("ij,ij->i", R, R))
    pnorm = np.sqrt(np.einsum("ij,ij->i", P, P))
    qnorm = np.sqrt(np.einsum("ij,ij->i", Q, Q))
    return s, resid, seglen, gap, pnorm, qnorm
