"""Dimension-generic geometric substrate.

Vectors are 1-D float64 numpy arrays.  The module provides affine maps
and functionals, segments, convex combination and its inverse coordinate,
a collinearity measure, and SVD-based affine least squares.

All comparisons are scale-relative: a quantity counts as zero when it is
below tolerance times max(1, magnitude of the operands involved).

Parameter conventions, fixed package-wide:
  convex_combine(a, b, t) = t*a + (1-t)*b   (t weights the FIRST endpoint)
  segment_coordinate(a, b, p) returns s with p ~ a + s*(b-a)
                                            (s weights the SECOND endpoint)
so segment_coordinate(a, b, convex_combine(a, b, t)) recovers 1 - t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cevarep import kernels
from cevarep.errors import (
    DegenerateEndpoints,
    DimensionMismatch,
    NotOnLine,
    RankDeficient,
)


def as_vec(x) -> np.ndarray:
    """Coerce to a finite, contiguous 1-D float64 array of size >= 1.

    Scalars become 1-vectors.  Anything else of the wrong shape raises
    DimensionMismatch; non-finite entries raise ValueError.
    """
    v = np.ascontiguousarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size < 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


@dataclass(frozen=True)
class Tolerances:
    """Scale-relative comparison thresholds used throughout."""

    tol_collinear: float = 1e-9
    tol_eq: float = 1e-9
    tol_rank: float = 1e-8
    tol_fit: float = 1e-7

    def __post_init__(self):
        for name in ("tol_collinear", "tol_eq", "tol_rank", "tol_fit"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be a strictly positive float")


DEFAULT_TOLS = Tolerances()


@dataclass(frozen=True)
class AffineMap:
    """x -> matrix @ x + offset."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        matrix = np.ascontiguousarray(self.matrix, dtype=float)
        offset = as_vec(self.offset)
        if matrix.ndim != 2:
            raise DimensionMismatch(f"matrix must be 2-D, got shape {matrix.shape}")
        if matrix.shape[0] != offset.size:
            raise DimensionMismatch(
                f"matrix has {matrix.shape[0]} rows but offset has {offset.size}"
            )
        if not np.all(np.isfinite(matrix)):
            raise ValueError("matrix entries must be finite")
        matrix.flags.writeable = False
        offset.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)

    @property
    def in_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def out_dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x) -> np.ndarray:
        x = as_vec(x)
        if x.size != self.in_dim:
            raise DimensionMismatch(f"expected dim {self.in_dim}, got {x.size}")
        return self.matrix @ x + self.offset


@dataclass(frozen=True)
class AffineFunctional:
    """x -> row . x + offset, a scalar-valued affine function."""

    row: np.ndarray
    offset: float

    def __post_init__(self):
        row = as_vec(self.row)
        offset = float(self.offset)
        if not np.isfinite(offset):
            raise ValueError("offset must be finite")
        row.flags.writeable = False
        object.__setattr__(self, "row", row)
        object.__setattr__(self, "offset", offset)

    @property
    def dim(self) -> int:
        return self.row.size

    def __call__(self, x) -> float:
        x = as_vec(x)
        if x.size != self.dim:
            raise DimensionMismatch(f"expected dim {self.dim}, got {x.size}")
        return float(self.row @ x + self.offset)


@dataclass(frozen=True)
class Segment:
    """Segment between two points; equal endpoints give the single point.

    openness is "closed" or "open" and only affects membership checks.
    """

    a: np.ndarray
    b: np.ndarray
    openness: str = "closed"

    def __post_init__(self):
        a = as_vec(self.a)
        b = as_vec(self.b)
        if a.size != b.size:
            raise DimensionMismatch(f"endpoint dims differ: {a.size} vs {b.size}")
        if self.openness not in ("open", "closed"):
            raise ValueError(f"openness must be open or closed, got {self.openness!r}")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.a.size

    def point_at(self, s: float) -> np.ndarray:
        """Point at coordinate s along the segment, a at s=0 and b at s=1.

        Follows the orientation of segment_coordinate (not the reversed
        parameter of convex_combine), so segment_coordinate(a, b,
        point_at(s)) recovers s.
        """
        return convex_combine(self.b, self.a, s)

    def contains(self, p, tol: Tolerances = DEFAULT_TOLS,
                 interior_margin: float = 1e-12) -> bool:
        """Membership up to tol_collinear in the orthogonal direction.

        For an open segment the coordinate must stay interior_margin away
        from both endpoints; exact endpoint hits of an open segment are
        rejected.
        """
        p = as_vec(p)
        if p.size != self.dim:
            raise DimensionMismatch(f"expected dim {self.dim}, got {p.size}")
        s, resid, seglen = kernels.seg_coord_one(self.a, self.b, p)
        scale = max(1.0, float(np.linalg.norm(self.a)), float(np.linalg.norm(self.b)))
        if seglen <= tol.tol_eq * scale:
            hit = float(np.linalg.norm(p - self.a)) <= tol.tol_eq * scale
            return hit and self.openness == "closed"
        if resid > tol.tol_collinear * max(1.0, seglen):
            return False
        if self.openness == "open":
            return interior_margin < s < 1.0 - interior_margin
        return -tol.tol_collinear <= s <= 1.0 + tol.tol_collinear


def convex_combine(a, b, t: float) -> np.ndarray:
    """t*a + (1-t)*b, computed exactly as written.

    The parameter weights the first endpoint: t=1 gives a, t=0 gives b.
    t outside [0, 1] extrapolates along the line.
    """
    a = as_vec(a)
    b = as_vec(b)
    if a.size != b.size:
        raise DimensionMismatch(f"endpoint dims differ: {a.size} vs {b.size}")
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    return t * a + (1.0 - t) * b


def segment_coordinate(a, b, p, tol: Tolerances = DEFAULT_TOLS) -> float:
    """Coordinate s of p on the line through a and b, p ~ a + s*(b-a).

    s weights the second endpoint (s=0 at a, s=1 at b), the reverse
    reading of convex_combine's parameter.  Raises DegenerateEndpoints
    when a and b coincide, NotOnLine when the orthogonal residual of p
    exceeds tol_collinear * max(1, |b-a|).
    """
    a = as_vec(a)
    b = as_vec(b)
    p = as_vec(p)
    if not (a.size == b.size == p.size):
        raise DimensionMismatch(
            f"dims differ: a={a.size}, b={b.size}, p={p.size}"
        )
    scale = max(1.0, float(np.linalg.norm(a)), float(np.linalg.norm(b)))
    s, resid, seglen = kernels.seg_coord_one(a, b, p)
    if seglen <= tol.tol_eq * scale:
        raise DegenerateEndpoints(f"endpoints coincide within {tol.tol_eq:g} * scale")
    if resid > tol.tol_collinear * max(1.0, seglen):
        raise NotOnLine(
            f"orthogonal residual {resid:.3e} exceeds "
            f"{tol.tol_collinear:g} * max(1, {seglen:.3e})"
        )
    return s


def point_segment_distance(p, a, b) -> float:
    """Euclidean distance from p to the closed segment [a, b]."""
    p = as_vec(p)
    a = as_vec(a)
    b = as_vec(b)
    if not (a.size == b.size == p.size):
        raise DimensionMismatch("point and endpoints must share a dimension")
    d = b - a
    l2 = float(d @ d)
    if l2 == 0.0:
        return float(np.linalg.norm(p - a))
    u = min(1.0, max(0.0, float((p - a) @ d) / l2))
    return float(np.linalg.norm(p - a - u * d))


def noncollinearity_measure(points) -> float:
    """How far a point cloud is from lying on one line.

    Returns the second-largest singular value of the matrix of
    differences [p_i - p_0], divided by max(1, largest difference norm).
    Collinear points give zero up to SVD roundoff.  The exact value
    depends on which point is listed first (it anchors the differences);
    the zero-versus-positive verdict does not, since collinearity is a
    property of the set.
    """
    vecs = [as_vec(p) for p in points]
    if len(vecs) < 3:
        raise DimensionMismatch(f"need at least 3 points, got {len(vecs)}")
    dim = vecs[0].size
    if any(v.size != dim for v in vecs):
        raise DimensionMismatch("points must share a dimension")
    cols = np.stack([v - vecs[0] for v in vecs[1:]], axis=1)
    spread = float(np.max(np.linalg.norm(cols, axis=0)))
    if spread == 0.0:
        return 0.0
    svals = np.linalg.svd(cols, compute_uv=False)
    sigma2 = float(svals[1]) if svals.size >= 2 else 0.0
    return sigma2 / max(1.0, spread)


@dataclass(frozen=True)
class FitReport:
    """Diagnostics of an affine least-squares fit."""

    max_abs_residual: float
    cond: float


def _design_matrix(xs) -> np.ndarray:
    rows = [as_vec(x) for x in xs]
    dim = rows[0].size
    if any(r.size != dim for r in rows):
        raise DimensionMismatch("sample points must share a dimension")
    X = np.stack(rows)
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _solve_svd(D, Y, cond_cap):
    # SVD rather than normal equations: squaring the design squares its
    # condition number and loses half the digits.
    U, sig, Vt = np.linalg.svd(D, full_matrices=False)
    if sig[-1] == 0.0:
        raise RankDeficient("design matrix is exactly rank deficient")
    cond = float(sig[0] / sig[-1])
    if not np.isfinite(cond) or cond > cond_cap:
        raise RankDeficient(
            f"design condition number {cond:.3e} exceeds cap {cond_cap:g}; "
            "the sample region is too thin to pin down every coefficient"
        )
    W = Vt.T @ ((U.T @ Y) / sig.reshape(-1, 1))
    return W, cond


def fit_affine_scalar(samples, cond_cap: float = 1e8):
    """Least-squares fit of row.x + offset to scalar targets.

    samples is a sequence of (x, y) pairs.  Returns (AffineFunctional,
    FitReport).  Raises RankDeficient when there are fewer than dim+1
    samples or the design [x | 1] has condition number above cond_cap.
    """
    samples = list(samples)
    if not samples:
        raise RankDeficient("no samples")
    xs = [s[0] for s in samples]
    ys = np.array([float(s[1]) for s in samples])
    D = _design_matrix(xs)
    if D.shape[0] < D.shape[1]:
        raise RankDeficient(f"need at least {D.shape[1]} samples, got {D.shape[0]}")
    W, cond = _solve_svd(D, ys.reshape(-1, 1), cond_cap)
    w = W[:, 0]
    resid = float(np.max(np.abs(D @ w - ys)))
    return AffineFunctional(row=w[:-1], offset=float(w[-1])), FitReport(resid, cond)


def fit_affine_vector(samples, cond_cap: float = 1e8):
    """Vector-valued counterpart of fit_affine_scalar.

    samples is a sequence of (x, y) pairs with vector y.  Returns
    (AffineMap, FitReport); the residual is the max absolute entry error.
    """
    samples = list(samples)
    if not samples:
        raise RankDeficient("no samples")
    xs = [s[0] for s in samples]
    Y = np.stack([as_vec(s[1]) for s in samples])
    D = _design_matrix(xs)
    if D.shape[0] < D.shape[1]:
        raise RankDeficient(f"need at least {D.shape[1]} samples, got {D.shape[0]}")
    W, cond = _solve_svd(D, Y, cond_cap)
    resid = float(np.max(np.abs(D @ W - Y)))
    return AffineMap(matrix=W[:-1].T, offset=W[-1]), FitReport(resid, cond)
