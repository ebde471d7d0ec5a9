"""Probe-ratio calculus on black-box oracles.

For points x, y and a positive weight t, probe the oracle at
(x + t y) / (1 + t).  When the oracle carries segments onto segments,
the probe's image splits the image chord, and the split ratio

    alpha_{x,y}(t) = s / (1 - s),   s = coordinate of the image between
                                        f(x) and f(y)

obeys three laws for ratio-of-affine maps: an inverse law
alpha_{x,y}(t) * alpha_{y,x}(1/t) = 1, a multiplicative law
alpha_{x,y}(s t) = alpha_{x,z}(s) * alpha_{z,y}(t), and a power law
alpha_{x,y}(t) = alpha_{x,y}(1) * t^c with exponent c = 1.  This module
measures alpha and the laws; certification and extraction build on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cevarep import kernels
from cevarep.errors import DegenerateGrid, EqualImages, NotOnOpenSegment
from cevarep.geom import DEFAULT_TOLS, Tolerances, as_vec
from cevarep.oracle import Oracle

DEFAULT_T_GRID = tuple(2.0 ** k for k in range(-3, 4))


@dataclass(frozen=True)
class AlphaSample:
    """One measured split ratio.

    residual is the orthogonal distance of the probe image from the
    image chord, before normalization; it quantifies how well the
    collinearity precondition held.
    """

    x: np.ndarray
    y: np.ndarray
    t: float
    alpha: float
    residual: float


@dataclass(frozen=True)
class ExponentEstimate:
    """Least-squares fit of log alpha against log t."""

    c_hat: float
    intercept: float
    max_log_residual: float
    sample_count: int


@dataclass(frozen=True)
class LawReport:
    """Outcome of checking one alpha law over a batch of weights."""

    max_log_residual: float
    checks: int
    passed: bool


def probe_point(x, y, t: float) -> np.ndarray:
    """(x + t y) / (1 + t), the weighted probe between x and y."""
    x = as_vec(x)
    y = as_vec(y)
    return (x + t * y) / (1.0 + t)


def compute_alpha(oracle: Oracle, x, y, t: float,
                  tol: Tolerances = DEFAULT_TOLS) -> AlphaSample:
    """Measure alpha_{x,y}(t) from three oracle evaluations.

    Raises EqualImages when f(x) and f(y) coincide (no chord to split),
    NotOnOpenSegment when the probe image is off the chord line or its
    coordinate is not strictly between the endpoints.
    """
    t = float(t)
    if not (np.isfinite(t) and t > 0.0):
        raise ValueError(f"t must be a positive float, got {t}")
    x = as_vec(x)
    y = as_vec(y)
    fx = as_vec(oracle.eval(x))
    fy = as_vec(oracle.eval(y))
    fm = as_vec(oracle.eval(probe_point(x, y, t)))
    s, resid, seglen = kernels.seg_coord_one(fx, fy, fm)
    scale = max(1.0, float(np.linalg.norm(fx)), float(np.linalg.norm(fy)))
    if seglen <= tol.tol_eq * scale:
        raise EqualImages("the endpoint images coincide; alpha is undefined")
    if resid > tol.tol_collinear * max(1.0, seglen):
        raise NotOnOpenSegment(
            f"probe image is off the chord line: residual {resid:.3e} "
            f"exceeds {tol.tol_collinear:g} * max(1, {seglen:.3e})"
        )
    if not 0.0 < s < 1.0:
        raise NotOnOpenSegment(
            f"probe image coordinate {s:.6g} is outside the open unit interval"
        )
    return AlphaSample(x=x, y=y, t=t, alpha=s / (1.0 - s), residual=resid)


def check_inverse_law(oracle: Oracle, x, y, ts,
                      tol_log: float = 1e-9,
                      tol: Tolerances = DEFAULT_TOLS) -> LawReport:
    """max over ts of |log alpha_{x,y}(t) + log alpha_{y,x}(1/t)|.

    The product of the two alphas is one for any segment-preserving
    oracle, because both probes are the same point read from either end.
    """
    ts = [float(t) for t in ts]
    if not ts:
        raise ValueError("ts must be nonempty")
    worst = 0.0
    for t in ts:
        a1 = compute_alpha(oracle, x, y, t, tol).alpha
        a2 = compute_alpha(oracle, y, x, 1.0 / t, tol).alpha
        worst = max(worst, abs(math.log(a1) + math.log(a2)))
    return LawReport(max_log_residual=worst, checks=len(ts), passed=worst <= tol_log)


def check_multiplicative_law(oracle: Oracle, x, y, z, pairs,
                             tol_log: float = 1e-9,
                             tol: Tolerances = DEFAULT_TOLS) -> LawReport:
    """max over (s, t) pairs of
    |log alpha_{x,y}(s t) - log alpha_{x,z}(s) - log alpha_{z,y}(t)|.

    Requires the three images pairwise distinct; EqualImages propagates
    from the underlying alpha measurements otherwise.
    """
    pairs = [(float(s), float(t)) for s, t in pairs]
    if not pairs:
        raise ValueError("pairs must be nonempty")
    worst = 0.0
    for s, t in pairs:
        a_xy = compute_alpha(oracle, x, y, s * t, tol).alpha
        a_xz = compute_alpha(oracle, x, z, s, tol).alpha
        a_zy = compute_alpha(oracle, z, y, t, tol).alpha
        worst = max(
            worst, abs(math.log(a_xy) - math.log(a_xz) - math.log(a_zy))
        )
    return LawReport(
        max_log_residual=worst, checks=len(pairs), passed=worst <= tol_log
    )


def estimate_exponent(oracle: Oracle, x, y, t_grid=None,
                      tol: Tolerances = DEFAULT_TOLS) -> ExponentEstimate:
    """Fit log alpha_{x,y}(t) = c log t + intercept by least squares.

    The grid must hold at least 5 positive weights spanning a ratio of
    at least 16, so the slope is determined by a real lever arm;
    DegenerateGrid otherwise.  For ratio-of-affine oracles c is 1 and
    the fit is exact up to rounding.
    """
    grid = np.asarray(DEFAULT_T_GRID if t_grid is None else t_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 5:
        raise DegenerateGrid(f"need at least 5 grid points, got {grid.size}")
    if not np.all(np.isfinite(grid)) or not np.all(grid > 0.0):
        raise DegenerateGrid("grid weights must be positive floats")
    if float(grid.max() / grid.min()) < 16.0:
        raise DegenerateGrid("grid must span at least a factor of 16")
    log_t = np.log(grid)
    log_a = np.array(
        [math.log(compute_alpha(oracle, x, y, t, tol).alpha) for t in grid]
    )
    slope, intercept = np.polyfit(log_t, log_a, 1)
    fitted = slope * log_t + intercept
    return ExponentEstimate(
        c_hat=float(slope),
        intercept=float(intercept),
        max_log_residual=float(np.max(np.abs(log_a - fitted))),
        sample_count=int(grid.size),
    )
