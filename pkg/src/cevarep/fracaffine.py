"""Ratio-of-affine maps f(x) = (A x + a) / (B . x + b).

The map lives on the open half-space D = { x : B . x + b > 0 }.  Maps of
this form carry segments onto segments: the image of the chord from x to
y is the chord from f(x) to f(y), traversed under the reparametrization
lambda_reparam below.  The representation is stored in canonical form,
scaled so the denominator equals one at a chosen anchor point; two
parameter sets describing the same map then coincide.

The affine case is the slice B = 0, b = 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from cevarep import kernels
from cevarep.errors import (
    DimensionMismatch,
    EmptyDomain,
    OutOfDomain,
    RegionEscapesDomain,
)
from cevarep.geom import DEFAULT_TOLS, AffineFunctional, AffineMap, Tolerances, as_vec
from cevarep.oracle import Oracle, SamplingRegion


@dataclass(frozen=True)
class FracAffineMap:
    """Canonical ratio of an affine map over an affine functional.

    Construction rescales all four parameter blocks so that
    bottom(anchor) == 1; the anchor must lie strictly inside the domain.
    """

    top: AffineMap
    bottom: AffineFunctional
    anchor: np.ndarray

    def __post_init__(self):
        anchor = as_vec(self.anchor)
        if self.top.in_dim != self.bottom.dim or self.top.in_dim != anchor.size:
            raise DimensionMismatch(
                f"inconsistent input dims: top {self.top.in_dim}, "
                f"bottom {self.bottom.dim}, anchor {anchor.size}"
            )
        anchor.flags.writeable = False
        object.__setattr__(self, "anchor", anchor)
        beta0 = self.bottom(anchor)
        if beta0 <= 0.0:
            raise EmptyDomain(
                f"denominator at the anchor is {beta0:.3e}; "
                "the anchor must lie strictly inside the half-space"
            )
        if beta0 != 1.0:
            object.__setattr__(
                self,
                "top",
                AffineMap(self.top.matrix / beta0, self.top.offset / beta0),
            )
            object.__setattr__(
                self,
                "bottom",
                AffineFunctional(self.bottom.row / beta0, self.bottom.offset / beta0),
            )

    @property
    def in_dim(self) -> int:
        return self.top.in_dim

    @property
    def out_dim(self) -> int:
        return self.top.out_dim

    def bottom_value(self, x, tol: Tolerances = DEFAULT_TOLS) -> float:
        """Denominator at x; OutOfDomain unless strictly positive."""
        beta = self.bottom(x)
        if beta <= tol.tol_eq:
            raise OutOfDomain(
                f"denominator {beta:.3e} is not strictly positive at the point"
            )
        return beta

    def eval(self, x, tol: Tolerances = DEFAULT_TOLS) -> np.ndarray:
        x = as_vec(x)
        if x.size != self.in_dim:
            raise DimensionMismatch(f"expected dim {self.in_dim}, got {x.size}")
        num, beta = kernels.eval_one(
            self.top.matrix, self.top.offset, self.bottom.row, self.bottom.offset, x
        )
        if beta <= tol.tol_eq:
            raise OutOfDomain(
                f"denominator {beta:.3e} is not strictly positive at the point"
            )
        return num / beta

    def eval_many(self, X, tol: Tolerances = DEFAULT_TOLS) -> np.ndarray:
        """Row-wise images of a (k, n) batch."""
        X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
        if X.ndim != 2 or X.shape[1] != self.in_dim:
            raise DimensionMismatch(
                f"expected shape (k, {self.in_dim}), got {X.shape}"
            )
        Y, beta = kernels.eval_many(
            self.top.matrix, self.top.offset, self.bottom.row, self.bottom.offset, X
        )
        if X.shape[0] and float(beta.min()) <= tol.tol_eq:
            bad = int(np.argmin(beta))
            raise OutOfDomain(
                f"denominator {beta[bad]:.3e} at batch row {bad} "
                "is not strictly positive"
            )
        return Y

    def __call__(self, x) -> np.ndarray:
        return self.eval(x)

    def renormalized(self, anchor) -> "FracAffineMap":
        """Same map, canonical form taken at a different anchor."""
        return FracAffineMap(self.top, self.bottom, anchor)

    def to_json_dict(self) -> dict:
        return {
            "n": self.in_dim,
            "m": self.out_dim,
            "A": [[float(v) for v in row] for row in self.top.matrix],
            "a": [float(v) for v in self.top.offset],
            "B": [float(v) for v in self.bottom.row],
            "b": float(self.bottom.offset),
            "anchor": [float(v) for v in self.anchor],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FracAffineMap":
        try:
            n = int(doc["n"])
            m = int(doc["m"])
            A = np.asarray(doc["A"], dtype=float)
            a = np.asarray(doc["a"], dtype=float)
            B = np.asarray(doc["B"], dtype=float)
            b = float(doc["b"])
            anchor = np.asarray(doc["anchor"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed map document: {exc}") from exc
        if A.shape != (m, n):
            raise DimensionMismatch(f"A has shape {A.shape}, expected ({m}, {n})")
        if a.shape != (m,):
            raise DimensionMismatch(f"a has shape {a.shape}, expected ({m},)")
        if B.shape != (n,):
            raise DimensionMismatch(f"B has shape {B.shape}, expected ({n},)")
        if anchor.shape != (n,):
            raise DimensionMismatch(
                f"anchor has shape {anchor.shape}, expected ({n},)"
            )
        return cls(AffineMap(A, a), AffineFunctional(B, b), anchor)

    @classmethod
    def from_json(cls, text: str) -> "FracAffineMap":
        return cls.from_json_dict(json.loads(text))


def lambda_reparam(f: FracAffineMap, x, y, t: float,
                   tol: Tolerances = DEFAULT_TOLS) -> float:
    """Image-side chord parameter matching the input-side parameter t.

    For t in ]0, 1[, f(convex_combine(x, y, t)) equals
    convex_combine(f(x), f(y), lambda_reparam(f, x, y, t)).  Writing
    beta_x, beta_y for the denominators at x and y:

        lambda(t) = t beta_x / (t beta_x + (1 - t) beta_y)

    which is the identity when f is affine.
    """
    t = float(t)
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie strictly inside ]0,1[, got {t}")
    bx = f.bottom_value(x, tol)
    by = f.bottom_value(y, tol)
    return t * bx / (t * bx + (1.0 - t) * by)


def lambda_inverse(f: FracAffineMap, x, y, s: float,
                   tol: Tolerances = DEFAULT_TOLS) -> float:
    """Inverse of lambda_reparam in its t argument: the input-side
    parameter whose image-side parameter is s in ]0, 1[."""
    s = float(s)
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie strictly inside ]0,1[, got {s}")
    bx = f.bottom_value(x, tol)
    by = f.bottom_value(y, tol)
    return s * by / (s * by + (1.0 - s) * bx)


def compose(g: FracAffineMap, f: FracAffineMap,
            tol: Tolerances = DEFAULT_TOLS) -> FracAffineMap:
    """The map x -> g(f(x)), again a ratio of affine maps.

    With f = (Af x + af) / (Bf . x + bf) and likewise g, multiplying
    through by the inner denominator gives the composite blocks

        top:    Ag Af + outer(ag, Bf),  Ag af + ag bf
        bottom: Bg Af + bg Bf,          Bg . af + bg bf

    anchored at f's anchor.  EmptyDomain if the composite denominator is
    not positive there, meaning g's domain misses f(anchor).
    """
    if g.in_dim != f.out_dim:
        raise DimensionMismatch(
            f"inner map produces dim {f.out_dim}, outer consumes {g.in_dim}"
        )
    Af, af = f.top.matrix, f.top.offset
    Bf, bf = f.bottom.row, f.bottom.offset
    Ag, ag = g.top.matrix, g.top.offset
    Bg, bg = g.bottom.row, g.bottom.offset
    top = AffineMap(Ag @ Af + np.outer(ag, Bf), Ag @ af + ag * bf)
    bottom = AffineFunctional(Bg @ Af + bg * Bf, float(Bg @ af + bg * bf))
    if bottom(f.anchor) <= tol.tol_eq:
        raise EmptyDomain(
            "composite denominator is not positive at the anchor; "
            "the outer map's domain misses the inner image there"
        )
    return FracAffineMap(top, bottom, f.anchor)


def random_fracaffine(n: int, m: int, rng_seed: int = 0,
                      spread: float = 0.3) -> FracAffineMap:
    """Random map with denominator 1 + B . x, B uniform in [-spread,
    spread]^n, anchored at the origin.  Deterministic per seed."""
    if n < 1 or m < 1:
        raise DimensionMismatch(f"dimensions must be >= 1, got n={n}, m={m}")
    if not 0.0 <= spread:
        raise ValueError("spread must be nonnegative")
    rng = np.random.default_rng(rng_seed)
    A = rng.uniform(-spread, spread, size=(m, n))
    a = rng.uniform(-spread, spread, size=m)
    B = rng.uniform(-spread, spread, size=n)
    return FracAffineMap(AffineMap(A, a), AffineFunctional(B, 1.0), np.zeros(n))


def min_bottom_over_box(f: FracAffineMap, region: SamplingRegion) -> float:
    """Exact minimum of the denominator over an axis-aligned box.

    An affine function attains its box minimum coordinate-wise, so the
    minimum is offset plus the per-axis min of row_i * lo_i and
    row_i * hi_i; no corner enumeration needed.
    """
    if region.dim != f.in_dim:
        raise DimensionMismatch(
            f"region dim {region.dim} does not match map dim {f.in_dim}"
        )
    row = f.bottom.row
    return float(
        f.bottom.offset + np.sum(np.minimum(row * region.lo, row * region.hi))
    )


def as_oracle(f: FracAffineMap, region: SamplingRegion,
              tol: Tolerances = DEFAULT_TOLS, name: str = "fracaffine") -> Oracle:
    """Wrap a map as a black-box oracle over a sampling box.

    The whole box must sit strictly inside the domain, checked exactly
    via min_bottom_over_box; RegionEscapesDomain otherwise.
    """
    worst = min_bottom_over_box(f, region)
    if worst <= tol.tol_eq:
        raise RegionEscapesDomain(
            f"denominator reaches {worst:.3e} on the box; the sampling "
            "region must stay strictly inside the half-space"
        )

    def _eval(x):
        return f.eval(x, tol)

    def _eval_many(X):
        return f.eval_many(X, tol)

    def _in_domain(x):
        return f.bottom(as_vec(x)) > tol.tol_eq

    return Oracle(
        eval=_eval,
        in_domain=_in_domain,
        region=region,
        eval_many=_eval_many,
        name=name,
    )
