"""Black-box map access: a sampling box plus an evaluable oracle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from cevarep.errors import DimensionMismatch
from cevarep.geom import as_vec


@dataclass(frozen=True)
class SamplingRegion:
    """Axis-aligned box [lo_1, hi_1] x ... x [lo_n, hi_n].

    Zero-width coordinates are allowed; sampling then always returns the
    single value on that axis.
    """

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = as_vec(self.lo)
        hi = as_vec(self.hi)
        if lo.size != hi.size:
            raise DimensionMismatch(f"corner dims differ: {lo.size} vs {hi.size}")
        if not np.all(lo <= hi):
            raise ValueError("every lo coordinate must be <= the matching hi")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x, slack: float = 0.0) -> bool:
        x = as_vec(x)
        if x.size != self.dim:
            raise DimensionMismatch(f"expected dim {self.dim}, got {x.size}")
        return bool(np.all(x >= self.lo - slack) and np.all(x <= self.hi + slack))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """(count, dim) array of independent uniform draws from the box."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        u = rng.uniform(size=(count, self.dim))
        return self.lo + u * (self.hi - self.lo)


@dataclass
class Oracle:
    """Evaluable black box with a domain test and a sampling box.

    eval maps one point to one image vector and must be side-effect
    free.  eval_many, when provided, takes a (k, n) batch and returns the
    (k, m) image block; harnesses fall back to row-by-row eval when it is
    absent.  in_domain answers whether eval would succeed at a point.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    in_domain: Callable[[np.ndarray], bool]
    region: SamplingRegion
    eval_many: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "oracle"


def oracle_eval_many(oracle: Oracle, X) -> np.ndarray:
    """Batch-evaluate an oracle, using eval_many when it has one.

    Exceptions from the oracle propagate unchanged; harnesses that need
    to report them wrap this call.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a (k, n) batch, got shape {X.shape}")
    if oracle.eval_many is not None:
        Y = np.asarray(oracle.eval_many(X), dtype=float)
        if Y.ndim != 2 or Y.shape[0] != X.shape[0]:
            raise DimensionMismatch(
                f"eval_many returned shape {Y.shape} for {X.shape[0]} points"
            )
        return Y
    return np.stack([as_vec(oracle.eval(x)) for x in X])
