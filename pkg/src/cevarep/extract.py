"""Recovery of a ratio-of-affine representation from oracle access.

Pipeline: choose a base triple whose images span a genuine triangle,
confirm the probe-ratio exponent is one, tabulate the denominator
surrogate phi and the products phi(x) f(x) over random samples, fit both
tables with affine least squares, assemble the map, and validate it on
held-out points plus random three-point mixtures.

phi is built from split ratios alone: phi(x) = alpha_{x0,x}(1) when f(x)
differs from f(x0), else routed through the second base point.  For a
map in canonical form at x0 this reproduces the denominator B . x + b
exactly, which is what makes both tables affine and the fits well posed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from cevarep import kernels
from cevarep.alpha import DEFAULT_T_GRID, compute_alpha, estimate_exponent
from cevarep.errors import (
    BothBranchesDegenerate,
    CollinearRange,
    ExponentMismatch,
    PositivityViolated,
    ValidationFailed,
)
from cevarep.fracaffine import FracAffineMap
from cevarep.geom import (
    DEFAULT_TOLS,
    Tolerances,
    as_vec,
    fit_affine_scalar,
    fit_affine_vector,
    noncollinearity_measure,
)
from cevarep.oracle import Oracle, oracle_eval_many


@dataclass(frozen=True)
class BaseTriple:
    """Three sample points whose images span a triangle.

    image_noncollinearity is the normalized triangle measure of the
    images; the larger it is, the better conditioned the phi routing.
    """

    x0: np.ndarray
    y0: np.ndarray
    z0: np.ndarray
    image_noncollinearity: float


@dataclass(frozen=True)
class PhiTable:
    """Sampled phi values and phi-weighted images.

    points is (k, n), phi is (k,), phif is (k, m) with rows
    phi(x_i) * f(x_i).  The first three rows are the base triple.
    """

    points: np.ndarray
    phi: np.ndarray
    phif: np.ndarray

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class ExtractConfig:
    """Knobs for extract_representation; defaults suit unit boxes."""

    rng_seed: int = 0
    base_trials: int = 100
    sample_count: Optional[int] = None
    validation_fraction: float = 0.3
    exponent_tol: float = 1e-6
    t_grid: tuple = DEFAULT_T_GRID
    consistency_tuples: int = 20
    cond_cap: float = 1e8
    tolerances: Tolerances = field(default_factory=Tolerances)


@dataclass(frozen=True)
class ExtractResult:
    map: FracAffineMap
    c_hat: float
    fit_residual_phi: float
    fit_residual_phif: float
    validation_sup_error: float
    three_point_max_error: float
    base: BaseTriple

    def to_json_dict(self) -> dict:
        return {
            "map": self.map.to_json_dict(),
            "c_hat": float(self.c_hat),
            "fit_residual_phi": float(self.fit_residual_phi),
            "fit_residual_phif": float(self.fit_residual_phif),
            "validation_sup_error": float(self.validation_sup_error),
            "three_point_max_error": float(self.three_point_max_error),
            "base": {
                "x0": [float(v) for v in self.base.x0],
                "y0": [float(v) for v in self.base.y0],
                "z0": [float(v) for v in self.base.z0],
                "image_noncollinearity": float(self.base.image_noncollinearity),
            },
        }


def _stage_rng(seed: int, stage: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stage,)))


def select_base_triple(oracle: Oracle, trials: int = 100, rng_seed: int = 0,
                       tol: Tolerances = DEFAULT_TOLS) -> BaseTriple:
    """Best-of-N random search for a triple with non-collinear images.

    Raises CollinearRange when no draw beats tol_rank, which happens
    whenever the oracle's image lies on one line, e.g. any map with a
    one-dimensional domain.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = _stage_rng(rng_seed, 0)
    pts = oracle.region.sample(rng, 3 * trials)
    images = oracle_eval_many(oracle, pts)
    best_measure = -1.0
    best = None
    for i in range(trials):
        triple_imgs = images[3 * i:3 * i + 3]
        measure = noncollinearity_measure(triple_imgs)
        if measure > best_measure:
            best_measure = measure
            best = pts[3 * i:3 * i + 3]
    if best_measure <= tol.tol_rank:
        raise CollinearRange(
            f"best image triangle measure over {trials} draws is "
            f"{best_measure:.3e}; the oracle's range looks collinear and "
            "the representation is not identifiable"
        )
    return BaseTriple(
        x0=best[0].copy(), y0=best[1].copy(), z0=best[2].copy(),
        image_noncollinearity=float(best_measure),
    )


def compute_phi(oracle: Oracle, base: BaseTriple, x,
                tol: Tolerances = DEFAULT_TOLS) -> float:
    """The denominator surrogate at x, from split ratios alone.

    phi(x) = alpha_{x0,x}(1) when f(x) != f(x0); otherwise route through
    y0: alpha_{x0,y0}(1) * alpha_{y0,x}(1).  Both branches fail only if
    f(x) equals both base images, which contradicts the base triple
    being a genuine triangle (BothBranchesDegenerate).
    """
    x = as_vec(x)
    fx = as_vec(oracle.eval(x))
    fx0 = as_vec(oracle.eval(base.x0))
    scale = max(1.0, float(np.linalg.norm(fx)), float(np.linalg.norm(fx0)))
    if float(np.linalg.norm(fx - fx0)) > tol.tol_eq * scale:
        return compute_alpha(oracle, base.x0, x, 1.0, tol).alpha
    fy0 = as_vec(oracle.eval(base.y0))
    scale_y = max(1.0, float(np.linalg.norm(fx)), float(np.linalg.norm(fy0)))
    if float(np.linalg.norm(fx - fy0)) <= tol.tol_eq * scale_y:
        raise BothBranchesDegenerate(
            "f(x) coincides with both base images; phi is not measurable here"
        )
    first = compute_alpha(oracle, base.x0, base.y0, 1.0, tol).alpha
    second = compute_alpha(oracle, base.y0, x, 1.0, tol).alpha
    return first * second


def build_phi_table(oracle: Oracle, base: BaseTriple, sample_count: int,
                    rng_seed: int = 0,
                    tol: Tolerances = DEFAULT_TOLS) -> PhiTable:
    """Tabulate phi and phi * f at the base triple plus random samples."""
    n = oracle.region.dim
    if sample_count < n + 2:
        raise ValueError(
            f"sample_count must be at least n + 2 = {n + 2}, got {sample_count}"
        )
    rng = _stage_rng(rng_seed, 1)
    extra = oracle.region.sample(rng, sample_count - 3)
    points = np.vstack([base.x0, base.y0, base.z0, extra])
    images = oracle_eval_many(oracle, points)
    phi = np.array(
        [compute_phi(oracle, base, p, tol) for p in points]
    )
    phif = phi[:, None] * images
    return PhiTable(points=points, phi=phi, phif=phif)


def verify_exponent_one(oracle: Oracle, base: BaseTriple,
                        exponent_tol: float = 1e-6,
                        t_grid=None,
                        tol: Tolerances = DEFAULT_TOLS) -> float:
    """Check c = 1 on the three base pairs; returns the pooled estimate.

    Each pair must fit a clean power law (max log residual within
    exponent_tol) and the pooled slope must be within exponent_tol of
    one; ExponentMismatch otherwise.
    """
    pairs = ((base.x0, base.y0), (base.x0, base.z0), (base.z0, base.y0))
    slopes = []
    for a, b in pairs:
        est = estimate_exponent(oracle, a, b, t_grid, tol)
        if est.max_log_residual > exponent_tol:
            raise ExponentMismatch(
                f"alpha on a base pair deviates from a power law by "
                f"{est.max_log_residual:.3e} in log scale"
            )
        slopes.append(est.c_hat)
    pooled = float(np.mean(slopes))
    if abs(pooled - 1.0) > exponent_tol:
        raise ExponentMismatch(
            f"pooled probe-ratio exponent {pooled:.9f} is not 1 "
            f"within {exponent_tol:g}"
        )
    return pooled


def _positive_weights(rng: np.random.Generator, count: int) -> np.ndarray:
    # log-uniform over [1/4, 4]: symmetric around 1, bounded lever arm
    return np.exp(rng.uniform(np.log(0.25), np.log(4.0), size=count))


def extract_representation(oracle: Oracle,
                           cfg: ExtractConfig = ExtractConfig()) -> ExtractResult:
    """Full pipeline: base triple, exponent gate, tables, fits, checks.

    Raises CollinearRange / ExponentMismatch / RankDeficient /
    PositivityViolated / ValidationFailed on the corresponding failures;
    NotOnOpenSegment from the alpha layer surfaces unchanged when the
    oracle is not segment-preserving to begin with.
    """
    tol = cfg.tolerances
    base = select_base_triple(oracle, cfg.base_trials, cfg.rng_seed, tol)
    c_hat = verify_exponent_one(oracle, base, cfg.exponent_tol, cfg.t_grid, tol)

    n = oracle.region.dim
    count = cfg.sample_count
    if count is None:
        count = max(30, 6 * (n + 2))
    table = build_phi_table(oracle, base, count, cfg.rng_seed, tol)

    rng_split = _stage_rng(cfg.rng_seed, 2)
    k = len(table)
    n_val = int(round(cfg.validation_fraction * k))
    n_val = max(1, min(n_val, k - (n + 2)))
    perm = rng_split.permutation(k)
    val_idx = np.sort(perm[:n_val])
    fit_idx = np.sort(perm[n_val:])

    fit_pts = table.points[fit_idx]
    functional, rep_phi = fit_affine_scalar(
        zip(fit_pts, table.phi[fit_idx]), cfg.cond_cap
    )
    amap, rep_phif = fit_affine_vector(
        zip(fit_pts, table.phif[fit_idx]), cfg.cond_cap
    )
    recovered = FracAffineMap(amap, functional, anchor=base.x0)

    # strict positivity of the recovered denominator on every sample
    beta_all = table.points @ recovered.bottom.row + recovered.bottom.offset
    worst = float(beta_all.min())
    if worst <= tol.tol_eq:
        raise PositivityViolated(
            f"recovered denominator reaches {worst:.3e} on the samples; "
            "a valid representation must keep it strictly positive"
        )

    val_pts = table.points[val_idx]
    oracle_imgs = oracle_eval_many(oracle, val_pts)
    predicted = recovered.eval_many(val_pts, tol)
    err_rows = np.linalg.norm(predicted - oracle_imgs, axis=1)
    scales = np.maximum(1.0, np.linalg.norm(oracle_imgs, axis=1))
    sup_error = float(np.max(err_rows / scales))
    if sup_error > tol.tol_fit:
        raise ValidationFailed(
            f"held-out sup error {sup_error:.3e} exceeds {tol.tol_fit:g}"
        )

    # three-point mixtures: f((t x + s y + r z)/(t+s+r)) must equal the
    # phi-weighted mixture of the endpoint images
    rng_mix = _stage_rng(cfg.rng_seed, 3)
    three_worst = 0.0
    for _ in range(cfg.consistency_tuples):
        pts = oracle.region.sample(rng_mix, 3)
        t, s, r = _positive_weights(rng_mix, 3)
        mix = (t * pts[0] + s * pts[1] + r * pts[2]) / (t + s + r)
        lhs = as_vec(oracle.eval(mix))
        phis = [compute_phi(oracle, base, p, tol) for p in pts]
        imgs = oracle_eval_many(oracle, pts)
        wts = np.array([t * phis[0], s * phis[1], r * phis[2]])
        rhs = (wts[:, None] * imgs).sum(axis=0) / wts.sum()
        err = float(np.linalg.norm(lhs - rhs)) / max(1.0, float(np.linalg.norm(lhs)))
        three_worst = max(three_worst, err)
    if three_worst > tol.tol_fit:
        raise ValidationFailed(
            f"three-point mixture error {three_worst:.3e} exceeds {tol.tol_fit:g}"
        )

    return ExtractResult(
        map=recovered,
        c_hat=c_hat,
        fit_residual_phi=rep_phi.max_abs_residual,
        fit_residual_phif=rep_phif.max_abs_residual,
        validation_sup_error=sup_error,
        three_point_max_error=three_worst,
        base=base,
    )
