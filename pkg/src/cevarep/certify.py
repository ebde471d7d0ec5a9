"""Black-box certification of strict segment inclusion.

A map f carries the open segment between x and y into the open segment
between f(x) and f(y) exactly when f is a ratio of affine maps (on a
convex domain, up to degenerate cases).  The certifier tests a black-box
oracle for this property: per trial it draws points from the oracle's
sampling box, probes interior points of chords, and checks

  * the probe image lies on the image chord (collinearity residual),
  * its coordinate is strictly interior (open inclusion),
  * the split-ratio inverse law  alpha_{x,y}(t) * alpha_{y,x}(1/t) = 1,
  * the split-ratio multiplicative law
        alpha_{x,y}(s t) = alpha_{x,z}(s) * alpha_{z,y}(t),
  * a power-law fit alpha(t) ~ alpha(1) t^c with positive, pairwise
    consistent exponent.

Each violation is recorded as a Witness holding the raw points and
weights, so it can be re-verified from the report alone.  Trials are
driven by counter-keyed random streams: stream i depends only on
(seed, i), so reports are bitwise reproducible regardless of batching.

Guard bands: the split coordinate of a probe on a chord of image length
L carries roundoff of order eps/L^2, so law checks and strict-interior
checks are only applied on chords long enough that an honest map cannot
trip them by rounding alone (law_gate and interior_gate below).  Short
chords still get the collinearity check, which is absolutely scaled and
safe at any length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from cevarep import kernels
from cevarep.alpha import (
    DEFAULT_T_GRID,
    EqualImages,
    NotOnOpenSegment,
    estimate_exponent,
)
from cevarep.errors import OracleFailure, UnknownName
from cevarep.fracaffine import (
    FracAffineMap,
    as_oracle,
    random_fracaffine,
)
from cevarep.geom import (
    AffineFunctional,
    AffineMap,
    Tolerances,
    convex_combine,
)
from cevarep.oracle import Oracle, SamplingRegion, oracle_eval_many


@dataclass(frozen=True)
class CertifyConfig:
    """Trial counts, streams, thresholds and guard bands."""

    trials: int = 1000
    rng_seed: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)
    law_tol: float = 1e-9
    exponent_tol: float = 1e-6
    exponent_pairs: int = 5
    t_grid: tuple = DEFAULT_T_GRID
    # strict-interior margin on the image coordinate
    interior_margin: float = 1e-12
    # minimum image chord length (relative) for the interior check
    interior_gate: float = 1e-6
    # minimum image chord length (relative) for alpha-law checks
    law_gate: float = 5e-3
    # chord parameters are drawn inside this band, never at the endpoints
    t_band: tuple = (0.01, 0.99)
    max_witnesses: int = 25


@dataclass(frozen=True)
class Witness:
    """A re-verifiable record of one failed check.

    points and t_values are everything needed to recompute residual with
    reverify_witness; kind is one of off_chord, outside_open,
    inverse_law, multiplicative_law, exponent, refined by detail.
    """

    kind: str
    detail: str
    trial: int
    points: tuple
    t_values: tuple
    residual: float

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "detail": self.detail,
            "trial": self.trial,
            "points": [[float(v) for v in p] for p in self.points],
            "t_values": [float(t) for t in self.t_values],
            "residual": float(self.residual),
        }


@dataclass(frozen=True)
class CertReport:
    verdict: str
    trials: int
    witnesses: tuple
    c_estimates: tuple
    ceva_max_log_residual: float
    violations: int
    skipped: int
    counts: dict
    tested_property: str = "open segment inclusion"

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "trials": self.trials,
            "witnesses": [w.to_json_dict() for w in self.witnesses],
            "c_estimates": [
                {
                    "c_hat": float(e.c_hat),
                    "intercept": float(e.intercept),
                    "max_log_residual": float(e.max_log_residual),
                    "sample_count": int(e.sample_count),
                }
                for e in self.c_estimates
            ],
            "ceva_max_log_residual": float(self.ceva_max_log_residual),
            "violations": self.violations,
            "skipped": self.skipped,
            "counts": dict(self.counts),
            "tested_property": self.tested_property,
        }


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    # counter-keyed stream: depends only on (seed, index), not on call order
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_trials(seed: int, trials: int, region: SamplingRegion, band):
    n = region.dim
    lo, hi = region.lo, region.hi
    width = hi - lo
    X = np.empty((trials, n))
    Y = np.empty((trials, n))
    Z = np.empty((trials, n))
    Tc = np.empty(trials)
    Ta = np.empty(trials)
    Sm = np.empty(trials)
    Tm = np.empty(trials)
    b_lo, b_hi = band
    log_span = math.log(16.0)
    for i in range(trials):
        u = _trial_rng(seed, i).uniform(size=3 * n + 4)
        X[i] = lo + u[0:n] * width
        Y[i] = lo + u[n:2 * n] * width
        Z[i] = lo + u[2 * n:3 * n] * width
        Tc[i] = b_lo + (b_hi - b_lo) * u[3 * n]
        Ta[i] = math.exp(math.log(0.25) + log_span * u[3 * n + 1])
        Sm[i] = math.exp(math.log(0.25) + log_span * u[3 * n + 2])
        Tm[i] = math.exp(math.log(0.25) + log_span * u[3 * n + 3])
    return X, Y, Z, Tc, Ta, Sm, Tm


def _combine_rows(P, Q, T):
    return T[:, None] * P + (1.0 - T)[:, None] * Q


@dataclass
class _ProbeCheck:
    """Vectorized classification of one probe family against its chord."""

    s: np.ndarray
    bad_singleton: np.ndarray
    bad_resid: np.ndarray
    bad_coord: np.ndarray
    law_clean: np.ndarray
    resid_rel: np.ndarray
    gap_rel: np.ndarray
    seglen: np.ndarray


def _classify(FP, FQ, FM, active, cfg: CertifyConfig) -> _ProbeCheck:
    tol = cfg.tolerances
    s, resid, seglen, gap, pn, qn = kernels.chord_stats(FP, FQ, FM)
    scale = np.maximum(1.0, np.maximum(pn, qn))
    singleton = seglen <= tol.tol_eq * scale
    gap_rel = gap / scale
    bad_singleton = active & singleton & (gap_rel > tol.tol_eq)
    with np.errstate(invalid="ignore", divide="ignore"):
        resid_rel = resid / np.maximum(1.0, seglen)
    nondeg = active & ~singleton
    bad_resid = nondeg & (resid_rel > tol.tol_collinear)
    checkable = nondeg & ~bad_resid & (seglen > cfg.interior_gate * scale)
    margin = cfg.interior_margin
    with np.errstate(invalid="ignore"):
        outside = (s <= margin) | (s >= 1.0 - margin)
    bad_coord = checkable & outside
    law_clean = (
        nondeg
        & ~bad_resid
        & ~bad_coord
        & (seglen > cfg.law_gate * scale)
        & ~outside
    )
    return _ProbeCheck(
        s=s,
        bad_singleton=bad_singleton,
        bad_resid=bad_resid,
        bad_coord=bad_coord,
        law_clean=law_clean,
        resid_rel=resid_rel,
        gap_rel=gap_rel,
        seglen=seglen,
    )


def _log_alpha(s):
    return np.log(s) - np.log(1.0 - s)


def _scalar_log_alpha(s: float) -> float:
    return math.log(s) - math.log(1.0 - s)


def certify(oracle: Oracle, cfg: CertifyConfig = CertifyConfig()) -> CertReport:
    """Run the full certification harness against an oracle.

    Returns a CertReport with verdict "pass", "violated" or
    "inconclusive" (the latter when more than half the trials drew
    degenerate point pairs, e.g. on a zero-width region).  Oracle
    exceptions and non-finite images raise OracleFailure.
    """
    if cfg.trials < 1:
        raise ValueError("trials must be >= 1")
    if cfg.rng_seed < 0:
        raise ValueError("rng_seed must be >= 0")
    tol = cfg.tolerances
    k = cfg.trials
    X, Y, Z, Tc, Ta, Sm, Tm = _draw_trials(
        cfg.rng_seed, k, oracle.region, cfg.t_band
    )

    # probe families; every probe is built with the same t*p + (1-t)*q
    # arithmetic that reverify_witness uses
    T_half = np.full(k, 0.5)
    T_inv = 1.0 / (1.0 + Ta)
    T_xy = 1.0 / (1.0 + Sm * Tm)
    T_xz = 1.0 / (1.0 + Sm)
    T_zy = 1.0 / (1.0 + Tm)
    blocks = [
        X, Y, Z,
        _combine_rows(X, Y, Tc),
        _combine_rows(X, Y, T_half),
        _combine_rows(X, Y, T_inv),
        _combine_rows(X, Y, T_xy),
        _combine_rows(X, Z, T_xz),
        _combine_rows(Z, Y, T_zy),
    ]
    try:
        images = oracle_eval_many(oracle, np.vstack(blocks))
    except Exception as exc:
        raise OracleFailure(f"oracle raised during evaluation: {exc}") from exc
    if not np.all(np.isfinite(images)):
        raise OracleFailure("oracle produced a non-finite image")
    FX, FY, FZ, FM1, FM5, FPinv, FPxy, FPxz, FPzy = np.split(images, 9)

    scale_in = np.maximum(
        1.0,
        np.maximum(np.linalg.norm(X, axis=1), np.linalg.norm(Y, axis=1)),
    )
    skipped_mask = np.linalg.norm(Y - X, axis=1) <= tol.tol_eq * scale_in
    active = ~skipped_mask

    checks = {
        "m1": (_classify(FX, FY, FM1, active, cfg), X, Y, Tc),
        "m5": (_classify(FX, FY, FM5, active, cfg), X, Y, T_half),
        "pinv": (_classify(FX, FY, FPinv, active, cfg), X, Y, T_inv),
        "pxy": (_classify(FX, FY, FPxy, active, cfg), X, Y, T_xy),
        "pxz": (_classify(FX, FZ, FPxz, active, cfg), X, Z, T_xz),
        "pzy": (_classify(FZ, FY, FPzy, active, cfg), Z, Y, T_zy),
    }

    events = []
    violations = 0

    def _record(mask, order, maker):
        nonlocal violations
        idx = np.flatnonzero(mask)
        violations += idx.size
        for i in idx:
            events.append((int(i), order, maker(int(i))))

    margin = cfg.interior_margin
    for order, (label, (chk, P, Q, T)) in enumerate(checks.items()):
        _record(
            chk.bad_singleton,
            3 * order,
            lambda i, P=P, Q=Q, T=T, chk=chk: Witness(
                "off_chord", "singleton", i, (P[i].copy(), Q[i].copy()),
                (float(T[i]),), float(chk.gap_rel[i]),
            ),
        )
        _record(
            chk.bad_resid,
            3 * order + 1,
            lambda i, P=P, Q=Q, T=T, chk=chk: Witness(
                "off_chord", "residual", i, (P[i].copy(), Q[i].copy()),
                (float(T[i]),), float(chk.resid_rel[i]),
            ),
        )
        _record(
            chk.bad_coord,
            3 * order + 2,
            lambda i, P=P, Q=Q, T=T, chk=chk: Witness(
                "outside_open", "coordinate", i, (P[i].copy(), Q[i].copy()),
                (float(T[i]),),
                float(max(margin - chk.s[i], chk.s[i] - (1.0 - margin))),
            ),
        )

    base_order = 3 * len(checks)
    chk_inv = checks["pinv"][0]
    inv_ok = chk_inv.law_clean
    with np.errstate(invalid="ignore", divide="ignore"):
        s_fwd = chk_inv.s
        # coordinate of the same probe image read from the other end
        s_rev, _, _, _, _, _ = kernels.chord_stats(FY, FX, FPinv)
        r_inv = np.abs(_log_alpha(s_fwd) + _log_alpha(s_rev))
    bad_inv = inv_ok & (r_inv > cfg.law_tol)
    _record(
        bad_inv,
        base_order,
        lambda i: Witness(
            "inverse_law", "log_residual", i, (X[i].copy(), Y[i].copy()),
            (float(T_inv[i]),), float(r_inv[i]),
        ),
    )

    chk_xy, chk_xz, chk_zy = (checks[k][0] for k in ("pxy", "pxz", "pzy"))
    mult_ok = chk_xy.law_clean & chk_xz.law_clean & chk_zy.law_clean
    with np.errstate(invalid="ignore", divide="ignore"):
        r_mult = np.abs(
            _log_alpha(chk_xy.s) - _log_alpha(chk_xz.s) - _log_alpha(chk_zy.s)
        )
    bad_mult = mult_ok & (r_mult > cfg.law_tol)
    _record(
        bad_mult,
        base_order + 1,
        lambda i: Witness(
            "multiplicative_law", "log_residual", i,
            (X[i].copy(), Y[i].copy(), Z[i].copy()),
            (float(T_xy[i]), float(T_xz[i]), float(T_zy[i])),
            float(r_mult[i]),
        ),
    )
    if np.any(mult_ok):
        ceva_max = float(np.max(r_mult[mult_ok]))
    else:
        ceva_max = 0.0

    # exponent estimates on the first few trials with a usable chord
    chk_m1 = checks["m1"][0]
    estimates = []
    est_refs = []
    candidates = np.flatnonzero(chk_m1.law_clean)
    attempts = 0
    for i in candidates:
        if len(estimates) >= cfg.exponent_pairs or attempts >= 4 * cfg.exponent_pairs:
            break
        attempts += 1
        try:
            est = estimate_exponent(oracle, X[i], Y[i], cfg.t_grid, tol)
        except (NotOnOpenSegment, EqualImages):
            continue
        estimates.append(est)
        est_refs.append(int(i))
        if est.max_log_residual > cfg.exponent_tol:
            violations += 1
            events.append((int(i), base_order + 2, Witness(
                "exponent", "power_law_residual", int(i),
                (X[i].copy(), Y[i].copy()), tuple(cfg.t_grid),
                float(est.max_log_residual),
            )))
        if est.c_hat <= 0.0:
            violations += 1
            events.append((int(i), base_order + 3, Witness(
                "exponent", "negative_slope", int(i),
                (X[i].copy(), Y[i].copy()), tuple(cfg.t_grid),
                float(-est.c_hat),
            )))
    for pos in range(1, len(estimates)):
        gapc = abs(estimates[pos].c_hat - estimates[0].c_hat)
        if gapc > cfg.exponent_tol:
            violations += 1
            i0, ip = est_refs[0], est_refs[pos]
            events.append((ip, base_order + 4, Witness(
                "exponent", "slope_mismatch", ip,
                (X[i0].copy(), Y[i0].copy(), X[ip].copy(), Y[ip].copy()),
                tuple(cfg.t_grid), float(gapc),
            )))

    events.sort(key=lambda e: (e[0], e[1]))
    witnesses = tuple(w for _, _, w in events[:cfg.max_witnesses])

    skipped = int(skipped_mask.sum())
    if violations > 0:
        verdict = "violated"
    elif skipped > k // 2:
        verdict = "inconclusive"
    else:
        verdict = "pass"

    counts = {
        "chord_checks": 6 * int(active.sum()),
        "inverse_law_checked": int(inv_ok.sum()),
        "multiplicative_law_checked": int(mult_ok.sum()),
        "exponent_pairs": len(estimates),
    }
    return CertReport(
        verdict=verdict,
        trials=k,
        witnesses=witnesses,
        c_estimates=tuple(estimates),
        ceva_max_log_residual=ceva_max,
        violations=int(violations),
        skipped=skipped,
        counts=counts,
    )


def reverify_witness(oracle: Oracle, w: Witness,
                     cfg: CertifyConfig = CertifyConfig()) -> float:
    """Recompute a witness's residual from its stored points alone.

    Uses the same probe construction and kernels as certify, so for a
    deterministic oracle the recomputed value matches the stored one to
    floating-point reproduction accuracy.
    """
    tol = cfg.tolerances
    margin = cfg.interior_margin

    def _img(p):
        return np.asarray(oracle.eval(np.asarray(p, dtype=float)), dtype=float)

    def _chord(p, q, t):
        fp = _img(p).reshape(1, -1)
        fq = _img(q).reshape(1, -1)
        fm = _img(convex_combine(p, q, t)).reshape(1, -1)
        return kernels.chord_stats(fp, fq, fm)

    if w.kind in ("off_chord", "outside_open"):
        p, q = w.points
        t = w.t_values[0]
        s, resid, seglen, gap, pn, qn = _chord(p, q, t)
        scale = max(1.0, float(pn[0]), float(qn[0]))
        if w.detail == "singleton":
            return float(gap[0]) / scale
        if w.detail == "residual":
            return float(resid[0]) / max(1.0, float(seglen[0]))
        return float(max(margin - s[0], s[0] - (1.0 - margin)))
    if w.kind == "inverse_law":
        p, q = w.points
        t = w.t_values[0]
        fp = _img(p).reshape(1, -1)
        fq = _img(q).reshape(1, -1)
        fm = _img(convex_combine(p, q, t)).reshape(1, -1)
        s_fwd = kernels.chord_stats(fp, fq, fm)[0][0]
        s_rev = kernels.chord_stats(fq, fp, fm)[0][0]
        return float(abs(_scalar_log_alpha(s_fwd) + _scalar_log_alpha(s_rev)))
    if w.kind == "multiplicative_law":
        x, y, z = w.points
        t_xy, t_xz, t_zy = w.t_values
        s_xy = _chord(x, y, t_xy)[0][0]
        s_xz = _chord(x, z, t_xz)[0][0]
        s_zy = _chord(z, y, t_zy)[0][0]
        return float(abs(
            _scalar_log_alpha(s_xy)
            - _scalar_log_alpha(s_xz)
            - _scalar_log_alpha(s_zy)
        ))
    if w.kind == "exponent":
        grid = w.t_values
        if w.detail == "slope_mismatch":
            x0, y0, x1, y1 = w.points
            e0 = estimate_exponent(oracle, x0, y0, grid, tol)
            e1 = estimate_exponent(oracle, x1, y1, grid, tol)
            return float(abs(e1.c_hat - e0.c_hat))
        x, y = w.points
        est = estimate_exponent(oracle, x, y, grid, tol)
        if w.detail == "negative_slope":
            return float(-est.c_hat)
        return float(est.max_log_residual)
    raise UnknownName(f"unknown witness kind {w.kind!r}")


_ZOO_MEMBERS = (
    "identity",
    "constant",
    "random_affine",
    "random_fracaffine",
    "scalar_moebius",
    "embedded_monotone",
    "parabola_bend",
    "cubic_coords",
)


def _box(lo, hi, n):
    return SamplingRegion(np.full(n, float(lo)), np.full(n, float(hi)))


def zoo(name: str, **params) -> Oracle:
    """Built-in oracles for exercising the certifier and extractor.

    Members: identity, constant, random_affine, random_fracaffine,
    scalar_moebius, embedded_monotone (1-D domain embedded affinely in
    the plane), parabola_bend (breaks chords), cubic_coords (a
    coordinatewise homeomorphism that is not segment preserving).
    """
    if name == "identity":
        n = int(params.pop("n", 2))
        half = float(params.pop("half", 1.0))
        _no_extras(name, params)
        f = FracAffineMap(
            AffineMap(np.eye(n), np.zeros(n)),
            AffineFunctional(np.zeros(n), 1.0),
            np.zeros(n),
        )
        return as_oracle(f, _box(-half, half, n), name=name)
    if name == "constant":
        n = int(params.pop("n", 2))
        m = int(params.pop("m", 2))
        value = params.pop("value", None)
        half = float(params.pop("half", 1.0))
        _no_extras(name, params)
        a = np.full(m, 0.5) if value is None else np.asarray(value, dtype=float)
        f = FracAffineMap(
            AffineMap(np.zeros((m, n)), a),
            AffineFunctional(np.zeros(n), 1.0),
            np.zeros(n),
        )
        return as_oracle(f, _box(-half, half, n), name=name)
    if name == "random_affine":
        n = int(params.pop("n", 2))
        m = int(params.pop("m", 2))
        seed = int(params.pop("seed", 0))
        spread = float(params.pop("spread", 0.5))
        half = float(params.pop("half", 1.0))
        _no_extras(name, params)
        rng = np.random.default_rng(seed)
        f = FracAffineMap(
            AffineMap(
                rng.uniform(-spread, spread, size=(m, n)),
                rng.uniform(-spread, spread, size=m),
            ),
            AffineFunctional(np.zeros(n), 1.0),
            np.zeros(n),
        )
        return as_oracle(f, _box(-half, half, n), name=name)
    if name == "random_fracaffine":
        n = int(params.pop("n", 2))
        m = int(params.pop("m", 2))
        seed = int(params.pop("seed", 0))
        spread = float(params.pop("spread", 0.3))
        half = float(params.pop("half", 0.5))
        _no_extras(name, params)
        f = random_fracaffine(n, m, rng_seed=seed, spread=spread)
        return as_oracle(f, _box(-half, half, n), name=name)
    if name == "scalar_moebius":
        _no_extras(name, params)
        f = FracAffineMap(
            AffineMap(np.array([[2.0]]), np.array([1.0])),
            AffineFunctional(np.array([1.0]), 2.0),
            np.zeros(1),
        )
        return as_oracle(f, SamplingRegion(np.array([-1.0]), np.array([4.0])),
                         name=name)
    if name == "embedded_monotone":
        slope = float(params.pop("slope", 2.0))
        intercept = float(params.pop("intercept", 0.0))
        half = float(params.pop("half", 1.0))
        _no_extras(name, params)
        f = FracAffineMap(
            AffineMap(np.array([[1.0], [slope]]), np.array([0.0, intercept])),
            AffineFunctional(np.zeros(1), 1.0),
            np.zeros(1),
        )
        return as_oracle(f, _box(-half, half, 1), name=name)
    if name == "parabola_bend":
        half = float(params.pop("half", 1.0))
        _no_extras(name, params)

        def _eval(x):
            x = np.asarray(x, dtype=float)
            return np.array([x[0], x[1] + x[0] * x[0]])

        def _eval_many(Xb):
            Xb = np.asarray(Xb, dtype=float)
            return np.stack([Xb[:, 0], Xb[:, 1] + Xb[:, 0] ** 2], axis=1)

        return Oracle(
            eval=_eval,
            in_domain=lambda x: True,
            region=_box(-half, half, 2),
            eval_many=_eval_many,
            name=name,
        )
    if name == "cubic_coords":
        n = int(params.pop("n", 2))
        lo = float(params.pop("lo", 0.5))
        hi = float(params.pop("hi", 2.0))
        _no_extras(name, params)

        def _eval(x):
            x = np.asarray(x, dtype=float)
            return x ** 3

        def _eval_many(Xb):
            return np.asarray(Xb, dtype=float) ** 3

        return Oracle(
            eval=_eval,
            in_domain=lambda x: True,
            region=_box(lo, hi, n),
            eval_many=_eval_many,
            name=name,
        )
    raise UnknownName(
        f"unknown zoo member {name!r}; known members: {', '.join(_ZOO_MEMBERS)}"
    )


def _no_extras(name, params):
    if params:
        raise TypeError(
            f"unexpected parameters for zoo member {name!r}: "
            f"{', '.join(sorted(params))}"
        )
