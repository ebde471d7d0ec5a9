"""Cevian concurrency for a triangle in any ambient dimension.

Given a triangle x, y, z and six positive weights, each vertex is joined
to a weighted point on the opposite side.  The three segments meet in a
single point exactly when the product of the t-weights equals the product
of the s-weights; the common point then has a closed form in barycentric
coordinates.  A brute-force two-line intersection in the triangle's own
plane serves as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from cevarep.errors import (
    CollinearVertices,
    ConditionViolated,
    DimensionMismatch,
)
from cevarep.geom import (
    DEFAULT_TOLS,
    Tolerances,
    as_vec,
    noncollinearity_measure,
    point_segment_distance,
)


@dataclass(frozen=True)
class CevaWeights:
    """Positive side-splitting weights (t_x, t_y, t_z, s_x, s_y, s_z).

    The point on side [y, z] divides it with mass t_y at y and s_z at z,
    and cyclically for the other two sides.
    """

    t_x: float
    t_y: float
    t_z: float
    s_x: float
    s_y: float
    s_z: float

    def __post_init__(self):
        for name in ("t_x", "t_y", "t_z", "s_x", "s_y", "s_z"):
            value = float(getattr(self, name))
            if not (np.isfinite(value) and value > 0.0):
                raise ValueError(f"weight {name} must be strictly positive")
            object.__setattr__(self, name, value)

    def scaled(self, factor: float) -> "CevaWeights":
        return CevaWeights(*(factor * w for w in self.astuple()))

    def astuple(self):
        return (self.t_x, self.t_y, self.t_z, self.s_x, self.s_y, self.s_z)


def _checked_triangle(x, y, z, tol: Tolerances):
    x = as_vec(x)
    y = as_vec(y)
    z = as_vec(z)
    if not (x.size == y.size == z.size):
        raise DimensionMismatch("triangle vertices must share a dimension")
    if noncollinearity_measure([x, y, z]) <= tol.tol_rank:
        raise CollinearVertices("triangle vertices are collinear within tolerance")
    return x, y, z


def cevian_points(x, y, z, w: CevaWeights,
                  tol: Tolerances = DEFAULT_TOLS):
    """The weighted points (p, q, r) on sides [y,z], [z,x], [x,y].

        p = (t_y y + s_z z) / (t_y + s_z)
        q = (t_z z + s_x x) / (t_z + s_x)
        r = (t_x x + s_y y) / (t_x + s_y)

    Each lies strictly between its side's endpoints because the weights
    are strictly positive.
    """
    x, y, z = _checked_triangle(x, y, z, tol)
    p = (w.t_y * y + w.s_z * z) / (w.t_y + w.s_z)
    q = (w.t_z * z + w.s_x * x) / (w.t_z + w.s_x)
    r = (w.t_x * x + w.s_y * y) / (w.t_x + w.s_y)
    return p, q, r


def ceva_condition(w: CevaWeights, tol: float = 1e-9) -> bool:
    """Whether t_x t_y t_z equals s_x s_y s_z, compared in the log domain
    so widely scaled weights do not overflow or swamp the tolerance."""
    lhs = np.log(w.t_x) + np.log(w.t_y) + np.log(w.t_z)
    rhs = np.log(w.s_x) + np.log(w.s_y) + np.log(w.s_z)
    return bool(abs(lhs - rhs) <= tol)


def ceva_point(x, y, z, w: CevaWeights, tol: Tolerances = DEFAULT_TOLS,
               condition_tol: float = 1e-9) -> np.ndarray:
    """The common point of the three cevians, in closed form.

    Requires the concurrency condition (ConditionViolated otherwise).
    The point has barycentric weights (s_x / t_z : t_y / s_z : 1) with
    respect to (x, y, z); the result is checked to lie on all three
    cevian segments within tol_collinear before being returned.
    """
    x, y, z = _checked_triangle(x, y, z, tol)
    if not ceva_condition(w, condition_tol):
        raise ConditionViolated(
            "weights fail the concurrency condition t_x t_y t_z = s_x s_y s_z"
        )
    u = w.s_x / w.t_z
    v = w.t_y / w.s_z
    point = (u * x + v * y + z) / (u + v + 1.0)
    p, q, r = cevian_points(x, y, z, w, tol)
    scale = max(1.0, *(float(np.linalg.norm(c)) for c in (x, y, z)))
    for top, foot in ((x, p), (y, q), (z, r)):
        if point_segment_distance(point, top, foot) > tol.tol_collinear * scale:
            raise ConditionViolated(
                "closed-form point misses a cevian segment; the weights "
                "satisfy the condition only marginally"
            )
    return point


def cevian_intersection_bruteforce(x, y, z, w: CevaWeights,
                                   tol: Tolerances = DEFAULT_TOLS
                                   ) -> Optional[np.ndarray]:
    """Common point of the three cevians found without the closed form.

    Works in the triangle's own plane: intersect the first two cevians
    as 2-D lines, then accept only if the intersection lies on all three
    closed segments.  Returns None when there is no common point.  Used
    as an independent check of ceva_point and of the concurrency
    condition itself.
    """
    x, y, z = _checked_triangle(x, y, z, tol)
    p, q, r = cevian_points(x, y, z, w, tol)
    frame = np.stack([y - x, z - x], axis=1)
    Q_basis, _ = np.linalg.qr(frame)

    def coords(v):
        return Q_basis.T @ (v - x)

    x2, y2, z2 = coords(x), coords(y), coords(z)
    p2, q2, r2 = coords(p), coords(q), coords(r)
    # cevian 1: x2 + u (p2 - x2); cevian 2: y2 + v (q2 - y2)
    lhs = np.stack([p2 - x2, -(q2 - y2)], axis=1)
    rhs = y2 - x2
    try:
        uv = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        return None
    u, v = float(uv[0]), float(uv[1])
    slack = tol.tol_collinear
    if not (-slack <= u <= 1.0 + slack and -slack <= v <= 1.0 + slack):
        return None
    candidate2 = x2 + u * (p2 - x2)
    candidate = x + Q_basis @ candidate2
    scale = max(1.0, *(float(np.linalg.norm(c)) for c in (x, y, z)))
    if point_segment_distance(candidate, z, r) > tol.tol_collinear * scale:
        return None
    return candidate
