"""Closed-form ground truth for the grid engine.

Everything here is evaluated analytically (no grids, no discretization):
the Fitzpatrick function of an affine operator is an explicit quadratic,
the one of a staircase operator is polyhedral with its sup attained at
polyline corners or diverging along an end ray, and piecewise-linear
convex functions conjugate exactly.  The family is deliberately small:
ground truth must be beyond numerical doubt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .extreal import ExtReal, POS_INF
from .operators import OperatorSpec

__all__ = [
    "affine_fitz_exact",
    "StaircaseOracle",
    "staircase_fitz_exact",
    "PLConvexFn",
    "pl_conjugate_exact",
    "fenchel_young_exact",
    "ABS_VALUE",
    "THREE_STEP_FN",
    "oracle_for_operator",
]


def affine_fitz_exact(lam: float, c: float, x: float, xs: float) -> float:
    """Fitzpatrick function of T(y) = lam*y + c, lam > 0:

        sup_y (xs*y + (lam*y + c)(x - y)) = c*x + (xs + lam*x - c)^2 / (4 lam)
    """
    if not lam > 0:
        raise ValueError("affine oracle needs lam > 0")
    t = xs + lam * x - c
    return c * x + t * t / (4.0 * lam)


@dataclass(frozen=True)
class StaircaseOracle:
    """A staircase operator given by its polyline corners and end rays.

    ``left_ray`` is "left" (x -> -inf at the first corner's level) or
    "down" (x* -> -inf at the first corner's abscissa); ``right_ray`` is
    "right" or "up" symmetrically.
    """

    vertices: tuple
    left_ray: str = "left"
    right_ray: str = "right"

    def __post_init__(self):
        verts = tuple((float(a), float(b)) for a, b in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 1:
            raise ValueError("need at least one vertex")
        for (x0, s0), (x1, s1) in zip(verts, verts[1:]):
            if x1 < x0 or s1 < s0 or (x1 != x0) == (s1 != s0):
                raise ValueError("vertices must form a monotone "
                                 "axis-parallel polyline")
        if self.left_ray not in ("left", "down"):
            raise ValueError("left_ray must be 'left' or 'down'")
        if self.right_ray not in ("right", "up"):
            raise ValueError("right_ray must be 'right' or 'up'")

    @staticmethod
    def from_operator(op: OperatorSpec) -> "StaircaseOracle":
        if op.kind == "sign_subdifferential":
            return StaircaseOracle(((0.0, -1.0), (0.0, 1.0)), "left", "right")
        if op.kind == "staircase":
            return StaircaseOracle(op.params["vertices"],
                                   op.params["left_ray"],
                                   op.params["right_ray"])
        raise ValueError(f"no staircase oracle for kind {op.kind!r}")


def staircase_fitz_exact(o: StaircaseOracle, x: float, xs: float) -> ExtReal:
    """Exact Fitzpatrick value of a staircase operator.

    The bilinear objective xs*y + y*(x - y) is affine along every
    axis-parallel piece of the graph, so the sup either diverges along an
    end ray (checked first, strict inequalities: a constant objective
    along a ray keeps the finite corner value) or is attained at a corner.
    """
    x_first, s_first = o.vertices[0]
    x_last, s_last = o.vertices[-1]
    if o.right_ray == "right" and xs > s_last:
        return POS_INF
    if o.right_ray == "up" and x > x_last:
        return POS_INF
    if o.left_ray == "left" and xs < s_first:
        return POS_INF
    if o.left_ray == "down" and x < x_first:
        return POS_INF
    best = -math.inf
    for y, ys in o.vertices:
        best = max(best, xs * y + ys * x - y * ys)
    return ExtReal(best)


# ---------------------------------------------------------------------------
# piecewise-linear convex functions and exact conjugation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PLConvexFn:
    """A proper closed convex piecewise-linear function.

    Finite values at the breakpoints; ``left_slope``/``right_slope``
    describe the behavior beyond the first/last breakpoint, with ``None``
    meaning the domain ends there (the function is +inf beyond).
    """

    breakpoints: tuple
    values: tuple
    left_slope: float | None = None
    right_slope: float | None = None

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        if len(bps) != len(vals) or not bps:
            raise ValueError("breakpoints and values must match and be nonempty")
        if any(b1 <= b0 for b0, b1 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(not math.isfinite(v) for v in vals):
            raise ValueError("breakpoint values must be finite")
        slopes = self._slopes()
        if any(s1 < s0 - 1e-12 * max(1.0, abs(s0))
               for s0, s1 in zip(slopes, slopes[1:])):
            raise ValueError("slopes must be nondecreasing (convexity)")

    def _slopes(self) -> list:
        s = []
        if self.left_slope is not None:
            s.append(float(self.left_slope))
        for (b0, v0), (b1, v1) in zip(zip(self.breakpoints, self.values),
                                      zip(self.breakpoints[1:], self.values[1:])):
            s.append((v1 - v0) / (b1 - b0))
        if self.right_slope is not None:
            s.append(float(self.right_slope))
        return s

    def __call__(self, x: float) -> ExtReal:
        bps, vals = self.breakpoints, self.values
        if x < bps[0]:
            if self.left_slope is None:
                return POS_INF
            return ExtReal(vals[0] + self.left_slope * (x - bps[0]))
        if x > bps[-1]:
            if self.right_slope is None:
                return POS_INF
            return ExtReal(vals[-1] + self.right_slope * (x - bps[-1]))
        for (b0, v0), (b1, v1) in zip(zip(bps, vals), zip(bps[1:], vals[1:])):
            if b0 <= x <= b1:
                t = (x - b0) / (b1 - b0)
                return ExtReal(v0 + t * (v1 - v0))
        return ExtReal(vals[-1])


def pl_conjugate_exact(f: PLConvexFn) -> PLConvexFn:
    """Exact conjugate of a PL convex function, itself PL convex.

    The conjugate's breakpoints are the distinct finite slopes of ``f``;
    on the slope interval subdifferentiated at breakpoint x_i the
    conjugate is affine with slope x_i, so its values are
    max_i (s*x_i - v_i).
    """
    bps, vals = f.breakpoints, f.values
    slopes = []
    for s in f._slopes():
        if not slopes or s > slopes[-1]:
            slopes.append(s)

    def sup_at(s: float) -> float:
        return max(s * b - v for b, v in zip(bps, vals))

    if not slopes:
        # single breakpoint, no slopes: a point indicator; conjugate affine
        return PLConvexFn((0.0,), (-vals[0],),
                          left_slope=bps[0], right_slope=bps[0])
    conj_vals = tuple(sup_at(s) for s in slopes)
    left = bps[0] if f.left_slope is None else None
    right = bps[-1] if f.right_slope is None else None
    return PLConvexFn(tuple(slopes), conj_vals,
                      left_slope=left, right_slope=right)


def fenchel_young_exact(f: PLConvexFn, x: float, xs: float) -> ExtReal:
    """The representative f(x) + f*(x*) of T = subdifferential of f."""
    return f(x) + pl_conjugate_exact(f)(xs)


ABS_VALUE = PLConvexFn((0.0,), (0.0,), left_slope=-1.0, right_slope=1.0)
"""|x| as a PL function; its subdifferential is the sign operator."""

THREE_STEP_FN = PLConvexFn((-1.0, 1.0), (0.0, 0.0),
                           left_slope=-1.0, right_slope=1.0)
"""max(-x-1, 0, x-1); its subdifferential is a three-step staircase."""


def oracle_for_operator(op: OperatorSpec):
    """Exact Fitzpatrick evaluator (x, x*) -> ExtReal for oracle-backed
    operator kinds; raises for kinds without a closed form."""
    if op.kind == "affine" and op.params["lam"] > 0:
        lam, c = op.params["lam"], op.params["c"]
        return lambda x, xs: ExtReal(affine_fitz_exact(lam, c, x, xs))
    if op.kind in ("sign_subdifferential", "staircase"):
        o = StaircaseOracle.from_operator(op)
        return lambda x, xs: staircase_fitz_exact(o, x, xs)
    raise ValueError(f"no exact oracle for operator kind {op.kind!r}")
