"""Saddle bifunctions and their transforms.

The central construction: from any representative function phi of a
maximal monotone operator, build the saddle bifunction

    F(x, y) = sup_s (s*y - phi*(s, x)),

concave in x and convex-closed in y.  Its transform
phi_F(x, x*) = sup_y (x*.y + F(y, x)) recovers phi, its upper transform
recovers the transposed conjugate, and its diagonal subdifferential
recovers the operator.  The equivalent upper saddle

    Ftilde(x, y) = -(phi(y, .))*(x)

is the concave partial closure of F; every saddle function between F and
Ftilde shares the same transforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convex import (full_conjugate2, partial_conjugate, saddle_cl1,
                     saddle_cl2)
from .grids import (Grid1, GridFn2, PropertyReport, approx_eq, negate2,
                    transpose2)
from .operators import INFINITY_CAP, OperatorSpec, graph_bifunction

__all__ = [
    "SaddlePair",
    "fitzpatrick_transform",
    "upper_fitzpatrick_transform",
    "saddle_from_representative",
    "upper_saddle_from_representative",
    "saddle_pair",
    "saddle_graph_bifunction",
    "is_saddle",
    "is_monotone_bifunction",
    "monotonicity_criterion",
    "equivalent_saddles",
    "sandwich_check",
    "saddle_domains",
]


def _require_bifunction(F: GridFn2, who: str) -> None:
    if F.kind != "bifunction":
        raise ValueError(f"{who} needs a bifunction grid, got {F.kind}")


def fitzpatrick_transform(F: GridFn2, dual: Grid1 | None = None) -> GridFn2:
    """phi_F(x, x*) = sup_y (x*.y + F(y, x)): conjugate of -F in its first
    argument, axes relabeled so the output is (x, x*) with x the former
    second argument."""
    _require_bifunction(F, "fitzpatrick_transform")
    conj = partial_conjugate(negate2(F), "a", dual)   # axes (x*, x)
    return transpose2(conj)


def upper_fitzpatrick_transform(F: GridFn2, dual: Grid1 | None = None) -> GridFn2:
    """phi^F(x, x*) = (F(x, .))*(x*): conjugate along the second argument."""
    _require_bifunction(F, "upper_fitzpatrick_transform")
    return partial_conjugate(F, "b", dual)


def saddle_from_representative(phi: GridFn2,
                               ygrid: Grid1 | None = None) -> GridFn2:
    """F(x, y) = sup_s (s*y - phi*(s, x)).

    Pipeline follows the defining formula: full bivariate conjugate first,
    then a 1-D conjugate in the dual variable of every x-slice.
    """
    if phi.kind != "representative":
        raise ValueError(f"expected a representative grid, got {phi.kind}")
    ygrid = ygrid or phi.grid_a
    conj = full_conjugate2(phi, dual_a=phi.grid_b, dual_b=phi.grid_a)
    # conj axes (x*, x); conjugate the x* axis onto the y grid at fixed x
    F_yx = partial_conjugate(conj, "a", ygrid)        # axes (y, x)
    return transpose2(F_yx)


def upper_saddle_from_representative(phi: GridFn2,
                                     xgrid: Grid1 | None = None) -> GridFn2:
    """Ftilde(x, y) = -(phi(y, .))*(x), the upper member of the saddle class."""
    if phi.kind != "representative":
        raise ValueError(f"expected a representative grid, got {phi.kind}")
    xgrid = xgrid or phi.grid_a
    conj = partial_conjugate(phi, "b", xgrid)         # axes (y, x)
    return transpose2(negate2(conj))


@dataclass(frozen=True)
class SaddlePair:
    """The extreme pair of equivalent saddles induced by one representative."""

    lower: GridFn2
    upper: GridFn2
    source_phi: GridFn2


def saddle_pair(phi: GridFn2, ygrid: Grid1 | None = None) -> SaddlePair:
    return SaddlePair(
        lower=saddle_from_representative(phi, ygrid),
        upper=upper_saddle_from_representative(phi, ygrid),
        source_phi=phi,
    )


def saddle_graph_bifunction(op: OperatorSpec, xgrid: Grid1,
                            ygrid: Grid1) -> GridFn2:
    """Concave hull in the first argument of the graph bifunction.

    The result is a monotone saddle function whose lower/upper closures
    are the extreme saddles of the Fitzpatrick function.
    """
    G = graph_bifunction(op, xgrid, ygrid)
    return saddle_cl1(G)


def is_saddle(F: GridFn2, tol: float, stride: int = 1) -> PropertyReport:
    """Midpoint test on node triples (i-k, i, i+k): concave along the
    first axis, convex along the second, up to tol.

    ``stride`` k widens the stencil: dual-grid slope quantization wobbles
    bound by O(h) regardless of k, while a wrong-curvature direction of
    size c signals as c*(k*h)^2, so wide stencils separate the two.
    """
    _require_bifunction(F, "is_saddle")
    v = F.values
    fin = np.isfinite(v)
    k = max(1, int(stride))

    def worst_midpoint(arr, fin_mask, sign):
        # sign +1: convexity  a[i-k] + a[i+k] >= 2 a[i] - tol
        # sign -1: concavity  a[i-k] + a[i+k] <= 2 a[i] + tol
        if arr.shape[0] <= 2 * k:
            return 0.0
        trip = fin_mask[:-2 * k] & fin_mask[k:-k] & fin_mask[2 * k:]
        if not trip.any():
            return 0.0
        gap = sign * (arr[:-2 * k] + arr[2 * k:] - 2.0 * arr[k:-k])
        return float(np.where(trip, -gap, -np.inf).max())

    worst_convex = 0.0
    worst_concave = 0.0
    for i in range(v.shape[0]):
        worst_convex = max(worst_convex,
                           worst_midpoint(v[i], fin[i], +1.0))
    for j in range(v.shape[1]):
        worst_concave = max(worst_concave,
                            worst_midpoint(v[:, j], fin[:, j], -1.0))
    worst = max(worst_convex, worst_concave)
    return PropertyReport(
        name="is_saddle",
        passed=bool(worst <= tol),
        max_violation=worst,
        tol=tol,
        details={"convexity_in_second": worst_convex,
                 "concavity_in_first": worst_concave,
                 "stride": k},
    )


def is_monotone_bifunction(F: GridFn2, tol: float) -> PropertyReport:
    """F(x, y) + F(y, x) <= tol at every node pair.

    Infinity conventions: a -inf on either side passes the pair; +inf plus
    anything above -inf fails.
    """
    _require_bifunction(F, "is_monotone_bifunction")
    if F.grid_a != F.grid_b:
        raise ValueError("monotonicity needs a square bifunction grid")
    v = F.values
    vt = v.T
    neg = np.isneginf(v) | np.isneginf(vt)
    pos = (np.isposinf(v) | np.isposinf(vt)) & ~neg
    fin = ~neg & ~pos
    sums = np.full(v.shape, -np.inf)
    sums[fin] = v[fin] + vt[fin]
    worst = float(sums.max()) if fin.any() else -math.inf
    n_pos = int(pos.sum())
    passed = (n_pos == 0) and (worst <= tol)
    loc = None
    if fin.any():
        i, j = np.unravel_index(int(np.argmax(sums)), sums.shape)
        loc = (float(F.grid_a.nodes[i]), float(F.grid_b.nodes[j]))
    return PropertyReport(
        name="is_monotone_bifunction",
        passed=bool(passed),
        max_violation=max(worst, 0.0) if math.isfinite(worst) else 0.0,
        location=loc,
        tol=tol,
        details={"posinf_pairs": n_pos},
    )


def monotonicity_criterion(phi: GridFn2, tol: float,
                           cross_check: bool = True) -> PropertyReport:
    """The induced saddle is monotone iff phi <= phi* transposed.

    When ``cross_check`` is set the verdict is compared against directly
    testing the induced saddle; the two must agree.
    """
    if phi.kind != "representative":
        raise ValueError(f"expected a representative grid, got {phi.kind}")
    conj_t = transpose2(full_conjugate2(phi, dual_a=phi.grid_b,
                                        dual_b=phi.grid_a))
    pv, cv = phi.values, conj_t.values
    # phi <= conj + tol with infinity conventions
    bad_inf = np.isposinf(pv) & (cv < INFINITY_CAP) & np.isfinite(cv)
    fin = np.isfinite(pv) & np.isfinite(cv)
    gap = np.full(pv.shape, -np.inf)
    gap[fin] = pv[fin] - cv[fin]
    worst = float(gap.max()) if fin.any() else 0.0
    criterion_holds = (not bad_inf.any()) and worst <= tol

    details = {"criterion_holds": bool(criterion_holds),
               "worst_gap": worst}
    passed = True
    if cross_check:
        F = saddle_from_representative(phi)
        direct = is_monotone_bifunction(F, tol)
        details["direct_verdict"] = bool(direct.passed)
        details["direct_worst"] = direct.max_violation
        passed = bool(direct.passed) == bool(criterion_holds)
    loc = None
    if fin.any():
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        loc = (float(phi.grid_a.nodes[i]), float(phi.grid_b.nodes[j]))
    return PropertyReport(
        name="monotonicity_criterion",
        passed=bool(passed),
        max_violation=max(worst, 0.0),
        location=loc,
        tol=tol,
        details=details,
    )


def equivalent_saddles(F: GridFn2, H: GridFn2, tol: float) -> PropertyReport:
    """Saddle equivalence, decided by two independent routes that must agree:
    equal partial closures, and equal lower/upper transforms."""
    _require_bifunction(F, "equivalent_saddles")
    _require_bifunction(H, "equivalent_saddles")
    if not F.same_grids(H):
        raise ValueError("equivalent_saddles needs identical grids")

    cl1_eq = approx_eq(saddle_cl1(F), saddle_cl1(H), tol, name="cl1")
    cl2_eq = approx_eq(saddle_cl2(F), saddle_cl2(H), tol, name="cl2")
    closures_equal = cl1_eq.passed and cl2_eq.passed

    lo_eq = approx_eq(fitzpatrick_transform(F, F.grid_b),
                      fitzpatrick_transform(H, H.grid_b), tol, name="phi_F")
    up_eq = approx_eq(upper_fitzpatrick_transform(F, F.grid_b),
                      upper_fitzpatrick_transform(H, H.grid_b), tol,
                      name="phi^F")
    transforms_equal = lo_eq.passed and up_eq.passed

    verdicts_agree = closures_equal == transforms_equal
    return PropertyReport(
        name="equivalent_saddles",
        passed=bool(verdicts_agree),
        max_violation=max(cl1_eq.max_violation, cl2_eq.max_violation,
                          lo_eq.max_violation, up_eq.max_violation),
        tol=tol,
        details={
            "equivalent": bool(closures_equal),
            "closure_route": bool(closures_equal),
            "transform_route": bool(transforms_equal),
            "cl1_dev": cl1_eq.max_violation,
            "cl2_dev": cl2_eq.max_violation,
            "transform_dev": max(lo_eq.max_violation, up_eq.max_violation),
        },
    )


def sandwich_check(H: GridFn2, pair: SaddlePair, tol: float) -> PropertyReport:
    """H shares the pair's transforms iff lower - tol <= H <= upper + tol.

    Requires H to pass the saddle midpoint test first; reports
    ``not_applicable`` otherwise.  The verdict is cross-checked against
    the transform equalities.
    """
    _require_bifunction(H, "sandwich_check")
    # wide-stencil gate: quantization wobble of genuine discrete saddles
    # stays O(h) while wrong-curvature directions grow with the stencil
    saddle = is_saddle(H, tol, stride=max(2, H.grid_a.n // 8))
    if not saddle.passed:
        return PropertyReport(
            name="sandwich_check", passed=False, tol=tol,
            max_violation=saddle.max_violation,
            details={"status": "not_applicable",
                     "reason": "midpoint saddle test failed"},
        )
    lo, up = pair.lower.values, pair.upper.values
    hv = H.values

    def gap_above(a, b):
        """max over nodes of (a - b) with inf conventions (a <= b wanted)."""
        fin = np.isfinite(a) & np.isfinite(b)
        bad = np.isposinf(a) & ~np.isposinf(b) | np.isneginf(b) & ~np.isneginf(a)
        g = float((a[fin] - b[fin]).max()) if fin.any() else 0.0
        return g, bool(bad.any())

    g_lo, bad_lo = gap_above(lo, hv)
    g_up, bad_up = gap_above(hv, up)
    between = (not bad_lo) and (not bad_up) and max(g_lo, g_up) <= tol

    phi = pair.source_phi
    t_lo = approx_eq(fitzpatrick_transform(H, phi.grid_b), phi,
                     3 * tol, name="phi_H")
    conj_t = transpose2(full_conjugate2(phi, dual_a=phi.grid_b,
                                        dual_b=phi.grid_a))
    t_up = approx_eq(upper_fitzpatrick_transform(H, phi.grid_b), conj_t,
                     3 * tol, name="phi^H")
    transforms_hold = t_lo.passed and t_up.passed

    passed = between and (between == transforms_hold)
    return PropertyReport(
        name="sandwich_check",
        passed=bool(passed),
        max_violation=max(g_lo, g_up, 0.0),
        tol=tol,
        details={
            "status": "checked",
            "between": bool(between),
            "transforms_hold": bool(transforms_hold),
            "below_gap": g_lo,
            "above_gap": g_up,
            "transform_dev": max(t_lo.max_violation, t_up.max_violation),
        },
    )


def saddle_domains(F: GridFn2, cap: float = INFINITY_CAP):
    """(dom1, dom2) masks: dom1 = x nodes where cl2 F(x, .) stays above
    -cap everywhere; dom2 = y nodes where cl1 F(., y) stays below +cap."""
    _require_bifunction(F, "saddle_domains")
    c2 = saddle_cl2(F).values
    c1 = saddle_cl1(F).values
    dom1 = np.all(c2 > -cap, axis=1)
    dom2 = np.all(c1 < cap, axis=0)
    return dom1, dom2
