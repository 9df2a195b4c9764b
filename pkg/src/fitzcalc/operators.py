"""Maximal monotone operators on the real line and their grid objects.

Operator families are maximal monotone by construction (a complete
nondecreasing curve in the plane); the suite never certifies maximality of
arbitrary input.  The families:

* ``affine``: T(x) = lam*x + c with lam >= 0.
* ``sign_subdifferential``: the subdifferential of |x|.
* ``interval_blowup``: a continuous increasing operator on (0, 1) with
  T(x) = -1/x^2 near 0 and T(x) = 1/(1-x) near 1, bridged affinely in the
  middle.  Its projected domain is (0, 1], strictly larger than D(T).
* ``staircase``: alternating horizontal/vertical segments plus two
  unbounded end rays.
* ``sampled``: a finite set of pairwise-monotone points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .convex import full_conjugate2
from .grids import (DUAL, PRIMAL, Grid1, GridFn2, PropertyReport,
                    pi_grid, transpose2)

__all__ = [
    "OperatorSpec",
    "GraphSet",
    "operator_from_dict",
    "operator_values_at",
    "operator_value_range",
    "sample_graph",
    "graph_bifunction",
    "fitzpatrick",
    "sigma",
    "is_representative",
    "default_representative_tol",
    "diagonal_subdifferential",
    "diagonal_subdifferential_flipped",
    "projected_domain",
    "divergence_flags",
    "graphs_match",
    "INFINITY_CAP",
]

INFINITY_CAP = 1e12

_KINDS = ("affine", "sign_subdifferential", "interval_blowup",
          "staircase", "sampled")


@dataclass(frozen=True)
class OperatorSpec:
    """A maximal monotone operator given as a named family plus parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        _VALIDATORS[self.kind](self.params)

    # -- factories ---------------------------------------------------------
    @staticmethod
    def affine(lam: float, c: float = 0.0) -> "OperatorSpec":
        return OperatorSpec("affine", {"lam": float(lam), "c": float(c)})

    @staticmethod
    def sign() -> "OperatorSpec":
        return OperatorSpec("sign_subdifferential", {})

    @staticmethod
    def interval_blowup(a: float = 0.25, b: float = 0.75) -> "OperatorSpec":
        return OperatorSpec("interval_blowup", {"a": float(a), "b": float(b)})

    @staticmethod
    def staircase(vertices, left_ray: str = "left",
                  right_ray: str = "right") -> "OperatorSpec":
        return OperatorSpec("staircase", {
            "vertices": tuple((float(x), float(s)) for x, s in vertices),
            "left_ray": left_ray,
            "right_ray": right_ray,
        })

    @staticmethod
    def sampled(points) -> "OperatorSpec":
        return OperatorSpec("sampled", {
            "points": tuple((float(x), float(s)) for x, s in points),
        })


def _validate_affine(p):
    lam, c = p["lam"], p["c"]
    if not (math.isfinite(lam) and math.isfinite(c)) or lam < 0:
        raise ValueError("affine operator needs finite lam >= 0 and finite c")


def _validate_sign(p):
    if p:
        raise ValueError("sign_subdifferential takes no parameters")


def _validate_blowup(p):
    a, b = p["a"], p["b"]
    if not (0.0 < a < b < 1.0):
        raise ValueError("interval_blowup needs 0 < a < b < 1")


def _validate_staircase(p):
    verts = p["vertices"]
    if len(verts) < 1:
        raise ValueError("staircase needs at least one vertex")
    for (x0, s0), (x1, s1) in zip(verts, verts[1:]):
        if x1 < x0 or s1 < s0:
            raise ValueError("staircase vertices must be nondecreasing "
                             "in both coordinates")
        if (x1 != x0) == (s1 != s0):
            raise ValueError("consecutive staircase vertices must differ in "
                             "exactly one coordinate (axis-parallel segments)")
    if p["left_ray"] not in ("left", "down"):
        raise ValueError("left_ray must be 'left' or 'down'")
    if p["right_ray"] not in ("right", "up"):
        raise ValueError("right_ray must be 'right' or 'up'")


def _validate_sampled(p):
    pts = sorted(p["points"])
    if not pts:
        raise ValueError("sampled operator needs at least one point")
    xs = [s for _, s in pts]
    if any(b < a for a, b in zip(xs, xs[1:])):
        raise ValueError("sampled points violate monotonicity")


_VALIDATORS = {
    "affine": _validate_affine,
    "sign_subdifferential": _validate_sign,
    "interval_blowup": _validate_blowup,
    "staircase": _validate_staircase,
    "sampled": _validate_sampled,
}


def operator_from_dict(d: dict) -> OperatorSpec:
    """Build an OperatorSpec from a scenario-file record {kind, params}."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError("operator record must be a dict with a 'kind' field")
    kind = d["kind"]
    params = dict(d.get("params", {}))
    if kind == "staircase" and "vertices" in params:
        params["vertices"] = tuple((float(x), float(s))
                                   for x, s in params["vertices"])
        params.setdefault("left_ray", "left")
        params.setdefault("right_ray", "right")
    if kind == "sampled" and "points" in params:
        params["points"] = tuple((float(x), float(s))
                                 for x, s in params["points"])
    return OperatorSpec(kind, params)


# ---------------------------------------------------------------------------
# pointwise values T(x)
# ---------------------------------------------------------------------------

def _blowup_value(p: dict, x: float) -> float:
    a, b = p["a"], p["b"]
    if x <= a:
        return -1.0 / (x * x)
    if x >= b:
        return 1.0 / (1.0 - x)
    ta = -1.0 / (a * a)
    tb = 1.0 / (1.0 - b)
    return ta + (tb - ta) * (x - a) / (b - a)


def operator_values_at(op: OperatorSpec, x: float):
    """The closed interval T(x) as (lo, hi), or None when x is not in D(T).

    End rays of staircase operators make the interval unbounded
    ((-inf, s] or [s, +inf)).
    """
    p = op.params
    if op.kind == "affine":
        v = p["lam"] * x + p["c"]
        return (v, v)
    if op.kind == "sign_subdifferential":
        if x < 0:
            return (-1.0, -1.0)
        if x > 0:
            return (1.0, 1.0)
        return (-1.0, 1.0)
    if op.kind == "interval_blowup":
        if not (0.0 < x < 1.0):
            return None
        v = _blowup_value(p, x)
        return (v, v)
    if op.kind == "sampled":
        vals = [s for px, s in p["points"] if px == x]
        if not vals:
            return None
        return (min(vals), max(vals))
    # staircase
    verts = p["vertices"]
    x_first, s_first = verts[0]
    x_last, s_last = verts[-1]
    lo = math.inf
    hi = -math.inf
    if x < x_first:
        if p["left_ray"] == "left":
            return (s_first, s_first)
        return None
    if x > x_last:
        if p["right_ray"] == "right":
            return (s_last, s_last)
        return None
    if x == x_first and p["left_ray"] == "down":
        lo = -math.inf
        hi = s_first
    if x == x_last and p["right_ray"] == "up":
        lo = min(lo, s_last)
        hi = math.inf
    if x == x_first and p["left_ray"] == "left":
        lo = min(lo, s_first)
        hi = max(hi, s_first)
    if x == x_last and p["right_ray"] == "right":
        lo = min(lo, s_last)
        hi = max(hi, s_last)
    for (x0, s0), (x1, s1) in zip(verts, verts[1:]):
        if s0 == s1:            # horizontal run
            if x0 <= x <= x1:
                lo = min(lo, s0)
                hi = max(hi, s0)
        else:                   # vertical jump at x0 == x1
            if x == x0:
                lo = min(lo, s0)
                hi = max(hi, s1)
    if lo > hi:
        return None
    return (lo, hi)


def operator_value_range(op: OperatorSpec, xgrid: Grid1):
    """Range of finite T values over the grid box (for auto dual boxes)."""
    lo = math.inf
    hi = -math.inf
    for x in xgrid.nodes:
        iv = operator_values_at(op, float(x))
        if iv is None:
            continue
        a, b = iv
        if math.isfinite(a):
            lo = min(lo, a)
        if math.isfinite(b):
            hi = max(hi, b)
    if lo > hi:
        raise ValueError("operator domain does not meet the grid box")
    return lo, hi


# ---------------------------------------------------------------------------
# graph sampling
# ---------------------------------------------------------------------------

@dataclass
class GraphSet:
    """A finite sample of gph T inside a grid box."""

    points: np.ndarray                 # shape (m, 2): columns x, x*
    source: Optional[OperatorSpec]
    xgrid: Grid1
    dual_grid: Grid1
    clipped: bool = False
    warnings: list = field(default_factory=list)
    validate: bool = True              # recovered graphs skip the invariant

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        order = np.lexsort((pts[:, 1], pts[:, 0]))
        pts = pts[order]
        if self.validate and np.any(np.diff(pts[:, 1]) < 0):
            k = int(np.argmax(np.diff(pts[:, 1]) < 0))
            raise ValueError(
                f"graph sample violates monotonicity near x={pts[k, 0]}")
        self.points = pts


def _dedupe(points: list) -> list:
    seen = set()
    out = []
    for x, s in points:
        key = (round(x, 12), round(s, 12))
        if key not in seen:
            seen.add(key)
            out.append((x, s))
    return out


def sample_graph(op: OperatorSpec, xgrid: Grid1, dual_grid: Grid1) -> GraphSet:
    """Sample gph T on the box: one point per x-node on single-valued
    branches, every dual-grid node it crosses (plus the exact endpoints)
    on vertical segments.

    Values outside the dual range are clipped and the clip is recorded;
    clipping shrinks the Fitzpatrick function, so downstream reports
    surface it as a warning.
    """
    dlo, dhi = dual_grid.lo, dual_grid.hi
    dual_nodes = dual_grid.nodes
    warnings: list = []
    clipped = False
    pts: list = []

    def add(x, s):
        nonlocal clipped
        if s < dlo or s > dhi:
            clipped = True
            s = min(max(s, dlo), dhi)
        pts.append((float(x), float(s)))

    def add_segment(x, slo, shi):
        """Vertical piece at x, values [slo, shi] intersected with the box."""
        nonlocal clipped
        if shi < dlo or slo > dhi:
            clipped = True
            add(x, slo if shi < dlo else shi)
            return
        if slo < dlo or shi > dhi:
            clipped = True
        a = max(slo, dlo)
        b = min(shi, dhi)
        inside = dual_nodes[(dual_nodes >= a) & (dual_nodes <= b)]
        for s in inside:
            pts.append((float(x), float(s)))
        pts.append((float(x), float(a)))
        pts.append((float(x), float(b)))

    for x in xgrid.nodes:
        iv = operator_values_at(op, float(x))
        if iv is None:
            continue
        lo, hi = iv
        if lo == hi:
            add(float(x), lo)
        else:
            add_segment(float(x), lo, hi)

    if op.kind == "staircase":
        # exact corners and any jump located between x-nodes
        for (x0, s0), (x1, s1) in zip(op.params["vertices"],
                                      op.params["vertices"][1:]):
            if s0 != s1 and xgrid.lo <= x0 <= xgrid.hi:
                add_segment(x0, s0, s1)
        for x0, s0 in op.params["vertices"]:
            if xgrid.lo <= x0 <= xgrid.hi:
                add(x0, s0)
    if op.kind == "sign_subdifferential" and xgrid.lo <= 0.0 <= xgrid.hi:
        add_segment(0.0, -1.0, 1.0)
    if op.kind == "sampled":
        kept = [(x, s) for x, s in op.params["points"]
                if xgrid.lo <= x <= xgrid.hi]
        dropped = len(op.params["points"]) - len(kept)
        if dropped:
            warnings.append(f"{dropped} sampled points outside the x box")
        pts = []
        for x, s in kept:
            add(x, s)

    pts = _dedupe(pts)
    if not pts:
        raise ValueError("operator domain does not meet the grid box")
    if clipped:
        warnings.append("graph values clipped at the dual-grid boundary")
    return GraphSet(np.asarray(pts), op, xgrid, dual_grid,
                    clipped=clipped, warnings=warnings)


# ---------------------------------------------------------------------------
# operator-level grid objects
# ---------------------------------------------------------------------------

def graph_bifunction(op: OperatorSpec, xgrid: Grid1, ygrid: Grid1) -> GridFn2:
    """G(x, y) = sup_{x* in T(x)} x*(y - x): -inf off D(T), 0 on the diagonal.

    The sup over the value interval of a linear function sits at an
    endpoint, so the computation is exact (unbounded end rays give +inf on
    the strictly favorable side).
    """
    xn = xgrid.nodes
    yn = ygrid.nodes
    vals = np.full((xgrid.n, ygrid.n), -np.inf)
    for i, x in enumerate(xn):
        iv = operator_values_at(op, float(x))
        if iv is None:
            continue
        lo, hi = iv
        d = yn - x
        row = np.empty(ygrid.n)
        pos = d > 0
        negt = d < 0
        row[pos] = hi * d[pos] if math.isfinite(hi) else np.inf
        row[negt] = lo * d[negt] if math.isfinite(lo) else np.inf
        row[d == 0] = 0.0
        vals[i] = row
    return GridFn2(xgrid, ygrid, vals, (PRIMAL, PRIMAL))


def fitzpatrick(op: OperatorSpec, xgrid: Grid1, dual_grid: Grid1,
                graph: GraphSet | None = None) -> GridFn2:
    """The minimal representative function, as a max over graph samples:

        F(x, x*) = max_{(y, y*) in sample} (x*.y + y*.x - y.y*)

    The graph sample defaults to the evaluation box; pass a wider ``graph``
    when the sup is attained outside it (the clipping warning on the
    GraphSet is the telltale).
    """
    if graph is None:
        graph = sample_graph(op, xgrid, dual_grid)
    gx = graph.points[:, 0]
    gs = graph.points[:, 1]
    gprod = gx * gs
    X = xgrid.nodes
    S = dual_grid.nodes
    out = np.full((xgrid.n, dual_grid.n), -np.inf)
    chunk = 128
    for k0 in range(0, gx.size, chunk):
        sl = slice(k0, min(k0 + chunk, gx.size))
        terms = (X[:, None, None] * gs[None, None, sl]
                 + S[None, :, None] * gx[None, None, sl]
                 - gprod[None, None, sl])
        np.maximum(out, terms.max(axis=2), out=out)
    return GridFn2(xgrid, dual_grid, out, (PRIMAL, DUAL))


def sigma(op: OperatorSpec, xgrid: Grid1, dual_grid: Grid1,
          graph: GraphSet | None = None, route: str = "conjugate") -> GridFn2:
    """The maximal representative function.

    Route "conjugate" (default) uses the duality with the Fitzpatrick
    function: sigma(x, x*) is the transposed bivariate conjugate of F.
    Route "envelope" closes pi + indicator(graph) by double biconjugation;
    it exists for cross-validation of the conjugate route.
    """
    if route == "conjugate":
        F = fitzpatrick(op, xgrid, dual_grid, graph=graph)
        return transpose2(full_conjugate2(F, dual_a=dual_grid, dual_b=xgrid))
    if route == "envelope":
        if graph is None:
            graph = sample_graph(op, xgrid, dual_grid)
        P = pi_grid(xgrid, dual_grid)
        vals = np.full(P.values.shape, np.inf)
        ix = np.abs(xgrid.nodes[:, None] - graph.points[:, 0][None, :])
        js = np.abs(dual_grid.nodes[:, None] - graph.points[:, 1][None, :])
        near = ((ix <= xgrid.step / 2 + 1e-12)[:, None, :]
                & (js <= dual_grid.step / 2 + 1e-12)[None, :, :]).any(axis=2)
        vals[near] = P.values[near]
        P = P.with_values(vals)
        C = full_conjugate2(P, dual_a=dual_grid, dual_b=xgrid)
        return full_conjugate2(C, dual_a=xgrid, dual_b=dual_grid)
    raise ValueError(f"unknown sigma route {route!r}")


# ---------------------------------------------------------------------------
# representativeness and recovery
# ---------------------------------------------------------------------------

def default_representative_tol(phi: GridFn2) -> float:
    """Representatives touch pi tangentially, so the natural scale for
    'equals pi' is quadratic: one step in each axis.  (With a
    slope-adapted dual grid this keeps the tangency zone within a
    diagonal cell of the graph.)"""
    return 2.0 * phi.grid_a.step * phi.grid_b.step


def is_representative(phi: GridFn2, op: OperatorSpec,
                      tol: float | None = None,
                      graph: GraphSet | None = None) -> PropertyReport:
    """Three-part membership test for the representative class of T:

    (i)   phi >= pi - tol everywhere;
    (ii)  |phi - pi| <= tol at the sampled graph points;
    (iii) every node with |phi - pi| <= tol/2 lies within one grid cell of
          the sampled graph (equality happens only on the graph).
    """
    if phi.kind != "representative":
        raise ValueError(f"expected a representative grid, got {phi.kind}")
    if tol is None:
        tol = default_representative_tol(phi)
    if graph is None:
        graph = sample_graph(op, phi.grid_a, phi.grid_b)

    ga, gb = phi.grid_a, phi.grid_b
    pi = np.outer(ga.nodes, gb.nodes)
    pv = phi.values

    finite = np.isfinite(pv)
    below = np.where(np.isneginf(pv), np.inf, -np.inf)
    below[finite] = pi[finite] - pv[finite]
    worst_below = float(below.max())
    check_i = worst_below <= tol

    gx = graph.points[:, 0]
    gs = graph.points[:, 1]
    gi = np.clip(np.round((gx - ga.lo) / ga.step).astype(int), 0, ga.n - 1)
    gj = np.clip(np.round((gs - gb.lo) / gb.step).astype(int), 0, gb.n - 1)
    # phi = pi can only be asserted where the graph point IS a node; a
    # node that merely neighbors the graph carries |phi - pi| up to
    # slope * offset and is legitimately nonzero there
    on_node = ((np.abs(ga.nodes[gi] - gx) <= 1e-9 * ga.step)
               & (np.abs(gb.nodes[gj] - gs) <= 1e-9 * gb.step))
    on_graph_dev = np.abs(pv[gi, gj] - pi[gi, gj])[on_node]
    worst_on = float(on_graph_dev.max()) if on_node.any() else 0.0
    check_ii = worst_on <= tol

    near = np.abs(pv - pi) <= tol / 2
    cell_a = np.abs(ga.nodes[:, None] - gx[None, :]) <= ga.step * (1 + 1e-9)
    cell_b = np.abs(gb.nodes[:, None] - gs[None, :]) <= gb.step * (1 + 1e-9)
    near_graph = np.zeros(pv.shape, dtype=bool)
    for k in range(gx.size):
        near_graph |= cell_a[:, k][:, None] & cell_b[:, k][None, :]
    # the box-restricted graph is maximal-monotone only up to the vertical
    # extension rays at its extreme abscissas; phi legitimately touches pi
    # along them, so they count as graph for the equality-location test
    x_lo, x_hi = gx.min(), gx.max()
    s_lo = gs[gx <= x_lo + ga.step * 1e-9].min()
    s_hi = gs[gx >= x_hi - ga.step * 1e-9].max()
    col_lo = np.abs(ga.nodes - x_lo) <= ga.step * (1 + 1e-9)
    col_hi = np.abs(ga.nodes - x_hi) <= ga.step * (1 + 1e-9)
    near_graph |= col_lo[:, None] & (gb.nodes <= s_lo + gb.step * (1 + 1e-9))[None, :]
    near_graph |= col_hi[:, None] & (gb.nodes >= s_hi - gb.step * (1 + 1e-9))[None, :]
    stray = near & ~near_graph & finite
    check_iii = not stray.any()

    passed = check_i and check_ii and check_iii
    max_violation = max(worst_below if not check_i else 0.0,
                        worst_on if not check_ii else 0.0)
    loc = None
    if not check_iii:
        i, j = np.argwhere(stray)[0]
        loc = (float(ga.nodes[i]), float(gb.nodes[j]))
    return PropertyReport(
        name="is_representative",
        passed=bool(passed),
        max_violation=float(max_violation),
        location=loc,
        tol=tol,
        details={
            "minorized_by_pi": bool(check_i),
            "equals_pi_on_graph": bool(check_ii),
            "equality_only_near_graph": bool(check_iii),
            "worst_below_pi": worst_below,
            "worst_on_graph": worst_on,
            "stray_equality_nodes": int(stray.sum()),
            "off_node_graph_points": int((~on_node).sum()),
        },
        warnings=list(graph.warnings),
    )


def diagonal_subdifferential(F: GridFn2, dual: Grid1, tol: float,
                             slope_tol: float = 0.0) -> GraphSet:
    """Pairs (x, x*) with F(x, y) >= x*(y - x) - tol for every y node.

    ``slope_tol`` relaxes the test to slope-wise slack
    (F(x, y) >= x*(y - x) - slope_tol*|y - x| - tol): with
    slope_tol = h_dual/2 this recovers half-cell-approximate subgradients
    even when the operator's values fall between dual nodes, uniformly
    over kinked, affine and curved saddles.
    """
    if F.kind != "bifunction":
        raise ValueError(f"expected a bifunction, got {F.kind}")
    xn = F.grid_a.nodes
    yn = F.grid_b.nodes
    S = dual.nodes
    pts = []
    for i, x in enumerate(xn):
        row = F.values[i]
        if np.isneginf(row).any():
            continue
        # worst slack over y for every candidate slope
        slack = (row[None, :] - S[:, None] * (yn - x)[None, :]
                 + slope_tol * np.abs(yn - x)[None, :])
        ok = np.min(slack, axis=1) >= -tol
        for k in np.flatnonzero(ok):
            pts.append((float(x), float(S[k])))
    points = (np.asarray(pts).reshape(-1, 2) if pts
              else np.empty((0, 2)))
    return GraphSet(points, None, F.grid_a, dual, validate=False)


def diagonal_subdifferential_flipped(F: GridFn2, dual: Grid1, tol: float,
                                     slope_tol: float = 0.0) -> GraphSet:
    """Pairs (x, x*) with -F(y, x) >= x*(y - x) - tol for every y node."""
    from .grids import negate2
    if F.grid_a != F.grid_b:
        raise ValueError("flipped recovery needs a square bifunction grid")
    return diagonal_subdifferential(negate2(transpose2(F)), dual, tol,
                                    slope_tol)


def projected_domain(phi: GridFn2, cap: float = INFINITY_CAP) -> np.ndarray:
    """Boolean mask over the first axis: min_x* phi(x, x*) stays under cap."""
    return np.min(phi.values, axis=1) < cap


def divergence_flags(coarse: np.ndarray, fine: np.ndarray,
                     growth: float = 2.0, cap: float = INFINITY_CAP,
                     floor: float = 1e-9) -> np.ndarray:
    """Mark entries whose value under refinement behaves like +inf: it
    reaches the cap or grows by the factor ``growth``.  ``floor`` guards
    against flagging pure-noise growth of near-zero values."""
    coarse = np.asarray(coarse, dtype=float)
    fine = np.asarray(fine, dtype=float)
    base = np.maximum(coarse, floor)
    return (fine >= cap) | (fine >= growth * base)


def graphs_match(recovered: GraphSet, reference: GraphSet,
                 name: str = "graphs_match") -> PropertyReport:
    """Within-one-cell Hausdorff comparison of two graph samples.

    Cell units come from the reference grids (Chebyshev distance <= 1 cell
    in each axis).
    """
    hx = reference.xgrid.step * (1 + 1e-9)
    hs = reference.dual_grid.step * (1 + 1e-9)

    def one_sided(A, B):
        if A.size == 0:
            return 0.0, None
        if B.size == 0:
            return math.inf, tuple(A[0])
        dx = np.abs(A[:, 0][:, None] - B[:, 0][None, :]) / hx
        ds = np.abs(A[:, 1][:, None] - B[:, 1][None, :]) / hs
        d = np.maximum(dx, ds).min(axis=1)
        k = int(np.argmax(d))
        return float(d.max()), tuple(A[k])

    d_rec, loc_rec = one_sided(recovered.points, reference.points)
    d_ref, loc_ref = one_sided(reference.points, recovered.points)
    worst = max(d_rec, d_ref)
    passed = worst <= 1.0
    return PropertyReport(
        name=name,
        passed=bool(passed),
        max_violation=float(worst),
        location=loc_rec if d_rec >= d_ref else loc_ref,
        tol=1.0,
        details={"recovered_to_reference_cells": d_rec,
                 "reference_to_recovered_cells": d_ref,
                 "recovered_points": int(recovered.points.shape[0]),
                 "reference_points": int(reference.points.shape[0])},
    )
