"""Uniform grids and sampled extended-real functions.

A ``GridFn1`` for f always represents the box-restricted object
f + indicator([lo, hi]): conjugation of that object is exact on grids, so
every identity downstream is checked for box-restricted functions and all
discretization error is attributed to sampling.

Axis roles track which space an axis lives in.  The bivariate objects here
are constantly transposed and conjugated ((x, x*) vs (x*, x)); carrying the
roles on the data is what keeps silent transposition bugs out.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .extreal import ext_add, ext_neg

__all__ = [
    "Grid1",
    "GridFn1",
    "GridFn2",
    "PropertyReport",
    "PRIMAL",
    "DUAL",
    "make_grid",
    "sample1",
    "sample2",
    "transpose2",
    "negate1",
    "negate2",
    "add2",
    "shift2",
    "scale2",
    "pi_grid",
    "approx_eq",
    "save_csv",
    "load_csv",
    "save_json",
    "load_json",
]

PRIMAL = "primal"
DUAL = "dual"

_KIND_BY_ROLES = {
    (PRIMAL, DUAL): "representative",
    (DUAL, PRIMAL): "conjugate",
    (PRIMAL, PRIMAL): "bifunction",
    (DUAL, DUAL): "dual_pair",
}
_ROLES_BY_KIND = {v: k for k, v in _KIND_BY_ROLES.items()}


@dataclass(frozen=True)
class Grid1:
    """Uniform 1-D grid with n >= 2 nodes on [lo, hi]."""

    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("grid bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.n < 2:
            raise ValueError("grid needs at least 2 nodes")

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)

    def index_of(self, x: float) -> int:
        """Index of the node nearest to x."""
        i = int(round((x - self.lo) / self.step))
        return min(max(i, 0), self.n - 1)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Grid1)
                and self.lo == other.lo and self.hi == other.hi
                and self.n == other.n)

    def __hash__(self):
        return hash((self.lo, self.hi, self.n))


def make_grid(lo: float, hi: float, n: int) -> Grid1:
    """Uniform grid with nodes lo + i*h, h = (hi-lo)/(n-1)."""
    return Grid1(float(lo), float(hi), int(n))


def _as_values(values, expected_len: int) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.shape != (expected_len,):
        raise ValueError(f"expected {expected_len} values, got shape {v.shape}")
    if np.isnan(v).any():
        raise ValueError("NaN is not a legal extended-real value")
    v = v.copy()
    v.flags.writeable = False
    return v


@dataclass(frozen=True)
class GridFn1:
    """Extended-real function sampled on a 1-D grid."""

    grid: Grid1
    values: np.ndarray
    axis_role: str = PRIMAL

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.values, self.grid.n))
        if self.axis_role not in (PRIMAL, DUAL):
            raise ValueError(f"unknown axis role {self.axis_role!r}")

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values) -> "GridFn1":
        return GridFn1(self.grid, values, self.axis_role)


@dataclass(frozen=True)
class GridFn2:
    """Extended-real function sampled on a product of two 1-D grids.

    ``values[i, j]`` is the sample at (grid_a node i, grid_b node j); the
    ``kind`` property names the axis combination the way the math does:
    representative (x, x*), conjugate (x*, x), bifunction (x, y).
    """

    grid_a: Grid1
    grid_b: Grid1
    values: np.ndarray
    axis_roles: tuple = (PRIMAL, DUAL)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid_a.n, self.grid_b.n):
            raise ValueError(
                f"expected shape {(self.grid_a.n, self.grid_b.n)}, got {v.shape}")
        if np.isnan(v).any():
            raise ValueError("NaN is not a legal extended-real value")
        v = np.ascontiguousarray(v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        roles = tuple(self.axis_roles)
        if roles not in _KIND_BY_ROLES:
            raise ValueError(f"unknown axis roles {roles!r}")
        object.__setattr__(self, "axis_roles", roles)

    @property
    def kind(self) -> str:
        return _KIND_BY_ROLES[self.axis_roles]

    def with_values(self, values) -> "GridFn2":
        return GridFn2(self.grid_a, self.grid_b, values, self.axis_roles)

    def same_grids(self, other: "GridFn2") -> bool:
        return self.grid_a == other.grid_a and self.grid_b == other.grid_b


@dataclass
class PropertyReport:
    """Outcome of one property check.

    ``max_violation`` is the worst finite deviation observed (0.0 when the
    check holds with slack); ``location`` points at the node where it
    happened.  Mixed-infinity disagreements fail the check but are counted
    separately (``details['inf_mismatches']``) and excluded from the
    deviation statistics.
    """

    name: str
    passed: bool
    max_violation: float = 0.0
    location: Optional[tuple] = None
    tol: float = 0.0
    details: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "max_violation": float(self.max_violation),
            "location": list(self.location) if self.location is not None else None,
            "tol": float(self.tol),
            "details": _jsonable(self.details),
            "warnings": list(self.warnings),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def sample1(f: Callable[[float], float], grid: Grid1,
            axis_role: str = PRIMAL) -> GridFn1:
    """Sample a scalar function on a grid.

    The callable may return +-inf (use +inf outside the domain of a convex
    function, -inf outside the domain of a concave one); NaN raises.
    """
    vals = np.empty(grid.n)
    for i, x in enumerate(grid.nodes):
        v = float(f(float(x)))
        if math.isnan(v):
            raise ValueError(f"function evaluated to NaN at x={x}")
        vals[i] = v
    return GridFn1(grid, vals, axis_role)


def sample2(f: Callable[[float, float], float], grid_a: Grid1, grid_b: Grid1,
            axis_roles=(PRIMAL, DUAL)) -> GridFn2:
    """Sample a bivariate function on a grid product."""
    xa = grid_a.nodes
    xb = grid_b.nodes
    vals = np.empty((grid_a.n, grid_b.n))
    for i, a in enumerate(xa):
        for j, b in enumerate(xb):
            v = float(f(float(a), float(b)))
            if math.isnan(v):
                raise ValueError(f"function evaluated to NaN at ({a}, {b})")
            vals[i, j] = v
    return GridFn2(grid_a, grid_b, vals, axis_roles)


def transpose2(F: GridFn2) -> GridFn2:
    """Swap the two axes (values and roles); an involution."""
    return GridFn2(F.grid_b, F.grid_a, F.values.T,
                   (F.axis_roles[1], F.axis_roles[0]))


def restrict_a(F: GridFn2, sub: Grid1) -> GridFn2:
    """Restrict the first axis to a sub-grid aligned with grid_a's nodes."""
    X = F.grid_a.nodes
    eps = F.grid_a.step * 1e-9
    mask = (X >= sub.lo - eps) & (X <= sub.hi + eps)
    if int(mask.sum()) != sub.n or not np.allclose(X[mask], sub.nodes,
                                                   rtol=0, atol=eps):
        raise ValueError("sub-grid nodes do not align with the parent grid")
    return GridFn2(sub, F.grid_b, F.values[mask], F.axis_roles)


def negate1(f: GridFn1) -> GridFn1:
    return f.with_values(ext_neg(f.values))


def negate2(F: GridFn2) -> GridFn2:
    return F.with_values(ext_neg(F.values))


def add2(F: GridFn2, G: GridFn2) -> GridFn2:
    """Nodewise sum; raises on (+inf) + (-inf) and on grid mismatch."""
    if not F.same_grids(G):
        raise ValueError("grid mismatch in add2")
    return F.with_values(ext_add(F.values, G.values))


def shift2(F: GridFn2, c: float) -> GridFn2:
    """Add a finite constant nodewise (infinities unchanged)."""
    if not math.isfinite(c):
        raise ValueError("shift must be finite")
    return F.with_values(F.values + c)


def scale2(F: GridFn2, c: float) -> GridFn2:
    """Multiply by a positive finite constant nodewise."""
    if not (math.isfinite(c) and c > 0):
        raise ValueError("scale must be finite and positive")
    return F.with_values(F.values * c)


def pi_grid(grid_a: Grid1, grid_b: Grid1, axis_roles=(PRIMAL, DUAL)) -> GridFn2:
    """The duality product x * x* sampled on the grid product."""
    vals = np.outer(grid_a.nodes, grid_b.nodes)
    return GridFn2(grid_a, grid_b, vals, axis_roles)


def _region_mask(F: GridFn2, region) -> np.ndarray:
    mask = np.ones(F.values.shape, dtype=bool)
    if region is None:
        return mask
    (alo, ahi), (blo, bhi) = region
    na = F.grid_a.nodes
    nb = F.grid_b.nodes
    mask &= (na >= alo)[:, None] & (na <= ahi)[:, None]
    mask &= (nb >= blo)[None, :] & (nb <= bhi)[None, :]
    return mask


def approx_eq(F: GridFn2, G: GridFn2, tol: float,
              region=None, name: str = "approx_eq") -> PropertyReport:
    """Nodewise comparison: infinities must agree exactly, finite values
    must agree within tol.

    ``region`` optionally restricts the comparison to a coordinate sub-box
    ((a_lo, a_hi), (b_lo, b_hi)).
    """
    if not F.same_grids(G):
        raise ValueError("approx_eq requires identical grids")
    mask = _region_mask(F, region)

    fv, gv = F.values, G.values
    f_inf = np.isinf(fv)
    g_inf = np.isinf(gv)
    inf_mismatch = mask & (f_inf | g_inf) & ~(f_inf & g_inf & (np.sign(fv) == np.sign(gv)))
    both_finite = mask & ~f_inf & ~g_inf

    dev = np.zeros_like(fv)
    dev[both_finite] = np.abs(fv[both_finite] - gv[both_finite])

    n_inf_bad = int(inf_mismatch.sum())
    max_dev = float(dev.max()) if both_finite.any() else 0.0
    loc = None
    if both_finite.any():
        i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
        loc = (float(F.grid_a.nodes[i]), float(F.grid_b.nodes[j]))

    passed = (n_inf_bad == 0) and (max_dev <= tol)
    h = max(F.grid_a.step, F.grid_b.step)
    return PropertyReport(
        name=name,
        passed=passed,
        max_violation=max_dev,
        location=loc,
        tol=tol,
        details={
            "inf_mismatches": n_inf_bad,
            "nodes_compared": int(mask.sum()),
            "observed_constant": max_dev / h,
        },
    )


# ---------------------------------------------------------------------------
# serialization: CSV with a structured comment header, plus a JSON mirror
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def _parse(tok: str) -> float:
    tok = tok.strip()
    if tok == "inf":
        return math.inf
    if tok == "-inf":
        return -math.inf
    return float(tok)


def _header(F: GridFn2) -> str:
    ga, gb = F.grid_a, F.grid_b
    return (f"# role={F.kind} "
            f"axis_a={_fmt(ga.lo)},{_fmt(ga.hi)},{ga.n} "
            f"axis_b={_fmt(gb.lo)},{_fmt(gb.hi)},{gb.n}")


def save_csv(F: GridFn2, path) -> None:
    """Write a GridFn2 as CSV: header comment row, then one row per a-node."""
    lines = [_header(F)]
    for row in F.values:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_csv(path) -> GridFn2:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing grid header row")
    fields = dict(part.split("=", 1) for part in lines[0][1:].split()
                  if "=" in part)
    try:
        kind = fields["role"]
        alo, ahi, an = fields["axis_a"].split(",")
        blo, bhi, bn = fields["axis_b"].split(",")
    except KeyError as exc:
        raise ValueError(f"{path}: malformed header: missing {exc}") from exc
    ga = make_grid(_parse(alo), _parse(ahi), int(an))
    gb = make_grid(_parse(blo), _parse(bhi), int(bn))
    rows = [[_parse(tok) for tok in ln.split(",")] for ln in lines[1:]]
    vals = np.array(rows, dtype=float)
    roles = _ROLES_BY_KIND.get(kind)
    if roles is None:
        raise ValueError(f"{path}: unknown role {kind!r}")
    return GridFn2(ga, gb, vals, roles)


def save_json(F: GridFn2, path) -> None:
    """JSON mirror of the CSV format, same fields and inf literals."""
    doc = {
        "role": F.kind,
        "axis_a": {"lo": F.grid_a.lo, "hi": F.grid_a.hi, "n": F.grid_a.n},
        "axis_b": {"lo": F.grid_b.lo, "hi": F.grid_b.hi, "n": F.grid_b.n},
        "values": [[_fmt(v) for v in row] for row in F.values],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_json(path) -> GridFn2:
    with open(path) as fh:
        doc = json.load(fh)
    ga = make_grid(doc["axis_a"]["lo"], doc["axis_a"]["hi"], doc["axis_a"]["n"])
    gb = make_grid(doc["axis_b"]["lo"], doc["axis_b"]["hi"], doc["axis_b"]["n"])
    vals = np.array([[_parse(t) for t in row] for row in doc["values"]])
    roles = _ROLES_BY_KIND.get(doc["role"])
    if roles is None:
        raise ValueError(f"{path}: unknown role {doc['role']!r}")
    return GridFn2(ga, gb, vals, roles)
