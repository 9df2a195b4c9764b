"""Discrete convex calculus on grids.

Conjugation here is EXACT for the sampled, box-restricted object: the
conjugate is the true max over the stored nodes, not an approximation
scheme with its own error model.  All discretization error is attributed
to sampling, which keeps the calculus identities exactly assertable.

The per-slice envelope and conjugate sweeps are the hot kernels; they are
dispatched to the compiled backend when available (see ``_backend``).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import kernels, worker_count
from .grids import (DUAL, PRIMAL, Grid1, GridFn1, GridFn2, make_grid,
                    negate2)

__all__ = [
    "EnvelopeResult",
    "convex_hull1",
    "concave_hull1",
    "default_dual_grid",
    "conjugate1",
    "biconjugate1",
    "partial_conjugate",
    "full_conjugate2",
    "saddle_cl1",
    "saddle_cl2",
]


@dataclass(frozen=True)
class EnvelopeResult:
    """Lower convex envelope plus the nodes where it touches the input."""

    fn: GridFn1
    support_indices: np.ndarray


def convex_hull1(f: GridFn1) -> EnvelopeResult:
    """Greatest convex minorant of the sampled points, evaluated at all nodes.

    +inf where a node lies outside the hull of the finite domain; if any
    input value is -inf the result is -inf on the hull of the sub-+inf
    domain (improper early exit).  Support values equal the input exactly.
    """
    env, support = kernels.envelope_1d(f.nodes, f.values)
    return EnvelopeResult(f.with_values(env), support)


def concave_hull1(f: GridFn1) -> GridFn1:
    """Smallest concave majorant: -co(-f)."""
    env, _ = kernels.envelope_1d(f.nodes, -f.values)
    return f.with_values(-env)


def _slope_bounds(x: np.ndarray, rows: np.ndarray):
    """Min/max difference quotient between consecutive finite samples."""
    smin = np.inf
    smax = -np.inf
    for row in np.atleast_2d(rows):
        idx = np.flatnonzero(np.isfinite(row))
        if idx.size < 2:
            continue
        slopes = np.diff(row[idx]) / np.diff(x[idx])
        smin = min(smin, float(slopes.min()))
        smax = max(smax, float(slopes.max()))
    if not np.isfinite(smin):
        return None
    return smin, smax


def default_dual_grid(f: GridFn1) -> Grid1:
    """Dual box rule: the slope range of the data padded by 10%.

    Outside that range the conjugate is affine and carries no information.
    Degenerate data (fewer than two finite samples, or constant) pads to a
    unit-wide window.
    """
    return _dual_grid_from_slopes(_slope_bounds(f.nodes, f.values), f.grid.n)


def _dual_grid_from_slopes(bounds, n: int) -> Grid1:
    if bounds is None:
        return make_grid(-1.0, 1.0, n)
    smin, smax = bounds
    pad = 0.1 * (smax - smin)
    if pad == 0.0:
        pad = 1.0
    return make_grid(smin - pad, smax + pad, n)


def conjugate1(f: GridFn1, dual: Grid1 | None = None) -> GridFn1:
    """Exact discrete conjugate g(s) = max_i (s*x_i - f_i) on the dual grid.

    An identically +inf input conjugates to -inf; any -inf forces +inf
    everywhere (improper conventions).  The output is discretely convex
    regardless of the input.
    """
    if dual is None:
        dual = default_dual_grid(f)
    g = kernels.conjugate_1d(f.nodes, f.values, dual.nodes)
    role = DUAL if f.axis_role == PRIMAL else PRIMAL
    return GridFn1(dual, g, role)


def biconjugate1(f: GridFn1) -> GridFn1:
    """Closed convexification f**: computed directly as the envelope."""
    return convex_hull1(f).fn


def _flip(role: str) -> str:
    return DUAL if role == PRIMAL else PRIMAL


def _map_rows(fn, chunks):
    workers = worker_count()
    if workers <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def _batched_conjugate(x: np.ndarray, V: np.ndarray, s: np.ndarray) -> np.ndarray:
    workers = worker_count()
    if workers <= 1 or V.shape[0] < 2 * workers:
        return kernels.conjugate_rows(x, V, s)
    blocks = np.array_split(np.arange(V.shape[0]), workers)
    parts = _map_rows(
        lambda b: kernels.conjugate_rows(x, np.ascontiguousarray(V[b]), s),
        blocks)
    return np.vstack(parts)


def partial_conjugate(F: GridFn2, axis: str, dual: Grid1 | None = None) -> GridFn2:
    """Conjugate every slice along one axis; the other axis is untouched.

    The conjugated axis flips role (primal <-> dual).
    """
    if axis == "b":
        if dual is None:
            dual = _dual_grid_from_slopes(
                _slope_bounds(F.grid_b.nodes, F.values), F.grid_b.n)
        out = _batched_conjugate(F.grid_b.nodes, F.values, dual.nodes)
        return GridFn2(F.grid_a, dual, out,
                       (F.axis_roles[0], _flip(F.axis_roles[1])))
    if axis == "a":
        VT = np.ascontiguousarray(F.values.T)
        if dual is None:
            dual = _dual_grid_from_slopes(
                _slope_bounds(F.grid_a.nodes, VT), F.grid_a.n)
        out = _batched_conjugate(F.grid_a.nodes, VT, dual.nodes)
        return GridFn2(dual, F.grid_b, out.T,
                       (_flip(F.axis_roles[0]), F.axis_roles[1]))
    raise ValueError(f"axis must be 'a' or 'b', got {axis!r}")


def full_conjugate2(F: GridFn2, dual_a: Grid1 | None = None,
                    dual_b: Grid1 | None = None) -> GridFn2:
    """Bivariate conjugate under the pairing <(s,t),(a,b)> = s*a + t*b.

    output[s, t] = sup_{a,b} (s*a + t*b - F(a,b)), computed as two nested
    1-D conjugations: inner conjugate in the first variable, then the
    conjugate of the negated intermediate in the second.  For a
    representative phi(x, x*) this returns phi*(x*, x) (the transposed
    argument convention of the conjugate kind).
    """
    inner = partial_conjugate(F, "a", dual_a)          # (s, b)
    return partial_conjugate(negate2(inner), "b", dual_b)   # (s, t)


def saddle_cl2(F: GridFn2) -> GridFn2:
    """Close every row F(x, .) as a convex function (convex biconjugation)."""
    if F.kind != "bifunction":
        raise ValueError(f"saddle closures need a bifunction, got {F.kind}")
    out = kernels.envelope_rows(F.grid_b.nodes, F.values)
    return F.with_values(out)


def saddle_cl1(F: GridFn2) -> GridFn2:
    """Close every column F(., y) as a concave function."""
    if F.kind != "bifunction":
        raise ValueError(f"saddle closures need a bifunction, got {F.kind}")
    VT = np.ascontiguousarray(-F.values.T)
    out = kernels.envelope_rows(F.grid_a.nodes, VT)
    return F.with_values(-out.T)
