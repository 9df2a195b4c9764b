"""Pure-Python/numpy backend for the hot 1-D kernels.

Reference semantics for the compiled twin in ``_kernels.pyx``; both backends
must agree bitwise (same IEEE operation order everywhere).

Infinity conventions (shared by both backends):

* envelope: if every value is +inf the envelope is +inf and the support is
  empty; if any value is -inf the envelope is -inf on the hull of the
  sub-+inf domain and +inf outside (improper-function early exit);
  otherwise the lower convex envelope of the finite points, +inf outside
  their hull.
* conjugate: any -inf forces the conjugate to +inf everywhere; an
  identically +inf input conjugates to -inf; otherwise the exact discrete
  conjugate max_i (s*x_i - v_i) over the finite nodes.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _lower_hull_indices(x: np.ndarray, v: np.ndarray, idx: np.ndarray) -> list:
    """Monotone-chain lower hull of the points (x[i], v[i]) for i in idx.

    Collinear middle points are dropped (pop on cross <= 0), which keeps the
    later node on equal slopes and makes the output deterministic.
    """
    hull: list = []
    for i in idx:
        xi = x[i]
        vi = v[i]
        while len(hull) >= 2:
            a = hull[-2]
            b = hull[-1]
            cross = (x[b] - x[a]) * (vi - v[a]) - (xi - x[a]) * (v[b] - v[a])
            if cross <= 0.0:
                hull.pop()
            else:
                break
        hull.append(int(i))
    return hull


def envelope_1d(x: np.ndarray, v: np.ndarray):
    """Lower convex envelope of sampled values.

    Returns (env, support): envelope values at every node and the indices
    where the envelope touches the input exactly.
    """
    n = x.shape[0]
    env = np.full(n, np.inf)
    finite_or_neg = v < np.inf
    if not finite_or_neg.any():
        return env, np.empty(0, dtype=np.int64)

    neg = np.isneginf(v)
    lo = int(np.argmax(finite_or_neg))
    hi = n - 1 - int(np.argmax(finite_or_neg[::-1]))
    if neg.any():
        env[lo:hi + 1] = -np.inf
        return env, np.flatnonzero(neg).astype(np.int64)

    idx = np.flatnonzero(finite_or_neg)
    hull = _lower_hull_indices(x, v, idx)
    for k, i in enumerate(hull):
        env[i] = v[i]
        if k + 1 < len(hull):
            j = hull[k + 1]
            if j > i + 1:
                slope = (v[j] - v[i]) / (x[j] - x[i])
                for m in range(i + 1, j):
                    val = v[i] + (x[m] - x[i]) * slope
                    # mathematically the chord is <= v; clamp fp overshoot
                    if val > v[m]:
                        val = v[m]
                    env[m] = val
    return env, np.asarray(hull, dtype=np.int64)


def conjugate_1d(x: np.ndarray, v: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Exact discrete conjugate g(s) = max_i (s*x_i - v_i) over finite nodes."""
    m = s.shape[0]
    if np.isneginf(v).any():
        return np.full(m, np.inf)
    finite = np.isfinite(v)
    if not finite.any():
        return np.full(m, -np.inf)
    xs = x[finite]
    vs = v[finite]
    return np.max(s[:, None] * xs[None, :] - vs[None, :], axis=1)


def envelope_rows(x: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Row-by-row lower convex envelope of a 2-D array."""
    out = np.empty_like(V)
    for r in range(V.shape[0]):
        out[r], _ = envelope_1d(x, V[r])
    return out


def conjugate_rows(x: np.ndarray, V: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Row-by-row discrete conjugate of a 2-D array."""
    R = V.shape[0]
    out = np.empty((R, s.shape[0]))
    neg_rows = np.isneginf(V).any(axis=1)
    fin = np.isfinite(V)
    for r in range(R):
        if neg_rows[r]:
            out[r] = np.inf
        elif not fin[r].any():
            out[r] = -np.inf
        else:
            xs = x[fin[r]]
            vs = V[r][fin[r]]
            out[r] = np.max(s[:, None] * xs[None, :] - vs[None, :], axis=1)
    return out
