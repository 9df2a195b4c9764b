"""Extended reals: floats enriched with +inf/-inf under checked arithmetic.

Every function value in this package lives in R u {-inf, +inf}.  Storage is
plain IEEE ``float64`` (the infinities double as the tags), but all sums are
routed through checked operations so that the indeterminate combination
``(+inf) + (-inf)`` raises instead of silently producing a NaN.  Fenchel
calculus is only correct if that sum is never formed.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "ExtReal",
    "InfSumError",
    "POS_INF",
    "NEG_INF",
    "ext_add",
    "ext_sub",
    "ext_neg",
    "ext_scale",
]


class InfSumError(ArithmeticError):
    """Raised when an operation would form (+inf) + (-inf)."""


class ExtReal(float):
    """A float restricted to R u {-inf, +inf} with checked addition.

    Ordering, negation and multiplication are inherited from ``float``
    (IEEE semantics already give the right total order and sign flips);
    addition and subtraction reject opposite infinities.  NaN is never a
    legal value and is rejected at construction.
    """

    __slots__ = ()

    def __new__(cls, value: float) -> "ExtReal":
        v = float(value)
        if math.isnan(v):
            raise ValueError("ExtReal cannot hold NaN")
        return super().__new__(cls, v)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self)

    def __add__(self, other):
        o = float(other)
        if math.isinf(self) and math.isinf(o) and (self > 0) != (o > 0):
            raise InfSumError("(+inf) + (-inf) is undefined")
        return ExtReal(float(self) + o)

    __radd__ = __add__

    def __sub__(self, other):
        return self.__add__(-float(other))

    def __rsub__(self, other):
        return ExtReal(-float(self)).__add__(other)

    def __neg__(self):
        return ExtReal(-float(self))

    def __abs__(self):
        return ExtReal(abs(float(self)))

    def __repr__(self) -> str:
        return f"ExtReal({float(self)!r})"


POS_INF = ExtReal(math.inf)
NEG_INF = ExtReal(-math.inf)


def _check_no_conflict(a: np.ndarray, b: np.ndarray, sign: float) -> None:
    conflict = np.isinf(a) & np.isinf(b) & (np.sign(a) != sign * np.sign(b))
    if np.any(conflict):
        idx = np.argwhere(conflict)[0]
        raise InfSumError(
            f"(+inf) + (-inf) at index {tuple(int(i) for i in idx)}"
        )


def ext_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise a + b, rejecting opposite infinities."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_no_conflict(a, b, 1.0)
    return a + b


def ext_sub(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise a - b, rejecting same-signed infinities."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_no_conflict(a, b, -1.0)
    return a - b


def ext_neg(a: np.ndarray) -> np.ndarray:
    """Elementwise negation; swaps the two infinities."""
    return -np.asarray(a, dtype=float)


def ext_scale(a: np.ndarray, c: float) -> np.ndarray:
    """Multiply by a nonzero finite scalar (keeps infinities infinite)."""
    if not math.isfinite(c) or c == 0.0:
        raise ValueError("scale factor must be finite and nonzero")
    return np.asarray(a, dtype=float) * c
