"""Finite mixed-norm sequence spaces of real matrices.

An ``N1 x N2`` real matrix is treated as a function on the index grid. Its
mixed norm takes the averaged ``L_u`` norm of each row and then the averaged
``L_p`` norm of the resulting row-norm vector:

    row_norm(r, u)  = ((1/N2) * sum_j |r_j|^u)^(1/u)        (u finite)
                    = max_j |r_j|                            (u = INF)
    mixed_norm(f)   = ((1/N1) * sum_i row_norm(f_i, u)^p)^(1/p)

The mean functional averages all entries and has operator norm one, so
|scalar_mean(f)| <= mixed_norm(f) for every matrix.

Exponents are plain floats with ``INF`` (``math.inf``) as the sentinel for
the supremum norm; finite exponents must lie in [1, inf).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidExponent

__all__ = [
    "INF",
    "Extended",
    "as_exponent",
    "bar",
    "inverse_power",
    "ProblemSpec",
    "MixedMatrix",
    "row_norm",
    "mixed_norm",
    "mixed_norm_many",
    "scalar_mean",
    "row_means",
]

INF = math.inf

# An extended exponent: a float in [1, inf) or INF.
Extended = float


def as_exponent(value) -> float:
    """Validate and return an extended exponent.

    Accepts any real ``>= 1`` or ``INF``; raises :class:`InvalidExponent`
    otherwise.
    """
    x = float(value)
    if math.isnan(x) or x < 1.0:
        raise InvalidExponent(f"exponent must be >= 1 or INF, got {value!r}")
    return x


def bar(e: float) -> float:
    """min(e, 2): the exponent that governs Monte Carlo rates."""
    return min(as_exponent(e), 2.0)


def inverse_power(base: float, e: float) -> float:
    """base**(1/e), with the convention base**(1/INF) = 1."""
    e = as_exponent(e)
    if e == INF:
        return 1.0
    return float(base) ** (1.0 / e)


@dataclass(frozen=True)
class ProblemSpec:
    """Dimensions and exponents (N1, N2, p, u) of one mean-computation space."""

    n1: int
    n2: int
    p: float
    u: float

    def __post_init__(self) -> None:
        if int(self.n1) != self.n1 or self.n1 < 1:
            raise ValueError(f"n1 must be a positive integer, got {self.n1!r}")
        if int(self.n2) != self.n2 or self.n2 < 1:
            raise ValueError(f"n2 must be a positive integer, got {self.n2!r}")
        object.__setattr__(self, "n1", int(self.n1))
        object.__setattr__(self, "n2", int(self.n2))
        object.__setattr__(self, "p", as_exponent(self.p))
        object.__setattr__(self, "u", as_exponent(self.u))

    @property
    def n_entries(self) -> int:
        return self.n1 * self.n2


@dataclass(frozen=True)
class MixedMatrix:
    """An element of the mixed-norm space: a spec plus a finite real matrix."""

    spec: ProblemSpec
    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=np.float64)
        if arr.shape != (self.spec.n1, self.spec.n2):
            raise ValueError(
                f"entries shape {arr.shape} does not match spec "
                f"({self.spec.n1}, {self.spec.n2})"
            )
        if not np.isfinite(arr).all():
            raise ValueError("entries must all be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)


def _vector_norm(values: np.ndarray, e: float, axis: int) -> np.ndarray:
    """Averaged L_e norm along ``axis`` (max for e = INF)."""
    a = np.abs(values)
    if e == INF:
        return a.max(axis=axis)
    if e == 1.0:
        return a.mean(axis=axis)
    if e == 2.0:
        return np.sqrt((a * a).mean(axis=axis))
    return (a**e).mean(axis=axis) ** (1.0 / e)


def row_norm(row, u) -> float:
    """Averaged L_u norm of a single row vector."""
    arr = np.asarray(row, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("row must be a nonempty 1-D vector")
    return float(_vector_norm(arr, as_exponent(u), axis=0))


def mixed_norm(f: MixedMatrix) -> float:
    """Mixed norm: L_p over rows of the per-row L_u norms."""
    return float(mixed_norm_many(f.entries[np.newaxis], f.spec.p, f.spec.u)[0])


def mixed_norm_many(stack, p, u) -> np.ndarray:
    """Mixed norms of a stack of equally shaped matrices.

    ``stack`` has shape (batch, N1, N2); returns a length-``batch`` vector.
    """
    arr = np.asarray(stack, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError("stack must have shape (batch, n1, n2)")
    p = as_exponent(p)
    u = as_exponent(u)
    rows = _vector_norm(arr, u, axis=2)
    return np.asarray(_vector_norm(rows, p, axis=1), dtype=np.float64)


def scalar_mean(f: MixedMatrix) -> float:
    """Arithmetic mean of all N1*N2 entries (exact full readout)."""
    return float(f.entries.mean())


def row_means(f: MixedMatrix) -> np.ndarray:
    """Vector of row averages; its mean equals ``scalar_mean(f)``."""
    return f.entries.mean(axis=1)
