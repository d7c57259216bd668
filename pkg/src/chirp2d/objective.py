"""Periodogram, design-matrix products and the separable linear solve.

All quantities are computed without forming the ``MN x 2`` design matrix
``W``. The complex basis ``exp(-i*phase)`` factors into a row part and a
column part, so the projections ``W^T Y`` cost one matrix-vector product and
the Gram matrix ``W^T W`` reduces to two length-M/N sums through

    sum cos^2 = MN/2 + Re(g)/2,  sum sin^2 = MN/2 - Re(g)/2,  sum cos*sin = Im(g)/2,

with ``g = sum exp(2i*phase)``.

Phases are evaluated in double precision without wrapping; grids up to
4096 x 4096 are supported.
"""

from __future__ import annotations

from typing import Literal, NamedTuple

import numpy as np

from .model import as_grid, component_signal

__all__ = [
    "DomainError",
    "SingularGramError",
    "NonlinearPoint",
    "LinearPair",
    "GRAM_COND_LIMIT",
    "MAX_GRID_SIZE",
    "as_point",
    "mirror",
    "projections",
    "periodogram",
    "design_matrix_apply",
    "linear_solve",
    "error_sum",
    "profiled_error_sum",
]

GRAM_COND_LIMIT = 1e12
MAX_GRID_SIZE = 4096


class DomainError(ValueError):
    """A nonlinear point outside the open box (0, pi)^4."""


class SingularGramError(np.linalg.LinAlgError):
    """``W^T W`` is numerically singular at the requested point."""

    def __init__(self, point, cond):
        self.point = point
        self.cond = cond
        super().__init__(f"W^T W is singular at {tuple(point)} (condition number {cond:.3g})")


class NonlinearPoint(NamedTuple):
    alpha: float
    beta: float
    gamma: float
    delta: float


class LinearPair(NamedTuple):
    A: float
    B: float


def as_point(point) -> NonlinearPoint:
    """Coerce to a :class:`NonlinearPoint`, rejecting anything outside (0, pi)^4."""
    values = np.asarray(point, dtype=float).ravel()
    if values.shape != (4,):
        raise DomainError(f"expected 4 nonlinear parameters, got {values.shape[0]}")
    if not np.all((values > 0.0) & (values < np.pi)):
        raise DomainError(f"nonlinear point {tuple(values)} is outside (0, pi)^4")
    return NonlinearPoint(*(float(v) for v in values))


def mirror(point) -> NonlinearPoint:
    """The point ``pi - theta``.

    Because ``m + m**2`` is always even, the phase at ``pi - theta`` is exactly
    the negated phase at ``theta``: cosines agree and sines flip sign. The
    periodogram takes the same value at both points, and a fit at one equals
    a fit at the other with ``B`` negated.
    """
    a, b, g, d = (float(v) for v in point)
    return NonlinearPoint(np.pi - a, np.pi - b, np.pi - g, np.pi - d)


def _row_factor(a: float, b: float, size: int) -> np.ndarray:
    t = np.arange(1, size + 1, dtype=float)
    return np.exp(-1j * (a * t + b * t * t))


def projections(data, point) -> tuple[float, float]:
    """Return ``(sum y cos(phase), sum y sin(phase))``."""
    y = as_grid(data)
    a, b, g, d = as_point(point)
    M, N = y.shape
    z = _row_factor(a, b, M) @ y @ _row_factor(g, d, N)
    return float(z.real), float(-z.imag)


def periodogram(data, point) -> float:
    """Periodogram-type function ``(2/MN) |sum y exp(-i phase)|^2``."""
    y = as_grid(data)
    c, s = projections(y, point)
    return 2.0 * (c * c + s * s) / y.size


def _gram(point, M: int, N: int) -> np.ndarray:
    a, b, g, d = point
    z = np.conj(_row_factor(2 * a, 2 * b, M)).sum() * np.conj(_row_factor(2 * g, 2 * d, N)).sum()
    half = 0.5 * M * N
    return np.array(
        [[half + 0.5 * z.real, 0.5 * z.imag], [0.5 * z.imag, half - 0.5 * z.real]]
    )


def design_matrix_apply(data, point) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(W^T W, W^T Y)`` for the cos/sin design matrix at ``point``."""
    y = as_grid(data)
    pt = as_point(point)
    M, N = y.shape
    return _gram(pt, M, N), np.array(projections(y, pt))


def _solve_exact(gram: np.ndarray, proj: np.ndarray, point) -> np.ndarray:
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > GRAM_COND_LIMIT:
        raise SingularGramError(point, cond)
    return np.linalg.solve(gram, proj)


def linear_solve(
    data, point, mode: Literal["exact", "approximate"] = "exact"
) -> LinearPair:
    """Amplitudes at a fixed nonlinear point.

    ``exact`` is the separable least-squares solution ``(W^T W)^-1 W^T Y``;
    ``approximate`` replaces ``W^T W`` by its limit ``(MN/2) I`` and returns
    ``(2/MN) W^T Y``.
    """
    y = as_grid(data)
    pt = as_point(point)
    gram, proj = design_matrix_apply(y, pt)
    if mode == "approximate":
        amp = 2.0 * proj / y.size
    elif mode == "exact":
        amp = _solve_exact(gram, proj, pt)
    else:
        raise ValueError(f"mode must be 'exact' or 'approximate', got {mode!r}")
    return LinearPair(float(amp[0]), float(amp[1]))


def error_sum(data, point, pair) -> float:
    """Residual sum of squares ``|Y - W phi|^2`` evaluated directly on the grid."""
    y = as_grid(data)
    a, b, g, d = as_point(point)
    A, B = (float(v) for v in pair)
    M, N = y.shape
    r = y - component_signal(A, B, a, b, g, d, M, N)
    return float(np.sum(r * r))


def profiled_error_sum(data, point) -> float:
    """``Y^T (I - W (W^T W)^-1 W^T) Y``: the residual sum with ``(A, B)`` solved out.

    Computed in closed form from the 2x2 system, so its absolute accuracy is
    about ``eps * Y^T Y``.
    """
    y = as_grid(data)
    pt = as_point(point)
    gram, proj = design_matrix_apply(y, pt)
    amp = _solve_exact(gram, proj, pt)
    return float(np.sum(y * y) - proj @ amp)
