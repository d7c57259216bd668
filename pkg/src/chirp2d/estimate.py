"""Grid initialisation, ALSE/LSE refinement and sequential multi-component fits.

Mirror symmetry
---------------
The phase at ``pi - theta`` is the negated phase at ``theta`` (see
:func:`chirp2d.objective.mirror`), so every dataset has two equivalent
optima inside (0, pi)^4. Estimates are reported in the canonical half with
``beta <= pi/2``; the grid search only visits that half, which loses nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import minimize

from .model import ChirpComponent, as_grid, component_signal
from .objective import (
    GRAM_COND_LIMIT,
    NonlinearPoint,
    as_point,
    linear_solve,
    mirror,
)

__all__ = [
    "GridConfig",
    "OptConfig",
    "FitResult",
    "canonical",
    "grid_point",
    "grid_indices",
    "grid_init",
    "refine_alse",
    "refine_lse",
    "refine",
    "sequential_fit",
]

Method = Literal["alse", "lse"]

BOX_MARGIN = 1e-6
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class GridConfig:
    """Extended Fourier grid search settings.

    ``strides`` subsample the ``(k1, k2, j1, j2)`` index axes; ``None`` picks
    ``(1, ceil(M/8), 1, ceil(N/8))`` for ``coarse_to_fine`` and unit strides
    for ``full``. Each refinement level halves the strides and searches
    ``window`` previous-level cells either side of the incumbent; the last
    level always runs at unit stride.
    """

    strategy: Literal["full", "coarse_to_fine"] = "coarse_to_fine"
    strides: tuple[int, int, int, int] | None = None
    levels: int = 4
    window: int = 3

    def __post_init__(self):
        if self.strategy not in ("full", "coarse_to_fine"):
            raise ValueError(f"unknown grid strategy {self.strategy!r}")
        if self.strides is not None:
            strides = tuple(int(s) for s in self.strides)
            if len(strides) != 4 or min(strides) < 1:
                raise ValueError(f"strides must be four integers >= 1, got {self.strides!r}")
            object.__setattr__(self, "strides", strides)
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")

    def initial_strides(self, M: int, N: int) -> tuple[int, int, int, int]:
        if self.strides is not None:
            return self.strides
        if self.strategy == "full":
            return (1, 1, 1, 1)
        return (1, math.ceil(M / 8), 1, math.ceil(N / 8))


@dataclass(frozen=True)
class OptConfig:
    """Simplex refinement settings.

    ``xtol`` is measured in scaled units where one unit is ``(1/M, 1/M^2,
    1/N, 1/N^2)`` on the four axes; ``ftol`` is relative to the objective.
    """

    max_iters: int = 20000
    xtol: float = 1e-10
    ftol: float = 1e-12
    restarts: int = 1

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not (self.xtol > 0 and self.ftol > 0):
            raise ValueError("tolerances must be > 0")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")


@dataclass(frozen=True)
class FitResult:
    component: ChirpComponent
    objective: float
    iterations: int
    converged: bool
    init: NonlinearPoint
    method: str = "alse"

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "estimate": self.component.to_dict(),
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "init": dict(self.init._asdict()),
        }


def canonical(point, pair=None):
    """Map a fit into the ``beta <= pi/2`` half, negating ``B`` when mirrored."""
    pt = NonlinearPoint(*(float(v) for v in point))
    if pt.beta <= np.pi / 2:
        return pt if pair is None else (pt, tuple(pair))
    mp = mirror(pt)
    if pair is None:
        return mp
    A, B = pair
    return mp, (A, -B)


# ---------------------------------------------------------------------------
# grid search


def grid_point(idx: Sequence[int], M: int, N: int) -> NonlinearPoint:
    """Nonlinear point for grid indices ``(k1, k2, j1, j2)``."""
    k1, k2, j1, j2 = idx
    return NonlinearPoint(np.pi * k1 / M, np.pi * k2 / M**2, np.pi * j1 / N, np.pi * j2 / N**2)


def grid_indices(point, M: int, N: int) -> tuple[int, int, int, int]:
    """Nearest grid indices for a point."""
    a, b, g, d = point
    return (
        int(round(a * M / np.pi)),
        int(round(b * M**2 / np.pi)),
        int(round(g * N / np.pi)),
        int(round(d * N**2 / np.pi)),
    )


@lru_cache(maxsize=8)
def _basis(length: int, size: int, k1s: tuple[int, ...], k2s: tuple[int, ...]) -> np.ndarray:
    """Rows ``exp(-i(pi k1 t/size + pi k2 t^2/size^2))``, ``t = 1..length``, for all (k1, k2)."""
    t = np.arange(1, length + 1, dtype=float)
    lin = np.exp(-1j * np.pi * np.outer(np.asarray(k1s, dtype=float) / size, t))
    quad = np.exp(-1j * np.pi * np.outer(np.asarray(k2s, dtype=float) / size**2, t * t))
    out = (lin[:, None, :] * quad[None, :, :]).reshape(-1, length)
    out.setflags(write=False)
    return out


def _pairs(k1s, k2s) -> np.ndarray:
    a, b = np.meshgrid(np.asarray(k1s), np.asarray(k2s), indexing="ij")
    return np.stack([a.ravel(), b.ravel()], axis=1)


def _search(y: np.ndarray, k1s, k2s, j1s, j2s, size=None) -> tuple[float, tuple[int, int, int, int]]:
    """Exact maximiser of the periodogram over a product of index sets.

    Rows (k1, k2) and columns (j1, j2) are scored by Cauchy-Schwarz upper
    bounds; only row/column combinations whose bounds beat the incumbent are
    evaluated. Ties within a relative 1e-9 go to the lexicographically
    smallest index tuple. ``size`` is the ``(M, N)`` that defines the grid
    spacing when ``y`` is a leading sub-grid of the data.
    """
    Mc, Nc = y.shape
    M, N = size or y.shape
    norm = 2.0 / (Mc * Nc)
    U = _basis(Mc, M, tuple(k1s), tuple(k2s))
    V = _basis(Nc, N, tuple(j1s), tuple(j2s))
    rows = _pairs(k1s, k2s)
    cols = _pairs(j1s, j2s)
    Z = U @ y  # (Ka, N)
    Wc = y @ V.T  # (M, Kb)
    row_bound = norm * Nc * np.einsum("ij,ij->i", Z, Z.conj()).real
    col_bound = norm * Mc * np.einsum("ij,ij->j", Wc, Wc.conj()).real

    row_order = np.argsort(-row_bound, kind="stable")
    col_order = np.argsort(-col_bound, kind="stable")

    best = -1.0
    cands: list[tuple[tuple[int, int, int, int], float]] = []

    def absorb(r_idx, c_idx, vals):
        nonlocal best, cands
        top = vals.max()
        if top <= 0.0:
            return
        if top > best:
            best = top
            cands = [c for c in cands if c[1] >= best * (1 - _TIE_RTOL)]
        hit = np.nonzero(vals >= best * (1 - _TIE_RTOL))
        for i, j in zip(*hit):
            r, c = rows[r_idx[i]], cols[c_idx[j]]
            cands.append(((int(r[0]), int(r[1]), int(c[0]), int(c[1])), float(vals[i, j])))

    # seed the incumbent with the most promising rows against all columns
    chunk = max(1, min(len(row_order), 4_000_000 // max(1, len(cols))))
    seed_rows = row_order[: min(len(row_order), 16, chunk)]
    absorb(seed_rows, np.arange(len(cols)), norm * np.abs(Z[seed_rows] @ V.T) ** 2)
    done = len(seed_rows)

    cutoff = lambda: best * (1 - _TIE_RTOL)  # noqa: E731
    while done < len(row_order):
        if row_bound[row_order[done]] < cutoff():
            break
        live_cols = col_order[: np.searchsorted(-col_bound[col_order], -cutoff(), side="right")]
        if live_cols.size == 0:
            break
        step = max(1, min(4_000_000 // live_cols.size, 4096))
        r_idx = row_order[done : done + step]
        r_idx = r_idx[row_bound[r_idx] >= cutoff()]
        if r_idx.size:
            vals = norm * np.abs(Z[r_idx] @ V[live_cols].T) ** 2
            absorb(r_idx, live_cols, vals)
        done += step

    if best <= 0.0:
        # all-zero periodogram: every node ties
        return 0.0, (int(k1s[0]), int(k2s[0]), int(j1s[0]), int(j2s[0]))
    final = [c for c in cands if c[1] >= best * (1 - _TIE_RTOL)]
    return best, min(c[0] for c in final)


def _axis(lo: int, hi: int, stride: int) -> np.ndarray:
    if hi < lo:
        return np.empty(0, dtype=int)
    return np.arange(lo, hi + 1, stride)


def _window(center: int, half: int, stride: int, lo: int, hi: int) -> np.ndarray:
    vals = center + np.arange(-half, half + 1, stride)
    vals = vals[(vals >= lo) & (vals <= hi)]
    if center not in vals and lo <= center <= hi:
        vals = np.union1d(vals, [center])
    return vals


def _crop(M: int, lin_stride: int, rate_stride: int) -> int:
    """Leading sub-grid length whose natural grid spacing matches the strides."""
    r = max(lin_stride, math.sqrt(rate_stride))
    return min(M, max(2, math.ceil(M / r)))


def grid_init(data, cfg: GridConfig | None = None) -> NonlinearPoint:
    """Starting point from the extended Fourier grid
    ``(pi k1/M, pi k2/M^2, pi j1/N, pi j2/N^2)``.

    Only ``k2 <= M^2/2`` is searched (see the module note on mirror symmetry).

    ``coarse_to_fine`` scores each strided level on the leading sub-grid of
    length ``M / max(s1, sqrt(s2))`` (and likewise for columns). A full-length
    chirp swings too fast for a node ``s2/2`` cells away from the peak to
    keep any of its energy, so strided nodes over the whole grid are
    dominated by aliases; on the shorter sub-grid the stride matches the
    natural resolution and the main lobe wins. The last level always runs on
    the full data at unit stride.
    """
    y = as_grid(data)
    cfg = cfg or GridConfig()
    M, N = y.shape
    if M < 2 or N < 2:
        raise ValueError(f"grid search needs at least a 2x2 grid, got {M}x{N}")
    limits = [(1, M - 1), (1, (M * M) // 2), (1, N - 1), (1, N * N - 1)]
    strides = cfg.initial_strides(M, N)
    axes = [_axis(lo, hi, s) for (lo, hi), s in zip(limits, strides)]
    if any(a.size == 0 for a in axes):
        raise ValueError(f"grid is empty after striding with {strides}")

    if cfg.strategy == "full" or cfg.levels == 1:
        _, best = _search(y, *axes)
        return grid_point(best, M, N)

    def level_search(axes, s):
        sub = y[: _crop(M, s[0], s[1]), : _crop(N, s[2], s[3])]
        return _search(sub, *axes, size=(M, N))[1]

    best = level_search(axes, strides)
    prev = strides
    for level in range(1, cfg.levels):
        last = level == cfg.levels - 1
        cur = (1, 1, 1, 1) if last else tuple(max(1, math.ceil(s / 2)) for s in prev)
        # the (k1, k2) ridge runs diagonally in index space, so linear
        # axes get a window as wide as their paired rate axis
        halves = (
            cfg.window * max(prev[0], prev[1]),
            cfg.window * prev[1],
            cfg.window * max(prev[2], prev[3]),
            cfg.window * prev[3],
        )
        axes = [_window(c, h, s, lo, hi) for c, h, s, (lo, hi) in zip(best, halves, cur, limits)]
        best = level_search(axes, cur)
        prev = cur
    return grid_point(best, M, N)


# ---------------------------------------------------------------------------
# refinement


class _Problem:
    """Fast objective evaluation on a fixed grid (no per-call validation)."""

    def __init__(self, y: np.ndarray):
        self.y = y
        self.M, self.N = y.shape
        self.m = np.arange(1, self.M + 1, dtype=float)
        self.n = np.arange(1, self.N + 1, dtype=float)
        self.energy = float(np.sum(y * y))

    def proj(self, th):
        a, b, g, d = th
        u = np.exp(-1j * (a * self.m + b * self.m * self.m))
        v = np.exp(-1j * (g * self.n + d * self.n * self.n))
        z = u @ self.y @ v
        return z, u, v

    def periodogram(self, th) -> float:
        z, _, _ = self.proj(th)
        return 2.0 * (z.real**2 + z.imag**2) / (self.M * self.N)

    def profiled_q(self, th) -> float:
        z, u, v = self.proj(th)
        c, s = z.real, -z.imag
        gz = np.sum(np.conj(u) ** 2) * np.sum(np.conj(v) ** 2)
        half = 0.5 * self.M * self.N
        g11, g22, g12 = half + 0.5 * gz.real, half - 0.5 * gz.real, 0.5 * gz.imag
        det = g11 * g22 - g12 * g12
        # cond check on the symmetric 2x2: eigenvalues half +- |gz|/2
        lam_hi, lam_lo = half + 0.5 * abs(gz), half - 0.5 * abs(gz)
        if lam_lo <= 0 or lam_hi / lam_lo > GRAM_COND_LIMIT:
            return np.inf
        quad = (g22 * c * c - 2 * g12 * c * s + g11 * s * s) / det
        return self.energy - quad


def _transform(M: int, N: int) -> np.ndarray:
    """Map scaled simplex coordinates to parameter offsets.

    Writing ``alpha*m + beta*m^2`` about the centre ``c = (M+1)/2`` as
    ``const + (alpha + 2*beta*c)(m - c) + beta*(m - c)^2`` shows that the
    objective's ridge runs along ``d alpha = -2c d beta``. Coordinates
    ``z1 = M*(alpha + 2c*beta)`` and ``z2 = M^2*beta`` (offsets from the
    start) are nearly uncorrelated, which a simplex method needs.
    """
    T = np.zeros((4, 4))
    T[0, 0], T[0, 1], T[1, 1] = 1.0 / M, -(M + 1.0) / M**2, 1.0 / M**2
    T[2, 2], T[2, 3], T[3, 3] = 1.0 / N, -(N + 1.0) / N**2, 1.0 / N**2
    return T


def refine(
    data,
    init,
    method: Method = "alse",
    cfg: OptConfig | None = None,
) -> FitResult:
    """Local Nelder-Mead refinement of the nonlinear parameters from ``init``.

    ``alse`` maximises the periodogram and fills ``(A, B)`` with the
    approximate solve ``(2/MN) W^T Y``; ``lse`` minimises the profiled residual
    sum and uses the exact separable solve. Points outside
    ``[BOX_MARGIN, pi - BOX_MARGIN]^4`` score ``+inf``; a result on that
    boundary is reported with ``converged=False``.
    """
    if method not in ("alse", "lse"):
        raise ValueError(f"method must be 'alse' or 'lse', got {method!r}")
    y = as_grid(data)
    start = as_point(init)
    cfg = cfg or OptConfig()
    prob = _Problem(y)
    M, N = y.shape
    T = _transform(M, N)
    x0 = np.asarray(start, dtype=float)
    lo, hi = BOX_MARGIN, np.pi - BOX_MARGIN
    score = (lambda th: -prob.periodogram(th)) if method == "alse" else prob.profiled_q

    def fun(z):
        th = x0 + T @ z
        if np.any(th < lo) or np.any(th > hi):
            return np.inf
        return score(th)

    z = np.zeros(4)
    fz = fun(z)
    iterations = 0
    converged = False
    for _ in range(cfg.restarts + 1):
        budget = cfg.max_iters - iterations
        if budget <= 0:
            break
        res = minimize(
            fun,
            z,
            method="Nelder-Mead",
            options={
                "initial_simplex": np.vstack([z, z + np.eye(4)]),
                "xatol": cfg.xtol,
                "fatol": cfg.ftol * max(abs(fz), 1e-300),
                "maxiter": budget,
                "maxfev": 4 * budget,
            },
        )
        iterations += int(res.nit)
        converged = bool(res.success)
        if res.fun <= fz:
            z, fz = res.x, float(res.fun)
        if not converged:
            break

    theta = x0 + T @ z
    # within 1e-3 scaled units of the box edge counts as pinned
    room = np.minimum(theta - lo, hi - theta) / np.diag(T)
    clamped = bool(np.any(room < 1e-3))
    theta = np.clip(theta, lo, hi)
    mode = "approximate" if method == "alse" else "exact"
    pair = linear_solve(y, theta, mode=mode)
    point, (A, B) = canonical(theta, pair)
    objective = -fz if method == "alse" else fz
    return FitResult(
        component=ChirpComponent(A, B, *point),
        objective=float(objective),
        iterations=iterations,
        converged=converged and not clamped,
        init=start,
        method=method,
    )


def refine_alse(data, init, cfg: OptConfig | None = None) -> FitResult:
    """Approximate least squares estimate: local maximiser of the periodogram."""
    return refine(data, init, "alse", cfg)


def refine_lse(data, init, cfg: OptConfig | None = None) -> FitResult:
    """Least squares estimate: local minimiser of the profiled residual sum."""
    return refine(data, init, "lse", cfg)


def sequential_fit(
    data,
    p: int,
    method: Method = "alse",
    gridcfg: GridConfig | None = None,
    optcfg: OptConfig | None = None,
    inits: Sequence | None = None,
) -> list[FitResult]:
    """Extract ``p`` components one at a time.

    Each step searches the grid on the current residual, refines, and
    subtracts the fitted component (using the method's own amplitudes)
    before the next step. ``inits[k]``, when given and not ``None``, replaces
    the grid search at step ``k``.
    """
    if int(p) < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    inits = list(inits or [])
    work = np.array(as_grid(data), dtype=float, copy=True)
    M, N = work.shape
    out: list[FitResult] = []
    for step in range(int(p)):
        if step < len(inits) and inits[step] is not None:
            init = as_point(inits[step])
        else:
            init = grid_init(work, gridcfg)
        fit = refine(work, init, method, optcfg)
        out.append(fit)
        c = fit.component
        work -= component_signal(c.A, c.B, c.alpha, c.beta, c.gamma, c.delta, M, N)
    return out
