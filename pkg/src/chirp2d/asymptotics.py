"""Asymptotic covariance of the ALSE and LSE of one chirp component.

Both estimators satisfy ``(theta_hat - theta0) D^-1 -> N6(0, sigma^2 c Sigma^-1)``
where ``D`` carries the convergence rates and ``Sigma`` depends only on the
amplitudes. Per-parameter variances of the raw estimates at finite ``(M, N)``
are the plug-in values ``sigma^2 c (Sigma^-1)_ii D_ii^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PARAM_NAMES, NoiseSpec

__all__ = [
    "AvarReport",
    "scale_matrix",
    "sigma_matrix",
    "sigma_inverse",
    "sigma_inverse_closed_form",
    "noise_c",
    "avar",
]


def scale_matrix(M: int, N: int) -> np.ndarray:
    """Diagonal of ``D`` in ``(A, B, alpha, beta, gamma, delta)`` order."""
    if M < 1 or N < 1:
        raise ValueError(f"M and N must be >= 1, got {M}, {N}")
    M, N = float(M), float(N)
    base = M**-0.5 * N**-0.5
    return np.array([base, base, base / M, base / M**2, base / N, base / N**2])


def _check_amplitudes(A: float, B: float) -> float:
    if not (np.isfinite(A) and np.isfinite(B)):
        raise ValueError("amplitudes must be finite")
    e = A * A + B * B
    if e == 0.0:
        raise ValueError("Sigma is singular for (A, B) = (0, 0)")
    return e


def sigma_matrix(A: float, B: float) -> np.ndarray:
    """Limit of ``-D J'' D / 2`` (equivalently ``D Q'' D / 2``) at the truth."""
    e = _check_amplitudes(A, B)
    S = np.array(
        [
            [1 / 2, 0, B / 4, B / 6, B / 4, B / 6],
            [0, 1 / 2, -A / 4, -A / 6, -A / 4, -A / 6],
            [B / 4, -A / 4, e / 6, e / 8, e / 8, e / 12],
            [B / 6, -A / 6, e / 8, e / 10, e / 12, e / 18],
            [B / 4, -A / 4, e / 8, e / 12, e / 6, e / 8],
            [B / 6, -A / 6, e / 12, e / 18, e / 8, e / 10],
        ],
        dtype=float,
    )
    return S


def sigma_inverse(A: float, B: float) -> np.ndarray:
    """Numerical inverse of :func:`sigma_matrix`.

    ``Sigma`` is symmetric and invariant under swapping the ``(alpha, beta)``
    and ``(gamma, delta)`` blocks, so the inverse is averaged over both
    symmetries to remove rounding asymmetry.
    """
    S = sigma_matrix(A, B)
    try:
        inv = np.linalg.inv(S)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - only (0, 0) is singular
        raise ValueError(f"Sigma is singular at A={A}, B={B}") from exc
    inv = 0.5 * (inv + inv.T)
    swap = [0, 1, 4, 5, 2, 3]
    return 0.5 * (inv + inv[np.ix_(swap, swap)])


def sigma_inverse_closed_form(A: float, B: float) -> np.ndarray:
    """The closed form of ``Sigma^-1``, kept as an independent cross-check."""
    e = _check_amplitudes(A, B)
    X = np.array(
        [
            [A * A + 17 * B * B, -16 * A * B, -36 * B, 30 * B, -36 * B, 30 * B],
            [-16 * A * B, 17 * A * A + B * B, 36 * A, -30 * A, 36 * A, -30 * A],
            [-36 * B, 36 * A, 192, -180, 0, 0],
            [30 * B, -30 * A, -180, 180, 0, 0],
            [-36 * B, 36 * A, 0, 0, 192, -180],
            [30 * B, -30 * A, 0, 0, -180, 180],
        ],
        dtype=float,
    )
    return 2.0 / e * X


def noise_c(spec: NoiseSpec) -> float:
    """``c = sum a(j,k)^2`` for the linear-process kernel."""
    if not spec.kernel:
        raise ValueError("noise kernel is empty")
    return float(sum(a * a for a in spec.kernel.values()))


@dataclass(frozen=True)
class AvarReport:
    """Asymptotic covariance for one component.

    ``cov`` is ``sigma^2 c Sigma^-1`` (the covariance of the D-scaled error);
    ``per_param`` is the approximate variance of each raw estimate.
    """

    component_index: int
    cov: np.ndarray
    per_param: np.ndarray
    M: int
    N: int
    sigma2: float
    c: float

    def to_dict(self) -> dict:
        return {
            "component_index": self.component_index,
            "M": self.M,
            "N": self.N,
            "sigma2": self.sigma2,
            "c": self.c,
            "per_param": dict(zip(PARAM_NAMES, (float(v) for v in self.per_param))),
            "cov": [[float(v) for v in row] for row in self.cov],
        }


def avar(
    A: float,
    B: float,
    sigma: float,
    c: float,
    M: int,
    N: int,
    component_index: int = 1,
) -> AvarReport:
    """Asymptotic variances of ``(A, B, alpha, beta, gamma, delta)`` estimates."""
    if not np.isfinite(sigma) or sigma < 0:
        raise ValueError(f"sigma must be finite and >= 0, got {sigma}")
    if not np.isfinite(c) or c <= 0:
        raise ValueError(f"c must be > 0, got {c}")
    sigma2 = float(sigma) ** 2
    cov = sigma2 * c * sigma_inverse(A, B)
    d = scale_matrix(M, N)
    return AvarReport(
        component_index=int(component_index),
        cov=cov,
        per_param=np.diag(cov) * d * d,
        M=int(M),
        N=int(N),
        sigma2=sigma2,
        c=float(c),
    )
