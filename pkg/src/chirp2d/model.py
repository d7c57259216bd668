"""Chirp components, signal synthesis and stationary linear-process noise.

Grids are plain ``(M, N)`` float arrays. Row ``i`` of an array holds the
observations for ``m = i + 1`` and column ``j`` those for ``n = j + 1``: every
phase computation uses 1-based indices,

    phase(m, n) = alpha*m + beta*m**2 + gamma*n + delta*n**2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "ModelError",
    "ChirpComponent",
    "ChirpModel",
    "NoiseSpec",
    "IID_KERNEL",
    "MA_KERNEL",
    "DEMO_KERNEL",
    "as_grid",
    "phase",
    "component_signal",
    "synthesize",
    "make_rng",
    "generate_noise",
    "add_noise",
]

PARAM_NAMES = ("A", "B", "alpha", "beta", "gamma", "delta")

# X(m,n) = e(m,n)
IID_KERNEL: dict[tuple[int, int], float] = {(0, 0): 1.0}
# X(m,n) = e(m,n) + 0.5 e(m,n-1) + 0.4 e(m-1,n) + 0.3 e(m-1,n-1)
MA_KERNEL: dict[tuple[int, int], float] = {(0, 0): 1.0, (0, 1): 0.5, (1, 0): 0.4, (1, 1): 0.3}
# texture demo: X(m,n) = e(m,n) + 0.5 e(m-1,n) + 0.4 e(m,n-1) + 0.3 e(m-1,n-1)
DEMO_KERNEL: dict[tuple[int, int], float] = {(0, 0): 1.0, (1, 0): 0.5, (0, 1): 0.4, (1, 1): 0.3}


class ModelError(ValueError):
    """Raised when a component, model or noise specification is invalid."""


def _check_open_interval(name: str, value: float) -> None:
    if not (0.0 < value < np.pi):
        raise ModelError(f"{name}={value!r} must lie strictly inside (0, pi)")


@dataclass(frozen=True)
class ChirpComponent:
    """One chirp term ``A cos(phase) + B sin(phase)``."""

    A: float
    B: float
    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self) -> None:
        for name in PARAM_NAMES:
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ModelError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        for name in PARAM_NAMES[2:]:
            _check_open_interval(name, getattr(self, name))

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "ChirpComponent":
        if len(values) != 6:
            raise ModelError(f"expected 6 values (A, B, alpha, beta, gamma, delta), got {len(values)}")
        return cls(*(float(v) for v in values))

    @property
    def nonlinear(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma, self.delta])

    @property
    def energy(self) -> float:
        """Squared amplitude ``A**2 + B**2``."""
        return self.A**2 + self.B**2

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.B, self.alpha, self.beta, self.gamma, self.delta])

    def to_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in PARAM_NAMES}


@dataclass(frozen=True)
class ChirpModel:
    """Ordered collection of chirp components.

    Components must have pairwise distinct ``(alpha, beta, gamma, delta)`` and,
    unless ``unordered`` is set, strictly decreasing ``A**2 + B**2``. The
    ordering is what makes sequential extraction recover component ``k`` at
    step ``k``.
    """

    components: tuple[ChirpComponent, ...]
    unordered: bool = False

    def __init__(self, components: Iterable[ChirpComponent], unordered: bool = False):
        comps = tuple(components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "unordered", bool(unordered))
        if not comps:
            raise ModelError("a chirp model needs at least one component")
        for c in comps:
            if not isinstance(c, ChirpComponent):
                raise ModelError(f"expected ChirpComponent, got {type(c).__name__}")
        quads = [tuple(c.nonlinear) for c in comps]
        if len(set(quads)) != len(quads):
            raise ModelError("nonlinear parameters (alpha, beta, gamma, delta) must be pairwise distinct")
        if not unordered:
            energies = [c.energy for c in comps]
            if energies[-1] <= 0 or any(a <= b for a, b in zip(energies, energies[1:])):
                raise ModelError(
                    "component energies A^2+B^2 must be strictly decreasing and positive "
                    f"(got {energies}); pass unordered=True to allow any order"
                )

    @property
    def p(self) -> int:
        return len(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, k: int) -> ChirpComponent:
        return self.components[k]


def as_grid(values, name: str = "data") -> np.ndarray:
    """Validate and return an observation grid as a float ``(M, N)`` array."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def phase(alpha: float, beta: float, gamma: float, delta: float, M: int, N: int) -> np.ndarray:
    """Phase field ``alpha*m + beta*m^2 + gamma*n + delta*n^2`` on the 1-based grid."""
    m = np.arange(1, M + 1, dtype=float)[:, None]
    n = np.arange(1, N + 1, dtype=float)[None, :]
    return (alpha * m + beta * m * m) + (gamma * n + delta * n * n)


def component_signal(A, B, alpha, beta, gamma, delta, M: int, N: int) -> np.ndarray:
    """Noise-free field of a single term; no validation of the parameters."""
    ph = phase(alpha, beta, gamma, delta, M, N)
    return A * np.cos(ph) + B * np.sin(ph)


def synthesize(model: ChirpModel | ChirpComponent | Sequence[ChirpComponent], M: int, N: int) -> np.ndarray:
    """Noise-free sum of all chirp components on an ``M x N`` grid."""
    if isinstance(model, ChirpComponent):
        comps: Sequence[ChirpComponent] = (model,)
    elif isinstance(model, ChirpModel):
        comps = model.components
    else:
        comps = ChirpModel(model, unordered=True).components
    if M < 2 or N < 2:
        raise ModelError(f"grid must be at least 2x2, got {M}x{N}")
    out = np.zeros((M, N))
    for c in comps:
        if c.A == 0.0 and c.B == 0.0:
            raise ModelError("components used in synthesis need (A, B) != (0, 0)")
        out += component_signal(c.A, c.B, c.alpha, c.beta, c.gamma, c.delta, M, N)
    return out


@dataclass(frozen=True)
class NoiseSpec:
    """Finite moving-average field ``X(m,n) = sum a(j,k) e(m-j, n-k)``.

    ``e`` is iid N(0, sigma^2). ``kernel`` maps the lag ``(j, k)`` (row lag,
    column lag) to the coefficient ``a(j, k)``.
    """

    sigma: float
    kernel: Mapping[tuple[int, int], float] = field(default_factory=lambda: dict(IID_KERNEL))
    seed: int = 0

    def __post_init__(self) -> None:
        sigma = float(self.sigma)
        if not np.isfinite(sigma) or sigma < 0:
            raise ModelError(f"sigma must be finite and >= 0, got {self.sigma!r}")
        kernel = {(int(j), int(k)): float(a) for (j, k), a in dict(self.kernel).items()}
        if sigma > 0 and not kernel:
            raise ModelError("kernel must be non-empty when sigma > 0")
        if not all(np.isfinite(a) for a in kernel.values()):
            raise ModelError("kernel coefficients must be finite")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "seed", int(self.seed))

    def with_seed(self, seed: int) -> "NoiseSpec":
        return NoiseSpec(self.sigma, self.kernel, seed)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator; streams are identical on every platform."""
    return np.random.Generator(np.random.Philox(int(seed)))


def generate_noise(spec: NoiseSpec, M: int, N: int) -> np.ndarray:
    """Draw an ``M x N`` realisation of the linear-process error field.

    The innovation field is drawn over the index range padded by the kernel
    support, so border values get the full convolution and the output is
    exactly stationary.
    """
    if M < 1 or N < 1:
        raise ModelError(f"grid must be at least 1x1, got {M}x{N}")
    if spec.sigma == 0.0 or not spec.kernel:
        return np.zeros((M, N))
    js = [j for j, _ in spec.kernel]
    ks = [k for _, k in spec.kernel]
    jlo, jhi, klo, khi = min(js), max(js), min(ks), max(ks)
    rng = make_rng(spec.seed)
    # innovation row r holds e(m) for m = r + 1 - jhi
    eps = rng.standard_normal((M + jhi - jlo, N + khi - klo)) * spec.sigma
    out = np.zeros((M, N))
    for (j, k), a in sorted(spec.kernel.items()):
        if a == 0.0:
            continue
        r0 = jhi - j
        c0 = khi - k
        out += a * eps[r0 : r0 + M, c0 : c0 + N]
    return out


def add_noise(clean, noise) -> np.ndarray:
    clean = np.asarray(clean, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if clean.shape != noise.shape:
        raise ValueError(f"dimension mismatch: {clean.shape} vs {noise.shape}")
    return clean + noise
