"""Parameter estimation for two-dimensional chirp signals.

The model is ``y(m, n) = sum_k A_k cos(phi_k) + B_k sin(phi_k) + X(m, n)`` with
``phi_k = alpha_k m + beta_k m^2 + gamma_k n + delta_k n^2`` on a 1-based
``M x N`` grid and ``X`` a stationary linear-process error field.
"""

from .asymptotics import AvarReport, avar, noise_c, scale_matrix, sigma_inverse, sigma_matrix
from .estimate import (
    FitResult,
    GridConfig,
    OptConfig,
    canonical,
    grid_init,
    refine,
    refine_alse,
    refine_lse,
    sequential_fit,
)
from .model import (
    DEMO_KERNEL,
    IID_KERNEL,
    MA_KERNEL,
    ChirpComponent,
    ChirpModel,
    ModelError,
    NoiseSpec,
    add_noise,
    component_signal,
    generate_noise,
    synthesize,
)
from .objective import (
    DomainError,
    LinearPair,
    NonlinearPoint,
    SingularGramError,
    design_matrix_apply,
    error_sum,
    linear_solve,
    mirror,
    periodogram,
    profiled_error_sum,
)
from .simulate import McConfig, McReport, run_mc, summarize

__version__ = "0.1.0"

__all__ = [
    "AvarReport",
    "ChirpComponent",
    "ChirpModel",
    "DEMO_KERNEL",
    "DomainError",
    "FitResult",
    "GridConfig",
    "IID_KERNEL",
    "LinearPair",
    "MA_KERNEL",
    "McConfig",
    "McReport",
    "ModelError",
    "NoiseSpec",
    "NonlinearPoint",
    "OptConfig",
    "SingularGramError",
    "add_noise",
    "avar",
    "canonical",
    "component_signal",
    "design_matrix_apply",
    "error_sum",
    "generate_noise",
    "grid_init",
    "linear_solve",
    "mirror",
    "noise_c",
    "periodogram",
    "profiled_error_sum",
    "refine",
    "refine_alse",
    "refine_lse",
    "run_mc",
    "scale_matrix",
    "sequential_fit",
    "sigma_inverse",
    "sigma_matrix",
    "summarize",
    "synthesize",
]
