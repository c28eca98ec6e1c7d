"""Distance-sampling engine: detection functions, fitting, density, bootstrap."""
from .bootstrap import (
    BootstrapResult,
    BootstrapSummary,
    bootstrap,
    summarize_replicates,
)
from .density import DensityResult, effort, estimate_abundance, estimate_density
from .detection_function import (
    DetectionFunctionSpec,
    DetectionModel,
    Key,
    bin_probabilities,
    estimate_P,
    g,
    g_values,
    half_normal_model,
    hazard_rate_model,
    is_feasible,
    uniform_model,
)
from .fit import (
    DEFAULT_CANDIDATES,
    BinnedDistances,
    FittedDetectionModel,
    chat_and_qaic,
    fit_detection_function,
    select_model,
)
from .quadrature import integrate, integrate_bins

__all__ = [
    "BinnedDistances",
    "BootstrapResult",
    "BootstrapSummary",
    "DEFAULT_CANDIDATES",
    "DensityResult",
    "DetectionFunctionSpec",
    "DetectionModel",
    "FittedDetectionModel",
    "Key",
    "bin_probabilities",
    "bootstrap",
    "chat_and_qaic",
    "effort",
    "estimate_P",
    "estimate_abundance",
    "estimate_density",
    "fit_detection_function",
    "g",
    "g_values",
    "half_normal_model",
    "hazard_rate_model",
    "integrate",
    "integrate_bins",
    "is_feasible",
    "select_model",
    "summarize_replicates",
    "uniform_model",
]
