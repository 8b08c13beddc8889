"""Residual-focused data description for radar sweep anomaly detection.

Pipeline pieces: sweep representations (standardized real, analytic,
amplitude), a complex-valued autoencoder with amplitude-aware activations,
an RBF data description on raw vectors or autoencoder residuals with a
validation-corrected density limit, a synthetic sweep generator, a k-fold
evaluation harness, and a batch CLI (``fsvdd``).
"""

from ._backend import NUMBA_ENABLED, backend_name
from .complex_nn import (
    Activation,
    AmplitudeStats,
    ComplexAutoencoder,
    DenseLayer,
    TrainConfig,
    build_autoencoder,
    crelu,
    ead,
    ead_statistics,
    forward,
    grad,
    layer_amplitude_stats,
    modrelu,
    reconstruction_loss,
    train,
)
from .dataio import SignalDataset, read_dataset, write_dataset
from .evaluate import (
    AblationSpec,
    EvalReport,
    FoldPlan,
    Metrics,
    compute_metrics,
    run_ablation,
)
from .focus_svdd import (
    FocusModel,
    decide_m,
    decide_r,
    fit_focus,
    norm_baseline,
    residual,
)
from .signal_repr import (
    AnalyticSignal,
    IFSignal,
    Standardizer,
    analytic,
    analytic_signal,
    fit_standardizer,
    instantaneous_amplitude,
    standardize,
)
from .svdd import SvddModel, decide, density, fit, gram, rbf_kernel, select_gamma
from .synth_data import GeneratorConfig, Target, default_config, generate, synth_signal

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED", "backend_name",
    "Activation", "AmplitudeStats", "ComplexAutoencoder", "DenseLayer",
    "TrainConfig", "build_autoencoder", "crelu", "ead", "ead_statistics",
    "forward", "grad", "layer_amplitude_stats", "modrelu",
    "reconstruction_loss", "train",
    "SignalDataset", "read_dataset", "write_dataset",
    "AblationSpec", "EvalReport", "FoldPlan", "Metrics", "compute_metrics",
    "run_ablation",
    "FocusModel", "decide_m", "decide_r", "fit_focus", "norm_baseline",
    "residual",
    "AnalyticSignal", "IFSignal", "Standardizer", "analytic",
    "analytic_signal", "fit_standardizer", "instantaneous_amplitude",
    "standardize",
    "SvddModel", "decide", "density", "fit", "gram", "rbf_kernel",
    "select_gamma",
    "GeneratorConfig", "Target", "default_config", "generate", "synth_signal",
    "__version__",
]
