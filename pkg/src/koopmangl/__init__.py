"""Finite-memory Koopman-GL linear predictors for nonlinear hereditary systems.

Identification, simulation and evaluation toolkit: Grünwald-Letnikov weight
kernels, observable lifting, memory-compensated least squares, the exact
block-companion augmented realization, finite-memory error diagnostics and a
reproducible benchmark study.
"""

from ._kernels import backend
from .augmented import AugmentedRealization, build_augmented, rollout_augmented, spectral_radius
from .bounds import (
    KernelMismatchReport,
    disturbance_bound,
    empirical_mz,
    gl_truncation_bound,
    kernel_mismatch,
)
from .gl_kernel import GLKernel, fit_decay_constant, gl_weights, tail_mass
from .hereditary import (
    BenchmarkConfig,
    Dataset,
    Trajectory,
    generate_dataset,
    generate_prbs,
    load_dataset,
    prony_kernel,
    save_dataset,
    simulate,
    truth_step,
)
from .identification import (
    FitReport,
    KoopmanGLModel,
    RegressionData,
    assemble,
    assemble_lifted,
    build_targets,
    error_bound,
    identify,
    load_model,
    save_model,
    solve_ls,
)
from .lifting import (
    Dictionary,
    Feature,
    affine_dictionary,
    default_dictionary,
    lift,
    readout,
    readout_matrix,
)
from .prediction import RolloutResult, evaluate_rollout, mean_relative_error_curve, nrmse, one_step, rollout
from .selection import ComparisonResult, GridResult, compare_baselines, grid_search

__version__ = "0.1.0"
