"""Augmented-Lagrangian solvers for TV and Euler's elastica image denoising."""

from .grid import (
    div_backward,
    grad_forward,
    inner_product,
    laplacian,
    magnitude,
    regularized_magnitude,
)
from .imgio import (
    MalformedImageError,
    MalformedTraceError,
    UnsupportedImageError,
    load_image,
    load_trace,
    save_image,
    save_trace,
)
from .model import (
    IterationTrace,
    SolverParams,
    SolverState,
    elastica_energy,
    nmad,
    norm_n,
    nrmse,
    psnr,
    relative_residual,
)
from .report import save_comparison_figures, save_trace_figure
from .solvers import (
    DivergenceError,
    RofState,
    SolverKind,
    StopRule,
    initial_state,
    lalm_step,
    lalmn_step,
    ralm_step,
    rof_alm_step,
    run,
    shrinkage,
)
from .synth import NoiseSpec, RingSpec, add_gaussian_noise, gaussian_field, make_rings

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # grid
    "grad_forward", "div_backward", "laplacian", "inner_product", "magnitude",
    "regularized_magnitude",
    # model
    "SolverParams", "SolverState", "IterationTrace",
    "elastica_energy", "psnr", "nrmse", "nmad", "relative_residual", "norm_n",
    # solvers
    "SolverKind", "StopRule", "RofState", "DivergenceError", "shrinkage",
    "ralm_step", "lalmn_step", "lalm_step", "rof_alm_step", "run", "initial_state",
    # synth
    "RingSpec", "NoiseSpec", "make_rings", "add_gaussian_noise", "gaussian_field",
    # imgio
    "load_image", "save_image", "save_trace", "load_trace",
    "MalformedImageError", "UnsupportedImageError", "MalformedTraceError",
    # report
    "save_trace_figure", "save_comparison_figures",
]
