"""Dynamic Bayesian optimization for visual tracking (C++ core)."""

from ._core import (
    BoundingBox,
    DopBenchResult,
    EvalReport,
    ErrorBase,
    InvalidArgument,
    __version__,
    expected_improvement,
    gp_fit_predict,
    gp_log_marginal_likelihood,
    gp_selftest,
    iou,
    kernel_eval,
    ms_ei_xi,
    parse_groundtruth_line,
    probability_of_improvement,
    run_dop_benchmark,
    run_translating_clip,
    st_kernel_eval,
)

__all__ = [
    "BoundingBox",
    "DopBenchResult",
    "EvalReport",
    "ErrorBase",
    "InvalidArgument",
    "__version__",
    "expected_improvement",
    "gp_fit_predict",
    "gp_log_marginal_likelihood",
    "gp_selftest",
    "iou",
    "kernel_eval",
    "ms_ei_xi",
    "parse_groundtruth_line",
    "probability_of_improvement",
    "run_dop_benchmark",
    "run_translating_clip",
    "st_kernel_eval",
]
