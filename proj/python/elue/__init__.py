"""Python bindings for the ELUE efficiency-benchmark engine."""

from ._elue import (
    CONVENTION_VERSION,
    Error,
    assign_track,
    canonical_trace,
    count_params,
    elue_score,
    entropy_exit,
    forward_flops,
    interpolate,
    pareto_frontier,
    patience_exit,
    score_traces,
    submission_flops,
    train,
)

__all__ = [
    "CONVENTION_VERSION",
    "Error",
    "assign_track",
    "canonical_trace",
    "count_params",
    "elue_score",
    "entropy_exit",
    "forward_flops",
    "interpolate",
    "pareto_frontier",
    "patience_exit",
    "score_traces",
    "submission_flops",
    "train",
]
