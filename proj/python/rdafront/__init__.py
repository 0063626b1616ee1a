"""Asymptotic and reference solutions for moving interior layers.

The compiled core lives in ``rdafront._rdafront``; everything is re-exported here.
"""

from ._rdafront import (
    LayerParams,
    RdafrontError,
    RunConfig,
    compare,
    differentiate,
    eval_H0,
    evaluate,
    layer_exists,
    normalize,
    phase_trajectory,
    problem,
    q0_profile,
    registry_names,
    solve_reference,
    sweep_mu,
    u_init_value,
)

__all__ = [
    "LayerParams",
    "RdafrontError",
    "RunConfig",
    "compare",
    "differentiate",
    "eval_H0",
    "evaluate",
    "layer_exists",
    "normalize",
    "phase_trajectory",
    "problem",
    "q0_profile",
    "registry_names",
    "solve_reference",
    "sweep_mu",
    "u_init_value",
]

__version__ = "0.1.0"
