"""Excursion-based cost model for prompt corrective action on a bank whose
log-assets follow a spectrally negative Levy process with exponential jumps."""

from .errors import (
    DivergenceError,
    DomainError,
    InfeasibleDomainError,
    ParameterError,
    PcaError,
    PoleError,
    RootError,
)
from .levy_core import RegimeParams, RootSet, ScaleFunction, build_scale, laplace_exponent, solve_psi_roots
from .fluctuation import critical_bprime, exit_down, exit_up, ruin_laplace, trigger_kernels
from .pca_cost import (
    CostBreakdown,
    ExpAffine,
    Scenario,
    StatePair,
    cost_breakdown,
    cost_first,
    cost_n,
    total_cost,
)
from .optimizer import Optimum, SweepRow, comparative_statics, optimize_bprime, sweep_bprime

__all__ = [
    "CostBreakdown", "DivergenceError", "DomainError", "ExpAffine", "InfeasibleDomainError",
    "Optimum", "ParameterError", "PcaError", "PoleError", "RegimeParams", "RootError", "RootSet",
    "ScaleFunction", "Scenario", "StatePair", "SweepRow", "build_scale", "comparative_statics",
    "cost_breakdown", "cost_first", "cost_n", "critical_bprime", "exit_down", "exit_up",
    "laplace_exponent", "optimize_bprime", "ruin_laplace", "solve_psi_roots", "sweep_bprime",
    "total_cost", "trigger_kernels",
]
