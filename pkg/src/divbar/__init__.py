"""Dividend-barrier and proportional-reinsurance policy toolkit."""

from .levy import ExponentialFamily, TabulatedDensity
from .model import ModelParams, validate_params
from .solver import PolicyParams, solve_policy
from .value import ValueFunction, verify_variational_inequality
from .simulate import (
    ConstantRetention,
    FixedBarrier,
    OptimalFeedback,
    SimConfig,
    estimate_value,
    simulate_path,
)
from .sweep import SweepSpec, run_sweep, emit_csv
from .config import ParsedConfig, parse_config

__all__ = [
    "ParsedConfig",
    "parse_config",
    "ExponentialFamily",
    "TabulatedDensity",
    "ModelParams",
    "validate_params",
    "PolicyParams",
    "solve_policy",
    "ValueFunction",
    "verify_variational_inequality",
    "SimConfig",
    "OptimalFeedback",
    "ConstantRetention",
    "FixedBarrier",
    "simulate_path",
    "estimate_value",
    "SweepSpec",
    "run_sweep",
    "emit_csv",
]
