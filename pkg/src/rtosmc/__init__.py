"""Explicit-state model checker for a FreeRTOS-style scheduler on a Cortex-M interrupt model."""
from ._kernels import BACKEND
from .model import Config, GlobalState, Policy, SchedKind, System, make_config, parse_policy

__version__ = "0.1.0"

__all__ = ["BACKEND", "Config", "GlobalState", "Policy", "SchedKind", "System",
           "make_config", "parse_policy", "__version__"]
