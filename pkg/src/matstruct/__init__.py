"""Maturity-structured cell population with a maturity-dependent division delay.

Modules
-------
model            model functions, hypothesis checks and initial data
characteristics  characteristic curves, survival kernels and transmission schedule
immature         the m = 0 delay system: integration, Lyapunov functional, roots
solver           field solver for the resting and proliferating densities
analysis         stability classification and the dependence/extinction experiments
verify           end-to-end verification suites
config, io, cli  run configuration, CSV/JSON files and the command line
"""
__version__ = "0.1.0"

from .characteristics import CharTables, DomainError, PropagationSchedule
from .model import (
    HypothesisViolation,
    InitialData,
    ModelSpec,
    build_model,
    bump_data,
    constant_data,
    example_family,
    zero_below_data,
)

__all__ = [
    "CharTables",
    "DomainError",
    "HypothesisViolation",
    "InitialData",
    "ModelSpec",
    "PropagationSchedule",
    "build_model",
    "bump_data",
    "constant_data",
    "example_family",
    "zero_below_data",
]
