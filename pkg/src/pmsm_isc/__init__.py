"""Interturn short circuit dynamics of interior PMSMs.

Continuous-time phase/rotor-frame models of a machine with a partially
shorted winding segment, a closed-form discrete-time model with a
perturbation extension for the connection resistance, a forward-Euler
baseline, and a brute-force integration oracle with a scenario harness.
"""

from .params import (
    FluxHarmonic,
    MotorParams,
    WindingConfig,
    FaultConfig,
    DerivedParams,
    ModelParams,
    derive_dq_inductances,
    abc_inductance_primitives,
    derive_fault_params,
    build_model,
)
from .ct_model import ModelState, StepInput, Outputs
from .oracle import IntegrationConfig, ErrorReport, integrate_step, quadrature, compare_trajectories
from .dtm import StepCoefficients, compute_coefficients, dtm_step, euler_step

__all__ = [
    "FluxHarmonic",
    "MotorParams",
    "WindingConfig",
    "FaultConfig",
    "DerivedParams",
    "ModelParams",
    "derive_dq_inductances",
    "abc_inductance_primitives",
    "derive_fault_params",
    "build_model",
    "ModelState",
    "StepInput",
    "Outputs",
    "IntegrationConfig",
    "ErrorReport",
    "integrate_step",
    "quadrature",
    "compare_trajectories",
    "StepCoefficients",
    "compute_coefficients",
    "dtm_step",
    "euler_step",
]

__version__ = "0.1.0"
