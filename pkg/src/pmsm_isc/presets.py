"""Canonical parameter sets of the laboratory machine used for validation."""

from __future__ import annotations

from .params import FaultConfig, FluxHarmonic, ModelParams, MotorParams, WindingConfig, build_model

__all__ = ["lab_motor", "lab_winding", "lab_model", "R_WIRE", "L_WIRE", "R_FIU_LEVELS"]

# Emulated-short parasitics: cabling resistance and inductance of the
# external switching unit, and its selectable resistance levels [ohm].
R_WIRE = 14.4e-3
L_WIRE = 3.81e-6
R_FIU_LEVELS = (442e-3, 47.0e-3, 5.62e-3, 1.74e-3)


def lab_motor(R_c: float = 362e-3) -> MotorParams:
    """Identified constants of the 21-pole-pair test machine."""
    return MotorParams(
        R_s=727e-3,
        R_c=R_c,
        L_d=3.29e-3,
        L_q=3.12e-3,
        L_0=2.74e-3,
        P_P=21,
        harmonics=(
            FluxHarmonic(order=1, amplitude=18.4e-3, phase=0.0),
            FluxHarmonic(order=3, amplitude=200e-6, phase=0.0),
        ),
    )


def lab_winding() -> WindingConfig:
    return WindingConfig(n_p=1, n_s=6)


def lab_model(
    sigma: float = 0.0,
    r_fiu: float = 0.0,
    R_c: float = 362e-3,
    l_wire: float = L_WIRE,
    phase: str = "a",
) -> ModelParams:
    """Bundle the lab machine with an optional emulated fault."""
    if sigma > 0.0:
        fault = FaultConfig(
            phase=phase, sigma=sigma, R_sc=r_fiu + R_WIRE, L_wire=l_wire, active=True
        )
    else:
        fault = FaultConfig(phase=phase, sigma=0.0, R_sc=0.0, L_wire=0.0, active=False)
    return build_model(lab_motor(R_c), lab_winding(), fault)
