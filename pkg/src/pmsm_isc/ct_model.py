"""Continuous-time machine dynamics, outputs, torque, and field energy.

The dq right-hand side is the production model (healthy-part currents plus
the fault current, connection resistance included). The phase-frame right-hand
side carries the full angle-dependent inductance matrix and exists purely as
an independent cross-check of the dq path, so it ignores R_c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .frames import (
    AbcTriple,
    DqPair,
    flux_linkage_abc,
    flux_linkage_abc_dtheta,
    inverse_park,
    pm_flux_dq,
    zero_sequence_flux,
)
from .params import ModelParams

__all__ = [
    "ModelState",
    "StepInput",
    "Outputs",
    "dq_rhs",
    "rhs_consts",
    "dq_rhs_scalar",
    "abc_rhs",
    "inductance_matrix",
    "inductance_matrix_dtheta",
    "output_currents",
    "torque",
    "coupling_energy",
    "center_point_potential",
    "outputs",
    "input_power",
    "heat_loss_rate",
]

_TWO_PI = 2.0 * math.pi
_PHASE_INDEX = {"a": 0, "b": 1, "c": 2}


@dataclass(frozen=True, slots=True)
class ModelState:
    """Healthy-part dq currents and the fault current, all in ampere."""

    i_dh: float
    i_qh: float
    i_f: float = 0.0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.i_dh, self.i_qh, self.i_f)


@dataclass(frozen=True, slots=True)
class StepInput:
    """Exogenous per-step drive: dq voltages, velocity, angle, common mode.

    theta_e is wrapped to [0, 2 pi) on construction; T_s must be positive.
    """

    u_d: float
    u_q: float
    omega_e: float
    theta_e: float
    u_m: float = 0.0
    T_s: float = 1e-4

    def __post_init__(self) -> None:
        if not self.T_s > 0.0:
            raise ValueError(f"T_s must be > 0, got {self.T_s}")
        object.__setattr__(self, "theta_e", self.theta_e % _TWO_PI)


class Outputs(NamedTuple):
    """Observable quantities reconstructed from one state sample."""

    i_d: float
    i_q: float
    i_abc: AbcTriple
    i_p: float
    T_e: float
    u_0: float


def rhs_consts(params: ModelParams) -> tuple:
    """Flatten the parameters the dq right-hand side needs into one tuple.

    Integration loops call the scalar kernel thousands of times per step;
    unpacking a tuple is much cheaper than chasing dataclass attributes.
    """
    m = params.motor
    if params.fault_active:
        d = params.derived
        k = (2.0 / 3.0) * params.sigma_ns
        return (
            m.L_d, m.L_q, m.R_s + m.R_c, m.R_c, k, params.phi_f,
            True, d.R_f_star, d.L_f1, d.L_f2,
            params.lam_1, params.dq_flux_pairs, params.triplens,
        )
    return (
        m.L_d, m.L_q, m.R_s + m.R_c, m.R_c, 0.0, 0.0,
        False, 0.0, 0.0, 0.0,
        params.lam_1, params.dq_flux_pairs, params.triplens,
    )


def dq_rhs_scalar(
    i_dh: float, i_qh: float, i_f: float,
    u_d: float, u_q: float, omega: float, theta: float,
    C: tuple,
) -> tuple[float, float, float]:
    """Time derivatives of (i_dh, i_qh, i_f) in the rotor frame."""
    (L_d, L_q, R_t, R_c, k, phi_f, active,
     R_f_star, L_f1, L_f2, lam_1, pairs, triplens) = C

    lam_d = lam_1
    lam_q = 0.0
    for j, lam_lo, ph_lo, lam_hi, ph_hi in pairs:
        arg_lo = j * theta + ph_lo
        arg_hi = j * theta + ph_hi
        lam_d += (1 - j) * lam_lo * math.cos(arg_lo) + (j + 1) * lam_hi * math.cos(arg_hi)
        lam_q += (j - 1) * lam_lo * math.sin(arg_lo) + (j + 1) * lam_hi * math.sin(arg_hi)

    if not active:
        d_idh = (u_d - R_t * i_dh + omega * (L_q * i_qh + lam_q)) / L_d
        d_iqh = (u_q - R_t * i_qh - omega * (L_d * i_dh + lam_d)) / L_q
        return (d_idh, d_iqh, 0.0)

    cth = math.cos(theta + phi_f)
    sth = math.sin(theta + phi_f)
    d_idh = (u_d - R_t * i_dh + omega * (L_q * i_qh + lam_q) - k * R_c * i_f * cth) / L_d
    d_iqh = (u_q - R_t * i_qh - omega * (L_d * i_dh + lam_d) + k * R_c * i_f * sth) / L_q

    dlam0 = 0.0
    for j, amp, phase in triplens:
        dlam0 -= j * amp * math.sin(j * theta + phase)

    two_arg = 2.0 * theta - phi_f
    L_f = L_f1 + L_f2 * math.cos(two_arg)
    dL_f = -2.0 * omega * L_f2 * math.sin(two_arg)
    rhs_f = (
        -R_f_star * i_f
        + (u_d * cth - u_q * sth)
        - R_c * (i_dh * cth - i_qh * sth)
        + omega * dlam0
    )
    d_if = (rhs_f - i_f * dL_f) / L_f
    return (d_idh, d_iqh, d_if)


def dq_rhs(state: ModelState, inp: StepInput, params: ModelParams) -> tuple[float, float, float]:
    """Rotor-frame state derivative; rejects non-finite states."""
    if not (math.isfinite(state.i_dh) and math.isfinite(state.i_qh) and math.isfinite(state.i_f)):
        raise ValueError(f"non-finite state: {state}")
    return dq_rhs_scalar(
        state.i_dh, state.i_qh, state.i_f,
        inp.u_d, inp.u_q, inp.omega_e, inp.theta_e,
        rhs_consts(params),
    )


def inductance_matrix(L_s: float, L_m: float, L_fl: float, theta_e: float) -> np.ndarray:
    """Angle-dependent 3x3 stator inductance matrix."""
    c0 = L_fl * math.cos(2.0 * theta_e)
    cp = L_fl * math.cos(2.0 * theta_e + _TWO_PI / 3.0)
    cm = L_fl * math.cos(2.0 * theta_e - _TWO_PI / 3.0)
    return np.array([
        [L_s + c0, -L_m + cm, -L_m + cp],
        [-L_m + cm, L_s + cp, -L_m + c0],
        [-L_m + cp, -L_m + c0, L_s + cm],
    ])


def inductance_matrix_dtheta(L_fl: float, theta_e: float) -> np.ndarray:
    """Angle derivative of :func:`inductance_matrix`."""
    s0 = -2.0 * L_fl * math.sin(2.0 * theta_e)
    sp = -2.0 * L_fl * math.sin(2.0 * theta_e + _TWO_PI / 3.0)
    sm = -2.0 * L_fl * math.sin(2.0 * theta_e - _TWO_PI / 3.0)
    return np.array([
        [s0, sm, sp],
        [sm, sp, s0],
        [sp, s0, sm],
    ])


def _phase_self_inductance(params: ModelParams, theta_e: float) -> tuple[float, float]:
    """Self inductance of the shorted phase and its angle derivative."""
    # cos(2 theta - phi_f) reproduces the aa/bb/cc angle pattern of the
    # inductance matrix for phases a/b/c respectively.
    arg = 2.0 * theta_e - params.phi_f
    return (
        params.L_s + params.L_fl * math.cos(arg),
        -2.0 * params.L_fl * math.sin(arg),
    )


def abc_rhs(
    i_abc_h: np.ndarray,
    i_f: float,
    u_t: np.ndarray,
    u_m: float,
    omega: float,
    theta: float,
    params: ModelParams,
) -> tuple[np.ndarray, float]:
    """Phase-frame state derivative (cross-check path, R_c ignored).

    ``i_abc_h`` must be balanced. The healthy equation inverts the full 3x3
    inductance matrix; the fault equation uses the shorted phase's terminal
    potential and self inductance.
    """
    m = params.motor
    harmonics = tuple((h.order, h.amplitude, h.phase) for h in m.harmonics)
    L = inductance_matrix(params.L_s, params.L_m, params.L_fl, theta)
    dL = inductance_matrix_dtheta(params.L_fl, theta)
    dLam = np.array(flux_linkage_abc_dtheta(harmonics, theta))
    _, dlam0 = zero_sequence_flux(params.triplens, theta)

    ones = np.ones(3)
    rhs = u_t - (u_m - omega * dlam0) * ones - m.R_s * i_abc_h - omega * (dL @ i_abc_h) - omega * dLam
    di_abc = np.linalg.solve(L, rhs)

    if not params.fault_active:
        return di_abc, 0.0

    d = params.derived
    w = params.winding
    s_ns = params.sigma_ns
    L_xx, dL_xx = _phase_self_inductance(params, theta)
    L_f = s_ns * w.n_p * (w.n_s - 1) * L_xx + s_ns * m.L_0 / 3.0 \
        + (w.n_s / params.fault.sigma) * params.fault.L_wire
    dL_f = s_ns * w.n_p * (w.n_s - 1) * dL_xx
    u_xt = float(u_t[_PHASE_INDEX[params.fault.phase]])
    di_f = (u_xt - u_m - d.R_f * i_f - omega * dL_f * i_f + omega * dlam0) / L_f
    return di_abc, di_f


def output_currents(
    state: ModelState, theta_e: float, params: ModelParams
) -> tuple[float, float, AbcTriple, float]:
    """Terminal dq currents, phase currents, and the parallel-branch current."""
    if params.fault_active:
        k = (2.0 / 3.0) * params.sigma_ns * state.i_f
        i_d = state.i_dh + k * math.cos(theta_e + params.phi_f)
        i_q = state.i_qh - k * math.sin(theta_e + params.phi_f)
    else:
        i_d, i_q = state.i_dh, state.i_qh
    i_abc = inverse_park((i_d, i_q), theta_e)
    n_p = params.winding.n_p
    if n_p == 1:
        i_p = 0.0
    else:
        i_x = i_abc[_PHASE_INDEX[params.fault.phase]]
        i_p = (n_p - 1) / n_p * (i_x - params.sigma_ns * state.i_f)
    return i_d, i_q, i_abc, i_p


def torque(state: ModelState, theta_e: float, params: ModelParams) -> float:
    """Electromagnetic torque in N*m."""
    m = params.motor
    lam_d, lam_q = pm_flux_dq(params, theta_e)
    T_e = 1.5 * m.P_P * (
        lam_d * state.i_qh - lam_q * state.i_dh
        + (m.L_d - m.L_q) * state.i_dh * state.i_qh
    )
    if params.fault_active:
        d = params.derived
        s_ns = params.sigma_ns
        _, dlam0 = zero_sequence_flux(params.triplens, theta_e)
        T_e -= m.P_P * s_ns * d.L_f2 * state.i_f ** 2 * math.sin(2.0 * theta_e - params.phi_f)
        T_e -= m.P_P * s_ns * state.i_f * dlam0
    return T_e


def coupling_energy(state: ModelState, theta_e: float, params: ModelParams) -> float:
    """Energy stored in the coupling field, evaluated in phase variables."""
    i_h = np.array(inverse_park((state.i_dh, state.i_qh), theta_e))
    L = inductance_matrix(params.L_s, params.L_m, params.L_fl, theta_e)
    harmonics = tuple((h.order, h.amplitude, h.phase) for h in params.motor.harmonics)
    Lam = np.array(flux_linkage_abc(harmonics, theta_e))
    W = 0.5 * float(i_h @ L @ i_h) + float(i_h @ Lam)
    if params.fault_active:
        d = params.derived
        s_ns = params.sigma_ns
        lam0, _ = zero_sequence_flux(params.triplens, theta_e)
        L_f = d.L_f1 + d.L_f2 * math.cos(2.0 * theta_e - params.phi_f)
        W += 0.5 * s_ns * L_f * state.i_f ** 2 - s_ns * state.i_f * lam0
    return W


def center_point_potential(
    i_f: float,
    di_f_dt: float,
    theta_e: float,
    omega_e: float,
    u_m: float,
    params: ModelParams,
) -> float:
    """Potential of the wye center point."""
    _, dlam0 = zero_sequence_flux(params.triplens, theta_e)
    u0 = u_m - omega_e * dlam0
    if params.fault_active:
        s_ns = params.sigma_ns
        u0 += s_ns * (params.motor.R_s * i_f + params.motor.L_0 * di_f_dt) / 3.0
    return u0


def outputs(state: ModelState, inp: StepInput, params: ModelParams) -> Outputs:
    """Assemble every observable for one (state, input) sample."""
    i_d, i_q, i_abc, i_p = output_currents(state, inp.theta_e, params)
    T_e = torque(state, inp.theta_e, params)
    di_f = dq_rhs(state, inp, params)[2]
    u_0 = center_point_potential(state.i_f, di_f, inp.theta_e, inp.omega_e, inp.u_m, params)
    return Outputs(i_d, i_q, i_abc, i_p, T_e, u_0)


def input_power(state: ModelState, inp: StepInput, params: ModelParams) -> float:
    """Instantaneous electrical power drawn at the stator terminals.

    Valid for the R_c-free bookkeeping: healthy-part dq power plus the power
    fed into the fault branch.
    """
    p = 1.5 * (inp.u_d * state.i_dh + inp.u_q * state.i_qh)
    if params.fault_active:
        drive = inp.u_d * math.cos(inp.theta_e + params.phi_f) \
            - inp.u_q * math.sin(inp.theta_e + params.phi_f)
        p += params.sigma_ns * state.i_f * drive
    return p


def heat_loss_rate(state: ModelState, params: ModelParams) -> float:
    """Instantaneous resistive loss (R_c-free bookkeeping)."""
    p = 1.5 * params.motor.R_s * (state.i_dh ** 2 + state.i_qh ** 2)
    if params.fault_active:
        p += params.sigma_ns * params.derived.R_f * state.i_f ** 2
    return p
