"""Closed-form discrete-time model of the shorted machine.

One step maps the state at sample k to k+1 with coefficients recomputed from
the frozen per-step velocity and angle; nothing is cached across steps. The
input treatment assumes held terminal potentials, so the dq voltage vector
rotates inside the interval; the forward-Euler baseline deliberately does
not (it holds the dq voltages themselves, which is its documented bias).

Every quotient that degenerates at omega_e -> 0 is evaluated through a
series branch below |x| < 1e-4 (x the relevant angle increment); the
perturbation denominator uses a series branch below |rho* - R_f*/L_f1| * T_s
< 1e-6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ct_model import ModelState, StepInput, dq_rhs_scalar, rhs_consts
from .params import ModelParams

__all__ = [
    "StepCoefficients",
    "rotation",
    "healthy_transition",
    "input_matrix",
    "flux_vector",
    "integral_approx",
    "fault_decay",
    "fault_input_coeffs",
    "perturbation_blocks",
    "assemble_phi",
    "compute_coefficients",
    "dtm_step",
    "euler_step",
]

_SINC_CUTOFF = 1e-4
_DENOM_CUTOFF = 1e-6


def _sinc(x: float) -> float:
    """sin(x)/x."""
    if abs(x) < _SINC_CUTOFF:
        x2 = x * x
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    return math.sin(x) / x


def _cosc(x: float) -> float:
    """(1 - cos(x))/x."""
    if abs(x) < _SINC_CUTOFF:
        return x / 2.0 - x ** 3 / 24.0
    return (1.0 - math.cos(x)) / x


def _dcos(x: float, j: int, s: int) -> float:
    """(cos(x) - cos(j x)) / ((j + s) x) for s = +-1."""
    if abs(x) < _SINC_CUTOFF:
        jj = float(j)
        return ((jj * jj - 1.0) * x / 2.0 - (jj ** 4 - 1.0) * x ** 3 / 24.0) / (j + s)
    return (math.cos(x) - math.cos(j * x)) / ((j + s) * x)


def _dsin_sum(x: float, j: int) -> float:
    """(sin(x) + sin(j x)) / ((j + 1) x)."""
    if abs(x) < _SINC_CUTOFF:
        jj = float(j)
        return 1.0 - (1.0 + jj ** 3) * x * x / (6.0 * (1.0 + jj))
    return (math.sin(x) + math.sin(j * x)) / ((j + 1) * x)


def _dsin_diff(x: float, j: int) -> float:
    """(sin(j x) - sin(x)) / ((j - 1) x)."""
    if abs(x) < _SINC_CUTOFF:
        jj = float(j)
        return 1.0 - (jj ** 3 - 1.0) * x * x / (6.0 * (jj - 1.0))
    return (math.sin(j * x) - math.sin(x)) / ((j - 1) * x)


def _em1(x: float) -> float:
    """(1 - exp(-x))/x, finite at x = 0."""
    if abs(x) < _DENOM_CUTOFF:
        return 1.0 - x / 2.0 + x * x / 6.0
    return -math.expm1(-x) / x


def rotation(omega_e: float, t: float) -> np.ndarray:
    """Planar rotation through -omega_e * t; inverse equals transpose."""
    c = math.cos(omega_e * t)
    s = math.sin(omega_e * t)
    return np.array([[c, s], [-s, c]])


def healthy_transition(
    params: ModelParams,
    omega_e: float,
    T_s: float,
    simplified: bool = False,
    with_connection: bool = True,
) -> np.ndarray:
    """State-transition block of the healthy-part currents."""
    rho, delta = params.rho_delta(with_connection)
    L_d, L_q = params.motor.L_d, params.motor.L_q
    x = omega_e * T_s
    c, s = math.cos(x), math.sin(x)
    decay = math.exp(-rho * T_s)
    E = decay * np.array([[c, (L_q / L_d) * s], [-(L_d / L_q) * s, c]])
    if not simplified:
        E += decay * T_s * _sinc(x) * np.diag([delta, -delta])
    return E


def input_matrix(
    params: ModelParams,
    omega_e: float,
    T_s: float,
    simplified: bool = False,
    with_connection: bool = True,
) -> np.ndarray:
    """Input block under the held-terminal-potential assumption."""
    rho, delta = params.rho_delta(with_connection)
    L_d, L_q = params.motor.L_d, params.motor.L_q
    x = omega_e * T_s
    c, s = math.cos(x), math.sin(x)
    gain = T_s * _em1(rho * T_s)
    B = gain * np.array([[c / L_d, s / L_d], [-s / L_q, c / L_q]])
    if not simplified:
        scale = T_s * _sinc(x) * (math.exp(-rho * T_s) - math.exp(-rho * T_s / 2.0)) / rho
        B -= scale * np.array([[delta / L_d, 0.0], [0.0, -delta / L_q]])
    return B


def flux_vector(
    params: ModelParams,
    omega_e: float,
    theta_e_k: float,
    T_s: float,
    simplified: bool = False,
    with_connection: bool = True,
) -> np.ndarray:
    """Per-step contribution of the PM flux linkage (back-EMF integral)."""
    rho, delta = params.rho_delta(with_connection)
    L_d, L_q = params.motor.L_d, params.motor.L_q
    x = omega_e * T_s
    c, s = math.cos(x), math.sin(x)

    second = s if simplified else s - delta * T_s * _cosc(x)
    vec = -params.lam_1 * np.array([1.0 - c, second])

    if params.dq_flux_pairs:
        T1 = rotation(omega_e, T_s)
        D = np.diag([delta, -delta])
        sinc_term = T_s * _sinc(x) * D
        J1 = np.array([[0.0, -1.0], [1.0, 0.0]])
        J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
        for j, lam_lo, ph_lo, lam_hi, ph_hi in params.dq_flux_pairs:
            Tj = rotation(omega_e, j * T_s)
            if lam_lo:
                M1 = T1 - Tj
                if not simplified:
                    dc = T_s * _dcos(x, j, +1)
                    ds = T_s * _dsin_sum(x, j)
                    G1 = np.array([[dc, -ds], [ds, dc]])
                    M1 = M1 + sinc_term + D @ G1 @ J1
                th1 = j * theta_e_k + ph_lo
                vec += lam_lo * (M1 @ np.array([math.cos(th1), -math.sin(th1)]))
            if lam_hi:
                M2 = T1 - Tj.T
                if not simplified:
                    dc = T_s * _dcos(x, j, -1)
                    ds = T_s * _dsin_diff(x, j)
                    G2 = np.array([[dc, ds], [-ds, dc]])
                    M2 = M2 + sinc_term + D @ G2 @ J2
                th2 = j * theta_e_k + ph_hi
                vec += lam_hi * (M2 @ np.array([math.cos(th2), math.sin(th2)]))

    pre = math.exp(-rho * T_s / 2.0)
    return pre * np.array([vec[0] / L_d, vec[1] / L_q])


def integral_approx(rho: float, omega_e: float, n: int, T_s: float) -> tuple[float, float]:
    """Midpoint-damped approximations of the damped sine/cosine integrals.

    Approximates int_0^Ts exp(-rho t) sin(n w t) dt and the cosine analogue.
    Exact as rho -> 0; tends to (0, T_s exp(-rho T_s / 2)) as omega -> 0.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    x = n * omega_e * T_s
    damp = math.exp(-rho * T_s / 2.0)
    return T_s * _cosc(x) * damp, T_s * _sinc(x) * damp


def _h_f(theta_e_k: float, omega_e: float, T_s: float, phi_f: float) -> float:
    """Saliency correction kernel of the fault decay factor."""
    y = 2.0 * omega_e * T_s
    lead = T_s * np.array([_cosc(y), _sinc(y)])
    arg = 2.0 * theta_e_k - phi_f
    trig = np.array([math.sin(arg), math.cos(arg)])
    return float(lead @ rotation(omega_e, 2.0 * T_s) @ trig)


def fault_decay(
    params: ModelParams,
    omega_e: float,
    theta_e_k: float,
    T_s: float,
    simplified: bool = False,
) -> tuple[float, float, float]:
    """Fault-current decay factor and the fault inductance at k and k+1."""
    d = params.derived
    if d is None:
        raise ValueError("fault inactive: no fault branch to discretize")
    beta = d.R_f_star / d.L_f1
    decay = math.exp(-beta * T_s)
    a_f = decay
    if not simplified and d.L_f2 != 0.0:
        a_f += (d.L_f2 / d.L_f1) * beta * decay * _h_f(theta_e_k, omega_e, T_s, params.phi_f)
    arg_k = 2.0 * theta_e_k - params.phi_f
    L_f_k = d.L_f1 + d.L_f2 * math.cos(arg_k)
    L_f_k1 = d.L_f1 + d.L_f2 * math.cos(arg_k + 2.0 * omega_e * T_s)
    return a_f, L_f_k, L_f_k1


def fault_input_coeffs(
    params: ModelParams,
    omega_e: float,
    theta_e_k: float,
    T_s: float,
    simplified: bool = False,
) -> tuple[np.ndarray, float]:
    """Voltage and zero-sequence-flux quotients of the fault difference equation."""
    d = params.derived
    if d is None:
        raise ValueError("fault inactive: no fault branch to discretize")
    beta = d.R_f_star / d.L_f1
    decay = math.exp(-beta * T_s)
    half = math.exp(-beta * T_s / 2.0)

    gain = (d.L_f1 / d.R_f_star) * (1.0 - decay)
    if not simplified and d.L_f2 != 0.0:
        gain -= (d.L_f2 / d.L_f1) * (decay - half) * _h_f(theta_e_k, omega_e, T_s, params.phi_f)
    ang = theta_e_k + params.phi_f
    b_f = gain * np.array([math.cos(ang), -math.sin(ang)])

    q_f = 0.0
    if params.triplens:
        x = omega_e * T_s
        arg2 = 2.0 * theta_e_k - params.phi_f
        sc2 = np.array([math.sin(arg2), math.cos(arg2)])
        for j, lam, phase in params.triplens:
            w = np.array([1.0 - math.cos(j * x), math.sin(j * x)])
            if not simplified and d.L_f2 != 0.0:
                M3 = _m3(omega_e, j, T_s)
                w = w + 0.5 * (d.L_f2 / d.L_f1) * beta * (M3 @ sc2)
            th = j * theta_e_k + phase
            q_f -= half * lam * float(np.array([math.cos(th), math.sin(th)]) @ w)
    return b_f, q_f


def _m3(omega_e: float, j: int, T_s: float) -> np.ndarray:
    """Triplen correction matrix; j >= 3 keeps the j-2 denominator safe."""
    def k_pos(y: float) -> np.ndarray:
        return T_s * np.array([[_cosc(y), -_sinc(y)], [_sinc(y), _cosc(y)]])

    def k_neg(y: float) -> np.ndarray:
        return T_s * np.array([[_cosc(y), _sinc(y)], [-_sinc(y), _cosc(y)]])

    x = omega_e * T_s
    A1 = np.array([[-2.0, 0.0], [0.0, 0.0]])
    A2 = np.array([[-1.0, 0.0], [0.0, 1.0]])
    return A1 @ k_pos(2.0 * x) + A2 @ k_neg((j - 2) * x) + k_pos((j + 2) * x)


def perturbation_blocks(
    params: ModelParams,
    omega_e: float,
    theta_e_k: float,
    T_s: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Antidiagonal coupling blocks induced by the connection resistance.

    Both vanish for R_c = 0. The shared denominator rho* - R_f*/L_f1 is a
    removable singularity of the underlying integrals; inside the series
    branch the saliency-dependent part of the healthy block is evaluated from
    the exact limit of its defining integral because the compact quotient
    form degenerates there.
    """
    d = params.derived
    if d is None:
        raise ValueError("fault inactive: no coupling blocks")
    m = params.motor
    if m.R_c == 0.0:
        return np.zeros((2, 2)), np.zeros((2, 2))

    rho_s, _ = params.rho_delta(True)
    beta = d.R_f_star / d.L_f1
    decay_b = math.exp(-beta * T_s)
    x_d = (rho_s - beta) * T_s

    arg_k = 2.0 * theta_e_k - params.phi_f
    L_f_k = d.L_f1 + d.L_f2 * math.cos(arg_k)
    L_f_k1 = d.L_f1 + d.L_f2 * math.cos(arg_k + 2.0 * omega_e * T_s)

    bracket_f = T_s * decay_b * _em1(x_d)
    delta_f = -((m.L_d + m.L_q) / 2.0) * (m.R_c / L_f_k1) * bracket_f \
        * np.diag([1.0 / m.L_q, 1.0 / m.L_d])

    if abs(x_d) >= _DENOM_CUTOFF:
        bracket_h = (decay_b - math.exp(-rho_s * T_s) * (2.0 - L_f_k / d.L_f1)) / (rho_s - beta)
    else:
        eps = d.L_f2 / d.L_f1
        y = 2.0 * omega_e * T_s
        cosA, sinA = math.cos(arg_k), math.sin(arg_k)
        if abs(y) < _SINC_CUTOFF:
            p = cosA / 2.0 - sinA * y / 6.0 - cosA * y * y / 24.0
            dfun = cosA - sinA * y / 2.0 - cosA * y * y / 6.0
        else:
            p = (cosA - math.cos(arg_k + y)) / (y * y) - sinA / y
            dfun = (math.sin(arg_k + y) - sinA) / y
        bracket_h = decay_b * T_s * (
            (1.0 - x_d / 2.0 + x_d * x_d / 6.0)
            + eps * (beta * T_s * p + cosA - dfun)
        )

    k = (2.0 / 3.0) * params.sigma_ns
    c, s = math.cos(omega_e * T_s), math.sin(omega_e * T_s)
    ldq_inv_t = np.array([[c / m.L_d, s / m.L_d], [-s / m.L_q, c / m.L_q]])
    delta_h = -k * m.R_c * bracket_h * ldq_inv_t
    return delta_h, delta_f


def assemble_phi(
    E: np.ndarray,
    fault_diag: float,
    delta_h: np.ndarray,
    delta_f: np.ndarray,
    theta_e_k: float,
    phi_f: float,
) -> np.ndarray:
    """Full 3x3 state-transition matrix with antidiagonal coupling blocks."""
    ang = theta_e_k + phi_f
    v = np.array([math.cos(ang), -math.sin(ang)])
    phi = np.zeros((3, 3))
    phi[:2, :2] = E
    phi[:2, 2] = delta_h @ v
    phi[2, :2] = v @ delta_f
    phi[2, 2] = fault_diag
    return phi


@dataclass(frozen=True)
class StepCoefficients:
    """Everything one step of the discrete-time model uses, at sample k."""

    E: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    a_f: float
    L_f_k: float
    L_f_k1: float
    b_f: np.ndarray
    q_f: float
    delta_h: np.ndarray
    delta_f: np.ndarray
    phi: np.ndarray


def compute_coefficients(
    params: ModelParams,
    omega_e: float,
    theta_e_k: float,
    T_s: float,
    simplified: bool = False,
    include_coupling: bool = True,
) -> StepCoefficients:
    """Evaluate every per-step coefficient from the frozen (omega, theta).

    ``include_coupling`` switches the antidiagonal perturbation blocks; the
    block-diagonal variant exists to measure what those blocks buy.
    """
    E = healthy_transition(params, omega_e, T_s, simplified)
    B = input_matrix(params, omega_e, T_s, simplified)
    Q = flux_vector(params, omega_e, theta_e_k, T_s, simplified)
    zero2 = np.zeros((2, 2))
    if not params.fault_active:
        phi = assemble_phi(E, 0.0, zero2, zero2, theta_e_k, 0.0)
        return StepCoefficients(
            E=E, B=B, Q=Q, a_f=0.0, L_f_k=0.0, L_f_k1=0.0,
            b_f=np.zeros(2), q_f=0.0, delta_h=zero2, delta_f=zero2, phi=phi,
        )
    a_f, L_f_k, L_f_k1 = fault_decay(params, omega_e, theta_e_k, T_s, simplified)
    b_f, q_f = fault_input_coeffs(params, omega_e, theta_e_k, T_s, simplified)
    if include_coupling and params.motor.R_c > 0.0:
        delta_h, delta_f = perturbation_blocks(params, omega_e, theta_e_k, T_s)
    else:
        delta_h, delta_f = zero2, zero2
    phi = assemble_phi(E, a_f * L_f_k / L_f_k1, delta_h, delta_f, theta_e_k, params.phi_f)
    return StepCoefficients(
        E=E, B=B, Q=Q, a_f=a_f, L_f_k=L_f_k, L_f_k1=L_f_k1,
        b_f=b_f, q_f=q_f, delta_h=delta_h, delta_f=delta_f, phi=phi,
    )


def dtm_step(
    state: ModelState,
    inp: StepInput,
    params: ModelParams,
    simplified: bool = False,
    include_coupling: bool = True,
) -> ModelState:
    """Advance the derived discrete-time model by one sampling interval."""
    co = compute_coefficients(
        params, inp.omega_e, inp.theta_e, inp.T_s, simplified, include_coupling
    )
    u = np.array([inp.u_d, inp.u_q])
    x = np.array(state.as_tuple())
    nxt = co.phi @ x
    nxt[:2] += co.B @ u + co.Q
    if params.fault_active:
        nxt[2] += (co.b_f @ u + co.q_f) / co.L_f_k1
    return ModelState(float(nxt[0]), float(nxt[1]), float(nxt[2]))


def euler_step(state: ModelState, inp: StepInput, params: ModelParams) -> ModelState:
    """Forward-Euler baseline: one explicit step on the frozen dq voltages.

    Divergence is reported by the caller, not trapped here; blowing up is the
    expected behaviour whenever the fault time constant drops below the
    sampling interval.
    """
    f1, f2, f3 = dq_rhs_scalar(
        state.i_dh, state.i_qh, state.i_f,
        inp.u_d, inp.u_q, inp.omega_e, inp.theta_e,
        rhs_consts(params),
    )
    return ModelState(
        state.i_dh + inp.T_s * f1,
        state.i_qh + inp.T_s * f2,
        state.i_f + inp.T_s * f3,
    )
