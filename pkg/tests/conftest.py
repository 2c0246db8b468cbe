"""Shared fixtures and independent reference helpers.

The reference integrators and closed forms here are deliberately separate
from the production oracle so that tests never check code against itself.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from pmsm_isc import (
    FaultConfig,
    FluxHarmonic,
    MotorParams,
    WindingConfig,
    build_model,
)
from pmsm_isc.presets import L_WIRE, R_WIRE, lab_model, lab_motor, lab_winding

T_S = 1e-4


@pytest.fixture
def lab_params_healthy():
    return lab_model()


@pytest.fixture
def lab_params_fault():
    """sigma = 10/25 with the fully-open external short (1.74 mOhm)."""
    return lab_model(sigma=10.0 / 25.0, r_fiu=1.74e-3)


@pytest.fixture
def lab_params_fault_norc():
    return lab_model(sigma=10.0 / 25.0, r_fiu=1.74e-3, R_c=0.0)


@pytest.fixture
def unstable_params():
    """sigma = 3/25 with the 442 mOhm stage: fault time constant < T_s."""
    return lab_model(sigma=3.0 / 25.0, r_fiu=442e-3)


def damped_sin_integral(rho: float, nu: float, T_s: float) -> float:
    """Closed form of int_0^Ts exp(-rho t) sin(nu t) dt."""
    if nu == 0.0:
        return 0.0
    den = rho * rho + nu * nu
    e = math.exp(-rho * T_s)
    return (nu - e * (nu * math.cos(nu * T_s) + rho * math.sin(nu * T_s))) / den


def damped_cos_integral(rho: float, nu: float, T_s: float) -> float:
    """Closed form of int_0^Ts exp(-rho t) cos(nu t) dt."""
    den = rho * rho + nu * nu
    e = math.exp(-rho * T_s)
    if den == 0.0:
        return T_s
    return (rho + e * (nu * math.sin(nu * T_s) - rho * math.cos(nu * T_s))) / den


def rk4(f, y0: np.ndarray, t0: float, t1: float, n: int) -> np.ndarray:
    """Generic fixed-step classical Runge-Kutta, independent of the oracle."""
    y = np.array(y0, dtype=float)
    h = (t1 - t0) / n
    t = t0
    for _ in range(n):
        k1 = f(t, y)
        k2 = f(t + h / 2.0, y + h / 2.0 * k1)
        k3 = f(t + h / 2.0, y + h / 2.0 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return y


def rk4_trajectory(f, y0: np.ndarray, t0: float, t1: float, n: int):
    """Like :func:`rk4` but returns (times, states) at every step."""
    ts = np.linspace(t0, t1, n + 1)
    out = np.empty((n + 1, len(y0)))
    out[0] = y0
    y = np.array(y0, dtype=float)
    h = (t1 - t0) / n
    for i in range(n):
        t = ts[i]
        k1 = f(t, y)
        k2 = f(t + h / 2.0, y + h / 2.0 * k1)
        k3 = f(t + h / 2.0, y + h / 2.0 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = y
    return ts, out


def random_machine(rng: np.random.Generator, with_harmonics: bool = True,
                   with_fault: bool = True, R_c: float = 0.0):
    """Physically valid random parameter draw for equivalence sweeps."""
    L_base = rng.uniform(1e-3, 5e-3)
    sal = rng.uniform(-0.25, 0.25)
    L_d = L_base * (1.0 + sal)
    L_q = L_base * (1.0 - sal)
    L_0 = rng.uniform(0.4, 0.95) * min(L_d, L_q)
    harmonics = [FluxHarmonic(1, rng.uniform(5e-3, 30e-3))]
    if with_harmonics:
        for order in (3, 5, 7):
            if rng.random() < 0.8:
                harmonics.append(FluxHarmonic(order, rng.uniform(0.0, 1e-3),
                                              rng.uniform(-math.pi, math.pi)))
    motor = MotorParams(
        R_s=rng.uniform(0.1, 2.0), R_c=R_c,
        L_d=L_d, L_q=L_q, L_0=L_0,
        P_P=int(rng.integers(1, 24)),
        harmonics=tuple(harmonics),
    )
    winding = WindingConfig(n_p=int(rng.integers(1, 4)), n_s=int(rng.integers(2, 9)))
    if with_fault:
        fault = FaultConfig(
            phase=rng.choice(["a", "b", "c"]),
            sigma=rng.uniform(0.05, 1.0),
            R_sc=rng.uniform(1e-3, 0.5),
            L_wire=rng.uniform(0.0, 5e-6),
            active=True,
        )
    else:
        fault = FaultConfig(active=False)
    return build_model(motor, winding, fault)
