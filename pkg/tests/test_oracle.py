import math

import numpy as np
import pytest

from pmsm_isc import FaultConfig, FluxHarmonic, ModelState, MotorParams, StepInput, WindingConfig, build_model
from pmsm_isc.oracle import (
    DivergenceError,
    ErrorReport,
    IntegrationConfig,
    QuadratureError,
    compare_trajectories,
    expm2x2,
    integrate_step,
    quadrature,
)
from pmsm_isc.presets import lab_model

from conftest import damped_cos_integral, damped_sin_integral

T_S = 1e-4


def _round_rl_params():
    motor = MotorParams(R_s=0.8, R_c=0.0, L_d=2e-3, L_q=2e-3, L_0=1.5e-3, P_P=3,
                        harmonics=(FluxHarmonic(1, 0.0),))
    return build_model(motor, WindingConfig(1, 4), FaultConfig(active=False))


def test_integrate_step_identity_without_dynamics():
    p = _round_rl_params()
    inp = StepInput(u_d=0.0, u_q=0.0, omega_e=0.0, theta_e=0.0, T_s=T_S)
    out = integrate_step(ModelState(0.0, 0.0, 0.0), inp, p)
    assert out == ModelState(0.0, 0.0, 0.0)


def test_integrate_step_matches_rl_zoh_closed_form():
    p = _round_rl_params()
    R, L = 0.8, 2e-3
    inp = StepInput(u_d=3.0, u_q=-1.0, omega_e=0.0, theta_e=0.0, T_s=T_S)
    out = integrate_step(ModelState(2.0, -4.0, 0.0), inp, p, IntegrationConfig(substeps=200))
    decay = math.exp(-R * T_S / L)
    gain = (1.0 - decay) / R
    assert out.i_dh == pytest.approx(2.0 * decay + gain * 3.0, rel=1e-12)
    assert out.i_qh == pytest.approx(-4.0 * decay + gain * -1.0, rel=1e-12)


def test_integrate_step_self_convergence_plateau():
    p = lab_model(sigma=10 / 25, r_fiu=1.74e-3)
    inp = StepInput(u_d=-5.0, u_q=38.0, omega_e=1400.0, theta_e=0.8, T_s=T_S)
    st = ModelState(1.0, 5.0, 10.0)
    a = integrate_step(st, inp, p, IntegrationConfig(substeps=200))
    b = integrate_step(st, inp, p, IntegrationConfig(substeps=400))
    for x, y in zip(a.as_tuple(), b.as_tuple()):
        assert abs(x - y) <= 1e-10 * max(1.0, abs(y))


def test_integrate_step_fourth_order():
    # a stiff fault branch makes substep truncation visible
    p = lab_model(sigma=3 / 25, r_fiu=442e-3)
    inp = StepInput(u_d=-5.0, u_q=38.0, omega_e=1900.0, theta_e=0.3, T_s=T_S)
    st = ModelState(1.0, 5.0, 2.0)
    ref = np.array(integrate_step(st, inp, p, IntegrationConfig(substeps=1000)).as_tuple())
    errs = []
    for n in (10, 20, 40):
        got = np.array(integrate_step(st, inp, p, IntegrationConfig(substeps=n)).as_tuple())
        errs.append(np.linalg.norm(got - ref))
    assert errs[0] / errs[1] > 12.0
    assert errs[1] / errs[2] > 12.0


def test_integration_config_validation():
    with pytest.raises(ValueError):
        IntegrationConfig(substeps=5)
    with pytest.raises(ValueError):
        IntegrationConfig(method="euler")


def test_integrate_step_divergence_error():
    # negative resistance is unphysical; build the blowup by hand
    motor = MotorParams(R_s=1e-9, R_c=0.0, L_d=1e-6, L_q=1e-6, L_0=1e-6, P_P=1,
                        harmonics=(FluxHarmonic(1, 0.0),))
    p = build_model(motor, WindingConfig(1, 2), FaultConfig(active=False))
    # u/L overflows the very first slope evaluation
    inp = StepInput(u_d=1e308, u_q=0.0, omega_e=0.0, theta_e=0.0, T_s=1.0)
    with pytest.raises(DivergenceError):
        integrate_step(ModelState(0.0, 0.0, 0.0), inp, p, IntegrationConfig(substeps=10))


# --- quadrature ------------------------------------------------------------------

def test_quadrature_constant():
    assert quadrature(lambda t: 1.0, (0.0, T_S), 1e-14) == pytest.approx(T_S, rel=1e-14)


def test_quadrature_exponential():
    rho = 227.0
    got = quadrature(lambda t: math.exp(-rho * t), (0.0, T_S), 1e-16)
    assert got == pytest.approx((1.0 - math.exp(-rho * T_S)) / rho, rel=1e-12)


@pytest.mark.parametrize("rho,omega,n", [
    (227.0, 1400.0, 1), (5000.0, -40000.0, 3), (9999.0, 62831.0, 12), (1.0, 0.0, 2),
])
def test_quadrature_damped_oscillations_vs_closed_form(rho, omega, n):
    nu = n * omega
    i1 = quadrature(lambda t: math.exp(-rho * t) * math.sin(nu * t), (0.0, T_S), 1e-15)
    i2 = quadrature(lambda t: math.exp(-rho * t) * math.cos(nu * t), (0.0, T_S), 1e-15)
    assert i1 == pytest.approx(damped_sin_integral(rho, nu, T_S), rel=1e-10, abs=1e-19)
    assert i2 == pytest.approx(damped_cos_integral(rho, nu, T_S), rel=1e-10)


def test_quadrature_vector_valued():
    out = quadrature(lambda t: np.array([1.0, 2.0 * t, 3.0 * t * t]), (0.0, 1.0), 1e-13)
    assert out == pytest.approx([1.0, 1.0, 1.0], rel=1e-12)


def test_quadrature_nonconvergence():
    rng = np.random.default_rng(0)
    with pytest.raises(QuadratureError):
        quadrature(lambda t: rng.normal(), (0.0, 1.0), 1e-12, max_refinements=6)


def test_quadrature_reversed_interval_is_zero_width_safe():
    assert quadrature(lambda t: 5.0, (0.3, 0.3), 1e-12) == 0.0


# --- expm reference ---------------------------------------------------------------

def test_expm2x2_against_scipy():
    scipy_expm = pytest.importorskip("scipy.linalg").expm
    rng = np.random.default_rng(9)
    # the physical regime: ||A T_s|| of order one
    for _ in range(50):
        A = rng.normal(0, 2.0, (2, 2))
        assert np.allclose(expm2x2(A), scipy_expm(A), rtol=1e-11, atol=1e-13)
    # large-norm draws keep double-digit agreement
    for _ in range(20):
        A = rng.normal(0, 50.0, (2, 2))
        ref = scipy_expm(A)
        assert np.allclose(expm2x2(A), ref, rtol=1e-9, atol=1e-9 * np.max(np.abs(ref)))


# --- trajectory comparison ---------------------------------------------------------

def test_compare_identical():
    x = {"a": np.sin(np.linspace(0, 7, 100))}
    rep = compare_trajectories(x, {"a": x["a"].copy()})
    assert rep.rel_rms["a"] == 0.0
    assert rep.max_abs["a"] == 0.0
    assert not rep.diverged


def test_compare_constant_offset_on_sine():
    t = np.linspace(0, 2 * math.pi, 20001)[:-1]
    ref = {"a": np.sin(t)}
    cand = {"a": np.sin(t) + 1e-3}
    rep = compare_trajectories(ref, cand)
    assert rep.rel_rms["a"] == pytest.approx(math.sqrt(2) * 1e-3, rel=1e-3)


def test_compare_flags_divergence_and_bound():
    ref = {"a": np.zeros(10)}
    cand = {"a": np.full(10, 2e6)}
    assert compare_trajectories(ref, cand).diverged
    cand2 = {"a": np.array([0.0] * 9 + [math.nan])}
    rep = compare_trajectories(ref, cand2)
    assert rep.diverged
    assert math.isinf(rep.rel_rms["a"])


def test_compare_length_mismatch():
    with pytest.raises(ValueError):
        compare_trajectories({"a": np.zeros(5)}, {"a": np.zeros(6)})


def test_compare_small_reference_uses_absolute_rms():
    ref = {"a": np.zeros(100)}
    cand = {"a": np.full(100, 2e-3)}
    rep = compare_trajectories(ref, cand)
    assert rep.rel_rms["a"] == pytest.approx(2e-3, rel=1e-12)


def test_compare_horizon():
    ref = {"a": np.zeros(10)}
    cand = {"a": np.concatenate([np.zeros(5), np.ones(5)])}
    rep = compare_trajectories(ref, cand, horizon=5)
    assert rep.rel_rms["a"] == 0.0
    assert rep.horizon == 5
