"""Brute-force ground truth for the discrete-time model.

``integrate_step`` advances the continuous dq model across one sampling
interval under exactly the same per-step input assumptions the discrete model
makes: velocity frozen, angle piecewise linear, terminal potentials held, so
the dq voltage vector rotates with the angle inside the step. Any gap between
this oracle and the discrete model therefore isolates the closed-form
coefficient approximations, not modeling differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .ct_model import ModelState, StepInput, dq_rhs_scalar, rhs_consts
from .params import ModelParams

__all__ = [
    "IntegrationConfig",
    "ErrorReport",
    "DivergenceError",
    "QuadratureError",
    "integrate_step",
    "integrate_step_samples",
    "quadrature",
    "compare_trajectories",
    "expm2x2",
]


def expm2x2(A: np.ndarray) -> np.ndarray:
    """Exact exponential of a real 2x2 matrix (Cayley-Hamilton closed form).

    Used as the dense reference against which the approximate transition
    block is measured. For A = mu I + N with tr(N) = 0, N^2 = Delta I, so
    exp(A) = exp(mu) (cosh(sqrt(Delta)) I + sinh(sqrt(Delta))/sqrt(Delta) N).
    """
    A = np.asarray(A, dtype=float)
    mu = 0.5 * (A[0, 0] + A[1, 1])
    N = A - mu * np.eye(2)
    delta = mu * mu - float(np.linalg.det(A))
    if abs(delta) < 1e-24:
        ch, shs = 1.0, 1.0
    elif delta > 0.0:
        s = math.sqrt(delta)
        ch, shs = math.cosh(s), math.sinh(s) / s
    else:
        s = math.sqrt(-delta)
        ch, shs = math.cos(s), math.sin(s) / s
    return math.exp(mu) * (ch * np.eye(2) + shs * N)


class DivergenceError(RuntimeError):
    """Raised when an integration produces non-finite values."""


class QuadratureError(RuntimeError):
    """Raised when adaptive refinement fails to reach the tolerance."""


@dataclass(frozen=True, slots=True)
class IntegrationConfig:
    """Fixed-step integration settings: classical RK4 with uniform substeps."""

    substeps: int = 200
    method: str = "rk4"

    def __post_init__(self) -> None:
        if self.substeps < 10:
            raise ValueError(f"substeps must be >= 10, got {self.substeps}")
        if self.method != "rk4":
            raise ValueError(f"unsupported method {self.method!r}")


def integrate_step(
    state: ModelState,
    inp: StepInput,
    params: ModelParams,
    cfg: IntegrationConfig = IntegrationConfig(),
    theta_fn: Callable[[float], float] | None = None,
    omega_fn: Callable[[float], float] | None = None,
    t0: float = 0.0,
) -> ModelState:
    """Integrate the dq model over one sampling interval.

    By default the angle advances linearly at the frozen inp.omega_e. Passing
    ``theta_fn``/``omega_fn`` (absolute-time callables) switches to the
    continuous-angle mode used to quantify the angle-freezing assumption
    itself; the held-terminal-potential treatment of the inputs is unchanged.
    """
    out = _integrate(state, inp, params, cfg.substeps, theta_fn, omega_fn, t0, samples=None)
    return out


def integrate_step_samples(
    state: ModelState,
    inp: StepInput,
    params: ModelParams,
    cfg: IntegrationConfig = IntegrationConfig(),
) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`integrate_step` but returns every substep sample.

    Returns (times, states) with times of shape (n+1,) relative to the step
    start and states of shape (n+1, 3).
    """
    samples: list[tuple[float, float, float, float]] = []
    _integrate(state, inp, params, cfg.substeps, None, None, 0.0, samples=samples)
    arr = np.array(samples)
    return arr[:, 0], arr[:, 1:]


def _integrate(state, inp, params, substeps, theta_fn, omega_fn, t0, samples):
    C = rhs_consts(params)
    u_d0, u_q0 = inp.u_d, inp.u_q
    omega0, theta0, T_s = inp.omega_e, inp.theta_e, inp.T_s
    h = T_s / substeps
    x1, x2, x3 = state.i_dh, state.i_qh, state.i_f

    def drive(tau: float) -> tuple[float, float, float, float]:
        # Held terminal potentials: the dq voltage rotates with the angle
        # travelled since the step start.
        if theta_fn is None:
            th = theta0 + omega0 * tau
            om = omega0
            dth = omega0 * tau
        else:
            th = theta_fn(t0 + tau)
            om = omega_fn(t0 + tau) if omega_fn is not None else omega0
            dth = th - theta_fn(t0)
        cu, su = math.cos(dth), math.sin(dth)
        u_d = cu * u_d0 + su * u_q0
        u_q = -su * u_d0 + cu * u_q0
        return u_d, u_q, om, th

    if samples is not None:
        samples.append((0.0, x1, x2, x3))

    tau = 0.0
    for _ in range(substeps):
        ud_a, uq_a, om_a, th_a = drive(tau)
        ud_m, uq_m, om_m, th_m = drive(tau + 0.5 * h)
        ud_b, uq_b, om_b, th_b = drive(tau + h)

        k1 = dq_rhs_scalar(x1, x2, x3, ud_a, uq_a, om_a, th_a, C)
        k2 = dq_rhs_scalar(
            x1 + 0.5 * h * k1[0], x2 + 0.5 * h * k1[1], x3 + 0.5 * h * k1[2],
            ud_m, uq_m, om_m, th_m, C,
        )
        k3 = dq_rhs_scalar(
            x1 + 0.5 * h * k2[0], x2 + 0.5 * h * k2[1], x3 + 0.5 * h * k2[2],
            ud_m, uq_m, om_m, th_m, C,
        )
        k4 = dq_rhs_scalar(
            x1 + h * k3[0], x2 + h * k3[1], x3 + h * k3[2],
            ud_b, uq_b, om_b, th_b, C,
        )
        x1 += h * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]) / 6.0
        x2 += h * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]) / 6.0
        x3 += h * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2]) / 6.0
        tau += h
        if not (math.isfinite(x1) and math.isfinite(x2) and math.isfinite(x3)):
            raise DivergenceError(f"oracle diverged at tau={tau:.3e} s within the step")
        if samples is not None:
            samples.append((tau, x1, x2, x3))

    return ModelState(x1, x2, x3)


def quadrature(
    integrand: Callable[[float], float | np.ndarray],
    interval: tuple[float, float],
    tolerance: float = 1e-10,
    max_refinements: int = 24,
):
    """Adaptive composite Simpson rule with Richardson error control.

    The integrand may return a scalar or an ndarray (all components are
    integrated simultaneously on a shared refinement ladder); the error
    estimate is the max-norm Richardson difference between consecutive panel
    doublings. Raises :class:`QuadratureError` if the tolerance is not met
    within ``max_refinements`` doublings.
    """
    a, b = interval
    if a == b:
        return np.asarray(integrand(a), dtype=float) * 0.0
    nodes = np.linspace(a, b, 5)
    fs = np.stack([np.asarray(integrand(t), dtype=float) for t in nodes])
    if not np.all(np.isfinite(fs)):
        raise QuadratureError("integrand not finite on the initial grid")

    def simpson(values: np.ndarray, h: float):
        return (h / 3.0) * (
            values[0] + values[-1]
            + 4.0 * values[1:-1:2].sum(axis=0)
            + 2.0 * values[2:-1:2].sum(axis=0)
        )

    h = (b - a) / 4.0
    s_prev = simpson(fs, h)
    for _ in range(max_refinements):
        mids = (nodes[:-1] + nodes[1:]) / 2.0
        f_mids = np.stack([np.asarray(integrand(t), dtype=float) for t in mids])
        n_new = len(nodes) + len(mids)
        new_nodes = np.empty(n_new)
        new_nodes[0::2] = nodes
        new_nodes[1::2] = mids
        new_fs = np.empty((n_new,) + fs.shape[1:])
        new_fs[0::2] = fs
        new_fs[1::2] = f_mids
        nodes, fs = new_nodes, new_fs
        h /= 2.0
        s = simpson(fs, h)
        err = np.max(np.abs(s - s_prev)) / 15.0
        if err < tolerance:
            return s + (s - s_prev) / 15.0
        s_prev = s
    raise QuadratureError(
        f"no convergence to {tolerance:g} after {max_refinements} refinements (err={err:g})"
    )


@dataclass(frozen=True)
class ErrorReport:
    """Per-signal error summary between a reference and a candidate trace."""

    rel_rms: dict[str, float]
    max_abs: dict[str, float]
    diverged: bool
    horizon: int
    divergence_bound: float = 1e6

    def worst_rel_rms(self) -> float:
        return max(self.rel_rms.values()) if self.rel_rms else 0.0


def compare_trajectories(
    reference: Mapping[str, np.ndarray],
    candidate: Mapping[str, np.ndarray],
    horizon: int | None = None,
    divergence_bound: float = 1e6,
) -> ErrorReport:
    """Relative-RMS comparison of aligned trajectories.

    Signals present in both mappings are compared over the first ``horizon``
    samples. Relative RMS is ||err||_2 / ||ref||_2, falling back to absolute
    RMS when the reference norm is below 1e-9. The divergence flag is set when
    any candidate sample is non-finite or exceeds ``divergence_bound``.
    """
    common = sorted(set(reference) & set(candidate))
    if not common:
        raise ValueError("no common signals to compare")
    n = None
    for name in common:
        if len(reference[name]) != len(candidate[name]):
            raise ValueError(
                f"length mismatch on {name!r}: "
                f"{len(reference[name])} vs {len(candidate[name])}"
            )
        n = len(reference[name]) if n is None else n
        if len(reference[name]) != n:
            raise ValueError("signals have inconsistent lengths")
    if horizon is None:
        horizon = n
    if horizon > n:
        raise ValueError(f"horizon {horizon} exceeds trace length {n}")

    rel_rms: dict[str, float] = {}
    max_abs: dict[str, float] = {}
    diverged = False
    for name in common:
        ref = np.asarray(reference[name], dtype=float)[:horizon]
        cand = np.asarray(candidate[name], dtype=float)[:horizon]
        if not np.all(np.isfinite(cand)) or np.any(np.abs(cand[np.isfinite(cand)]) > divergence_bound):
            diverged = True
        err = cand - ref
        finite = np.isfinite(err)
        ref_norm = float(np.linalg.norm(ref[finite])) if finite.any() else 0.0
        err_norm = float(np.linalg.norm(err[finite])) if finite.any() else math.inf
        if not finite.all():
            err_norm = math.inf
        if ref_norm < 1e-9:
            denom = math.sqrt(max(int(finite.sum()), 1))
        else:
            denom = ref_norm
        rel_rms[name] = err_norm / denom
        abs_err = np.abs(err[finite])
        max_abs[name] = float(abs_err.max()) if abs_err.size else math.inf
        if not finite.all():
            max_abs[name] = math.inf
    return ErrorReport(
        rel_rms=rel_rms,
        max_abs=max_abs,
        diverged=diverged,
        horizon=horizon,
        divergence_bound=divergence_bound,
    )
