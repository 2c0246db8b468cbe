"""Scenario construction and batch execution of the three engines.

A scenario drives the oracle, the derived discrete-time model, and the
forward-Euler baseline with one shared input sequence. The current controller
closes its loop on the oracle trajectory only, so the discrete models run
open loop and their traces measure pure prediction fidelity; perturbing one
engine's numerical settings can never leak into another engine's inputs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .ct_model import ModelState, StepInput, output_currents, torque
from .dtm import dtm_step, euler_step
from .oracle import DivergenceError, ErrorReport, IntegrationConfig, compare_trajectories, integrate_step
from .params import FaultConfig, ModelParams, build_model

__all__ = [
    "Scenario",
    "TRACE_COLUMNS",
    "Trace",
    "PiCurrentLoop",
    "pi_gains",
    "minmax_injection",
    "run_scenario",
    "ScenarioResult",
    "emit_csv",
]

TRACE_COLUMNS = (
    "t", "theta_e", "omega_e", "u_d", "u_q",
    "i_d", "i_q", "i_f", "i_a", "i_b", "i_c", "T_e",
)

ENGINES = ("oracle", "derived", "euler")


@dataclass(frozen=True)
class Scenario:
    """One experiment: drive profile, references, and the fault schedule.

    ``omega_profile`` is a piecewise-linear electrical velocity in (time,
    rad/s) breakpoints. The fault turns on at ``t_fault``; entries of
    ``r_fiu_schedule`` (time, ohm) switch the external short resistance while
    the fault current state is carried across switches. ``sigma_schedule``
    optionally reschedules the severity; by default sigma stays constant.
    A ``t_fault`` beyond the duration means a healthy run.
    """

    duration: float
    T_s: float = 1e-4
    omega_profile: tuple[tuple[float, float], ...] = ((0.0, 1400.0),)
    id_ref: float = 0.0
    iq_ref: float = 5.0
    torque_ref: float | None = None
    t_fault: float = math.inf
    sigma: float = 0.0
    sigma_schedule: tuple[tuple[float, float], ...] = ()
    r_fiu_schedule: tuple[tuple[float, float], ...] = ()
    r_wire: float = 0.0
    u_m_policy: str = "zero"
    v_limit: float = 60.0
    bandwidth: float = 800.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError("duration must be > 0")
        if self.u_m_policy not in ("zero", "minmax"):
            raise ValueError(f"unknown u_m policy {self.u_m_policy!r}")
        for name in ("omega_profile", "sigma_schedule", "r_fiu_schedule"):
            times = [t for t, _ in getattr(self, name)]
            if times != sorted(times):
                raise ValueError(f"{name} must be time-ordered")

    def omega_at(self, t: float) -> float:
        pts = self.omega_profile
        if t <= pts[0][0]:
            return pts[0][1]
        for (t0, w0), (t1, w1) in zip(pts, pts[1:]):
            if t <= t1:
                return w0 + (w1 - w0) * (t - t0) / (t1 - t0)
        return pts[-1][1]

    def angle_increment(self, t0: float, t1: float) -> float:
        """Exact integral of the piecewise-linear velocity over [t0, t1]."""
        knots = [t0] + [t for t, _ in self.omega_profile if t0 < t < t1] + [t1]
        acc = 0.0
        for a, b in zip(knots, knots[1:]):
            acc += 0.5 * (self.omega_at(a) + self.omega_at(b)) * (b - a)
        return acc


@dataclass
class Trace:
    """Column store of one engine's trajectory, one row per sample."""

    data: dict[str, np.ndarray]
    diverged_at: int | None = None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[name]

    def rows(self) -> int:
        return len(self.data["t"])


def pi_gains(L: float, R: float, bandwidth: float) -> tuple[float, float]:
    """Pole-placement PI gains for an RL current loop: zero cancels the pole."""
    return bandwidth * L, bandwidth * R


class PiCurrentLoop:
    """Discrete PI current controller with anti-windup and a voltage circle.

    Back-calculation anti-windup: the integrator only accumulates the
    realized (post-limit) voltage error. Deterministic given its inputs.
    """

    def __init__(self, kp_d: float, ki_d: float, kp_q: float, ki_q: float,
                 T_s: float, v_limit: float):
        if min(kp_d, ki_d, kp_q, ki_q) <= 0.0:
            raise ValueError("gains must be > 0")
        self.kp = (kp_d, kp_q)
        self.ki = (ki_d, ki_q)
        self.T_s = T_s
        self.v_limit = v_limit
        self.integ = [0.0, 0.0]

    def update(self, ref: tuple[float, float], meas: tuple[float, float]) -> tuple[float, float]:
        raw = [0.0, 0.0]
        for i in range(2):
            err = ref[i] - meas[i]
            raw[i] = self.kp[i] * err + self.integ[i] + self.ki[i] * self.T_s * err
        norm = math.hypot(raw[0], raw[1])
        if norm > self.v_limit > 0.0:
            scale = self.v_limit / norm
            out = (raw[0] * scale, raw[1] * scale)
        else:
            out = (raw[0], raw[1])
        for i in range(2):
            err = ref[i] - meas[i]
            # back-calculation: fold the saturation residue into the integrator
            self.integ[i] += self.ki[i] * self.T_s * err + (out[i] - raw[i])
        return out


def minmax_injection(u_d: float, u_q: float, theta_e: float) -> float:
    """Common-mode voltage equal to minus the mid-range of the phase set."""
    from .frames import inverse_park

    a, b, c = inverse_park((u_d, u_q), theta_e)
    return -(max(a, b, c) + min(a, b, c)) / 2.0


def _fault_config_at(scenario: Scenario, params: ModelParams, t: float) -> FaultConfig | None:
    """Fault configuration active at time t, or None while healthy.

    The scenario schedules override the static [fault] settings: sigma falls
    back to the configured fault severity, and without an R_FIU schedule the
    configured total R_sc is used as is.
    """
    if t < scenario.t_fault:
        return None
    sigma = scenario.sigma if scenario.sigma > 0.0 else params.fault.sigma
    for t_s, value in scenario.sigma_schedule:
        if t >= t_s:
            sigma = value
    if scenario.r_fiu_schedule:
        r_fiu = scenario.r_fiu_schedule[0][1]
        for t_s, value in scenario.r_fiu_schedule:
            if t >= t_s:
                r_fiu = value
        r_sc = r_fiu + scenario.r_wire
    else:
        r_sc = params.fault.R_sc
    return FaultConfig(
        phase=params.fault.phase, sigma=sigma, R_sc=r_sc,
        L_wire=params.fault.L_wire, active=True,
    )


@dataclass
class ScenarioResult:
    traces: dict[str, Trace]
    reports: dict[str, ErrorReport]
    inputs: dict[str, np.ndarray]


def run_scenario(
    scenario: Scenario,
    params: ModelParams,
    substeps: int = 200,
    simplified: bool = False,
    divergence_bound: float = 1e6,
    continuous_angle_oracle: bool = False,
) -> ScenarioResult:
    """Run all engines on one shared input sequence and compare them.

    The healthy/faulted parameter sets are rebuilt at every schedule switch;
    state (including the fault current) is carried across switches. Engines
    that diverge are frozen (rows become NaN) while the rest keep running.
    The optional continuous-angle oracle quantifies the frozen-angle
    assumption itself and is reported as a fourth trace named
    ``oracle_exact_angle``.
    """
    n_steps = int(math.floor(scenario.duration / scenario.T_s))
    n_rows = n_steps + 1
    T_s = scenario.T_s

    # Parameter sets change only at schedule switches; cache per fault config.
    healthy_fc = FaultConfig(phase=params.fault.phase, sigma=0.0, R_sc=0.0, L_wire=0.0, active=False)
    param_cache: dict[FaultConfig, ModelParams] = {}

    def params_at(t: float) -> ModelParams:
        fc = _fault_config_at(scenario, params, t)
        if fc is None:
            fc = healthy_fc
        cached = param_cache.get(fc)
        if cached is None:
            cached = build_model(params.motor, params.winding, fc)
            param_cache[fc] = cached
        return cached

    if scenario.torque_ref is not None:
        iq_ref = scenario.torque_ref / (1.5 * params.motor.P_P * params.lam_1)
    else:
        iq_ref = scenario.iq_ref
    refs = (scenario.id_ref, iq_ref)

    kp_d, ki_d = pi_gains(params.motor.L_d, params.motor.R_s + params.motor.R_c, scenario.bandwidth)
    kp_q, ki_q = pi_gains(params.motor.L_q, params.motor.R_s + params.motor.R_c, scenario.bandwidth)
    pi = PiCurrentLoop(kp_d, ki_d, kp_q, ki_q, T_s, scenario.v_limit)

    cfg = IntegrationConfig(substeps=substeps)

    engines = list(ENGINES)
    if continuous_angle_oracle:
        engines.append("oracle_exact_angle")
    states = {name: ModelState(0.0, 0.0, 0.0) for name in engines}
    diverged: dict[str, int | None] = {name: None for name in engines}
    # i_dh / i_qh ride along for error reporting but are not CSV columns
    all_cols = TRACE_COLUMNS + ("i_dh", "i_qh")
    cols = {name: {c: np.full(n_rows, np.nan) for c in all_cols} for name in engines}
    u_d_seq = np.zeros(n_rows)
    u_q_seq = np.zeros(n_rows)
    omega_seq = np.zeros(n_rows)
    theta_seq = np.zeros(n_rows)

    theta = 0.0
    for k in range(n_rows):
        t = k * T_s
        omega = scenario.omega_at(t)
        p_k = params_at(t)

        i_d_o, i_q_o, _, _ = output_currents(states["oracle"], theta % (2 * math.pi), p_k)
        u_d, u_q = pi.update(refs, (i_d_o, i_q_o))
        if scenario.u_m_policy == "minmax":
            u_m = minmax_injection(u_d, u_q, theta % (2 * math.pi))
        else:
            u_m = 0.0
        inp = StepInput(u_d=u_d, u_q=u_q, omega_e=omega, theta_e=theta, u_m=u_m, T_s=T_s)
        u_d_seq[k], u_q_seq[k] = u_d, u_q
        omega_seq[k], theta_seq[k] = omega, inp.theta_e

        for name in engines:
            if diverged[name] is not None:
                continue
            st = states[name]
            i_d, i_q, i_abc, _ = output_currents(st, inp.theta_e, p_k)
            row = cols[name]
            row["t"][k] = t
            row["theta_e"][k] = inp.theta_e
            row["omega_e"][k] = omega
            row["u_d"][k] = u_d
            row["u_q"][k] = u_q
            row["i_d"][k] = i_d
            row["i_q"][k] = i_q
            row["i_f"][k] = st.i_f
            row["i_a"][k], row["i_b"][k], row["i_c"][k] = i_abc
            row["T_e"][k] = torque(st, inp.theta_e, p_k)
            row["i_dh"][k] = st.i_dh
            row["i_qh"][k] = st.i_qh

        if k == n_steps:
            break

        for name in engines:
            if diverged[name] is not None:
                continue
            try:
                if name == "oracle":
                    states[name] = integrate_step(states[name], inp, p_k, cfg)
                elif name == "oracle_exact_angle":
                    t0 = t
                    th0 = inp.theta_e

                    def theta_fn(tt: float, _t0=t0, _th0=th0) -> float:
                        return _th0 + scenario.angle_increment(_t0, tt)

                    states[name] = integrate_step(
                        states[name], inp, p_k, cfg,
                        theta_fn=theta_fn,
                        omega_fn=scenario.omega_at,
                        t0=t0,
                    )
                elif name == "derived":
                    states[name] = dtm_step(states[name], inp, p_k, simplified=simplified)
                else:
                    states[name] = euler_step(states[name], inp, p_k)
            except DivergenceError:
                diverged[name] = k + 1
                continue
            st = states[name]
            vals = (st.i_dh, st.i_qh, st.i_f)
            if not all(math.isfinite(v) for v in vals) or max(abs(v) for v in vals) > divergence_bound:
                diverged[name] = k + 1

        theta += omega * T_s

    traces = {name: Trace(data=cols[name], diverged_at=diverged[name]) for name in engines}
    signals = ("i_dh", "i_qh", "i_f")
    ref_map = {s: traces["oracle"][s] for s in signals}
    reports = {}
    for name in engines:
        if name == "oracle":
            continue
        cand = {s: traces[name][s] for s in signals}
        reports[name] = compare_trajectories(ref_map, cand, divergence_bound=divergence_bound)
    inputs = {"u_d": u_d_seq, "u_q": u_q_seq, "omega_e": omega_seq, "theta_e": theta_seq}
    return ScenarioResult(traces=traces, reports=reports, inputs=inputs)


def emit_csv(traces: dict[str, Trace], out_dir: str | Path,
             reports: dict[str, ErrorReport] | None = None) -> list[Path]:
    """Write one CSV per engine plus a summary of the error reports.

    Floats are written with repr round-trip precision, so identical runs
    produce byte-identical files.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    for name, trace in sorted(traces.items()):
        path = out / f"trace_{name}.csv"
        try:
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(TRACE_COLUMNS)
                n = trace.rows()
                for k in range(n):
                    writer.writerow([repr(float(trace[c][k])) for c in TRACE_COLUMNS])
        except OSError as exc:
            raise OSError(f"failed writing {path}: {exc}") from exc
        written.append(path)
    if reports is not None:
        path = out / "error_reports.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["engine", "signal", "rel_rms", "max_abs", "diverged", "horizon"])
            for name, rep in sorted(reports.items()):
                for sig in sorted(rep.rel_rms):
                    writer.writerow([
                        name, sig, repr(rep.rel_rms[sig]), repr(rep.max_abs[sig]),
                        int(rep.diverged), rep.horizon,
                    ])
        written.append(path)
    return written
