"""Structured text configuration: [motor], [winding], [fault], [sim].

Key = value syntax via configparser. Unknown sections or keys are rejected
so typos cannot silently fall back to defaults. Severities may be written as
plain fractions ("sigma = 10/25" or shorted_turns/turns_per_segment), and the
short resistance may be given either as a single R_sc or split into R_FIU +
R_wire; only the sum enters the model.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from pathlib import Path

from .harness import Scenario
from .params import (
    DEFAULT_MAX_HARMONIC_ORDER,
    FaultConfig,
    FluxHarmonic,
    ModelParams,
    MotorParams,
    WindingConfig,
    build_model,
)

__all__ = ["ConfigError", "LoadedConfig", "load_config"]


class ConfigError(ValueError):
    """Raised for malformed or unknown configuration content."""


_MOTOR_KEYS = {"r_s", "r_c", "l_d", "l_q", "l_0", "p_p", "l_s", "l_m", "l_fl", "max_harmonic_order"}
_WINDING_KEYS = {"n_p", "n_s"}
_FAULT_KEYS = {"phase", "sigma", "shorted_turns", "turns_per_segment",
               "r_sc", "r_fiu", "r_wire", "l_wire", "active"}
_SIM_KEYS = {"t_s", "duration", "omega_profile", "id_ref", "iq_ref", "torque_ref",
             "t_fault", "sigma_schedule", "r_fiu_schedule", "r_wire",
             "u_m_policy", "v_limit", "bandwidth", "substeps", "seed"}
_SECTIONS = {"motor", "winding", "fault", "sim"}


@dataclass(frozen=True)
class LoadedConfig:
    params: ModelParams
    scenario: Scenario
    substeps: int


def _fraction(text: str, context: str) -> float:
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            return float(num) / float(den)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad numeric value {text!r} for {context}") from exc


def _schedule(text: str, context: str) -> tuple[tuple[float, float], ...]:
    entries = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ConfigError(f"schedule entries are time:value, got {chunk!r} in {context}")
        t_str, v_str = chunk.split(":", 1)
        entries.append((_fraction(t_str, context), _fraction(v_str, context)))
    if not entries:
        raise ConfigError(f"empty schedule for {context}")
    return tuple(entries)


def _check_keys(section: configparser.SectionProxy, allowed: set[str],
                extra_ok=lambda key: False) -> None:
    for key in section:
        if key not in allowed and not extra_ok(key):
            raise ConfigError(f"unknown key {key!r} in section [{section.name}]")


def load_config(path: str | Path) -> LoadedConfig:
    """Parse a configuration file into model parameters and a scenario."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser.read(path)

    unknown = set(parser.sections()) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    for required in ("motor", "winding"):
        if required not in parser:
            raise ConfigError(f"missing required section [{required}]")

    motor_sec = parser["motor"]

    def is_harmonic_key(key: str) -> bool:
        for prefix in ("lambda_pm_", "phi_lambda_"):
            if key.startswith(prefix):
                tail = key[len(prefix):]
                return tail.isdigit()
        return False

    _check_keys(motor_sec, _MOTOR_KEYS, is_harmonic_key)
    amplitudes: dict[int, float] = {}
    phases: dict[int, float] = {}
    for key, value in motor_sec.items():
        if key.startswith("lambda_pm_"):
            amplitudes[int(key[len("lambda_pm_"):])] = _fraction(value, key)
        elif key.startswith("phi_lambda_"):
            phases[int(key[len("phi_lambda_"):])] = _fraction(value, key)
    stray = set(phases) - set(amplitudes)
    if stray:
        raise ConfigError(f"phase given without amplitude for harmonic orders {sorted(stray)}")
    harmonics = tuple(
        FluxHarmonic(order=j, amplitude=amp, phase=phases.get(j, 0.0))
        for j, amp in sorted(amplitudes.items())
    )
    if not harmonics:
        raise ConfigError("at least lambda_pm_1 must be given in [motor]")

    def motor_get(key: str, required: bool = True) -> float | None:
        if key not in motor_sec:
            if required:
                raise ConfigError(f"missing key {key!r} in section [motor]")
            return None
        return _fraction(motor_sec[key], key)

    try:
        motor = MotorParams(
            R_s=motor_get("r_s"),
            R_c=motor_get("r_c"),
            L_d=motor_get("l_d"),
            L_q=motor_get("l_q"),
            L_0=motor_get("l_0"),
            P_P=int(motor_sec["p_p"]) if "p_p" in motor_sec else _missing("p_p"),
            harmonics=harmonics,
            L_s=motor_get("l_s", required=False),
            L_m=motor_get("l_m", required=False),
            L_fl=motor_get("l_fl", required=False),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    wind_sec = parser["winding"]
    _check_keys(wind_sec, _WINDING_KEYS)
    try:
        winding = WindingConfig(n_p=int(wind_sec["n_p"]), n_s=int(wind_sec["n_s"]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad [winding] section: {exc}") from exc

    if "fault" in parser:
        fault_sec = parser["fault"]
        _check_keys(fault_sec, _FAULT_KEYS)
        if "sigma" in fault_sec:
            if "shorted_turns" in fault_sec or "turns_per_segment" in fault_sec:
                raise ConfigError("give sigma either directly or as turns, not both")
            sigma = _fraction(fault_sec["sigma"], "sigma")
        elif "shorted_turns" in fault_sec:
            if "turns_per_segment" not in fault_sec:
                raise ConfigError("shorted_turns requires turns_per_segment")
            sigma = _fraction(fault_sec["shorted_turns"], "shorted_turns") \
                / _fraction(fault_sec["turns_per_segment"], "turns_per_segment")
        else:
            sigma = 0.0
        if "r_sc" in fault_sec:
            if "r_fiu" in fault_sec:
                raise ConfigError("give r_sc either directly or as r_fiu + r_wire, not both")
            r_sc = _fraction(fault_sec["r_sc"], "r_sc")
        else:
            r_sc = _fraction(fault_sec.get("r_fiu", "0"), "r_fiu") \
                + _fraction(fault_sec.get("r_wire", "0"), "r_wire")
        try:
            fault = FaultConfig(
                phase=fault_sec.get("phase", "a"),
                sigma=sigma,
                R_sc=r_sc,
                L_wire=_fraction(fault_sec.get("l_wire", "0"), "l_wire"),
                active=fault_sec.getboolean("active", fallback=sigma > 0.0),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        fault = FaultConfig(phase="a", sigma=0.0, R_sc=0.0, L_wire=0.0, active=False)

    max_order = DEFAULT_MAX_HARMONIC_ORDER
    if "max_harmonic_order" in motor_sec:
        max_order = int(motor_sec["max_harmonic_order"])
    try:
        params = build_model(motor, winding, fault, max_harmonic_order=max_order)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    substeps = 200
    if "sim" in parser:
        sim = parser["sim"]
        _check_keys(sim, _SIM_KEYS)
        kwargs: dict = {}
        kwargs["duration"] = _fraction(sim.get("duration", "0.1"), "duration")
        kwargs["T_s"] = _fraction(sim.get("t_s", "1e-4"), "t_s")
        if "omega_profile" in sim:
            kwargs["omega_profile"] = _schedule(sim["omega_profile"], "omega_profile")
        if "id_ref" in sim:
            kwargs["id_ref"] = _fraction(sim["id_ref"], "id_ref")
        if "iq_ref" in sim:
            kwargs["iq_ref"] = _fraction(sim["iq_ref"], "iq_ref")
        if "torque_ref" in sim:
            kwargs["torque_ref"] = _fraction(sim["torque_ref"], "torque_ref")
        if "t_fault" in sim:
            kwargs["t_fault"] = _fraction(sim["t_fault"], "t_fault")
        if "sigma_schedule" in sim:
            kwargs["sigma_schedule"] = _schedule(sim["sigma_schedule"], "sigma_schedule")
        if "r_fiu_schedule" in sim:
            kwargs["r_fiu_schedule"] = _schedule(sim["r_fiu_schedule"], "r_fiu_schedule")
        if "r_wire" in sim:
            kwargs["r_wire"] = _fraction(sim["r_wire"], "r_wire")
        if "u_m_policy" in sim:
            kwargs["u_m_policy"] = sim["u_m_policy"].strip()
        if "v_limit" in sim:
            kwargs["v_limit"] = _fraction(sim["v_limit"], "v_limit")
        if "bandwidth" in sim:
            kwargs["bandwidth"] = _fraction(sim["bandwidth"], "bandwidth")
        if "seed" in sim:
            kwargs["seed"] = int(sim["seed"])
        if "substeps" in sim:
            substeps = int(sim["substeps"])
        try:
            scenario = Scenario(**kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        scenario = Scenario(duration=0.1)

    return LoadedConfig(params=params, scenario=scenario, substeps=substeps)


def _missing(key: str):
    raise ConfigError(f"missing key {key!r} in section [motor]")
