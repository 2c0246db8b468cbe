"""Motor, winding, and fault parameters and every derived constant.

All quantities are SI (ohm, henry, weber, radian, second) and all angles are
electrical. There is no per-unit scaling anywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

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
    "PHASE_SHIFTS",
]

# Electrical angle offset of the shorted phase relative to phase a.
PHASE_SHIFTS = {"a": 0.0, "b": -2.0 * math.pi / 3.0, "c": 2.0 * math.pi / 3.0}

DEFAULT_MAX_HARMONIC_ORDER = 13


@dataclass(frozen=True, slots=True)
class FluxHarmonic:
    """One radial PM flux-linkage harmonic.

    Attributes:
        order: Harmonic order (odd, >= 1); 1 is the fundamental.
        amplitude: Flux-linkage amplitude in Wb.
        phase: Phase shift in rad relative to the fundamental.
    """

    order: int
    amplitude: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.order < 1 or self.order % 2 == 0:
            raise ValueError(f"harmonic order must be odd and >= 1, got {self.order}")
        if self.amplitude < 0.0:
            raise ValueError(f"harmonic amplitude must be >= 0, got {self.amplitude}")
        if self.order == 1 and self.phase != 0.0:
            raise ValueError("the fundamental is the phase reference; its phase must be 0")


def derive_dq_inductances(L_s: float, L_m: float, L_fl: float) -> tuple[float, float, float]:
    """Map phase self/mutual/fluctuation inductances to (L_d, L_q, L_0).

    L_d = L_s + L_m + 1.5 L_fl, L_q = L_s + L_m - 1.5 L_fl, L_0 = L_s - 2 L_m.
    Raises ValueError if any result is non-positive.
    """
    if L_s <= 0.0:
        raise ValueError(f"L_s must be > 0, got {L_s}")
    L_d = L_s + L_m + 1.5 * L_fl
    L_q = L_s + L_m - 1.5 * L_fl
    L_0 = L_s - 2.0 * L_m
    if L_d <= 0.0 or L_q <= 0.0 or L_0 <= 0.0:
        raise ValueError(
            f"inductances must stay positive: L_d={L_d}, L_q={L_q}, L_0={L_0}"
        )
    return L_d, L_q, L_0


def abc_inductance_primitives(L_d: float, L_q: float, L_0: float) -> tuple[float, float, float]:
    """Analytic inverse of :func:`derive_dq_inductances`."""
    L_fl = (L_d - L_q) / 3.0
    L_m = ((L_d + L_q) / 2.0 - L_0) / 3.0
    L_s = L_0 + 2.0 * L_m
    return L_s, L_m, L_fl


@dataclass(frozen=True, slots=True)
class MotorParams:
    """Electrical constants of the machine.

    Attributes:
        R_s: Per-phase stator resistance [ohm].
        R_c: Connection resistance (power stage, cables, terminal box) [ohm].
        L_d, L_q, L_0: Direct/quadrature/zero-sequence inductances [H].
        P_P: Pole pairs.
        harmonics: Radial PM flux harmonics; must contain the fundamental.
        L_s, L_m, L_fl: Optional phase-frame inductance primitives [H]. When
            given they must be consistent with L_d/L_q/L_0 to 1e-9 relative.
    """

    R_s: float
    R_c: float
    L_d: float
    L_q: float
    L_0: float
    P_P: int
    harmonics: tuple[FluxHarmonic, ...]
    L_s: float | None = None
    L_m: float | None = None
    L_fl: float | None = None

    def __post_init__(self) -> None:
        if self.R_s <= 0.0:
            raise ValueError(f"R_s must be > 0, got {self.R_s}")
        if self.R_c < 0.0:
            raise ValueError(f"R_c must be >= 0, got {self.R_c}")
        for name in ("L_d", "L_q", "L_0"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.P_P < 1:
            raise ValueError(f"P_P must be a positive integer, got {self.P_P}")
        orders = [h.order for h in self.harmonics]
        if 1 not in orders:
            raise ValueError("harmonics must include the fundamental (order 1)")
        if len(set(orders)) != len(orders):
            raise ValueError(f"duplicate harmonic orders: {sorted(orders)}")
        given = (self.L_s, self.L_m, self.L_fl)
        if any(v is not None for v in given):
            if any(v is None for v in given):
                raise ValueError("L_s, L_m, L_fl must be given together or not at all")
            L_d, L_q, L_0 = derive_dq_inductances(self.L_s, self.L_m, self.L_fl)
            for got, want, name in ((L_d, self.L_d, "L_d"), (L_q, self.L_q, "L_q"), (L_0, self.L_0, "L_0")):
                if abs(got - want) > 1e-9 * abs(want):
                    raise ValueError(
                        f"phase-frame primitives are inconsistent with {name}: "
                        f"{got} vs {want}"
                    )


@dataclass(frozen=True, slots=True)
class WindingConfig:
    """Series-parallel winding arrangement: n_p parallel branches of n_s coils."""

    n_p: int
    n_s: int

    def __post_init__(self) -> None:
        if self.n_p < 1:
            raise ValueError(f"n_p must be >= 1, got {self.n_p}")
        if self.n_s < 1:
            raise ValueError(f"n_s must be >= 1, got {self.n_s}")


@dataclass(frozen=True, slots=True)
class FaultConfig:
    """Location, severity, and emulation parasitics of the interturn short.

    Attributes:
        phase: Shorted phase, one of "a"/"b"/"c".
        sigma: Shorted fraction of one winding segment, in [0, 1].
        R_sc: Total short resistance [ohm] (external unit + wiring).
        L_wire: Parasitic wiring inductance of the emulated short [H].
        active: Whether the fault branch exists at all.
    """

    phase: str = "a"
    sigma: float = 0.0
    R_sc: float = 0.0
    L_wire: float = 0.0
    active: bool = False

    def __post_init__(self) -> None:
        if self.phase not in PHASE_SHIFTS:
            raise ValueError(f"phase must be one of a/b/c, got {self.phase!r}")
        if not 0.0 <= self.sigma <= 1.0:
            # sigma is a fraction of a single segment and cannot exceed it
            raise ValueError(f"sigma must lie in [0, 1], got {self.sigma}")
        if self.active and self.sigma > 0.0 and self.R_sc <= 0.0:
            raise ValueError("an active fault needs R_sc > 0")
        if self.L_wire < 0.0:
            raise ValueError(f"L_wire must be >= 0, got {self.L_wire}")

    @property
    def phi_f(self) -> float:
        """Electrical angle offset of the shorted phase [rad]."""
        return PHASE_SHIFTS[self.phase]


@dataclass(frozen=True, slots=True)
class DerivedParams:
    """Closed-form constants of the fault branch and the dq substitutions.

    rho/delta are the healthy-model decay/saliency rates [1/s]; the starred
    variants include the connection resistance. tau_f = L_f1 / R_f_star is the
    fault time constant that decides forward-Euler stability.
    """

    R_f: float
    R_f_star: float
    L_f1: float
    L_f2: float
    rho: float
    delta: float
    rho_star: float
    delta_star: float
    tau_f: float


def _substitutions(R: float, L_d: float, L_q: float) -> tuple[float, float]:
    rho = R * (L_d + L_q) / (2.0 * L_d * L_q)
    delta = R * (L_d - L_q) / (2.0 * L_d * L_q)
    return rho, delta


def derive_fault_params(
    motor: MotorParams, winding: WindingConfig, fault: FaultConfig
) -> DerivedParams:
    """Compute every derived constant of the fault branch.

    Requires an active fault with sigma > 0 (the fault branch is undefined
    otherwise). Wiring inductance enters L_f1 scaled by n_s/sigma, so small
    shorted fractions are the most affected.
    """
    if not fault.active or fault.sigma <= 0.0:
        raise ValueError("fault branch undefined: need an active fault with sigma > 0")
    s_ns = fault.sigma / winding.n_s
    n_p, n_s = winding.n_p, winding.n_s

    R_f = (
        n_p * (1.0 - s_ns) * motor.R_s
        + s_ns * motor.R_s / 3.0
        + (n_s / fault.sigma) * fault.R_sc
    )
    R_f_star = R_f + (2.0 / 3.0) * s_ns * motor.R_c

    L_sum = (motor.L_d + motor.L_q + motor.L_0) / 3.0
    L_f1 = (
        s_ns * n_p * (n_s - 1) * L_sum
        + s_ns * motor.L_0 / 3.0
        + (n_s / fault.sigma) * fault.L_wire
    )
    L_f2 = s_ns * n_p * (n_s - 1) * (motor.L_d - motor.L_q) / 3.0

    if not L_f1 > abs(L_f2):
        raise ValueError(
            f"fault inductance not positive for all angles: L_f1={L_f1}, L_f2={L_f2}"
        )

    rho, delta = _substitutions(motor.R_s, motor.L_d, motor.L_q)
    rho_star, delta_star = _substitutions(motor.R_s + motor.R_c, motor.L_d, motor.L_q)

    return DerivedParams(
        R_f=R_f,
        R_f_star=R_f_star,
        L_f1=L_f1,
        L_f2=L_f2,
        rho=rho,
        delta=delta,
        rho_star=rho_star,
        delta_star=delta_star,
        tau_f=L_f1 / R_f_star,
    )


@dataclass(frozen=True, slots=True)
class ModelParams:
    """Immutable bundle of everything the models need per configuration.

    Safe to share read-only across concurrent workers. ``derived`` is None
    iff the fault is inactive. The remaining fields are caches computed once
    by :func:`build_model`:

    * ``L_s/L_m/L_fl`` phase-frame primitives (given or inverted from dq),
    * ``lam_1`` fundamental flux amplitude,
    * ``dq_flux_pairs`` entries (j, lam_{j-1}, phi_{j-1}, lam_{j+1}, phi_{j+1})
      for j = 6, 12, ... feeding the rotor-frame flux sums,
    * ``triplens`` entries (j, lam_j, phi_j) for j = 3, 9, ... forming the
      zero-sequence flux.
    """

    motor: MotorParams
    winding: WindingConfig
    fault: FaultConfig
    derived: DerivedParams | None
    L_s: float = field(repr=False, default=0.0)
    L_m: float = field(repr=False, default=0.0)
    L_fl: float = field(repr=False, default=0.0)
    lam_1: float = field(repr=False, default=0.0)
    dq_flux_pairs: tuple[tuple[int, float, float, float, float], ...] = field(repr=False, default=())
    triplens: tuple[tuple[int, float, float], ...] = field(repr=False, default=())

    @property
    def fault_active(self) -> bool:
        return self.derived is not None

    @property
    def sigma_ns(self) -> float:
        """sigma / n_s, the per-phase weight of the fault branch."""
        return self.fault.sigma / self.winding.n_s

    @property
    def phi_f(self) -> float:
        return self.fault.phi_f

    def rho_delta(self, with_connection: bool = True) -> tuple[float, float]:
        """Decay/saliency substitutions, with or without R_c folded in."""
        R = self.motor.R_s + (self.motor.R_c if with_connection else 0.0)
        return _substitutions(R, self.motor.L_d, self.motor.L_q)


def build_model(
    motor: MotorParams,
    winding: WindingConfig,
    fault: FaultConfig,
    max_harmonic_order: int = DEFAULT_MAX_HARMONIC_ORDER,
) -> ModelParams:
    """Validate a configuration and precompute all derived constants.

    Harmonics above ``max_harmonic_order`` are dropped. An active fault with
    sigma == 0 is rejected; an inactive fault leaves ``derived`` as None.
    """
    harmonics = tuple(h for h in motor.harmonics if h.order <= max_harmonic_order)
    if len(harmonics) != len(motor.harmonics):
        motor = MotorParams(
            R_s=motor.R_s, R_c=motor.R_c, L_d=motor.L_d, L_q=motor.L_q,
            L_0=motor.L_0, P_P=motor.P_P, harmonics=harmonics,
            L_s=motor.L_s, L_m=motor.L_m, L_fl=motor.L_fl,
        )

    if fault.active and fault.sigma <= 0.0:
        raise ValueError("active fault with sigma = 0: fault branch undefined")
    derived = derive_fault_params(motor, winding, fault) if fault.active else None

    if motor.L_s is not None:
        L_s, L_m, L_fl = motor.L_s, motor.L_m, motor.L_fl
    else:
        L_s, L_m, L_fl = abc_inductance_primitives(motor.L_d, motor.L_q, motor.L_0)

    by_order = {h.order: h for h in harmonics}
    lam_1 = by_order[1].amplitude

    pairs = []
    max_order = max(by_order)
    j = 6
    while j - 1 <= max_order:
        lo = by_order.get(j - 1)
        hi = by_order.get(j + 1)
        if lo is not None or hi is not None:
            pairs.append((
                j,
                lo.amplitude if lo else 0.0,
                lo.phase if lo else 0.0,
                hi.amplitude if hi else 0.0,
                hi.phase if hi else 0.0,
            ))
        j += 6

    triplens = tuple(
        (h.order, h.amplitude, h.phase)
        for h in sorted(harmonics, key=lambda h: h.order)
        if h.order % 3 == 0
    )

    return ModelParams(
        motor=motor,
        winding=winding,
        fault=fault,
        derived=derived,
        L_s=L_s,
        L_m=L_m,
        L_fl=L_fl,
        lam_1=lam_1,
        dq_flux_pairs=tuple(pairs),
        triplens=triplens,
    )
