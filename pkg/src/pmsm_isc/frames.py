"""Rotor reference frame transforms and flux-linkage projections.

Amplitude-invariant convention throughout: the dq magnitude equals the phase
amplitude, and power in dq carries the 3/2 factor. All functions are pure and
operate on plain floats so they stay cheap inside integration loops.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

__all__ = [
    "AbcTriple",
    "DqPair",
    "park",
    "inverse_park",
    "terminal_potentials",
    "zero_sequence_flux",
    "pm_flux_dq",
    "flux_linkage_abc",
    "flux_linkage_abc_dtheta",
]

_TWO_THIRDS_PI = 2.0 * math.pi / 3.0


class AbcTriple(NamedTuple):
    a: float
    b: float
    c: float


class DqPair(NamedTuple):
    d: float
    q: float


def park(abc: AbcTriple | tuple[float, float, float], theta_e: float) -> DqPair:
    """Project a phase triple onto the rotor frame (amplitude-invariant)."""
    a, b, c = abc
    ca = math.cos(theta_e)
    cb = math.cos(theta_e - _TWO_THIRDS_PI)
    cc = math.cos(theta_e + _TWO_THIRDS_PI)
    sa = math.sin(theta_e)
    sb = math.sin(theta_e - _TWO_THIRDS_PI)
    sc = math.sin(theta_e + _TWO_THIRDS_PI)
    d = (2.0 / 3.0) * (a * ca + b * cb + c * cc)
    q = -(2.0 / 3.0) * (a * sa + b * sb + c * sc)
    return DqPair(d, q)


def inverse_park(dq: DqPair | tuple[float, float], theta_e: float) -> AbcTriple:
    """Rotate a dq pair back to phase quantities. Output sums to zero."""
    d, q = dq
    a = d * math.cos(theta_e) - q * math.sin(theta_e)
    b = d * math.cos(theta_e - _TWO_THIRDS_PI) - q * math.sin(theta_e - _TWO_THIRDS_PI)
    c = d * math.cos(theta_e + _TWO_THIRDS_PI) - q * math.sin(theta_e + _TWO_THIRDS_PI)
    return AbcTriple(a, b, c)


def terminal_potentials(
    u_dq: DqPair | tuple[float, float], theta_e: float, u_m: float
) -> AbcTriple:
    """Phase terminal potentials: rotated dq voltages plus the common-mode u_m."""
    a, b, c = inverse_park(u_dq, theta_e)
    return AbcTriple(a + u_m, b + u_m, c + u_m)


def zero_sequence_flux(
    triplens: Iterable[tuple[int, float, float]], theta_e: float
) -> tuple[float, float]:
    """Zero-sequence PM flux and its angle derivative.

    ``triplens`` holds (order, amplitude, phase) entries for orders 3, 9, 15,
    ... Returns (lambda_0, d lambda_0 / d theta_e).
    """
    lam0 = 0.0
    dlam0 = 0.0
    for j, amp, phase in triplens:
        arg = j * theta_e + phase
        lam0 += amp * math.cos(arg)
        dlam0 -= j * amp * math.sin(arg)
    return lam0, dlam0


def pm_flux_dq(params, theta_e: float) -> DqPair:
    """Effective rotor-frame PM flux pair feeding the back-EMF terms.

    The q-axis back-EMF is omega_e * d and the d-axis back-EMF is
    -omega_e * q. Only harmonic orders adjacent to multiples of six (5, 7,
    11, 13, ...) contribute beyond the fundamental; triplen orders never do.
    """
    d = params.lam_1
    q = 0.0
    for j, lam_lo, ph_lo, lam_hi, ph_hi in params.dq_flux_pairs:
        arg_lo = j * theta_e + ph_lo
        arg_hi = j * theta_e + ph_hi
        d += (1 - j) * lam_lo * math.cos(arg_lo) + (j + 1) * lam_hi * math.cos(arg_hi)
        q += (j - 1) * lam_lo * math.sin(arg_lo) + (j + 1) * lam_hi * math.sin(arg_hi)
    return DqPair(d, q)


def flux_linkage_abc(
    harmonics: Iterable[tuple[int, float, float]], theta_e: float
) -> AbcTriple:
    """Per-phase PM flux linkage from (order, amplitude, phase) entries."""
    a = b = c = 0.0
    for j, amp, phase in harmonics:
        a += amp * math.cos(j * theta_e + phase)
        b += amp * math.cos(j * (theta_e - _TWO_THIRDS_PI) + phase)
        c += amp * math.cos(j * (theta_e + _TWO_THIRDS_PI) + phase)
    return AbcTriple(a, b, c)


def flux_linkage_abc_dtheta(
    harmonics: Iterable[tuple[int, float, float]], theta_e: float
) -> AbcTriple:
    """Angle derivative of :func:`flux_linkage_abc`."""
    a = b = c = 0.0
    for j, amp, phase in harmonics:
        a -= j * amp * math.sin(j * theta_e + phase)
        b -= j * amp * math.sin(j * (theta_e - _TWO_THIRDS_PI) + phase)
        c -= j * amp * math.sin(j * (theta_e + _TWO_THIRDS_PI) + phase)
    return AbcTriple(a, b, c)
