"""Command-line frontend.

Subcommands:
  simulate <config>   run the configured scenario and write trace CSVs
  compare <config>    run all engines, print error reports; exit 0 iff the
                      derived model is within tolerance, 3 on unexpected
                      divergence, 1 otherwise
  coeffs <config>     dump the per-step coefficients at a chosen operating point
  validate [config]   damped-integral bound sweep plus coefficient-vs-quadrature
                      checks; exit 0/1
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

from .config import ConfigError, load_config
from .dtm import compute_coefficients, integral_approx, rotation
from .harness import emit_csv, run_scenario
from .oracle import expm2x2, quadrature
from .params import ModelParams
from .presets import lab_model

DEFAULT_TOLERANCE = 1e-2


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="out", help="output directory for CSV files")
    p.add_argument("--substeps", type=int, default=None, help="oracle substeps per sampling period")
    p.add_argument("--simplified", action="store_true",
                   help="drop the sampling-period-bounded coefficient terms")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmsm-isc", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and write CSV traces")
    p_sim.add_argument("config")
    _add_common(p_sim)

    p_cmp = sub.add_parser("compare", help="run all engines and report errors")
    p_cmp.add_argument("config")
    p_cmp.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE,
                       help="relative-RMS pass threshold for the derived model")
    _add_common(p_cmp)

    p_co = sub.add_parser("coeffs", help="dump per-step coefficients")
    p_co.add_argument("config")
    p_co.add_argument("--omega", type=float, required=True, help="electrical velocity [rad/s]")
    p_co.add_argument("--theta", type=float, required=True, help="electrical angle [rad]")
    _add_common(p_co)

    p_val = sub.add_parser("validate", help="bound sweep and quadrature checks")
    p_val.add_argument("config", nargs="?", default=None)
    _add_common(p_val)
    return parser


def _load(args) -> tuple:
    loaded = load_config(args.config)
    scenario = loaded.scenario
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    substeps = args.substeps if args.substeps is not None else loaded.substeps
    return loaded.params, scenario, substeps


def cmd_simulate(args) -> int:
    params, scenario, substeps = _load(args)
    result = run_scenario(scenario, params, substeps=substeps, simplified=args.simplified)
    paths = emit_csv(result.traces, args.out, result.reports)
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_compare(args) -> int:
    params, scenario, substeps = _load(args)
    result = run_scenario(scenario, params, substeps=substeps, simplified=args.simplified)
    paths = emit_csv(result.traces, args.out, result.reports)
    unexpected = result.traces["oracle"].diverged_at is not None \
        or result.traces["derived"].diverged_at is not None
    euler_div = result.traces["euler"].diverged_at
    if euler_div is not None:
        d = params.derived
        if d is not None and d.tau_f < 2.0 * scenario.T_s:
            print(f"euler diverged at step {euler_div} "
                  f"(expected: fault time constant {d.tau_f:.3e} s < 2 T_s)")
        else:
            print(f"euler diverged at step {euler_div} (unexpected)")
            unexpected = True
    for name, rep in sorted(result.reports.items()):
        rms = " ".join(f"{sig}={val:.3e}" for sig, val in sorted(rep.rel_rms.items()))
        print(f"{name}: rel_rms {rms} diverged={rep.diverged}")
    for p in paths:
        print(f"wrote {p}")
    if unexpected:
        print("FAIL: unexpected engine divergence")
        return 3
    worst = result.reports["derived"].worst_rel_rms()
    if worst <= args.tolerance:
        print(f"PASS: derived model within {args.tolerance:g} (worst {worst:.3e})")
        return 0
    print(f"FAIL: derived model rel RMS {worst:.3e} exceeds {args.tolerance:g}")
    return 1


def cmd_coeffs(args) -> int:
    params, scenario, _ = _load(args)
    co = compute_coefficients(params, args.omega, args.theta, scenario.T_s,
                              simplified=args.simplified)
    np.set_printoptions(precision=9, suppress=False)
    print(f"omega_e = {args.omega} rad/s, theta_e = {args.theta} rad, T_s = {scenario.T_s} s")
    print(f"E =\n{co.E}")
    print(f"B =\n{co.B}")
    print(f"Q = {co.Q}")
    if params.fault_active:
        print(f"a_f = {co.a_f!r}")
        print(f"L_f_k = {co.L_f_k!r}  L_f_k1 = {co.L_f_k1!r}")
        print(f"b_f = {co.b_f}")
        print(f"q_f = {co.q_f!r}")
        print(f"delta_h =\n{co.delta_h}")
        print(f"delta_f =\n{co.delta_f}")
    print(f"phi =\n{co.phi}")
    rad = max(abs(np.linalg.eigvals(co.phi)))
    print(f"spectral_radius(phi) = {rad:.6f}")
    return 0


def _bound_sweep(T_s: float, grid: int = 100) -> tuple[bool, str]:
    """Damped sine/cosine approximation errors over the feasible domain."""
    rhos = np.linspace(1.0 / T_s / grid, 1.0 / T_s, grid)
    omegas = np.linspace(-2.0 * math.pi / T_s, 2.0 * math.pi / T_s, grid)
    RR, WW = np.meshgrid(rhos, omegas, indexing="ij")
    rr, ww = RR.ravel(), WW.ravel()
    ok = True
    lines = []
    for n in (1, 2, 3, 6, 12):
        def f_sin(t, n=n):
            return np.exp(-rr * t) * np.sin(n * ww * t)

        def f_cos(t, n=n):
            return np.exp(-rr * t) * np.cos(n * ww * t)

        # bounds are O(1e-2 T_s); 1e-5 T_s quadrature error is 0.1% of them
        i1 = quadrature(f_sin, (0.0, T_s), 1e-5 * T_s)
        i2 = quadrature(f_cos, (0.0, T_s), 1e-5 * T_s)
        approx = np.array([integral_approx(r, w, n, T_s) for r, w in zip(rr, ww)])
        e1 = np.max(np.abs(i1 - approx[:, 0]))
        e2 = np.max(np.abs(i2 - approx[:, 1]))
        ok1 = e1 <= 0.1 * T_s / n
        ok2 = e2 <= 0.026 * T_s
        ok = ok and ok1 and ok2
        lines.append(
            f"n={n:2d}: |I1 err| {e1:.3e} <= {0.1 * T_s / n:.3e} [{'ok' if ok1 else 'FAIL'}]  "
            f"|I2 err| {e2:.3e} <= {0.026 * T_s:.3e} [{'ok' if ok2 else 'FAIL'}]"
        )
    return ok, "\n".join(lines)


def _coefficient_checks(params: ModelParams, T_s: float) -> tuple[bool, str]:
    """Transition/input/flux/fault coefficients vs dense quadrature references."""
    m = params.motor
    rho, _ = params.rho_delta(True)
    R_t = m.R_s + m.R_c
    lines = []
    ok = True

    def check(name: str, err: float, tol: float) -> None:
        nonlocal ok
        good = err <= tol
        ok = ok and good
        lines.append(f"{name}: err {err:.3e} <= {tol:.1e} [{'ok' if good else 'FAIL'}]")

    for omega in (0.0, 700.0, 1400.0, -1900.0):
        A = np.array([[-R_t / m.L_d, omega * m.L_q / m.L_d],
                      [-omega * m.L_d / m.L_q, -R_t / m.L_q]])
        co = compute_coefficients(params, omega, 0.7, T_s)
        E_ref = expm2x2(A * T_s)
        check(f"E(omega={omega:g})", float(np.linalg.norm(co.E - E_ref)), 5e-4)

        Linv = np.diag([1.0 / m.L_d, 1.0 / m.L_q])
        T_end = rotation(omega, T_s)

        def b_int(t, A=A, Linv=Linv, T_end=T_end, omega=omega):
            return (expm2x2(A * t) @ Linv @ rotation(omega, t).T @ T_end).ravel()

        B_ref = quadrature(b_int, (0.0, T_s), 1e-13).reshape(2, 2)
        check(f"B(omega={omega:g})", float(np.linalg.norm(co.B - B_ref) / np.linalg.norm(B_ref)), 1e-3)

        from .frames import pm_flux_dq

        def q_int(t, A=A, Linv=Linv, omega=omega):
            th = 0.7 + omega * (T_s - t)
            lam_d, lam_q = pm_flux_dq(params, th)
            return omega * (expm2x2(A * t) @ Linv @ np.array([lam_q, -lam_d]))

        Q_ref = quadrature(q_int, (0.0, T_s), 1e-16)
        scale = float(np.linalg.norm(Q_ref))
        if scale > 0.0:
            check(f"Q(omega={omega:g})", float(np.linalg.norm(co.Q - Q_ref) / scale), 1e-3)

        if params.fault_active:
            d = params.derived

            def beta_at(t, omega=omega):
                L_f = d.L_f1 + d.L_f2 * math.cos(2 * 0.7 + 2 * omega * (T_s - t) - params.phi_f)
                return d.R_f_star / L_f

            a_ref = math.exp(-float(quadrature(beta_at, (0.0, T_s), 1e-12)))
            check(f"a_f(omega={omega:g})", abs(co.a_f - a_ref) / a_ref, 1e-3)
    return ok, "\n".join(lines)


def cmd_validate(args) -> int:
    if args.config is not None:
        params, scenario, _ = _load(args)
        T_s = scenario.T_s
    else:
        params = lab_model(sigma=10.0 / 25.0, r_fiu=16.14e-3 - 14.4e-3)
        T_s = 1e-4
    ok1, report1 = _bound_sweep(T_s)
    print("damped-integral approximation bounds:")
    print(report1)
    ok2, report2 = _coefficient_checks(params, T_s)
    print("coefficient-vs-quadrature checks:")
    print(report2)
    if ok1 and ok2:
        print("VALIDATE PASS")
        return 0
    print("VALIDATE FAIL")
    return 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "compare":
            return cmd_compare(args)
        if args.command == "coeffs":
            return cmd_coeffs(args)
        if args.command == "validate":
            return cmd_validate(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
