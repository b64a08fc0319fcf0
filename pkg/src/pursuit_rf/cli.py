"""Command line interface.

Exit codes: 0 on success with clean invariants, 1 on an invariant or bound
violation, 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from . import pontryagin as pg
from . import simple_motion as sm
from .errors import ConfigError, PursuitError
from .game import make_projector
from .resolving import constant_kernel, estimate_nu, feasibility_margin, kernel_from_equation, resolve_lambda_numeric
from .scenario import parse_scenario, run_batch, run_scenario, write_outputs

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2
ORACLE_ATOL = 1e-4


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _report_failed(report) -> bool:
    return (not report.captured) or bool(report.invariant_violations) or not all(report.budget_ok.values())


def cmd_run(args):
    cfg = parse_scenario(args.scenario)
    traj, report = run_scenario(cfg)
    paths = write_outputs(traj, report, cfg, args.out)
    print(f"scenario: {cfg.name} ({cfg.game}, evader {cfg.evader.kind})")
    print(f"captured: {report.captured}")
    print(f"capture_time: {report.capture_time}")
    print(f"bound: {report.bound_theta}")
    print(f"final_miss: {report.final_miss:.3e}")
    print(f"budget_ok: {report.budget_ok}")
    for v in report.invariant_violations:
        print(f"violation: {v}")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_VIOLATION if _report_failed(report) else EXIT_OK


def cmd_batch(args):
    agg = run_batch(args.directory, args.out)
    status = EXIT_OK
    for run in agg["runs"]:
        if "error" in run:
            print(f"{run['name']}: config error: {run['error']}")
            status = EXIT_CONFIG
            continue
        ok = run["captured"] and not run["violations"]
        print(f"{run['name']}: captured={run['captured']} t={run['capture_time']} bound={run['bound']}"
              + ("" if ok else "  FAIL"))
        if not ok and status == EXIT_OK:
            status = EXIT_VIOLATION
    return status


def verify_scenario(cfg, n_samples: int = 20) -> list:
    """Full invariant suite for one scenario; returns violations."""
    rng = np.random.default_rng(cfg.seed if cfg.seed is not None else 0)
    out = []
    if cfg.game == "general":
        game = cfg.general_game()
        proj = make_projector(game.terminal.M0_basis, n=game.n)
        F = kernel_from_equation(game, proj) if cfg.params["F"] == "solve" else constant_kernel(cfg.params["F"], p=game.p)
        F.p = game.p
        d = game.delta(F.gain_p())
        if not d > 0:
            return [f"assumption violated: delta = {d:.6g} <= 0"]
        for _ in range(n_samples):
            t = rng.uniform(0.1, 5.0)
            tau = rng.uniform(0, t)
            v = rng.standard_normal(game.k)
            try:
                m0 = feasibility_margin(game, proj, F, t, tau, v, cfg.z0, 0.0)
            except PursuitError as exc:
                out.append(f"sample t={t:.3f}: {exc}")
                continue
            if m0 < -1e-9:
                out.append(f"zero resolving value infeasible at t={t:.3f} (margin {m0:.3e})")
        return out

    traj, report = run_scenario(cfg)
    out.extend(report.invariant_violations)
    if not report.captured:
        out.append("not captured")
    for who, ok in report.budget_ok.items():
        if not ok:
            out.append(f"{who} budget exceeded")
    idx = rng.choice(len(traj) - 1, size=min(5, len(traj) - 1), replace=False)

    if cfg.game == "simple_motion":
        P = cfg.simple_params()
        game, proj, F = sm.game_spec(P), sm.projector(P), sm.kernel(P)
        for i in idx:
            v = traj.v[i]
            closed = sm.lambda_l(v, cfg.z0, P.delta, P.l)
            if P.n <= 3:
                num = resolve_lambda_numeric(game, proj, F, 1.0, 0.0, v, cfg.z0).lam
                if abs(num - closed) >= ORACLE_ATOL * (1 + closed):
                    out.append(f"resolving function mismatch at step {i}: {closed} vs {num}")
        if P.l == 0 and P.sigma > 0 and report.captured:
            y0 = np.zeros(P.n) if cfg.y0 is None else np.asarray(cfg.y0, dtype=float)
            center, radius = sm.containment_ball(y0 + np.asarray(cfg.z0), y0, P.rho, P.sigma)
            dist = np.linalg.norm(np.asarray(report.final_position_evader) - center)
            if dist > radius + 1e-6:
                out.append(f"capture point outside containment ball ({dist:.6g} > {radius:.6g})")
    else:
        P, z0 = cfg.pontryagin_params(), cfg.pontryagin_state()
        T = traj.meta["theta"]
        xi_T = pg.xi(T, z0, P)
        res = abs(pg.theta_residual(T, z0, P))
        if res >= 1e-9 * (1 + np.linalg.norm(xi_T)):
            out.append(f"theta residual {res:.3e}")
        est = estimate_nu(pg.kernel(P), 2.0, 1000.0).nu_p ** 0.5
        if abs(est - P.nu) > 1e-6:
            out.append(f"nu mismatch: closed {P.nu} vs numeric {est}")
        game, proj, F = pg.game_spec(P), pg.projector(P), pg.kernel(P)
        if P.n <= 3:
            for i in idx:
                tau, v = traj.times[i], traj.v[i]
                closed = pg.lambda_pontryagin(T, tau, v, z0, P)
                num = resolve_lambda_numeric(game, proj, F, T, tau, v, z0.as_vector()).lam
                if abs(num - closed) >= ORACLE_ATOL * (1 + closed):
                    out.append(f"resolving function mismatch at tau={tau:.4f}: {closed} vs {num}")
        switches = [e for e in traj.events if e[1] == "mode_switch"]
        if np.any(traj.v_spent[-1] > 0) and len(switches) != 1:
            out.append(f"expected one mode switch, saw {len(switches)}")
    return out


def cmd_verify(args):
    cfg = parse_scenario(args.scenario)
    violations = verify_scenario(cfg)
    for v in violations:
        print(f"violation: {v}")
    print(f"{len(violations)} violations")
    return EXIT_VIOLATION if violations else EXIT_OK


def cmd_nu(args):
    P = pg.PontryaginParams(args.alpha, args.beta, args.b, args.c, rho=1.0, sigma=0.0)
    est = estimate_nu(pg.kernel(P), 2.0, args.horizon)
    closed = pg.nu_closed(P)
    numeric = est.nu_p**0.5
    print(f"nu closed  = {closed:.12g}")
    print(f"nu numeric = {numeric:.12g} (horizon {args.horizon}, argmax s = {est.argmax_s:.6g})")
    print(f"difference = {abs(closed - numeric):.3e}")
    return EXIT_OK


def cmd_lambda(args):
    v = np.asarray(args.v, dtype=float)
    if args.game == "simple_motion":
        z0 = np.asarray(args.z0, dtype=float)
        P = sm.SimpleMotionParams(args.rho, args.sigma, args.l, n=z0.size)
        if v.size != z0.size:
            raise ConfigError("--v and --z0 must have equal length")
        closed = sm.lambda_l(v, z0, P.delta, P.l)
        num = resolve_lambda_numeric(sm.game_spec(P), sm.projector(P), sm.kernel(P), 1.0, 0.0, v, z0)
    else:
        z0 = pg.PontryaginState(args.z1, args.z2, args.z3)
        P = pg.PontryaginParams(args.alpha, args.beta, args.b, args.c, args.rho, args.sigma, n=z0.z1.size)
        closed = pg.lambda_pontryagin(args.t, args.tau, v, z0, P)
        num = resolve_lambda_numeric(pg.game_spec(P), pg.projector(P), pg.kernel(P),
                                     args.t, args.tau, v, z0.as_vector())
    print(f"lambda closed = {closed:.10g}")
    print(f"lambda oracle = {num.lam:.10g} (margin {num.margin_at_lambda:.3e}, {num.iterations} bisections)")
    ok = abs(closed - num.lam) < ORACLE_ATOL * (1 + closed)
    return EXIT_OK if ok else EXIT_VIOLATION


def build_parser():
    parser = argparse.ArgumentParser(prog="pursuit-rf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario and write outputs")
    p.add_argument("scenario")
    p.add_argument("--out", help="output directory (overrides the scenario's output_dir)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="run every scenario in a directory")
    p.add_argument("directory")
    p.add_argument("--out")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("verify", help="run the full invariant suite on a scenario")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("nu", help="closed-form vs numeric kernel gain of the Pontryagin example")
    for name in ("alpha", "beta", "b", "c"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--horizon", type=float, default=1000.0)
    p.set_defaults(func=cmd_nu)

    p = sub.add_parser("lambda", help="closed-form vs numeric resolving function at one point")
    p.add_argument("game", choices=["simple_motion", "pontryagin"])
    p.add_argument("--v", type=_floats, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--z0", type=_floats, help="simple motion: initial miss")
    p.add_argument("--l", type=float, default=0.0)
    for name in ("alpha", "beta", "b", "c"):
        p.add_argument(f"--{name}", type=float, default=1.0)
    for name in ("z1", "z2", "z3"):
        p.add_argument(f"--{name}", type=_floats)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=0.0)
    p.set_defaults(func=cmd_lambda)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "lambda":
        needed = ("z0",) if args.game == "simple_motion" else ("z1", "z2", "z3")
        missing = [n for n in needed if getattr(args, n) is None]
        if missing:
            print(f"error: lambda {args.game} needs --{' --'.join(missing)}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PursuitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
