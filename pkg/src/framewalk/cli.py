"""Command-line driver: run, convergence, verify.

`run` marches a configured simulation and writes history/snapshots/chart;
its exit code is 0 only if the run completed and every accepted step
satisfied the energy-monotonicity invariant.  `convergence` reproduces the
temporal or spatial manufactured-solution study.  `verify` executes the
fast property suite and prints a pass/fail table.
"""

from __future__ import annotations

import argparse
import os
import sys
import time


def _cmd_run(args) -> int:
    from .config import parse_config, materialize
    from .integrator import run_simulation
    from .output import export_outputs

    cfg = parse_config(args.config)
    grid, p0, coeffs, solver, adaptive, tau = materialize(cfg)
    t0 = time.perf_counter()
    result = run_simulation(p0, coeffs, cfg.t_end, solver=solver,
                            adaptive=adaptive, tau=tau,
                            gradient=cfg.gradient,
                            snapshot_every=cfg.snapshot_every,
                            progress=args.progress)
    elapsed = time.perf_counter() - t0
    paths = export_outputs(result, cfg.output_dir,
                           log_scale=cfg.energy_log_scale)
    hist = result.history
    last = hist[-1] if hist else None
    print(f"run: {len(hist)} steps to t={last.t if last else 0:.6g} "
          f"in {elapsed:.1f}s")
    if last:
        print(f"final energy {last.energy:.6e}, orthonormality "
              f"{max(r.orthonormality_error for r in hist):.2e}, "
              f"monotone={result.monotone}")
    print("wrote: " + ", ".join(paths))
    return 0 if result.monotone else 1


def _cmd_convergence(args) -> int:
    from .config import parse_config
    from .elastic import ElasticCoefficients
    from .integrator import SolverSettings
    from .manufactured import spatial_sweep, temporal_sweep
    from .output import write_sweep_csv

    cfg = parse_config(args.config)
    solver = SolverSettings(newton_tol=cfg.newton_tol,
                            max_newton=cfg.max_newton,
                            gmres_tol=cfg.gmres_tol,
                            gmres_restart=cfg.gmres_restart,
                            precondition=cfg.precondition)
    coeffs = ElasticCoefficients(cfg.K, cfg.chi)
    if args.mode == "temporal":
        result = temporal_sweep(n=cfg.sweep_n, taus=cfg.sweep_taus,
                                t_end=cfg.sweep_t_end, coeffs=coeffs,
                                solver=solver, progress=args.progress)
        print("fitted temporal orders per axis vector: "
              + ", ".join(f"{o:.3f}" for o in result.orders))
    else:
        result = spatial_sweep(tau=cfg.sweep_tau, ns=cfg.sweep_ns,
                               t_end=cfg.sweep_t_end, coeffs=coeffs,
                               solver=solver, progress=args.progress)
        errs = result.errors.max(axis=1)
        print("spatial max errors: "
              + ", ".join(f"N={n}: {e:.3e}"
                          for n, e in zip(result.resolution, errs)))
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, f"convergence_{args.mode}.csv")
    write_sweep_csv(result, path)
    print(f"wrote: {path}")
    return 0


def _cmd_verify(args) -> int:
    from .checks import run_all
    return 0 if run_all() else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="framewalk",
        description="Structure-preserving simulator for orthonormal-frame "
                    "gradient flow")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="march a configured simulation")
    p_run.add_argument("--config", required=True, help="path to a key=value "
                       "configuration file")
    p_run.add_argument("--progress", type=int, default=0, metavar="EVERY",
                       help="print a status line every EVERY steps")
    p_run.set_defaults(fn=_cmd_run)

    p_conv = sub.add_parser("convergence",
                            help="manufactured-solution convergence study")
    p_conv.add_argument("--mode", required=True,
                        choices=("temporal", "spatial"))
    p_conv.add_argument("--config", required=True)
    p_conv.add_argument("--progress", action="store_true")
    p_conv.set_defaults(fn=_cmd_convergence)

    p_ver = sub.add_parser("verify", help="run the property suite")
    p_ver.set_defaults(fn=_cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:
        print(f"framewalk {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
