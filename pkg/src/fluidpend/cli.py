"""Command-line interface.

Subcommands: ``mesh``, ``run``, ``steady``, ``experiment1``, ``experiment2``.
Flags override config-file keys.  Exit codes: 0 success, 2 configuration
error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import RunConfig, apply_overrides, load_config
from .driver import (
    EXPERIMENT1_NUMERICS,
    EXPERIMENT2_NUMERICS,
    experiment1,
    experiment2,
    run_simulation,
)
from .errors import ConfigError, FluidPendError, InvalidParameterError, SolverError
from .mesh import generate_disk_mesh, save_mesh
from .steady import CavityDescriptor, find_equilibria


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI-style configuration file")
    grp = parser.add_argument_group("config overrides")
    grp.add_argument("--L", type=float, dest="L")
    grp.add_argument("--R0", type=float, dest="R0")
    grp.add_argument("--R1", type=float, dest="R1")
    grp.add_argument("--rho-B", type=float, dest="rho_B")
    grp.add_argument("--a", type=float, dest="a")
    grp.add_argument("--gamma", type=float, dest="gamma")
    grp.add_argument("--mu", type=float, dest="mu")
    grp.add_argument("--lam", type=float, dest="lam")
    grp.add_argument("--rho0", type=float, dest="rho0")
    grp.add_argument("--theta0", type=float, dest="theta0")
    grp.add_argument("--omega0", type=float, dest="omega0")
    grp.add_argument("--target-h", type=float, dest="target_h")
    grp.add_argument("--dt", type=float, dest="dt")
    grp.add_argument("--t-end", type=float, dest="t_end")
    grp.add_argument("--stride", type=int, dest="stride")
    grp.add_argument("--solver", choices=["compressible", "incompressible"], dest="solver")
    grp.add_argument("--rho-C", type=float, dest="rho_C")


_OVERRIDE_KEYS = [
    "L", "R0", "R1", "rho_B", "a", "gamma", "mu", "lam", "rho0", "theta0",
    "omega0", "target_h", "dt", "t_end", "stride", "solver", "rho_C",
]


def _build_config(args: argparse.Namespace, preset: dict | None = None) -> RunConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = RunConfig(**(preset or {}))
    overrides = {k: getattr(args, k, None) for k in _OVERRIDE_KEYS}
    if getattr(args, "out", None):
        overrides["output"] = args.out
    cfg = apply_overrides(cfg, overrides)
    cfg.validate()
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluidpend",
        description="Damped pendulum with a fluid-filled cavity: simulation and analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_mesh = sub.add_parser("mesh", help="generate a disk mesh and save it")
    _add_config_args(p_mesh)
    p_mesh.add_argument("--out", required=True, help="output mesh file")

    p_run = sub.add_parser("run", help="run one simulation and write a CSV trajectory")
    _add_config_args(p_run)
    p_run.add_argument("--out", help="output CSV path (overrides config)")

    p_steady = sub.add_parser("steady", help="report the equilibrium orientations")
    _add_config_args(p_steady)
    p_steady.add_argument("--n-scan", type=int, default=64, dest="n_scan")
    p_steady.add_argument("--out", help="write the report CSV here instead of stdout")

    p_e1 = sub.add_parser("experiment1", help="single-parameter damping sweeps")
    _add_config_args(p_e1)
    p_e1.add_argument(
        "--sweep", required=True, choices=["density-ratio", "gas-parameter", "length"]
    )
    p_e1.add_argument("--out-dir", default="experiment1", dest="out_dir")
    p_e1.add_argument("--workers", type=int, default=None)

    p_e2 = sub.add_parser("experiment2", help="compressible versus incompressible")
    _add_config_args(p_e2)
    p_e2.add_argument("--out-dir", default="experiment2", dest="out_dir")
    p_e2.add_argument("--workers", type=int, default=None)

    return parser


def _cmd_mesh(args) -> int:
    cfg = _build_config(args)
    geometry = cfg.body_geometry()
    mesh = generate_disk_mesh(
        center=geometry.cavity_center, radius=cfg.R0, target_h=cfg.target_h
    )
    save_mesh(mesh, args.out)
    print(
        f"wrote {args.out}: {mesh.n_vertices} vertices, "
        f"{mesh.n_triangles} triangles, h_max={mesh.h_max:.4g}"
    )
    return 0


def _cmd_run(args) -> int:
    cfg = _build_config(args)
    result = run_simulation(cfg)
    print(f"wrote {result.csv_path} ({cfg.n_steps} steps, {result.wall_time:.1f}s)")
    return 0


def _cmd_steady(args) -> int:
    cfg = _build_config(args)
    geometry = cfg.body_geometry()
    gas = cfg.gas_params()
    mesh = generate_disk_mesh(
        center=geometry.cavity_center, radius=cfg.R0, target_h=cfg.target_h
    )
    cavity = CavityDescriptor.from_mesh(mesh, total_mass=cfg.rho0 * mesh.total_area)
    scan = find_equilibria(
        cavity, geometry, gas, cavity.total_mass, n_scan=args.n_scan
    )
    lines = ["alpha,c,d,energy,is_minimizer"]
    if scan.degenerate:
        lines.append("# degenerate: continuum of equilibria, no isolated roots")
    else:
        for s in scan.states:
            lines.append(
                f"{s.alpha!r},{s.profile_constant!r},{s.alignment!r},"
                f"{s.energy!r},{int(s.is_minimizer)}"
            )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_experiment1(args) -> int:
    cfg = _build_config(args, preset=EXPERIMENT1_NUMERICS)
    rows = experiment1(args.sweep, args.out_dir, base=cfg, max_workers=args.workers)
    for row in rows:
        print(f"{row['parameter']}={row['value']:g}: damping metric {row['damping_metric']:.6g}")
    print(f"summary written to {args.out_dir}/summary.csv")
    return 0


def _cmd_experiment2(args) -> int:
    cfg = _build_config(args, preset=EXPERIMENT2_NUMERICS)
    rows = experiment2(args.out_dir, base=cfg, max_workers=args.workers)
    for row in rows:
        label = row["solver"] if row["a"] == "" else f"{row['solver']} a={row['a']:g}"
        print(f"{label}: damping metric {row['damping_metric']:.6g}")
    print(f"summary written to {args.out_dir}/summary.csv")
    return 0


_COMMANDS = {
    "mesh": _cmd_mesh,
    "run": _cmd_run,
    "steady": _cmd_steady,
    "experiment1": _cmd_experiment1,
    "experiment2": _cmd_experiment2,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except FluidPendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
