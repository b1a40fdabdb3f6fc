"""Simulation driving: step loops, CSV emission, experiment presets.

One CSV row per recorded step with the fixed header
``step,t,theta,omega,g1,g2,mass,energy,min_density,max_speed``.
Units are the model's nondimensional ones (|g| = 1).  Each CSV gets a JSON
sidecar with the full config echo, mesh statistics, and wall time, so a run
is reproducible from the sidecar alone.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import os
import time
from dataclasses import dataclass

import numpy as np

from .compressible import (
    CompressibleSolver,
    CoupledStateSnapshot,
    FluidState,
    discrete_energy,
    total_mass,
)
from .config import RunConfig
from .errors import SolverError
from .fem import CRField, P0Field
from .incompressible import IncompressibleSolver, IncompressibleState
from .mesh import generate_disk_mesh
from .rigid import BodyState

CSV_HEADER = [
    "step", "t", "theta", "omega", "g1", "g2",
    "mass", "energy", "min_density", "max_speed",
]


@dataclass
class RunResult:
    """Outcome of one simulation run."""

    csv_path: str
    sidecar_path: str
    times: np.ndarray
    thetas: np.ndarray
    config: RunConfig
    wall_time: float


def _format_row(step, t, theta, omega, g, mass, energy, min_density, max_speed):
    return [
        str(step), repr(float(t)), repr(float(theta)), repr(float(omega)),
        repr(float(g[0])), repr(float(g[1])), repr(float(mass)),
        repr(float(energy)), repr(float(min_density)), repr(float(max_speed)),
    ]


def run_simulation(cfg: RunConfig, csv_path: str | None = None) -> RunResult:
    """Run one simulation to t_end, writing the trajectory CSV and sidecar.

    On a solver failure the rows written so far (including the last valid
    snapshot) are flushed before the error propagates.
    """
    cfg.validate()
    out = csv_path if csv_path is not None else cfg.output
    sidecar = out + ".meta.json"
    geometry = cfg.body_geometry()
    gas = cfg.gas_params()
    mesh = generate_disk_mesh(
        center=geometry.cavity_center, radius=cfg.R0, target_h=cfg.target_h
    )

    body = BodyState.released_from_rest(cfg.theta0)
    body.omega = cfg.omega0

    if cfg.solver == "compressible":
        solver = CompressibleSolver(mesh, geometry, gas, cfg.dt)
        state = CoupledStateSnapshot(
            mesh=mesh,
            fluid=FluidState(
                rho=P0Field.constant(mesh, cfg.rho0), u=CRField.zero_vector(mesh)
            ),
            body=body,
        )

        def observe(snap):
            u = snap.fluid.u.dof
            return (
                snap.fluid.rho.values.min(),
                float(np.sqrt((u * u).sum(axis=1)).max()) if len(u) else 0.0,
                total_mass(snap),
                discrete_energy(snap, geometry, gas),
                snap.body,
            )

        def advance(snap):
            return solver.step(snap)

    else:
        solver = IncompressibleSolver(mesh, geometry, cfg.rho_C, cfg.mu, cfg.lam, cfg.dt)
        fluid0 = IncompressibleState(
            u=CRField.zero_vector(mesh),
            p=P0Field.constant(mesh, 0.0),
            rho_C=cfg.rho_C,
        )
        const_mass = cfg.rho_C * mesh.total_area
        sys_moment = geometry.first_moment + cfg.rho_C * (
            mesh.element_areas @ mesh.centroids()
        )

        class _Pair:
            def __init__(self, fluid, body, t, k):
                self.fluid, self.body, self.t, self.k = fluid, body, t, k

        state = _Pair(fluid0, body, 0.0, 0)

        def observe(pair):
            u = pair.fluid.u.dof
            kinetic = (
                0.5 * geometry.inertia * pair.body.omega**2
                + 0.5 * cfg.rho_C * float(solver.face_lump @ (u * u).sum(axis=1))
            )
            energy = kinetic - float(sys_moment @ pair.body.g)
            speed = float(np.sqrt((u * u).sum(axis=1)).max()) if len(u) else 0.0
            return cfg.rho_C, speed, const_mass, energy, pair.body

        def advance(pair):
            fluid_next, body_next = solver.step(pair.fluid, pair.body)
            return _Pair(fluid_next, body_next, pair.t + cfg.dt, pair.k + 1)

    n_steps = cfg.n_steps
    times = [0.0]
    thetas = [cfg.theta0]
    status = "ok"
    t0 = time.perf_counter()

    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        min_rho, speed, mass, energy, b = observe(state)
        writer.writerow(_format_row(0, 0.0, b.theta, b.omega, b.g, mass, energy, min_rho, speed))
        try:
            for k in range(1, n_steps + 1):
                state = advance(state)
                min_rho, speed, mass, energy, b = observe(state)
                times.append(state.t)
                thetas.append(b.theta)
                if k % cfg.stride == 0 or k == n_steps:
                    writer.writerow(_format_row(
                        k, state.t, b.theta, b.omega, b.g, mass, energy, min_rho, speed
                    ))
        except SolverError as exc:
            status = f"aborted at step {len(times)}: {exc}"
            fh.flush()
            _write_sidecar(sidecar, cfg, mesh, len(times) - 1,
                           time.perf_counter() - t0, status)
            raise

    wall = time.perf_counter() - t0
    _write_sidecar(sidecar, cfg, mesh, n_steps, wall, status)
    return RunResult(
        csv_path=out,
        sidecar_path=sidecar,
        times=np.array(times),
        thetas=np.array(thetas),
        config=cfg,
        wall_time=wall,
    )


def _write_sidecar(path, cfg, mesh, steps_done, wall, status):
    payload = {
        "config": cfg.as_dict(),
        "mesh": {
            "n_vertices": mesh.n_vertices,
            "n_triangles": mesh.n_triangles,
            "n_faces": mesh.n_faces,
            "h_max": mesh.h_max,
        },
        "csv_header": CSV_HEADER,
        "steps_completed": steps_done,
        "wall_time_s": wall,
        "status": status,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def damping_metric(times: np.ndarray, thetas: np.ndarray, t_end: float) -> float:
    """max |theta| over the trailing window [0.8 t_end, t_end].

    Robust to phase: any surviving oscillation peaks at least once inside
    the window (period << 0.2 t_end for the presets).
    """
    times = np.asarray(times, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    window = times >= 0.8 * t_end - 1e-12
    if not np.any(window):
        raise ValueError("no samples inside the damping window")
    return float(np.abs(thetas[window]).max())


# ----------------------------------------------------------------------
# experiment presets

EXPERIMENT1_SWEEPS = {
    "density-ratio": ("rho_B", [0.5, 1.0, 2.0]),
    "gas-parameter": ("a", [1.0, 10.0, 100.0]),
    "length": ("L", [0.3, 0.4, 0.6]),
}

EXPERIMENT2_GAS_VALUES = [0.1, 20.0, 100.0]

# Sweep numerics.  The damping window [0.8 T, T] must exceed the longest
# half-period in a sweep (~2.5 s at L = 0.6) so every run has a |theta|
# peak inside it; the solver comparison needs the longer horizon because
# its metric gaps are an order of magnitude smaller than the sweep gaps.
EXPERIMENT1_NUMERICS = {"target_h": 0.02, "dt": 2e-3, "t_end": 20.0}
EXPERIMENT2_NUMERICS = {"target_h": 0.02, "dt": 2e-3, "t_end": 40.0}


def _run_case(args):
    """Worker for the sweep pool: run one config, return its damping metric."""
    cfg_dict, csv_path = args
    cfg = RunConfig(**cfg_dict)
    result = run_simulation(cfg, csv_path)
    return damping_metric(result.times, result.thetas, cfg.t_end)


def _run_pool(cases, max_workers):
    if max_workers is None:
        max_workers = min(len(cases), os.cpu_count() or 1)
    if max_workers <= 1 or len(cases) == 1:
        return [_run_case(c) for c in cases]
    with concurrent.futures.ProcessPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(_run_case, cases))


def experiment1(
    sweep: str,
    out_dir: str,
    base: RunConfig | None = None,
    max_workers: int | None = None,
) -> list[dict]:
    """Damping study: sweep one parameter, others at the preset defaults.

    Writes one trajectory CSV per value plus ``summary.csv`` with the
    damping metric (max |theta| over [0.8 t_end, t_end]) per run.
    """
    if sweep not in EXPERIMENT1_SWEEPS:
        raise ValueError(
            f"unknown sweep {sweep!r}; choose from {sorted(EXPERIMENT1_SWEEPS)}"
        )
    base = base if base is not None else RunConfig(**EXPERIMENT1_NUMERICS)
    param, values = EXPERIMENT1_SWEEPS[sweep]
    os.makedirs(out_dir, exist_ok=True)

    cases = []
    rows = []
    for value in values:
        cfg_dict = base.as_dict()
        cfg_dict[param] = value
        csv_path = os.path.join(out_dir, f"{sweep}_{param}_{value:g}.csv")
        cfg_dict["output"] = csv_path
        cases.append((cfg_dict, csv_path))
        rows.append({
            "sweep": sweep, "parameter": param, "value": value, "csv": csv_path,
            "window_start": 0.8 * cfg_dict["t_end"], "window_end": cfg_dict["t_end"],
        })
    metrics = _run_pool(cases, max_workers)
    for row, metric in zip(rows, metrics):
        row["damping_metric"] = metric
    _write_summary(os.path.join(out_dir, "summary.csv"), rows)
    return rows


def experiment2(
    out_dir: str,
    base: RunConfig | None = None,
    max_workers: int | None = None,
) -> list[dict]:
    """Compressible (a in {0.1, 20, 100}) versus incompressible, same setup."""
    base = base if base is not None else RunConfig(**EXPERIMENT2_NUMERICS)
    os.makedirs(out_dir, exist_ok=True)

    cases = []
    rows = []
    for a in EXPERIMENT2_GAS_VALUES:
        cfg_dict = base.as_dict()
        cfg_dict.update(a=a, solver="compressible")
        csv_path = os.path.join(out_dir, f"compressible_a_{a:g}.csv")
        cfg_dict["output"] = csv_path
        cases.append((cfg_dict, csv_path))
        rows.append({
            "solver": "compressible", "a": a, "csv": csv_path,
            "window_start": 0.8 * cfg_dict["t_end"], "window_end": cfg_dict["t_end"],
        })
    cfg_dict = base.as_dict()
    cfg_dict.update(solver="incompressible", rho_C=1.0)
    csv_path = os.path.join(out_dir, "incompressible.csv")
    cfg_dict["output"] = csv_path
    cases.append((cfg_dict, csv_path))
    rows.append({
        "solver": "incompressible", "a": "", "csv": csv_path,
        "window_start": 0.8 * cfg_dict["t_end"], "window_end": cfg_dict["t_end"],
    })

    metrics = _run_pool(cases, max_workers)
    for row, metric in zip(rows, metrics):
        row["damping_metric"] = metric
    _write_summary(os.path.join(out_dir, "summary.csv"), rows)
    return rows


def _write_summary(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
