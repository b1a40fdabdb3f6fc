"""Render swing-angle trajectories from simulation CSVs.

Consumes the trajectory CSV schema
``step,t,theta,omega,g1,g2,mass,energy,min_density,max_speed`` and the
optional ``<csv>.meta.json`` sidecar next to each file (used for legend
labels).  Output is a deterministic SVG: same inputs, same bytes.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import MissingInputError, SchemaError  # noqa: E402

EXPECTED_HEADER = [
    "step", "t", "theta", "omega", "g1", "g2",
    "mass", "energy", "min_density", "max_speed",
]

_DETERMINISTIC_RC = {
    "svg.hashsalt": "fluidpend-plots",
    "svg.fonttype": "none",
    "figure.figsize": (7.0, 4.2),
    "figure.dpi": 100,
    "axes.prop_cycle": plt.cycler(
        color=["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    ),
}


@dataclass
class PlotSpec:
    """One figure: a theta(t) curve per input CSV."""

    csv_paths: list[str]
    output: str
    labels: list[str] | None = None
    probe_times: list[float] = field(default_factory=list)
    title: str = "Evolution of the swing angle"

    def __post_init__(self):
        if not self.csv_paths:
            raise MissingInputError("no input CSV files given")
        if self.labels is not None and len(self.labels) != len(self.csv_paths):
            raise SchemaError(
                f"{len(self.labels)} labels for {len(self.csv_paths)} CSV files"
            )


def read_trajectory(path: str) -> tuple[np.ndarray, np.ndarray]:
    """(t, theta) arrays from a trajectory CSV; validates the schema."""
    if not os.path.exists(path):
        raise MissingInputError(f"input CSV not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        missing = [col for col in ("t", "theta") if col not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        if header != EXPECTED_HEADER:
            raise SchemaError(
                f"{path}: header {header} does not match the trajectory schema"
            )
        i_t, i_theta = header.index("t"), header.index("theta")
        t, theta = [], []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(f"{path}: line {line_no} has {len(row)} fields")
            try:
                t.append(float(row[i_t]))
                theta.append(float(row[i_theta]))
            except ValueError as exc:
                raise SchemaError(f"{path}: line {line_no}: {exc}") from None
    if not t:
        raise SchemaError(f"{path}: no data rows")
    return np.array(t), np.array(theta)


def sidecar_label(path: str) -> str | None:
    """Legend label from the run's sidecar metadata, if one sits next to it."""
    sidecar = path + ".meta.json"
    if not os.path.exists(sidecar):
        return None
    try:
        with open(sidecar) as fh:
            cfg = json.load(fh).get("config", {})
    except (OSError, ValueError):
        return None
    if not cfg:
        return None
    solver = cfg.get("solver", "")
    if solver == "incompressible":
        return "incompressible"
    parts = [f"{key}={cfg[key]:g}" for key in ("a", "L", "rho_B") if key in cfg]
    return ", ".join(parts) if parts else None


def plot_trajectories(spec: PlotSpec) -> str:
    """Write the figure for a PlotSpec; returns the output path.

    Inputs are only read; regenerating from identical CSVs produces an
    identical file.
    """
    curves = [read_trajectory(p) for p in spec.csv_paths]
    with plt.rc_context(_DETERMINISTIC_RC):
        fig, ax = plt.subplots()
        for i, ((t, theta), path) in enumerate(zip(curves, spec.csv_paths)):
            if spec.labels is not None:
                label = spec.labels[i]
            else:
                label = sidecar_label(path) or os.path.splitext(os.path.basename(path))[0]
            ax.plot(t, theta, linewidth=1.0, label=label)
        for probe in spec.probe_times:
            ax.axvline(probe, color="#888888", linewidth=0.8, linestyle="--")
        ax.set_xlabel("t")
        ax.set_ylabel("theta (rad)")
        ax.set_title(spec.title)
        ax.legend(loc="upper right", fontsize="small")
        ax.grid(True, linewidth=0.3, alpha=0.5)
        fig.savefig(spec.output, format="svg", metadata={"Date": None})
        plt.close(fig)
    return spec.output
