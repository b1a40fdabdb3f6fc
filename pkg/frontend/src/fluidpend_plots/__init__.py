"""Static trajectory plots for fluid-pendulum simulation CSVs."""

from .errors import MissingInputError, PlotError, SchemaError
from .plotting import (
    EXPECTED_HEADER,
    PlotSpec,
    plot_trajectories,
    read_trajectory,
    sidecar_label,
)

__version__ = "0.1.0"

__all__ = [
    "EXPECTED_HEADER",
    "MissingInputError",
    "PlotError",
    "PlotSpec",
    "SchemaError",
    "plot_trajectories",
    "read_trajectory",
    "sidecar_label",
]
