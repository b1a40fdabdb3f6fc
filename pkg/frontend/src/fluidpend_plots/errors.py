"""Errors raised by the plotting pipeline."""


class PlotError(Exception):
    """Base class for plotting failures."""


class MissingInputError(PlotError):
    """An input CSV (or its directory) does not exist."""


class SchemaError(PlotError):
    """A CSV does not follow the trajectory schema."""
