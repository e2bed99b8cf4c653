"""Plotting frontend for the torus-search experiment CSV outputs."""

__version__ = "0.1.0"

from .render import PlotJob, RenderResult, SchemaError, render

__all__ = ["PlotJob", "RenderResult", "SchemaError", "render", "__version__"]
