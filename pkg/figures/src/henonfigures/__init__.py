"""Figures regenerated from henonlab run artifacts.

Reads only the documented CSV schemas (profile, spectrum, branch) plus their
JSON sidecars; recomputes nothing.  Rendering is deterministic: no embedded
timestamps, so re-rendering the same inputs reproduces the same bytes.
"""

from .render import FigureParseError, FigureSpec, render

__version__ = "0.1.0"

__all__ = ["FigureParseError", "FigureSpec", "render"]
