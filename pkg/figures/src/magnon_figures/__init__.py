"""Static publication-style renderer for magnon-sense figure datasets."""

__version__ = "0.1.0"

from .panels import PANELS, PanelSpec, panels_for
from .render import RenderError, build_figure, render

__all__ = ["PANELS", "PanelSpec", "panels_for", "RenderError", "build_figure",
           "render", "__version__"]
