"""Figure emitter for torusmut output files.

Consumes only the CSV/JSON files written by the ``torusmut`` CLI
(replicates.csv / samples.csv, events.csv, report.json, meta.json,
cdf.csv) — it never imports the simulation package.
"""

from .figures import FIGURE_KINDS, FigureSpec, RenderResult, render
from .io import SchemaError

__version__ = "0.1.0"

__all__ = ["FIGURE_KINDS", "FigureSpec", "RenderResult", "render",
           "SchemaError", "__version__"]
