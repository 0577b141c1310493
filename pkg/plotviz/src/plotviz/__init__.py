"""Figure rendering for spinchain-otoc outputs."""

from .render import PlotJob, PlotKind, PlotStyle, render
from .schema import (
    EmptyDataError,
    SchemaError,
    load_overlay_csv,
    load_phase_csv,
    load_scaling_json,
    load_timeseries_csv,
    provenance_hash,
)

__version__ = "0.1.0"
