"""Execution-trace debugging for Python subjects.

Instrument a program to record its call/loop structure plus selected
variable and expression values, convert the trace to relational form, and
query it for linked interactive visualizations.
"""

from .config import Config
from .deps import runtime_deps, transitive_deps
from .instrument import collect_static_info, emit, instrument, instrument_source, normalize
from .model import (
    CustomExpression,
    SourceSpan,
    StaticInfo,
    Trace,
    TraceNode,
    TraceSpec,
    TrackTarget,
    deserialize_trace,
    serialize_trace,
    validate_spec,
)
from .recorder import Recorder
from .service import SessionService, run_subject, trace_in_process
from .store import Filters, GroupBy, PlotQuery, TraceStore, allowed_plots

__version__ = "0.1.0"

__all__ = [
    "Config",
    "CustomExpression",
    "Filters",
    "GroupBy",
    "PlotQuery",
    "Recorder",
    "SessionService",
    "SourceSpan",
    "StaticInfo",
    "Trace",
    "TraceNode",
    "TraceSpec",
    "TraceStore",
    "TrackTarget",
    "allowed_plots",
    "collect_static_info",
    "deserialize_trace",
    "emit",
    "instrument",
    "instrument_source",
    "normalize",
    "run_subject",
    "runtime_deps",
    "serialize_trace",
    "trace_in_process",
    "transitive_deps",
    "validate_spec",
]
