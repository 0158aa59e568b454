"""Source-to-source instrumentation of subject programs.

``instrument_source`` is the one-call pipeline: parse, collect static facts,
normalize (separate nested calls, expand list comprehensions), insert
recording hooks, and emit runnable source.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import scopes
from ..model import StaticInfo, TraceSpec, validate_spec
from .static import collect_static_info
from .rewrite import RewritePlan, emit, instrument, normalize

__all__ = [
    "collect_static_info",
    "normalize",
    "instrument",
    "emit",
    "instrument_source",
    "InstrumentedProgram",
    "RewritePlan",
]


@dataclass(frozen=True)
class InstrumentedProgram:
    source: str
    static_info: StaticInfo
    spec: TraceSpec  # resolved spec actually used


def instrument_source(source: str, spec: TraceSpec, filename: str = "<subject>") -> InstrumentedProgram:
    """Full rewrite pipeline for one subject file."""
    tree = scopes.parse_source(source, filename)
    static_info = collect_static_info(source, filename)
    resolved = validate_spec(spec, source, filename)
    normalized = normalize(tree)
    instrumented = instrument(normalized, resolved, static_info)
    return InstrumentedProgram(emit(instrumented), static_info, resolved)
