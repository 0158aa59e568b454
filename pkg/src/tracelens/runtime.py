"""Module-level hook surface imported by instrumented programs.

The sink path comes from the environment; the trace is written once at
process exit (normal, ``sys.exit``, uncaught exception, or SIGTERM), so a
partial trace survives crashes and timeouts. Tests can inject their own
recorder with ``activate``/``deactivate`` to trace in-process.
"""

from __future__ import annotations

import atexit
import os
import signal
import sys
from typing import Any, Callable

from .recorder import SUSPENDED, Recorder, load_meta_json

ENV_SINK = "TRACELENS_TRACE_PATH"
DEFAULT_SINK = "trace.json"
ENV_EVENT_CAP = "TRACELENS_EVENT_CAP"

_active: Recorder | None = None
_owned = False  # True when this module created the recorder (writes at exit)


def active() -> Recorder | None:
    return _active


def activate(recorder: Recorder) -> None:
    """Install an externally managed recorder (no atexit, no signal handler)."""
    global _active, _owned
    _active = recorder
    _owned = False


def deactivate() -> Recorder | None:
    global _active
    recorder, _active = _active, None
    return recorder


def start(meta_json: str | None = None) -> None:
    global _active, _owned
    if _active is None:
        cap = int(os.environ.get(ENV_EVENT_CAP, "0") or 0)
        kwargs = {"event_cap": cap} if cap > 0 else {}
        _active = Recorder(sink=os.environ.get(ENV_SINK, DEFAULT_SINK), **kwargs)
        _owned = True
        atexit.register(_finalize_at_exit)
        try:
            signal.signal(signal.SIGTERM, _on_sigterm)
        except (ValueError, OSError):  # not the main thread / unsupported
            pass
    if meta_json:
        _active.set_meta(load_meta_json(meta_json))


def _finalize_at_exit() -> None:
    if _active is not None and _owned and not _active.finalized:
        _active.finalize()


def _on_sigterm(signum, frame) -> None:
    _finalize_at_exit()
    sys.stderr.write("trace: terminated, partial trace written\n")
    os._exit(124)


# --- hooks ---------------------------------------------------------------------


def enter_call(name: str, line: int, label: str = "") -> int:
    return _active.enter_call(name, line, label) if _active else SUSPENDED


def exit_call(call_id: int) -> None:
    if _active:
        _active.exit_call(call_id)


def begin_loop(line: int, label: str = "") -> int:
    return _active.begin_loop(line, label) if _active else SUSPENDED


def begin_iteration(loop_id: int) -> int:
    return _active.begin_iteration(loop_id) if _active else -1


def end_loop(loop_id: int) -> None:
    if _active:
        _active.end_loop(loop_id)


def record_value(name: str, value: Any, line: int, is_variable: bool = True, label: str = "") -> int:
    return _active.record_value(name, value, line, is_variable, label) if _active else SUSPENDED


def record_custom(label: str, line: int, thunk: Callable[[], Any]) -> int:
    return _active.record_custom(label, line, thunk) if _active else SUSPENDED


def push_suspend() -> None:
    if _active:
        _active.push_suspend()


def pop_suspend() -> None:
    if _active:
        _active.pop_suspend()
