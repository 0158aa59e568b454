"""Pipeline orchestration: spec -> instrument -> run -> ingest, plus sessions.

Subject programs execute in a child process confined to a shadow working
directory with a wall-clock limit; on timeout the child gets SIGTERM first
so the runtime can flush a partial trace. ``trace_in_process`` offers a
subprocess-free path for tests and library use.
"""

from __future__ import annotations

import contextlib
import io
import os
import shutil
import signal
import subprocess
import sys
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from . import runtime, scopes
from .config import Config
from .errors import (
    MalformedTrace,
    SessionStateError,
    SpecValidationError,
    SubjectCrash,
    TraceLensError,
    UnknownBlock,
)
from .deps import closure_for_block, runtime_deps
from .instrument import instrument_source
from .instrument.static import loop_key
from .model import SourceSpan, Trace, TraceSpec, deserialize_trace, validate_spec
from .recorder import Recorder
from .store import PlotQuery, TraceStore

SIGTERM_GRACE_S = 5.0


@dataclass
class RunReport:
    ok: bool
    aborted: bool = False
    truncated: bool = False
    timed_out: bool = False
    returncode: int | None = 0
    error: str | None = None  # stable code when the run failed hard
    stdout: str = ""
    stderr: str = ""
    events: int = 0

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "aborted": self.aborted,
            "truncated": self.truncated,
            "timed_out": self.timed_out,
            "returncode": self.returncode,
            "error": self.error,
            "stdout": self.stdout,
            "stderr": self.stderr,
            "events": self.events,
        }


def _package_root() -> str:
    return str(Path(__file__).resolve().parent.parent)


def run_subject(files: dict[str, str], entry: str, spec: TraceSpec, config: Config,
                out_path: str | None = None) -> tuple[Trace | None, RunReport]:
    """Instrument and execute a subject bundle in a sandboxed child process."""
    prog = instrument_source(files[entry], spec, entry)
    shadow = Path(tempfile.mkdtemp(prefix="tracelens-", dir=config.workdir))
    try:
        for name, text in files.items():
            target = shadow / name
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(prog.source if name == entry else text)
        (shadow / "static_info.json").write_text(_sidecar(prog))
        trace_path = shadow / "trace.json"
        env = dict(os.environ)
        env[runtime.ENV_SINK] = str(trace_path)
        env[runtime.ENV_EVENT_CAP] = str(config.event_cap)
        env["PYTHONPATH"] = _package_root() + os.pathsep + env.get("PYTHONPATH", "")

        proc = subprocess.Popen(
            [sys.executable, entry],
            cwd=shadow,
            env=env,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        timed_out = False
        try:
            stdout, stderr = proc.communicate(timeout=config.timeout_s)
        except subprocess.TimeoutExpired:
            timed_out = True
            proc.send_signal(signal.SIGTERM)  # lets the runtime flush a partial trace
            try:
                stdout, stderr = proc.communicate(timeout=SIGTERM_GRACE_S)
            except subprocess.TimeoutExpired:
                proc.kill()
                stdout, stderr = proc.communicate()

        trace = None
        if trace_path.exists():
            try:
                trace = deserialize_trace(trace_path.read_bytes())
            except MalformedTrace:
                trace = None  # write interrupted despite atomic replace
            else:
                if out_path:
                    shutil.copyfile(trace_path, out_path)
        report = RunReport(
            ok=trace is not None and not timed_out and proc.returncode == 0,
            aborted=bool(trace.aborted) if trace else True,
            truncated=bool(trace.truncated) if trace else False,
            timed_out=timed_out,
            returncode=proc.returncode,
            stdout=stdout,
            stderr=stderr,
            events=sum(1 for _ in trace.root.walk()) if trace else 0,
        )
        if timed_out:
            report.error = "timeout"
        elif trace is not None and trace.truncated:
            report.error = "trace-too-large"
        elif proc.returncode != 0:
            report.error = "subject-crash"
        if trace is None:
            why = "timed out and " if timed_out else ""
            raise SubjectCrash(
                f"subject {why}produced no trace (exit {proc.returncode}): {stderr.strip()[:500]}"
            )
        return trace, report
    finally:
        shutil.rmtree(shadow, ignore_errors=True)


def trace_in_process(source: str, spec: TraceSpec, filename: str = "<subject>",
                     event_cap: int | None = None, capture_stdout: bool = True) -> tuple[Trace, str, BaseException | None]:
    """Instrument and exec a subject in this interpreter.

    Returns (trace, stdout_text, error). Errors from the subject are caught
    and reported so the partial trace stays available, mirroring the
    subprocess path.
    """
    prog = instrument_source(source, spec, filename)
    kwargs = {"event_cap": event_cap} if event_cap else {}
    recorder = Recorder(sink=None, **kwargs)
    runtime.activate(recorder)
    error: BaseException | None = None
    buffer = io.StringIO()
    try:
        namespace = {"__name__": "__main__", "__file__": filename}
        code = compile(prog.source, filename, "exec")
        if capture_stdout:
            with contextlib.redirect_stdout(buffer):
                try:
                    exec(code, namespace)
                except (Exception, SystemExit) as exc:
                    error = exc
        else:
            try:
                exec(code, namespace)
            except (Exception, SystemExit) as exc:
                error = exc
    finally:
        runtime.deactivate()
    return recorder.build_trace(), buffer.getvalue(), error


def _sidecar(prog) -> str:
    import json

    return json.dumps(prog.static_info.to_dict(), indent=1)


# --- sessions -------------------------------------------------------------------


@dataclass
class Session:
    id: str
    files: dict[str, str]
    entry: str
    status: str = "editing"  # editing | tracing | ready | failed
    spec: TraceSpec | None = None
    version: int = 0
    trace: Trace | None = None
    store: TraceStore | None = None
    report: RunReport | None = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def brief(self) -> dict:
        return {
            "id": self.id,
            "entry": self.entry,
            "files": sorted(self.files),
            "status": self.status,
            "version": self.version,
            "spec": self.spec.to_dict() if self.spec else None,
            "report": self.report.to_dict() if self.report else None,
        }


class SessionService:
    """Owns sessions, source text, and configuration for the API and CLI."""

    def __init__(self, config: Config | None = None):
        self.config = config or Config()
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    # --- lifecycle ---------------------------------------------------------------

    def create_session(self, files: dict[str, str], entry: str) -> Session:
        if not files or entry not in files:
            raise SessionStateError("session needs at least an entry file")
        for name, text in files.items():
            scopes.parse_source(text, name)  # surfaces ParseError with location
        session = Session(id=uuid.uuid4().hex[:12], files=dict(files), entry=entry)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownBlock(f"no session {session_id!r}")
        return session

    def update_spec(self, session_id: str, spec: TraceSpec) -> TraceSpec:
        session = self.get(session_id)
        with session.lock:  # concurrent updates serialize; last writer wins
            merged = TraceSpec.build(
                targets=spec.targets,
                customs=spec.customs,
                extra_exclusions=[*spec.exclusions, *self.config.extra_exclusions],
                subject_entry=session.entry,
                use_default_exclusions=False,  # spec.exclusions already resolved
            )
            validated = validate_spec(merged, session.files[session.entry], session.entry)
            session.spec = validated
            session.version += 1
            if session.status == "ready":
                session.status = "editing"  # stale trace: a new run is required
        return validated

    def update_source(self, session_id: str, files: dict[str, str]) -> Session:
        session = self.get(session_id)
        with session.lock:
            for name, text in files.items():
                scopes.parse_source(text, name)
            session.files.update(files)
            session.version += 1
            session.trace = None
            session.store = None
            session.status = "editing"
            if session.spec is not None:
                try:
                    session.spec = validate_spec(session.spec, session.files[session.entry], session.entry)
                except SpecValidationError:
                    session.spec = None
        return session

    def run_trace(self, session_id: str) -> RunReport:
        session = self.get(session_id)
        with session.lock:
            if session.spec is None:
                raise SessionStateError("set a trace spec before running")
            if session.status == "tracing":
                raise SessionStateError("a trace is already running")
            session.status = "tracing"
        try:
            trace, report = run_subject(session.files, session.entry, session.spec, self.config)
            store = TraceStore.ingest(trace)
        except TraceLensError as exc:
            with session.lock:
                session.status = "failed"
                session.report = RunReport(ok=False, error=exc.code, stderr=str(exc), returncode=None)
            raise
        with session.lock:
            session.trace = trace
            session.store = store
            session.report = report
            session.status = "ready"
        return report

    # --- queries --------------------------------------------------------------------

    def _ready(self, session_id: str) -> Session:
        session = self.get(session_id)
        if session.store is None or session.trace is None:
            raise SessionStateError("session has no trace yet")
        return session

    def get_tree(self, session_id: str, root: int = 0, depth: int | None = None) -> dict:
        """Depth-windowed subtree plus the grayscale minimap summary."""
        session = self._ready(session_id)
        depth = depth or self.config.depth_window
        node = session.trace.node(root)
        if node is None:
            raise UnknownBlock(f"no block with id {root}")

        depth_counts: dict[int, int] = {}

        def count(n, d):
            depth_counts[d] = depth_counts.get(d, 0) + 1
            for c in n.children:
                count(c, d + 1)

        count(session.trace.root, 0)

        def emit(n, remaining):
            subtree_leaves = _leaf_count(n)
            d = {
                "id": n.id,
                "type": n.type,
                "line": n.line,
                "ts": n.ts,
                "end_ts": _max_ts(n),
                "label": n.label,
                "name": n.name,
                "iteration": n.iteration,
                "aborted": n.aborted,
                "n_children": len(n.children),
                "n_leaves": subtree_leaves,
            }
            if n.has_value:
                d["value"] = n.value
                d["is_variable"] = n.is_variable
            if remaining > 0:
                d["children"] = [emit(c, remaining - 1) for c in n.children]
            else:
                d["children"] = []
                d["truncated"] = bool(n.children)
            return d

        return {
            "root": emit(node, depth),
            "minimap": [{"depth": d, "count": c} for d, c in sorted(depth_counts.items())],
            "total_ts": _max_ts(session.trace.root),
            "total_blocks": sum(depth_counts.values()),
            "aborted": session.trace.aborted,
            "truncated": session.trace.truncated,
        }

    def get_plot(self, session_id: str, query: PlotQuery) -> dict:
        session = self._ready(session_id)
        return session.store.resolve_plot(query, group_cap=self.config.group_cap)

    def get_deps(self, session_id: str, block_id: int) -> dict:
        session = self._ready(session_id)
        closure = closure_for_block(session.trace.static_info, session.store, block_id)
        ids = runtime_deps(session.store, closure, block_id)
        return {"block": block_id, "closure": sorted(closure), "deps": sorted(ids)}

    def get_source_span(self, session_id: str, block_id: int) -> dict:
        """Source location for a block; call blocks also map to their callee."""
        session = self._ready(session_id)
        brief = session.store.node_brief(block_id)
        if brief is None:
            raise UnknownBlock(f"no block with id {block_id}")
        static = session.trace.static_info
        primary = None
        if brief["type"] != "root":
            primary = SourceSpan(session.entry, brief["line"], brief["line"]).to_dict()
        callee = None
        if brief["type"] == "call" and brief.get("name"):
            span = static.function_spans.get(brief["name"])
            if span is None:  # call under an alias or nested scope
                base = brief["name"].split(".")[-1]
                for qual, s in static.function_spans.items():
                    if qual.split(".")[-1] == base:
                        span = s
                        break
            if span is not None:
                callee = span.to_dict()
        if brief["type"] == "loop":
            span = static.loop_spans.get(loop_key(brief["line"]))
            if span is not None:
                primary = span.to_dict()
        return {"block": block_id, "type": brief["type"], "primary": primary, "callee": callee}

    def list_trackables(self, session_id: str) -> list[dict]:
        """Variables the spec UI can offer, scanned from the entry source."""
        session = self.get(session_id)
        tree = scopes.parse_source(session.files[session.entry], session.entry)
        table = scopes.build_scope_table(tree)
        out = []
        for scope, names in sorted(table.bindings.items()):
            for name, binding in sorted(names.items()):
                if binding.kind in ("assign", "for", "comp", "param"):
                    out.append({"name": name, "scope": scope, "line": binding.line, "kind": binding.kind})
        return out

    def names(self, session_id: str) -> list[dict]:
        session = self._ready(session_id)
        return [session.store.value_stats(n) for n in session.store.names()]


def _max_ts(node) -> int:
    best = node.ts
    for n in node.walk():
        if n.ts > best:
            best = n.ts
    return best


def _leaf_count(node) -> int:
    if not node.children:
        return 1
    return sum(_leaf_count(c) for c in node.children)
