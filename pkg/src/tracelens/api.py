"""Versioned HTTP API under /api/v1, consumed by the browser UI.

Payloads are data-only (rows plus axis metadata), never rendered images,
so the frontend stays swappable. Errors carry stable codes.
"""

from __future__ import annotations

from fastapi import Body, FastAPI, HTTPException
from pydantic import BaseModel, Field

from .config import Config
from .errors import (
    Incompatible,
    InvalidPlotKind,
    NotATrackedBlock,
    ParseError,
    SessionStateError,
    SpecValidationError,
    TooManyGroups,
    TraceLensError,
    UnknownBlock,
    UnknownName,
    UnknownVariable,
)
from .model import CustomExpression, SourceSpan, TraceSpec, TrackTarget
from .service import SessionService
from .store import PlotQuery

_STATUS = {
    SpecValidationError: 422,
    ParseError: 422,
    UnknownBlock: 404,
    UnknownName: 404,
    UnknownVariable: 404,
    SessionStateError: 409,
    InvalidPlotKind: 400,
    Incompatible: 400,
    TooManyGroups: 400,
    NotATrackedBlock: 400,
}


class SessionCreate(BaseModel):
    files: dict[str, str]
    entry: str


class TargetIn(BaseModel):
    name: str
    kind: str = "variable"
    scope: str | None = None
    line: int | None = None


class CustomIn(BaseModel):
    label: str
    expression_text: str
    anchor_name: str
    anchor_scope: str | None = None


class SpecIn(BaseModel):
    targets: list[TargetIn] = Field(default_factory=list)
    customs: list[CustomIn] = Field(default_factory=list)
    exclusions: list[str] = Field(default_factory=list)
    use_default_exclusions: bool = True


class SourceIn(BaseModel):
    files: dict[str, str]


class PlotIn(BaseModel):
    names: list[str]
    plot_kind: str
    with_time: bool = False
    filters: dict | None = None
    group_by: dict | None = None


def _spec_from_request(body: SpecIn, entry: str) -> TraceSpec:
    targets = []
    for t in body.targets:
        span = SourceSpan(entry, t.line, t.line) if t.line else None
        targets.append(TrackTarget(t.name, t.kind, t.scope, span))
    customs = [CustomExpression(c.label, c.expression_text, c.anchor_name, c.anchor_scope) for c in body.customs]
    return TraceSpec.build(
        targets=targets,
        customs=customs,
        extra_exclusions=body.exclusions,
        subject_entry=entry,
        use_default_exclusions=body.use_default_exclusions,
    )


def create_app(config: Config | None = None, service: SessionService | None = None,
               ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="tracelens", version="0.1.0")
    svc = service or SessionService(config)
    app.state.service = svc
    if ui_dir:
        from pathlib import Path

        from fastapi.staticfiles import StaticFiles

        root = Path(ui_dir)
        app.mount("/dist", StaticFiles(directory=root / "dist"), name="dist")

        @app.get("/")
        def index():
            from fastapi.responses import FileResponse

            return FileResponse(root / "index.html")

    def fail(exc: TraceLensError) -> HTTPException:
        detail = {"code": exc.code, "message": exc.message}
        if isinstance(exc, SpecValidationError):
            detail["errors"] = [e.to_dict() for e in exc.errors]
        return HTTPException(status_code=_STATUS.get(type(exc), 500), detail=detail)

    @app.post("/api/v1/sessions")
    def create_session(body: SessionCreate):
        try:
            return svc.create_session(body.files, body.entry).brief()
        except TraceLensError as exc:
            raise fail(exc)

    @app.get("/api/v1/sessions/{sid}")
    def get_session(sid: str):
        try:
            return svc.get(sid).brief()
        except TraceLensError as exc:
            raise fail(exc)

    @app.put("/api/v1/sessions/{sid}/spec")
    def put_spec(sid: str, body: SpecIn):
        try:
            session = svc.get(sid)
            validated = svc.update_spec(sid, _spec_from_request(body, session.entry))
            return {"spec": validated.to_dict(), "version": session.version}
        except TraceLensError as exc:
            raise fail(exc)

    @app.put("/api/v1/sessions/{sid}/source")
    def put_source(sid: str, body: SourceIn):
        try:
            return svc.update_source(sid, body.files).brief()
        except TraceLensError as exc:
            raise fail(exc)

    @app.post("/api/v1/sessions/{sid}/trace")
    def run_trace(sid: str):
        try:
            return svc.run_trace(sid).to_dict()
        except TraceLensError as exc:
            raise fail(exc)

    @app.get("/api/v1/sessions/{sid}/tree")
    def get_tree(sid: str, root: int = 0, depth: int | None = None):
        try:
            return svc.get_tree(sid, root=root, depth=depth)
        except TraceLensError as exc:
            raise fail(exc)

    def _plot(sid: str, body: PlotIn):
        query = PlotQuery.from_dict(body.model_dump())
        try:
            return svc.get_plot(sid, query)
        except TraceLensError as exc:
            raise fail(exc)

    @app.get("/api/v1/sessions/{sid}/plot")
    def get_plot(sid: str, body: PlotIn = Body(...)):
        return _plot(sid, body)

    @app.post("/api/v1/sessions/{sid}/plot")  # convenience for GET-body-shy clients
    def post_plot(sid: str, body: PlotIn):
        return _plot(sid, body)

    @app.get("/api/v1/sessions/{sid}/deps/{block}")
    def get_deps(sid: str, block: int):
        try:
            return svc.get_deps(sid, block)
        except TraceLensError as exc:
            raise fail(exc)

    @app.get("/api/v1/sessions/{sid}/span/{block}")
    def get_span(sid: str, block: int):
        try:
            return svc.get_source_span(sid, block)
        except TraceLensError as exc:
            raise fail(exc)

    @app.get("/api/v1/sessions/{sid}/trackables")
    def trackables(sid: str):
        try:
            return svc.list_trackables(sid)
        except TraceLensError as exc:
            raise fail(exc)

    @app.get("/api/v1/sessions/{sid}/names")
    def names(sid: str):
        try:
            return svc.names(sid)
        except TraceLensError as exc:
            raise fail(exc)

    @app.get("/api/v1/sessions/{sid}/source")
    def source(sid: str):
        try:
            session = svc.get(sid)
            return {"entry": session.entry, "files": session.files}
        except TraceLensError as exc:
            raise fail(exc)

    return app
