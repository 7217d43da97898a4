"""HTTP query service over one loaded trace (read-only, wire format v1)."""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from ..errors import (
    DegeneratePlaneError,
    DegenerateTrajectoryError,
    InvalidArgumentError,
    NotFoundError,
    UnsupportedProjectionError,
)
from .config import ServiceConfig
from . import schemas, session as session_mod
from .session import SessionState


def create_app(session: Optional[SessionState], config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="nlpscope query service", version="1")
    app.state.session = session
    app.state.config = config

    def current_session() -> SessionState:
        if app.state.session is None:
            raise _NoSession()
        return app.state.session

    class _NoSession(Exception):
        pass

    @app.exception_handler(_NoSession)
    async def _no_session(request: Request, exc: _NoSession):
        return JSONResponse(status_code=409, content={"detail": "no trace session loaded"})

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(InvalidArgumentError)
    async def _invalid(request: Request, exc: InvalidArgumentError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(DegeneratePlaneError)
    async def _degenerate_plane(request: Request, exc: DegeneratePlaneError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(UnsupportedProjectionError)
    async def _unsupported(request: Request, exc: UnsupportedProjectionError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(DegenerateTrajectoryError)
    async def _degenerate_trajectory(request: Request, exc: DegenerateTrajectoryError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/trace/meta", response_model=schemas.TraceMetaResponse)
    def trace_meta():
        return session_mod.build_meta(current_session())

    @app.get("/trace/events", response_model=schemas.EventPageResponse)
    def trace_events(
        offset: int = Query(default=0),
        limit: Optional[int] = Query(default=None),
        kinds: Optional[str] = Query(default=None),
    ):
        kind_list = kinds.split(",") if kinds else None
        return session_mod.build_events(current_session(), offset, limit, kind_list)

    @app.get("/series/progression", response_model=schemas.ProgressionResponse)
    def series_progression():
        return session_mod.build_progression(current_session())

    @app.get("/series/group/{name}", response_model=schemas.GroupSeriesResponse)
    def series_group(name: str, expanded: bool = Query(default=False)):
        return session_mod.build_group_series(current_session(), name, expanded)

    @app.post("/plane/default", response_model=schemas.PlaneResponse)
    def plane_default(request: schemas.DefaultPlaneRequest):
        return session_mod.build_default_plane(current_session(), request.step)

    @app.post("/plane/threepoint", response_model=schemas.PlaneResponse)
    def plane_threepoint(request: schemas.ThreePointPlaneRequest):
        return session_mod.build_threepoint_plane(
            current_session(), request.step_a, request.step_b, request.step_c)

    @app.post("/sample", response_model=schemas.SampleResponse)
    def sample(request: schemas.SampleRequest):
        return session_mod.build_sample(
            current_session(), request, resolution_cap=app.state.config.resolution_cap)

    @app.get("/projection/paths", response_model=schemas.ProjectionResponse)
    def projection_paths(
        steps: Optional[str] = Query(default=None),
        configs: Optional[str] = Query(default=None),
    ):
        step_list = _parse_int_csv(steps, "steps")
        config_list = _parse_int_csv(configs, "configs")
        return session_mod.build_projection(current_session(), step_list, config_list)

    if config.ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def _parse_int_csv(value: Optional[str], name: str) -> Optional[list[int]]:
    if value is None or value == "":
        return None
    try:
        return [int(part) for part in value.split(",")]
    except ValueError as exc:
        raise InvalidArgumentError(f"{name} must be a comma-separated list of integers") from exc
