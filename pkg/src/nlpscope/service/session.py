"""Loaded-trace session and the response builders behind every endpoint.

Builders are pure functions of (session, request): the CLI export command and
the HTTP layer share them, so a headless export equals the wire response.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from collections import OrderedDict
from typing import Optional, Sequence

import numpy as np

from .. import analytics
from ..errors import InvalidArgumentError, NotFoundError
from ..model import max_violation
from ..solver import DualState
from ..suite import problem_from_header
from ..trace import (
    Trace,
    accepted_step_ordinals,
    constraint_series,
    duals_at_step,
    group_tree,
    optimization_trajectory,
    read_trace,
)
from . import schemas


class SessionState:
    """One immutable loaded trace plus derived caches."""

    def __init__(self, trace: Trace, cache_size: int = 64):
        self.trace = trace
        self.problem = problem_from_header(trace.problem_meta)
        self.trajectory = optimization_trajectory(trace)
        self.points = np.array([x for _, x in self.trajectory])
        self.planes: dict[str, analytics.PlaneSpec] = {}
        self._memo: OrderedDict[str, object] = OrderedDict()
        self._cache_size = cache_size
        self._lock = threading.Lock()

    @staticmethod
    def from_file(path: str, cache_size: int = 64) -> "SessionState":
        return SessionState(read_trace(path), cache_size=cache_size)

    def register_plane(self, plane: analytics.PlaneSpec) -> str:
        doc = json.dumps(plane.to_dict(), sort_keys=True)
        plane_id = hashlib.sha256(doc.encode()).hexdigest()[:16]
        with self._lock:
            self.planes[plane_id] = plane
        return plane_id

    def get_plane(self, plane_id: str) -> analytics.PlaneSpec:
        with self._lock:
            if plane_id not in self.planes:
                raise NotFoundError(f"unknown plane_id {plane_id!r}")
            return self.planes[plane_id]

    def memo_get(self, key: str):
        with self._lock:
            if key in self._memo:
                self._memo.move_to_end(key)
                return self._memo[key]
        return None

    def memo_put(self, key: str, value) -> None:
        if self._cache_size == 0:
            return
        with self._lock:
            self._memo[key] = value
            self._memo.move_to_end(key)
            while len(self._memo) > self._cache_size:
                self._memo.popitem(last=False)


def build_meta(session: SessionState) -> schemas.TraceMetaResponse:
    trace = session.trace
    counts: dict[str, int] = {}
    for event in trace.events:
        counts[event.kind] = counts.get(event.kind, 0) + 1
    groups = [
        schemas.GroupSummary(group=node.group, kind=node.kind, instances=list(node.instances))
        for node in group_tree(trace)
    ]
    x_star = session.points[-1]
    outer_tol = float(trace.options.get("outer_tol", 1e-6))
    return schemas.TraceMetaResponse(
        problem_name=trace.problem_meta["name"],
        n=trace.problem_meta["n"],
        T=trace.problem_meta["T"],
        d_t=list(trace.problem_meta["d_t"]),
        num_steps=len(session.trajectory),
        groups=groups,
        event_counts=counts,
        options=dict(trace.options),
        converged=any(e.kind == "converged" for e in trace.events),
        feasible=max_violation(session.problem, x_star) <= outer_tol,
    )


def build_events(
    session: SessionState,
    offset: int = 0,
    limit: Optional[int] = None,
    kinds: Optional[Sequence[str]] = None,
) -> schemas.EventPageResponse:
    if offset < 0:
        raise InvalidArgumentError("offset must be nonnegative")
    if limit is not None and limit < 0:
        raise InvalidArgumentError("limit must be nonnegative")
    selected = [
        e for e in session.trace.events
        if kinds is None or e.kind in kinds
    ]
    page = selected[offset:] if limit is None else selected[offset:offset + limit]
    records = []
    for e in page:
        payload = e.to_record()
        payload.pop("seq", None)
        payload.pop("kind", None)
        records.append(schemas.EventRecord(
            seq=e.seq,
            kind=e.kind,
            highlight=(e.kind == "stepsize-shrink"),
            payload=payload,
        ))
    return schemas.EventPageResponse(
        total=len(selected), offset=offset, limit=limit, events=records)


def build_progression(session: SessionState) -> schemas.ProgressionResponse:
    result = analytics.progression_remaining(session.points)
    return schemas.ProgressionResponse(
        points=[schemas.SeriesPointModel(step=p.step, value=p.value) for p in result.points],
        degenerate=result.degenerate,
    )


def build_group_series(
    session: SessionState, group: str, expanded: bool = False
) -> schemas.GroupSeriesResponse:
    node = next((n for n in group_tree(session.trace) if n.group == group), None)
    if node is None:
        raise NotFoundError(f"unknown constraint group {group!r}")
    if expanded:
        entries = [
            schemas.SeriesEntry(
                id=member["instance_id"],
                points=[
                    schemas.SeriesPointModel(step=p.step, value=p.value)
                    for p in constraint_series(session.trace, member["instance_id"])
                ],
            )
            for member in node.instances
        ]
    else:
        entries = [
            schemas.SeriesEntry(
                id=group,
                points=[
                    schemas.SeriesPointModel(step=p.step, value=p.value)
                    for p in analytics.aggregate_group_series(session.trace, group)
                ],
            )
        ]
    return schemas.GroupSeriesResponse(
        group=group, kind=node.kind, expanded=expanded, series=entries)


def _plane_response(session: SessionState, plane: analytics.PlaneSpec) -> schemas.PlaneResponse:
    plane_id = session.register_plane(plane)
    return schemas.PlaneResponse(
        plane_id=plane_id,
        origin=plane.origin.tolist(),
        u=plane.u.tolist(),
        v=plane.v.tolist(),
        window=list(plane.window),
    )


def build_default_plane(session: SessionState, step: int) -> schemas.PlaneResponse:
    return _plane_response(session, analytics.default_plane(session.points, step))


def build_threepoint_plane(
    session: SessionState, step_a: int, step_b: int, step_c: int
) -> schemas.PlaneResponse:
    for step in (step_a, step_b, step_c):
        if not (0 <= step < len(session.points)):
            raise InvalidArgumentError(
                f"step {step} outside trajectory of length {len(session.points)}")
    return _plane_response(session, analytics.three_point_plane(
        session.points[step_a], session.points[step_b], session.points[step_c]))


def _grid_values(values: np.ndarray) -> list[list[Optional[float]]]:
    return [
        [float(v) if math.isfinite(v) else None for v in row]
        for row in values
    ]


def _band_models(result: analytics.IsobandResult) -> list[schemas.BandModel]:
    return [
        schemas.BandModel(
            lower=band.lower,
            upper=band.upper,
            polygons=[[(float(s), float(t)) for s, t in poly] for poly in band.polygons],
        )
        for band in result.bands
    ]


def build_sample(
    session: SessionState,
    request: schemas.SampleRequest,
    resolution_cap: int = 512,
) -> schemas.SampleResponse:
    rows, cols = request.resolution
    if rows > resolution_cap or cols > resolution_cap:
        raise InvalidArgumentError(
            f"resolution {rows}x{cols} exceeds cap {resolution_cap}")
    key = json.dumps(request.model_dump(), sort_keys=True)
    cached = session.memo_get(key)
    if cached is not None:
        return cached

    plane = session.get_plane(request.plane_id)
    if request.window is not None:
        plane = analytics.PlaneSpec(
            origin=plane.origin, u=plane.u, v=plane.v, window=tuple(request.window))

    if request.duals_step is None:
        duals_step = len(session.trajectory) - 1
    else:
        duals_step = request.duals_step
    raw = duals_at_step(session.trace, duals_step)
    duals = DualState(kappa=raw["kappa"], lam=raw["lambda"], mu=raw["mu"])

    grid = analytics.sample_grid(
        session.problem, plane, (rows, cols), request.functions, duals)

    fields = []
    for name, values in grid.fields.items():
        finite = values[np.isfinite(values)]
        if finite.size:
            levels = analytics.default_levels(values)
            bands = _band_models(analytics.isobands(values, levels, plane.window))
        else:
            levels, bands = [], []
        fields.append(schemas.FieldModel(
            name=name,
            kind=grid.kinds[name],
            values=_grid_values(values),
            levels=levels,
            bands=bands,
        ))

    feasibility = None
    if request.tau is not None:
        mask = analytics.feasibility_mask(grid, request.tau)
        feasibility = schemas.FeasibilityModel(
            tau=mask.tau,
            infeasible=[[bool(v) for v in row] for row in mask.infeasible],
            polygons=[[(float(s), float(t)) for s, t in poly] for poly in mask.polygons],
        )

    overlay = analytics.trajectory_overlay(plane, session.points)
    response = schemas.SampleResponse(
        plane_id=request.plane_id,
        resolution=(rows, cols),
        window=list(plane.window),
        duals_used={
            "kappa": duals.kappa.tolist(),
            "lambda": duals.lam.tolist(),
            "mu": duals.mu,
        },
        fields=fields,
        feasibility=feasibility,
        trajectory=schemas.TrajectoryOverlayModel(
            steps=list(overlay.steps),
            s=overlay.s.tolist(),
            t=overlay.t.tolist(),
            dist=overlay.dist.tolist(),
            width=overlay.width.tolist(),
            sigma=overlay.sigma,
        ),
    )
    session.memo_put(key, response)
    return response


def build_projection(
    session: SessionState,
    steps: Optional[Sequence[int]] = None,
    configs: Optional[Sequence[int]] = None,
) -> schemas.ProjectionResponse:
    result = analytics.path_evolution_projection(session.trace, steps=steps, configs=configs)
    return schemas.ProjectionResponse(
        subsample_steps=list(result.subsample_steps),
        selected_steps=list(steps) if steps is not None else list(result.subsample_steps),
        selected_configs=list(configs) if configs is not None
        else list(range(session.trace.problem_meta["T"])),
        paths=[
            schemas.PathCurveModel(
                step=p.step, points=[(float(a), float(b)) for a, b in p.points])
            for p in result.paths
        ],
        trajectories=[
            schemas.ConfigCurveModel(
                config=c.config, steps=list(c.steps),
                points=[(float(a), float(b)) for a, b in c.points])
            for c in result.trajectories
        ],
    )
