"""Wire format v1: request/response models for the query service.

Field names are the contract; numbers are serialized as shortest
round-tripping decimals, non-finite grid samples as null.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

API_VERSION = 1


class GroupSummary(BaseModel):
    group: str
    kind: str
    instances: list[dict]


class TraceMetaResponse(BaseModel):
    api_version: int = API_VERSION
    problem_name: str
    n: int
    T: int
    d_t: list[int]
    num_steps: int
    groups: list[GroupSummary]
    event_counts: dict[str, int]
    options: dict
    converged: bool
    feasible: bool


class EventRecord(BaseModel):
    seq: int
    kind: str
    highlight: bool = False
    payload: dict


class EventPageResponse(BaseModel):
    api_version: int = API_VERSION
    total: int
    offset: int
    limit: Optional[int]
    events: list[EventRecord]


class SeriesPointModel(BaseModel):
    step: int
    value: float


class ProgressionResponse(BaseModel):
    api_version: int = API_VERSION
    points: list[SeriesPointModel]
    degenerate: bool


class SeriesEntry(BaseModel):
    id: str
    points: list[SeriesPointModel]


class GroupSeriesResponse(BaseModel):
    api_version: int = API_VERSION
    group: str
    kind: str
    expanded: bool
    series: list[SeriesEntry]


class DefaultPlaneRequest(BaseModel):
    step: int


class ThreePointPlaneRequest(BaseModel):
    step_a: int
    step_b: int
    step_c: int


class PlaneResponse(BaseModel):
    api_version: int = API_VERSION
    plane_id: str
    origin: list[float]
    u: list[float]
    v: list[float]
    window: list[float]


class SampleRequest(BaseModel):
    plane_id: str
    resolution: tuple[int, int] = (64, 64)
    functions: list[str] = Field(default_factory=lambda: ["objective"])
    tau: Optional[float] = None
    duals_step: Optional[int] = None
    window: Optional[tuple[float, float, float, float]] = None


class BandModel(BaseModel):
    lower: float
    upper: float
    polygons: list[list[tuple[float, float]]]


class FieldModel(BaseModel):
    name: str
    kind: str
    values: list[list[Optional[float]]]
    levels: list[float]
    bands: list[BandModel]


class FeasibilityModel(BaseModel):
    tau: float
    infeasible: list[list[bool]]
    polygons: list[list[tuple[float, float]]]


class TrajectoryOverlayModel(BaseModel):
    steps: list[int]
    s: list[float]
    t: list[float]
    dist: list[float]
    width: list[float]
    sigma: float


class SampleResponse(BaseModel):
    api_version: int = API_VERSION
    plane_id: str
    resolution: tuple[int, int]
    window: list[float]
    duals_used: dict
    fields: list[FieldModel]
    feasibility: Optional[FeasibilityModel]
    trajectory: TrajectoryOverlayModel


class PathCurveModel(BaseModel):
    step: int
    points: list[tuple[float, float]]


class ConfigCurveModel(BaseModel):
    config: int
    steps: list[int]
    points: list[tuple[float, float]]


class ProjectionResponse(BaseModel):
    api_version: int = API_VERSION
    subsample_steps: list[int]
    selected_steps: list[int]
    selected_configs: list[int]
    paths: list[PathCurveModel]
    trajectories: list[ConfigCurveModel]
