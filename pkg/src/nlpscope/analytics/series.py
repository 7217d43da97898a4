"""Per-step series derived from a trace: group aggregates and progression speed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NotFoundError
from ..trace import SeriesPoint, Trace


def aggregate_group_series(trace: Trace, group: str) -> list[SeriesPoint]:
    """Per step, the max absolute value over the group's members.

    Applies to both kinds: equality groups aggregate |h_j|, inequality groups
    |g_j|, so an expanded member series is always dominated by the aggregate.
    """
    rows_eq: list[int] = []
    rows_ineq: list[int] = []
    eq_row = ineq_row = 0
    for c in trace.problem_meta["constraints"]:
        if c["kind"] == "eq":
            if c["group"] == group:
                rows_eq.append(eq_row)
            eq_row += 1
        else:
            if c["group"] == group:
                rows_ineq.append(ineq_row)
            ineq_row += 1
    if not rows_eq and not rows_ineq:
        raise NotFoundError(f"unknown constraint group {group!r}")

    series = []
    step = 0
    for event in trace.events:
        if event.kind != "eval":
            continue
        value = 0.0
        if rows_eq:
            value = max(value, float(np.max(np.abs(event.payload["h"][rows_eq]))))
        if rows_ineq:
            value = max(value, float(np.max(np.abs(event.payload["g"][rows_ineq]))))
        series.append(SeriesPoint(step=step, value=value))
        step += 1
    return series


@dataclass(frozen=True)
class ProgressionResult:
    """Remaining normalized travel distance per step; degenerate marks D = 0."""

    points: list[SeriesPoint]
    degenerate: bool = False


def progression_remaining(points: np.ndarray) -> ProgressionResult:
    """r_i = (arc length still to travel after step i) / (total arc length).

    ``points`` is the trajectory S as an |S| x n array. r_0 = 1, r_last = 0,
    and r is non-increasing. A zero-length trajectory yields an all-zero
    series with the degenerate flag set instead of an error.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError("expected an |S| x n array with |S| >= 1")
    if points.shape[0] == 1:
        return ProgressionResult([SeriesPoint(0, 0.0)], degenerate=True)
    segments = np.linalg.norm(np.diff(points, axis=0), axis=1)
    cum = np.concatenate([segments[::-1].cumsum()[::-1], [0.0]])
    total = float(cum[0])  # same summation order as cum, so r[0] is exactly 1
    if total == 0.0:
        return ProgressionResult(
            [SeriesPoint(i, 0.0) for i in range(points.shape[0])], degenerate=True)
    return ProgressionResult(
        [SeriesPoint(i, float(r)) for i, r in enumerate(cum / total)])
