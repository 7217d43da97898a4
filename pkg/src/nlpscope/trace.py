"""Optimization trace: event log data model, file format, and reconstruction.

A trace is a header (problem metadata + solver options) followed by a gapless,
ordered stream of events. The trajectory S is the ordered list of every probed
point: the initial point (logged as a synthetic eval at seq 0), every line
search probe, and the final x*. All per-step series are read off eval payloads
without re-evaluating the problem.

File format (format_version 1): UTF-8 JSON lines. Line 1 is the header record
``{"format_version": 1, "problem": {...}, "options": {...}}``; every further
line is one event ``{"seq": k, "kind": "...", ...payload}``. Payload fields by
kind:

- ``eval``: x, f, h, g, L, grad_norm, alpha
- ``stepsize-shrink``: alpha_old, alpha_new (line search rejection)
- ``x-update``: x (accepted iterate)
- ``dual-update``: kappa, lambda, mu (values after the update)
- ``outer-iter``: counter
- ``converged``: (no payload) / ``aborted``: reason

Numbers are serialized as shortest round-tripping decimals (up to 17
significant digits), so read(write(t)) is bit-exact.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .errors import (
    ContractError,
    DegenerateTrajectoryError,
    InvalidArgumentError,
    NotFoundError,
    TraceParseError,
    UnsupportedVersionError,
)

TRACE_FORMAT_VERSION = 1

EVENT_KINDS = (
    "eval", "stepsize-shrink", "x-update", "dual-update",
    "outer-iter", "converged", "aborted",
)

_VECTOR_KEYS = ("x", "h", "g", "kappa", "lambda")


@dataclass
class LogEvent:
    """One entry of the run log; payload keys depend on kind."""

    seq: int
    kind: str
    payload: dict

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ContractError(f"unknown event kind {self.kind!r}")

    def to_record(self) -> dict:
        record = {"seq": self.seq, "kind": self.kind}
        for key, value in self.payload.items():
            record[key] = value.tolist() if isinstance(value, np.ndarray) else value
        return record

    @staticmethod
    def from_record(record: dict) -> "LogEvent":
        payload = {}
        for key, value in record.items():
            if key in ("seq", "kind"):
                continue
            if key in _VECTOR_KEYS:
                payload[key] = np.asarray(value, dtype=float)
            else:
                payload[key] = value
        return LogEvent(seq=int(record["seq"]), kind=str(record["kind"]), payload=payload)


@dataclass(frozen=True)
class StepIndex:
    """Position i in the trajectory S, with the seq of its originating eval event."""

    ordinal: int
    seq: int


@dataclass(frozen=True)
class SeriesPoint:
    """(optimization step, scalar value) sample for the line charts."""

    step: int
    value: float


@dataclass
class Trace:
    """Header plus ordered event log of one optimization run."""

    header: dict
    events: list[LogEvent] = field(default_factory=list)

    @property
    def problem_meta(self) -> dict:
        return self.header["problem"]

    @property
    def options(self) -> dict:
        return self.header["options"]

    @property
    def final_index(self) -> int:
        """Seq of the event holding x* (the last eval; the solver guarantees it)."""
        for event in reversed(self.events):
            if event.kind == "eval":
                return event.seq
        raise DegenerateTrajectoryError("trace has no eval events")

    def constraint_index(self, instance_id: str) -> tuple[str, int]:
        """Locate an instance: ('eq'|'ineq', row index within h or g)."""
        eq_row = ineq_row = 0
        for c in self.problem_meta["constraints"]:
            if c["kind"] == "eq":
                if c["instance_id"] == instance_id:
                    return "eq", eq_row
                eq_row += 1
            else:
                if c["instance_id"] == instance_id:
                    return "ineq", ineq_row
                ineq_row += 1
        raise NotFoundError(f"unknown constraint instance {instance_id!r}")


def make_header(problem_meta: dict, options: dict) -> dict:
    return {
        "format_version": TRACE_FORMAT_VERSION,
        "problem": problem_meta,
        "options": options,
    }


def problem_metadata(problem) -> dict:
    """Serializable problem description for the trace header."""
    return {
        "name": problem.name,
        "n": problem.n,
        "T": problem.T,
        "d_t": list(problem.d_t),
        "constraints": [
            {
                "group": c.group,
                "instance_id": c.instance_id,
                "kind": c.kind,
                "time_indices": list(c.time_indices),
            }
            for c in problem.constraints()
        ],
        "scene": problem.scene,
    }


def append_event(trace: Trace, event: LogEvent) -> None:
    """Append in strict seq order (previous + 1, starting at 0)."""
    expected = trace.events[-1].seq + 1 if trace.events else 0
    if event.seq != expected:
        raise ContractError(f"event seq {event.seq} out of order, expected {expected}")
    trace.events.append(event)


def write_trace(trace: Trace, sink: Union[str, io.TextIOBase]) -> None:
    """Write header + events as JSON lines."""
    if isinstance(sink, (str, bytes)):
        with open(sink, "w", encoding="utf-8") as fh:
            write_trace(trace, fh)
        return
    sink.write(json.dumps(trace.header) + "\n")
    for event in trace.events:
        sink.write(json.dumps(event.to_record()) + "\n")


def read_trace(source: Union[str, io.TextIOBase]) -> Trace:
    """Parse a trace file; raises TraceParseError with the offending line number."""
    if isinstance(source, (str, bytes)):
        with open(source, "r", encoding="utf-8") as fh:
            return read_trace(fh)

    lines = source.read().splitlines()
    if not lines:
        raise TraceParseError("empty trace file", 1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TraceParseError(f"bad header: {exc.msg}", 1) from exc
    version = header.get("format_version")
    if version != TRACE_FORMAT_VERSION:
        raise UnsupportedVersionError(f"trace format_version {version!r} not supported")
    if "problem" not in header or "options" not in header:
        raise TraceParseError("header missing 'problem' or 'options'", 1)

    trace = Trace(header=header)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceParseError(f"bad event: {exc.msg}", lineno) from exc
        try:
            event = LogEvent.from_record(record)
        except (KeyError, ValueError, ContractError) as exc:
            raise TraceParseError(f"bad event: {exc}", lineno) from exc
        try:
            append_event(trace, event)
        except ContractError as exc:
            raise TraceParseError(str(exc), lineno) from exc
    return trace


def optimization_trajectory(trace: Trace) -> list[tuple[StepIndex, np.ndarray]]:
    """The trajectory S: every probed x from eval events, in order.

    S[0] is the initial point and S[-1] is x*; rejected line search probes are
    included.
    """
    points = [
        (StepIndex(ordinal=i, seq=event.seq), event.payload["x"])
        for i, event in enumerate(e for e in trace.events if e.kind == "eval")
    ]
    if not points:
        raise DegenerateTrajectoryError("trace has no eval events")
    return points


def constraint_series(trace: Trace, instance_id: str) -> list[SeriesPoint]:
    """Per-step values of one constraint, read from eval payloads."""
    kind, row = trace.constraint_index(instance_id)
    key = "h" if kind == "eq" else "g"
    series = []
    step = 0
    for event in trace.events:
        if event.kind == "eval":
            series.append(SeriesPoint(step=step, value=float(event.payload[key][row])))
            step += 1
    if not series:
        raise DegenerateTrajectoryError("trace has no eval events")
    return series


@dataclass(frozen=True)
class GroupNode:
    """One constraint group with its member instances (stable display order)."""

    group: str
    kind: str
    instances: tuple[dict, ...]


def group_tree(trace: Trace) -> list[GroupNode]:
    """Groups sorted lexicographically; instances by first time index, then id."""
    by_group: dict[str, list[dict]] = {}
    kinds: dict[str, str] = {}
    for c in trace.problem_meta["constraints"]:
        by_group.setdefault(c["group"], []).append(c)
        kinds[c["group"]] = c["kind"]
    nodes = []
    for group in sorted(by_group):
        members = sorted(by_group[group], key=lambda c: (c["time_indices"][0], c["instance_id"]))
        nodes.append(GroupNode(group=group, kind=kinds[group], instances=tuple(members)))
    return nodes


def duals_at_step(trace: Trace, ordinal: int) -> dict:
    """Dual state in effect at trajectory step `ordinal`.

    Reads the nearest dual-update event preceding that step's eval; before any
    update the duals are the solver's initial state (zeros, mu = 1).
    """
    trajectory = optimization_trajectory(trace)
    if not (0 <= ordinal < len(trajectory)):
        raise InvalidArgumentError(f"step {ordinal} outside trajectory of length {len(trajectory)}")
    target_seq = trajectory[ordinal][0].seq
    meta = trace.problem_meta
    num_eq = sum(1 for c in meta["constraints"] if c["kind"] == "eq")
    num_ineq = len(meta["constraints"]) - num_eq
    state = {"kappa": np.zeros(num_eq), "lambda": np.zeros(num_ineq), "mu": 1.0}
    for event in trace.events:
        if event.seq >= target_seq:
            break
        if event.kind == "dual-update":
            state = {
                "kappa": event.payload["kappa"],
                "lambda": event.payload["lambda"],
                "mu": float(event.payload["mu"]),
            }
    return state


class EventLogger:
    """Appender owned by one solver run; assigns gapless sequence numbers."""

    def __init__(self, trace: Trace):
        self.trace = trace

    def _log(self, kind: str, payload: dict) -> None:
        seq = self.trace.events[-1].seq + 1 if self.trace.events else 0
        append_event(self.trace, LogEvent(seq=seq, kind=kind, payload=payload))

    def eval(self, x, f, h, g, L, grad_norm, alpha) -> None:
        self._log("eval", {
            "x": np.array(x, dtype=float), "f": float(f),
            "h": np.array(h, dtype=float), "g": np.array(g, dtype=float),
            "L": float(L), "grad_norm": float(grad_norm), "alpha": float(alpha),
        })

    def stepsize_shrink(self, alpha_old: float, alpha_new: float) -> None:
        self._log("stepsize-shrink", {"alpha_old": float(alpha_old), "alpha_new": float(alpha_new)})

    def x_update(self, x) -> None:
        self._log("x-update", {"x": np.array(x, dtype=float)})

    def dual_update(self, kappa, lam, mu: float) -> None:
        self._log("dual-update", {
            "kappa": np.array(kappa, dtype=float),
            "lambda": np.array(lam, dtype=float),
            "mu": float(mu),
        })

    def outer_iter(self, counter: int) -> None:
        self._log("outer-iter", {"counter": int(counter)})

    def converged(self) -> None:
        self._log("converged", {})

    def aborted(self, reason: str) -> None:
        self._log("aborted", {"reason": reason})


def accepted_step_ordinals(trace: Trace) -> list[int]:
    """Trajectory ordinals of the initial point, accepted updates, and x*.

    The eval event immediately preceding each x-update is the accepted probe.
    """
    seq_to_ordinal = {}
    ordinal = 0
    last_eval_seq = None
    accepted: list[int] = []
    for event in trace.events:
        if event.kind == "eval":
            seq_to_ordinal[event.seq] = ordinal
            last_eval_seq = event.seq
            ordinal += 1
        elif event.kind == "x-update" and last_eval_seq is not None:
            accepted.append(seq_to_ordinal[last_eval_seq])
    if ordinal == 0:
        raise DegenerateTrajectoryError("trace has no eval events")
    ordinals = {0, ordinal - 1, *accepted}
    return sorted(ordinals)
