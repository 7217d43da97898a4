"""Benchmark problems: analytic toys and synthetic time-discretized waypoint paths.

The waypoint problems emulate the structure of robot motion NLPs: a decision
vector concatenating T configurations, per-time obstacle constraints, endpoint
pins, and an optional "attach" event linking two consecutive waypoints to a
moving target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, NotFoundError, UnsupportedVersionError
from .model import ConstraintSpec, Problem, ScalarFunction

SCENE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class WaypointSceneSpec:
    """Data description of a waypoint-path problem (serializable)."""

    T: int
    d: int
    start: tuple[float, ...]
    goal: tuple[float, ...]
    obstacles: tuple[tuple[tuple[float, ...], float], ...] = ()  # (center, radius)
    event_index: Optional[int] = None
    smoothness_order: int = 1
    name: str = "waypoint"

    def __post_init__(self):
        if self.T < 3:
            raise InvalidArgumentError("T must be >= 3")
        if self.d < 1:
            raise InvalidArgumentError("d must be >= 1")
        if len(self.start) != self.d or len(self.goal) != self.d:
            raise InvalidArgumentError("start/goal must have d components")
        for center, radius in self.obstacles:
            if len(center) != self.d:
                raise InvalidArgumentError("obstacle center must have d components")
            if radius <= 0:
                raise InvalidArgumentError("obstacle radius must be positive")
        if self.event_index is not None and not (0 < self.event_index < self.T - 1):
            raise InvalidArgumentError("event_index must lie in (0, T-1)")
        if self.smoothness_order not in (1, 2):
            raise InvalidArgumentError("smoothness_order must be 1 or 2")

    def to_dict(self) -> dict:
        return {
            "format_version": SCENE_FORMAT_VERSION,
            "name": self.name,
            "T": self.T,
            "d": self.d,
            "start": list(self.start),
            "goal": list(self.goal),
            "obstacles": [[list(c), r] for c, r in self.obstacles],
            "event_index": self.event_index,
            "smoothness_order": self.smoothness_order,
        }

    @staticmethod
    def from_dict(doc: dict) -> "WaypointSceneSpec":
        version = doc.get("format_version")
        if version != SCENE_FORMAT_VERSION:
            raise UnsupportedVersionError(f"scene format_version {version!r} not supported")
        return WaypointSceneSpec(
            T=int(doc["T"]),
            d=int(doc["d"]),
            start=tuple(float(v) for v in doc["start"]),
            goal=tuple(float(v) for v in doc["goal"]),
            obstacles=tuple((tuple(float(v) for v in c), float(r)) for c, r in doc.get("obstacles", [])),
            event_index=None if doc.get("event_index") is None else int(doc["event_index"]),
            smoothness_order=int(doc.get("smoothness_order", 1)),
            name=str(doc.get("name", "waypoint")),
        )


def parse_scene(text: str) -> WaypointSceneSpec:
    """Parse the flat key/value scene document.

    One `key: value` pair per line; `#` starts a comment; vectors are
    space-separated numbers; each `obstacle:` line adds one sphere as
    `c_1 .. c_d radius`. Required keys: format_version, T, d, start, goal.
    """
    doc: dict = {"obstacles": []}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise InvalidArgumentError(f"scene line {lineno}: expected 'key: value', got {raw!r}")
        key, value = (part.strip() for part in line.split(":", 1))
        try:
            if key in ("format_version", "T", "d", "event_index", "smoothness_order"):
                doc[key] = int(value)
            elif key in ("start", "goal"):
                doc[key] = [float(v) for v in value.split()]
            elif key == "obstacle":
                nums = [float(v) for v in value.split()]
                if len(nums) < 2:
                    raise ValueError("need center coordinates and radius")
                doc["obstacles"].append([nums[:-1], nums[-1]])
            elif key == "name":
                doc[key] = value
            else:
                raise ValueError(f"unknown key {key!r}")
        except UnsupportedVersionError:
            raise
        except ValueError as exc:
            raise InvalidArgumentError(f"scene line {lineno}: {exc}") from exc
    if "format_version" not in doc:
        raise InvalidArgumentError("scene document missing format_version")
    for required in ("T", "d", "start", "goal"):
        if required not in doc:
            raise InvalidArgumentError(f"scene document missing {required}")
    return WaypointSceneSpec.from_dict(doc)


def write_scene(spec: WaypointSceneSpec) -> str:
    """Inverse of :func:`parse_scene`."""
    lines = [
        f"format_version: {SCENE_FORMAT_VERSION}",
        f"name: {spec.name}",
        f"T: {spec.T}",
        f"d: {spec.d}",
        "start: " + " ".join(repr(v) for v in spec.start),
        "goal: " + " ".join(repr(v) for v in spec.goal),
    ]
    for center, radius in spec.obstacles:
        lines.append("obstacle: " + " ".join(repr(v) for v in center) + f" {radius!r}")
    if spec.event_index is not None:
        lines.append(f"event_index: {spec.event_index}")
    lines.append(f"smoothness_order: {spec.smoothness_order}")
    return "\n".join(lines) + "\n"


def make_toy_equality() -> Problem:
    """min ||x||^2 s.t. x1 + x2 - 1 = 0; optimum (0.5, 0.5), multiplier -1."""

    objective = ScalarFunction(
        fn=lambda x: (float(x @ x), 2.0 * x),
        hess=lambda x: 2.0 * np.eye(2),
    )
    line = ScalarFunction(
        fn=lambda x: (float(x[0] + x[1] - 1.0), np.array([1.0, 1.0])),
        hess=lambda x: np.zeros((2, 2)),
    )
    return Problem(
        name="toy_equality", n=2, T=1, d_t=(2,),
        objective=objective,
        equalities=(ConstraintSpec("line", "line_0", "eq", (0,), line),),
    )


def make_toy_inequality() -> Problem:
    """min (x1 - 2)^2 s.t. x1 - 1 <= 0; optimum x = 1 with multiplier 2."""

    objective = ScalarFunction(
        fn=lambda x: (float((x[0] - 2.0) ** 2), np.array([2.0 * (x[0] - 2.0)])),
        hess=lambda x: np.array([[2.0]]),
    )
    bound = ScalarFunction(
        fn=lambda x: (float(x[0] - 1.0), np.array([1.0])),
        hess=lambda x: np.zeros((1, 1)),
    )
    return Problem(
        name="toy_inequality", n=1, T=1, d_t=(1,),
        objective=objective,
        inequalities=(ConstraintSpec("bound", "bound_0", "ineq", (0,), bound),),
    )


def make_disk_rosenbrock() -> Problem:
    """Rosenbrock objective restricted to the unit disk (nonconvex anchor)."""

    def rosen(x):
        a, b = x
        value = 100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2
        grad = np.array([
            -400.0 * a * (b - a * a) - 2.0 * (1.0 - a),
            200.0 * (b - a * a),
        ])
        return float(value), grad

    def rosen_hess(x):
        a, b = x
        return np.array([
            [-400.0 * (b - 3.0 * a * a) + 2.0, -400.0 * a],
            [-400.0 * a, 200.0],
        ])

    disk = ScalarFunction(
        fn=lambda x: (float(x @ x - 1.0), 2.0 * x),
        hess=lambda x: 2.0 * np.eye(2),
    )
    return Problem(
        name="disk_rosenbrock", n=2, T=1, d_t=(2,),
        objective=ScalarFunction(fn=rosen, hess=rosen_hess),
        inequalities=(ConstraintSpec("disk", "disk_0", "ineq", (0,), disk),),
    )


def _smoothness_matrix(spec: WaypointSceneSpec) -> np.ndarray:
    """Q such that the path objective is x^T Q x (sum of squared differences)."""
    T, d = spec.T, spec.d
    if spec.smoothness_order == 1:
        D = np.zeros((T - 1, T))
        for t in range(T - 1):
            D[t, t], D[t, t + 1] = -1.0, 1.0
    else:
        D = np.zeros((T - 2, T))
        for t in range(T - 2):
            D[t, t], D[t, t + 1], D[t, t + 2] = 1.0, -2.0, 1.0
    Dfull = np.kron(D, np.eye(d))
    return Dfull.T @ Dfull


def make_waypoint_path(spec: WaypointSceneSpec) -> Problem:
    """Build the waypoint NLP: smoothness objective, endpoint pins, obstacles, attach event."""
    T, d = spec.T, spec.d
    n = T * d
    Q = _smoothness_matrix(spec)

    objective = ScalarFunction(
        fn=lambda x, Q=Q: (float(x @ Q @ x), 2.0 * (Q @ x)),
        hess=lambda x, Q=Q: 2.0 * Q,
    )

    def pin(dim: int, target: float) -> ScalarFunction:
        def fn(x, dim=dim, target=target):
            grad = np.zeros(n)
            grad[dim] = 1.0
            return float(x[dim] - target), grad
        return ScalarFunction(fn=fn, hess=lambda x: np.zeros((n, n)))

    equalities: list[ConstraintSpec] = []
    for k in range(d):
        equalities.append(ConstraintSpec(
            "endpoint", f"start_{k}", "eq", (0,), pin(k, spec.start[k])))
    for k in range(d):
        equalities.append(ConstraintSpec(
            "endpoint", f"goal_{k}", "eq", (T - 1,), pin((T - 1) * d + k, spec.goal[k])))

    if spec.event_index is not None:
        # Moving target travels at constant velocity from start to goal; the
        # attachment matches position at t=e and velocity over [e, e+1].
        e = spec.event_index
        start = np.asarray(spec.start)
        velocity = (np.asarray(spec.goal) - start) / (T - 1)
        target = start + velocity * e
        for k in range(d):
            equalities.append(ConstraintSpec(
                "attach", f"attach_pos_{k}", "eq", (e,), pin(e * d + k, float(target[k]))))
        for k in range(d):
            def vel_fn(x, k=k, e=e, v=float(velocity[k])):
                grad = np.zeros(n)
                grad[(e + 1) * d + k] = 1.0
                grad[e * d + k] = -1.0
                return float(x[(e + 1) * d + k] - x[e * d + k] - v), grad
            equalities.append(ConstraintSpec(
                "attach", f"attach_vel_{k}", "eq", (e, e + 1),
                ScalarFunction(fn=vel_fn, hess=lambda x: np.zeros((n, n)))))

    inequalities: list[ConstraintSpec] = []
    for obs_idx, (center, radius) in enumerate(spec.obstacles):
        p = np.asarray(center)
        r2 = radius * radius
        for t in range(T):
            def obs_fn(x, t=t, p=p, r2=r2):
                c = x[t * d:(t + 1) * d]
                diff = c - p
                grad = np.zeros(n)
                grad[t * d:(t + 1) * d] = -2.0 * diff
                return float(r2 - diff @ diff), grad

            def obs_hess(x, t=t):
                H = np.zeros((n, n))
                H[t * d:(t + 1) * d, t * d:(t + 1) * d] = -2.0 * np.eye(d)
                return H

            inequalities.append(ConstraintSpec(
                f"obstacle_{obs_idx}", f"obstacle_{obs_idx}_t{t}", "ineq", (t,),
                ScalarFunction(fn=obs_fn, hess=obs_hess)))

    return Problem(
        name=spec.name, n=n, T=T, d_t=(d,) * T,
        objective=objective,
        equalities=tuple(equalities),
        inequalities=tuple(inequalities),
        scene=spec.to_dict(),
    )


def straight_line_init(spec: WaypointSceneSpec) -> np.ndarray:
    """Linear interpolation from start to goal (the usual initial guess)."""
    start, goal = np.asarray(spec.start), np.asarray(spec.goal)
    steps = np.linspace(0.0, 1.0, spec.T)[:, None]
    return (start[None, :] + steps * (goal - start)[None, :]).ravel()


@dataclass(frozen=True)
class ProblemInfo:
    name: str
    n: int
    T: int
    num_equalities: int
    num_inequalities: int


_WAYPOINT_T20 = WaypointSceneSpec(
    T=20, d=2, start=(0.0, 0.0), goal=(4.0, 0.0),
    obstacles=(((2.0, 0.25), 0.75),), name="waypoint_T20",
)
# Attach pins waypoints 10/11 to the moving target's straight path, so the
# obstacle must sit clear of that segment for the problem to stay feasible.
_WAYPOINT_ATTACH = WaypointSceneSpec(
    T=20, d=2, start=(0.0, 0.0), goal=(4.0, 0.0),
    obstacles=(((1.0, 0.2), 0.45),), event_index=10, name="waypoint_attach",
)
_WAYPOINT_D12 = WaypointSceneSpec(
    T=10, d=12, start=tuple([0.0] * 12), goal=tuple([1.0] * 12),
    obstacles=((tuple([0.7] + [0.45] * 11), 0.5),), name="waypoint_d12",
)

_REGISTRY: dict[str, tuple] = {
    "toy_equality": (make_toy_equality, lambda: np.zeros(2)),
    "toy_inequality": (make_toy_inequality, lambda: np.zeros(1)),
    "disk_rosenbrock": (make_disk_rosenbrock, lambda: np.zeros(2)),
    "waypoint_T20": (
        lambda: make_waypoint_path(_WAYPOINT_T20),
        lambda: straight_line_init(_WAYPOINT_T20),
    ),
    "waypoint_attach": (
        lambda: make_waypoint_path(_WAYPOINT_ATTACH),
        lambda: straight_line_init(_WAYPOINT_ATTACH),
    ),
    "waypoint_d12": (
        lambda: make_waypoint_path(_WAYPOINT_D12),
        lambda: straight_line_init(_WAYPOINT_D12),
    ),
}


def list_problems() -> list[ProblemInfo]:
    """Registry summary in deterministic (insertion) order."""
    infos = []
    for name in _REGISTRY:
        p = get_problem(name)
        infos.append(ProblemInfo(name, p.n, p.T, len(p.equalities), len(p.inequalities)))
    return infos


def get_problem(name: str) -> Problem:
    if name not in _REGISTRY:
        raise NotFoundError(f"unknown problem {name!r}")
    return _REGISTRY[name][0]()


def default_init(name: str) -> np.ndarray:
    """Default initial point for a registry problem."""
    if name not in _REGISTRY:
        raise NotFoundError(f"unknown problem {name!r}")
    return _REGISTRY[name][1]()


def problem_from_header(meta: dict) -> Problem:
    """Rebuild a problem from a trace header: scene if embedded, else registry."""
    scene = meta.get("scene")
    if scene is not None:
        return make_waypoint_path(WaypointSceneSpec.from_dict(scene))
    return get_problem(meta["name"])
