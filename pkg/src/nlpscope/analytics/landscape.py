"""Loss landscape slices: plane construction, grid sampling, isobands, masks.

A plane is an origin plus an orthonormal (u, v) pair in decision space with a
rectangular window in plane coordinates (s along u, t along v). Scalar fields
are sampled on a regular grid over the window; isobands cut the grid into
filled contour regions; the trajectory is overdrawn with line thickness
encoding distance from the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import DegeneratePlaneError, InvalidArgumentError, NotFoundError
from ..model import Problem, eval_constraints, eval_objective
from .projection import pca_basis

Window = tuple[float, float, float, float]  # (s_min, s_max, t_min, t_max)


@dataclass(frozen=True)
class PlaneSpec:
    """Origin plus orthonormal 2D basis embedded in decision space."""

    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray
    window: Window

    def __post_init__(self):
        for name in ("u", "v"):
            if abs(np.linalg.norm(getattr(self, name)) - 1.0) > 1e-12:
                raise InvalidArgumentError(f"{name} is not unit length")
        if abs(float(self.u @ self.v)) > 1e-12:
            raise InvalidArgumentError("u and v are not orthogonal")
        s_min, s_max, t_min, t_max = self.window
        if not (s_min < s_max and t_min < t_max):
            raise InvalidArgumentError("window is empty")

    def point_at(self, s: float, t: float) -> np.ndarray:
        return self.origin + s * self.u + t * self.v

    def to_dict(self) -> dict:
        return {
            "origin": self.origin.tolist(),
            "u": self.u.tolist(),
            "v": self.v.tolist(),
            "window": list(self.window),
        }

    @staticmethod
    def from_dict(doc: dict) -> "PlaneSpec":
        return PlaneSpec(
            origin=np.asarray(doc["origin"], dtype=float),
            u=np.asarray(doc["u"], dtype=float),
            v=np.asarray(doc["v"], dtype=float),
            window=tuple(float(w) for w in doc["window"]),
        )


def project_to_plane(plane: PlaneSpec, x: np.ndarray) -> tuple[float, float, float]:
    """Plane coordinates (s, t) of x plus its distance from the plane."""
    rel = np.asarray(x, dtype=float) - plane.origin
    s = float(rel @ plane.u)
    t = float(rel @ plane.v)
    dist = float(np.linalg.norm(rel - s * plane.u - t * plane.v))
    return s, t, dist


def _window_containing(points_st: np.ndarray, margin: float = 0.2) -> Window:
    """Smallest window around projected points, padded by `margin` per side."""
    s_min, t_min = points_st.min(axis=0)
    s_max, t_max = points_st.max(axis=0)
    s_pad = margin * (s_max - s_min) or 1.0
    t_pad = margin * (t_max - t_min) or 1.0
    return (float(s_min - s_pad), float(s_max + s_pad),
            float(t_min - t_pad), float(t_max + t_pad))


def _orthonormalize(candidate: np.ndarray, u: np.ndarray, rel_tol: float) -> Optional[np.ndarray]:
    ortho = candidate - (candidate @ u) * u
    norm = float(np.linalg.norm(ortho))
    if norm < rel_tol * max(float(np.linalg.norm(candidate)), 1e-300):
        return None
    return ortho / norm


def default_plane(points: np.ndarray, selected_step: int) -> PlaneSpec:
    """Slice plane for a selected step: u points from x* to the step.

    Origin is x* (the last trajectory point); u is the unit vector to the
    selected point; v is the first principal direction of the trajectory
    orthogonalized against u, falling back to the second when (nearly)
    parallel. The window contains the projected trajectory with 20% margin.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if not (0 <= selected_step < points.shape[0]):
        raise InvalidArgumentError(f"step {selected_step} outside trajectory of length {points.shape[0]}")
    x_star = points[-1]
    x_sel = points[selected_step]
    diff = x_sel - x_star
    norm = float(np.linalg.norm(diff))
    if norm == 0.0:
        raise DegeneratePlaneError("selected step coincides with x*")
    u = diff / norm

    basis = pca_basis(points, k=min(2, points.shape[1]))
    v = None
    for component in basis.components:
        v = _orthonormalize(component, u, rel_tol=1e-9)
        if v is not None:
            break
    if v is None:
        # Trajectory collinear with u: fall back to the coordinate axis least
        # aligned with u to keep the plane well defined.
        axis = np.zeros_like(u)
        axis[int(np.argmin(np.abs(u)))] = 1.0
        v = _orthonormalize(axis, u, rel_tol=1e-12)
    if v is None:
        raise DegeneratePlaneError("no direction orthogonal to u (is n < 2?)")

    rel = points - x_star
    st = np.column_stack([rel @ u, rel @ v])
    return PlaneSpec(origin=x_star, u=u, v=v, window=_window_containing(st))


def three_point_plane(
    xa: np.ndarray, xb: np.ndarray, xc: np.ndarray,
    window: Optional[Window] = None,
) -> PlaneSpec:
    """Plane through three points: origin xc, u toward xa, v toward xb.

    All three points lie on the plane exactly (up to roundoff). Raises
    DegeneratePlaneError for coincident or collinear inputs.
    """
    xa, xb, xc = (np.asarray(p, dtype=float) for p in (xa, xb, xc))
    scale = max(float(np.linalg.norm(xa - xc)), float(np.linalg.norm(xb - xc)),
                float(np.linalg.norm(xa - xb)))
    ua = xa - xc
    norm_a = float(np.linalg.norm(ua))
    if scale == 0.0 or norm_a < 1e-12 * scale:
        raise DegeneratePlaneError("anchor points coincide")
    u = ua / norm_a
    v = _orthonormalize(xb - xc, u, rel_tol=1e-9)
    if v is None:
        raise DegeneratePlaneError("anchor points are collinear")
    if window is None:
        st = np.array([project_to_plane_coords(p, xc, u, v) for p in (xa, xb, xc)])
        window = _window_containing(st)
    return PlaneSpec(origin=xc, u=u, v=v, window=window)


def project_to_plane_coords(x: np.ndarray, origin: np.ndarray, u: np.ndarray, v: np.ndarray):
    rel = x - origin
    return float(rel @ u), float(rel @ v)


def thickness(dist: float, sigma: float, w_min: float = 0.5, w_max: float = 4.0) -> float:
    """Line width encoding proximity to the plane: w_max on it, decaying to w_min."""
    if sigma <= 0:
        raise InvalidArgumentError("sigma must be positive")
    return w_min + (w_max - w_min) * math.exp(-dist / sigma)


@dataclass(frozen=True)
class TrajectoryOverlay:
    """Projected trajectory points with distance-encoded widths."""

    steps: tuple[int, ...]
    s: np.ndarray
    t: np.ndarray
    dist: np.ndarray
    width: np.ndarray
    sigma: float


def trajectory_overlay(plane: PlaneSpec, points: np.ndarray,
                       w_min: float = 0.5, w_max: float = 4.0) -> TrajectoryOverlay:
    """Project all trajectory points; sigma is the median positive distance."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    rel = points - plane.origin
    s = rel @ plane.u
    t = rel @ plane.v
    dist = np.linalg.norm(rel - np.outer(s, plane.u) - np.outer(t, plane.v), axis=1)
    positive = dist[dist > 0]
    sigma = float(np.median(positive)) if positive.size else 1.0
    width = np.array([thickness(d, sigma, w_min, w_max) for d in dist])
    return TrajectoryOverlay(
        steps=tuple(range(points.shape[0])), s=s, t=t, dist=dist, width=width, sigma=sigma)


@dataclass(frozen=True)
class FieldSpec:
    """One sampleable scalar field over the plane.

    kind is one of objective | loss | eq | ineq | agg_eq | agg_ineq; aggregate
    fields take the max over group members (absolute value for equalities).
    """

    name: str
    kind: str
    evaluate: Callable  # (f, h, g, loss) -> float, from per-point raw values


def resolve_functions(problem: Problem, selectors: Sequence[str]) -> list[FieldSpec]:
    """Turn selector strings into field specs.

    Selectors: "objective", "loss", "eq:<instance_id>", "ineq:<instance_id>",
    "group:<group>".
    """
    if not selectors:
        raise InvalidArgumentError("functions selection is empty")
    eq_ids = {c.instance_id: i for i, c in enumerate(problem.equalities)}
    ineq_ids = {c.instance_id: i for i, c in enumerate(problem.inequalities)}
    fields: list[FieldSpec] = []
    for sel in selectors:
        if sel == "objective":
            fields.append(FieldSpec(sel, "objective", lambda f, h, g, L: f))
        elif sel == "loss":
            fields.append(FieldSpec(sel, "loss", lambda f, h, g, L: L))
        elif sel.startswith("eq:"):
            instance = sel[3:]
            if instance not in eq_ids:
                raise NotFoundError(f"unknown equality instance {instance!r}")
            fields.append(FieldSpec(
                sel, "eq", lambda f, h, g, L, i=eq_ids[instance]: h[i]))
        elif sel.startswith("ineq:"):
            instance = sel[5:]
            if instance not in ineq_ids:
                raise NotFoundError(f"unknown inequality instance {instance!r}")
            fields.append(FieldSpec(
                sel, "ineq", lambda f, h, g, L, j=ineq_ids[instance]: g[j]))
        elif sel.startswith("group:"):
            group = sel[6:]
            h_rows = [i for i, c in enumerate(problem.equalities) if c.group == group]
            g_rows = [j for j, c in enumerate(problem.inequalities) if c.group == group]
            if not h_rows and not g_rows:
                raise NotFoundError(f"unknown constraint group {group!r}")
            if h_rows:
                fields.append(FieldSpec(
                    sel, "agg_eq",
                    lambda f, h, g, L, rows=h_rows: float(np.max(np.abs(h[rows])))))
            else:
                fields.append(FieldSpec(
                    sel, "agg_ineq",
                    lambda f, h, g, L, rows=g_rows: float(np.max(g[rows]))))
        else:
            raise InvalidArgumentError(f"unknown function selector {sel!r}")
    return fields


@dataclass(frozen=True)
class GridField:
    """Sampled scalar grids over one plane window (row-major, rows along t)."""

    plane: PlaneSpec
    resolution: tuple[int, int]  # (rows, cols)
    fields: dict  # name -> 2D array (nan marks flagged cells)
    kinds: dict   # name -> FieldSpec.kind
    duals_used: dict  # kappa, lambda, mu

    def s_values(self) -> np.ndarray:
        return np.linspace(self.plane.window[0], self.plane.window[1], self.resolution[1])

    def t_values(self) -> np.ndarray:
        return np.linspace(self.plane.window[2], self.plane.window[3], self.resolution[0])

    def finite_mask(self, name: str) -> np.ndarray:
        return np.isfinite(self.fields[name])


def sample_grid(
    problem: Problem,
    plane: PlaneSpec,
    resolution: tuple[int, int],
    functions: Sequence[str],
    duals,
) -> GridField:
    """Evaluate the selected functions on a regular grid over the plane window.

    The total loss uses the provided duals snapshot; non-finite samples are
    stored as NaN and flagged, never fatal. Cells are independent, so the
    evaluation order is unobservable.
    """
    rows, cols = resolution
    if rows < 2 or cols < 2:
        raise InvalidArgumentError("resolution must be at least 2x2")
    specs = resolve_functions(problem, functions)
    s_vals = np.linspace(plane.window[0], plane.window[1], cols)
    t_vals = np.linspace(plane.window[2], plane.window[3], rows)
    grids = {spec.name: np.empty((rows, cols)) for spec in specs}
    kappa = np.asarray(duals.kappa, dtype=float)
    lam = np.asarray(duals.lam, dtype=float)
    mu = float(duals.mu)
    for r, t in enumerate(t_vals):
        for c, s in enumerate(s_vals):
            x = plane.point_at(s, t)
            with np.errstate(all="ignore"):
                f, _ = eval_objective(problem, x)
                h, g, _, _ = eval_constraints(problem, x)
                active = g > 0.0
                loss = f + kappa @ h + lam @ g + mu * (h @ h + g[active] @ g[active])
            for spec in specs:
                try:
                    value = spec.evaluate(f, h, g, loss)
                except (ArithmeticError, ValueError):
                    value = math.nan
                grids[spec.name][r, c] = value if math.isfinite(value) else math.nan
    return GridField(
        plane=plane,
        resolution=(rows, cols),
        fields=grids,
        kinds={spec.name: spec.kind for spec in specs},
        duals_used={"kappa": kappa, "lambda": lam, "mu": mu},
    )


@dataclass(frozen=True)
class IsoBand:
    """Region between two consecutive levels, as filled polygons in (s, t)."""

    lower: float
    upper: float
    polygons: list  # list of (m, 2) arrays


@dataclass(frozen=True)
class IsobandResult:
    bands: list
    excluded_cells: list  # (row, col) of cells with non-finite corners


def default_levels(values: np.ndarray, count: int = 9) -> list[float]:
    """Quantile levels spanning the finite values (constant fields get one band)."""
    finite = np.asarray(values)[np.isfinite(values)]
    if finite.size == 0:
        raise InvalidArgumentError("field has no finite values")
    levels = np.unique(np.quantile(finite, np.linspace(0.0, 1.0, count)))
    if levels.size < 2:
        center = float(levels[0])
        return [center - 0.5, center + 0.5]
    return [float(v) for v in levels]


def _clip_polygon(poly: list, values: list, level: float, keep_ge: bool):
    """Sutherland-Hodgman on the linear field: keep v >= level (or <=)."""
    out_pts: list = []
    out_vals: list = []
    m = len(poly)
    for i in range(m):
        p0, v0 = poly[i], values[i]
        p1, v1 = poly[(i + 1) % m], values[(i + 1) % m]
        inside0 = v0 >= level if keep_ge else v0 <= level
        inside1 = v1 >= level if keep_ge else v1 <= level
        if inside0:
            out_pts.append(p0)
            out_vals.append(v0)
        if inside0 != inside1 and v1 != v0:
            frac = (level - v0) / (v1 - v0)
            out_pts.append((p0[0] + frac * (p1[0] - p0[0]), p0[1] + frac * (p1[1] - p0[1])))
            out_vals.append(level)
    return out_pts, out_vals


def _band_index(value: float, levels: Sequence[float]) -> int:
    """Band of a value: lower-inclusive, last band closed above."""
    idx = int(np.searchsorted(levels, value, side="right")) - 1
    if idx == len(levels) - 1 and value == levels[-1]:
        idx -= 1
    return idx


def isobands(values: np.ndarray, levels: Sequence[float], window: Window) -> IsobandResult:
    """Filled contour bands of a sampled field via marching squares.

    Each cell is fanned into four triangles around its center (center value =
    corner mean, which resolves the saddle ambiguity); the linear field on
    each triangle is clipped to every band it straddles. Bands partition the
    window area exactly when the levels span the value range; non-finite cells
    are excluded and reported.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] < 2 or values.shape[1] < 2:
        raise InvalidArgumentError("grid must be at least 2x2")
    levels = [float(l) for l in levels]
    if len(levels) < 2 or sorted(levels) != levels:
        raise InvalidArgumentError("need at least 2 ascending levels")
    rows, cols = values.shape
    n_bands = len(levels) - 1
    s_vals = np.linspace(window[0], window[1], cols)
    t_vals = np.linspace(window[2], window[3], rows)

    polygons: list[list] = [[] for _ in range(n_bands)]
    excluded: list = []
    for r in range(rows - 1):
        for c in range(cols - 1):
            corner_vals = (values[r, c], values[r, c + 1], values[r + 1, c + 1], values[r + 1, c])
            if not all(math.isfinite(v) for v in corner_vals):
                excluded.append((r, c))
                continue
            s0, s1 = s_vals[c], s_vals[c + 1]
            t0, t1 = t_vals[r], t_vals[r + 1]
            lo_band = _band_index(min(corner_vals), levels)
            hi_band = _band_index(max(corner_vals), levels)
            if lo_band == hi_band:
                if 0 <= lo_band < n_bands:
                    polygons[lo_band].append(
                        np.array([(s0, t0), (s1, t0), (s1, t1), (s0, t1)]))
                continue
            center = ((s0 + s1) / 2.0, (t0 + t1) / 2.0)
            center_val = sum(corner_vals) / 4.0
            corners = ((s0, t0), (s1, t0), (s1, t1), (s0, t1))
            for i in range(4):
                tri = [corners[i], corners[(i + 1) % 4], center]
                tri_vals = [corner_vals[i], corner_vals[(i + 1) % 4], center_val]
                b_lo = max(_band_index(min(tri_vals), levels), 0)
                b_hi = min(_band_index(max(tri_vals), levels), n_bands - 1)
                for b in range(b_lo, b_hi + 1):
                    pts, vals = _clip_polygon(tri, tri_vals, levels[b], keep_ge=True)
                    if len(pts) >= 3:
                        pts, vals = _clip_polygon(pts, vals, levels[b + 1], keep_ge=False)
                    if len(pts) >= 3:
                        polygons[b].append(np.asarray(pts))
    bands = [
        IsoBand(lower=levels[b], upper=levels[b + 1], polygons=polygons[b])
        for b in range(n_bands)
    ]
    return IsobandResult(bands=bands, excluded_cells=excluded)


def polygon_area(points: np.ndarray) -> float:
    """Shoelace area (absolute)."""
    pts = np.asarray(points, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


@dataclass(frozen=True)
class FeasibilityMask:
    """Infeasible cells (violation > tau) and their region polygons."""

    tau: float
    infeasible: np.ndarray  # bool grid; non-finite cells are False
    polygons: list


def feasibility_mask(grid: GridField, tau: float) -> FeasibilityMask:
    """Shade the grid region violating any sampled constraint beyond tau.

    Violation per cell is the max over constraint fields of |h| (equalities,
    including aggregates) or g (inequalities). Monotone in tau: raising tau
    never grows the mask.
    """
    if tau < 0:
        raise InvalidArgumentError("tau must be nonnegative")
    rows, cols = grid.resolution
    violation = np.full((rows, cols), -math.inf)
    any_constraint = False
    for name, values in grid.fields.items():
        kind = grid.kinds[name]
        if kind in ("eq", "agg_eq"):
            contribution = np.abs(values)
        elif kind in ("ineq", "agg_ineq"):
            contribution = values
        else:
            continue
        any_constraint = True
        violation = np.fmax(violation, contribution)
    if not any_constraint:
        return FeasibilityMask(tau=tau, infeasible=np.zeros((rows, cols), dtype=bool), polygons=[])
    with np.errstate(invalid="ignore"):
        infeasible = violation > tau
    finite = np.isfinite(violation)
    infeasible &= finite
    polygons: list = []
    if np.any(infeasible):
        top = float(np.max(violation[finite]))
        if top > tau:
            result = isobands(violation, [tau, top], grid.plane.window)
            polygons = result.bands[0].polygons
    return FeasibilityMask(tau=tau, infeasible=infeasible, polygons=polygons)
