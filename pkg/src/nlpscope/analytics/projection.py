"""PCA projection and the time-curves view of path evolution.

Two families of 2D curves share one projection basis: the motion path of an
intermediate solution (configurations connected along robot time t), and the
trajectory of a single configuration across optimization steps i. Fitting the
basis on pooled configurations of the accepted iterates keeps the families
comparable and stops dense line-search probes from dominating the basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import InvalidArgumentError, NotFoundError, UnsupportedProjectionError
from ..trace import Trace, accepted_step_ordinals, optimization_trajectory


@dataclass(frozen=True)
class PCABasis:
    """Top-k principal directions; components are rows, descending variance.

    Sign convention: the largest-magnitude entry of each component is positive.
    ``rank`` is the rank of the centered data; when rank < len(components) the
    trailing components span an arbitrary (but deterministic) complement.
    """

    mean: np.ndarray
    components: np.ndarray  # shape (k, dim)
    variances: np.ndarray   # shape (k,)
    rank: int

    @property
    def rank_deficient(self) -> bool:
        return self.rank < self.components.shape[0]

    def project(self, points: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(points) - self.mean) @ self.components.T


def pca_basis(points: np.ndarray, k: int) -> PCABasis:
    """Principal component basis of a point cloud via SVD of the centered data."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n_pts, dim = pts.shape
    if n_pts < 2:
        raise InvalidArgumentError("PCA needs at least 2 points")
    if not (1 <= k <= dim):
        raise InvalidArgumentError(f"k={k} outside [1, {dim}]")
    mean = pts.mean(axis=0)
    centered = pts - mean
    _, svals, vt = np.linalg.svd(centered, full_matrices=True)
    svals = np.concatenate([svals, np.zeros(max(0, dim - svals.size))])
    if k > vt.shape[0]:
        raise InvalidArgumentError(f"k={k} exceeds available directions {vt.shape[0]}")
    components = vt[:k].copy()
    for row in components:
        lead = np.argmax(np.abs(row))
        if row[lead] < 0:
            row *= -1.0
    variances = svals[:k] ** 2 / (n_pts - 1)
    tol = svals.max(initial=0.0) * max(n_pts, dim) * np.finfo(float).eps
    rank = int(np.sum(svals > tol))
    return PCABasis(mean=mean, components=components, variances=variances, rank=rank)


@dataclass(frozen=True)
class PathCurve:
    """Motion path of one intermediate solution: projected c_t for t = 0..T-1."""

    step: int
    points: np.ndarray  # shape (T, 2)


@dataclass(frozen=True)
class ConfigCurve:
    """Trajectory of one configuration across the step subsample."""

    config: int
    steps: tuple[int, ...]
    points: np.ndarray  # shape (len(steps), 2)


@dataclass(frozen=True)
class ProjectionSet:
    """Both curve families under one shared 2D basis."""

    basis: PCABasis
    subsample_steps: tuple[int, ...]
    paths: tuple[PathCurve, ...]
    trajectories: tuple[ConfigCurve, ...]


def _split_configs(x: np.ndarray, T: int, d: int) -> np.ndarray:
    return x.reshape(T, d)


def path_evolution_projection(
    trace: Trace,
    steps: Optional[Sequence[int]] = None,
    configs: Optional[Sequence[int]] = None,
) -> ProjectionSet:
    """Project paths and per-configuration trajectories into a shared 2D space.

    The basis is fit on the configurations of the accepted iterates (plus the
    initial point and x*); that subsample is echoed in the result. ``steps``
    selects which intermediate solutions get a path polyline (default: the
    subsample); ``configs`` selects trajectories (default: all t).
    """
    meta = trace.problem_meta
    d_t = meta["d_t"]
    if len(set(d_t)) != 1:
        raise UnsupportedProjectionError(
            "configurations have differing dimensions; joint projection is undefined")
    T, d = meta["T"], d_t[0]

    trajectory = optimization_trajectory(trace)
    xs = np.array([x for _, x in trajectory])
    subsample = tuple(accepted_step_ordinals(trace))

    pooled = np.concatenate([_split_configs(xs[i], T, d) for i in subsample])
    basis = pca_basis(pooled, k=min(2, d))

    path_steps = tuple(subsample if steps is None else steps)
    for i in path_steps:
        if not (0 <= i < len(xs)):
            raise InvalidArgumentError(f"step {i} outside trajectory of length {len(xs)}")
    config_ids = tuple(range(T) if configs is None else configs)
    for t in config_ids:
        if not (0 <= t < T):
            raise InvalidArgumentError(f"configuration {t} outside [0, {T})")

    def project2(pts: np.ndarray) -> np.ndarray:
        p = basis.project(pts)
        if p.shape[1] < 2:  # d = 1: place the single coordinate on the x-axis
            p = np.hstack([p, np.zeros((p.shape[0], 1))])
        return p

    paths = tuple(
        PathCurve(step=i, points=project2(_split_configs(xs[i], T, d)))
        for i in path_steps
    )
    trajectories = tuple(
        ConfigCurve(
            config=t,
            steps=subsample,
            points=project2(np.array([_split_configs(xs[i], T, d)[t] for i in subsample])),
        )
        for t in config_ids
    )
    return ProjectionSet(
        basis=basis, subsample_steps=subsample, paths=paths, trajectories=trajectories)
