"""Problem definition: decision vector, objective, and named constraint functions.

A problem is a plain container of differentiable scalar functions. Constraints
are scalar-valued; vector-valued conditions are flattened into one spec per
component, sharing a group name. Derivatives are analytic, supplied by the
problem author, and guarded by the finite-difference check below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError

# A scalar function handle returns (value, gradient) at x.
EvalFn = Callable[[np.ndarray], tuple[float, np.ndarray]]
# Optional second derivative handle returns the dense Hessian at x.
HessFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ScalarFunction:
    """Differentiable scalar function with an optional Hessian."""

    fn: EvalFn
    hess: Optional[HessFn] = None

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        value, grad = self.fn(x)
        return float(value), np.asarray(grad, dtype=float)


@dataclass(frozen=True)
class ConstraintSpec:
    """One scalar constraint, tagged with its group and the time steps it touches."""

    group: str
    instance_id: str
    kind: str  # "eq" or "ineq"
    time_indices: tuple[int, ...]
    fn: ScalarFunction

    def __post_init__(self):
        if self.kind not in ("eq", "ineq"):
            raise InvalidArgumentError(f"constraint kind must be 'eq' or 'ineq', got {self.kind!r}")
        if not self.time_indices:
            raise InvalidArgumentError(f"constraint {self.instance_id!r} has empty time_indices")
        if list(self.time_indices) != sorted(self.time_indices):
            raise InvalidArgumentError(f"constraint {self.instance_id!r} time_indices not sorted")


@dataclass(frozen=True)
class Problem:
    """Immutable NLP: minimize objective(x) s.t. h(x) = 0, g(x) <= 0.

    ``n`` is the decision-vector dimension, split into ``T`` time-discretized
    configurations of sizes ``d_t`` (sum(d_t) == n; T == 1 for non-temporal
    problems). Evaluation is pure and safe to call concurrently.
    """

    name: str
    n: int
    T: int
    d_t: tuple[int, ...]
    objective: ScalarFunction
    equalities: tuple[ConstraintSpec, ...] = ()
    inequalities: tuple[ConstraintSpec, ...] = ()
    # Scene document for problems built from a waypoint scene; lets a trace
    # header reconstruct the exact problem without the registry.
    scene: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        if self.n <= 0 or self.T <= 0:
            raise InvalidArgumentError("n and T must be positive")
        if sum(self.d_t) != self.n:
            raise InvalidArgumentError(f"sum(d_t)={sum(self.d_t)} != n={self.n}")
        if len(self.d_t) != self.T:
            raise InvalidArgumentError(f"len(d_t)={len(self.d_t)} != T={self.T}")
        seen: set[tuple[str, str]] = set()
        group_kinds: dict[str, str] = {}
        for c in self.constraints():
            key = (c.group, c.instance_id)
            if key in seen:
                raise InvalidArgumentError(f"duplicate constraint (group, id) {key}")
            seen.add(key)
            if group_kinds.setdefault(c.group, c.kind) != c.kind:
                raise InvalidArgumentError(f"group {c.group!r} mixes equality and inequality members")
            for t in c.time_indices:
                if not (0 <= t < self.T):
                    raise InvalidArgumentError(
                        f"constraint {c.instance_id!r} touches time {t} outside [0, {self.T})")

    def constraints(self) -> tuple[ConstraintSpec, ...]:
        """All constraints, equalities first, in declaration order."""
        return self.equalities + self.inequalities

    def config_slice(self, t: int) -> slice:
        """Index range of configuration t within the decision vector."""
        start = sum(self.d_t[:t])
        return slice(start, start + self.d_t[t])


def _check_x(problem: Problem, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise InvalidArgumentError(f"x has shape {x.shape}, expected ({problem.n},)")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("x contains non-finite entries")
    return x


def eval_objective(problem: Problem, x: np.ndarray) -> tuple[float, np.ndarray]:
    """Evaluate f(x) and its gradient."""
    x = _check_x(problem, x)
    value, grad = problem.objective(x)
    if grad.shape != (problem.n,):
        raise InvalidArgumentError(f"objective gradient has shape {grad.shape}, expected ({problem.n},)")
    return value, grad


def eval_constraints(problem: Problem, x: np.ndarray):
    """Evaluate all constraints at x.

    Returns (h, g, Jh, Jg): values and Jacobians, rows in declaration order.
    """
    x = _check_x(problem, x)
    m_eq, m_ineq = len(problem.equalities), len(problem.inequalities)
    h = np.empty(m_eq)
    g = np.empty(m_ineq)
    Jh = np.empty((m_eq, problem.n))
    Jg = np.empty((m_ineq, problem.n))
    for i, c in enumerate(problem.equalities):
        h[i], Jh[i] = c.fn(x)
    for j, c in enumerate(problem.inequalities):
        g[j], Jg[j] = c.fn(x)
    return h, g, Jh, Jg


def max_violation(problem: Problem, x: np.ndarray) -> float:
    """Worst constraint violation: max(max |h_i|, max(0, g_j)); 0 iff feasible."""
    h, g, _, _ = eval_constraints(problem, x)
    worst = 0.0
    if h.size:
        worst = max(worst, float(np.max(np.abs(h))))
    if g.size:
        worst = max(worst, float(np.max(np.maximum(g, 0.0))))
    return worst


@dataclass(frozen=True)
class GradientCheckReport:
    """Max deviation between analytic gradients and central finite differences.

    Deviations are scaled by max(1, ||grad||_inf) of the analytic gradient.
    """

    objective: float
    constraints: dict[str, float]

    @property
    def worst(self) -> float:
        devs = [self.objective, *self.constraints.values()]
        return max(devs)


def _central_diff(fn: EvalFn, x: np.ndarray, eps: float) -> np.ndarray:
    grad = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = eps
        fp, _ = fn(x + step)
        fm, _ = fn(x - step)
        grad[i] = (fp - fm) / (2.0 * eps)
    return grad


def check_gradients(problem: Problem, x: np.ndarray, eps: float = 1e-6) -> GradientCheckReport:
    """Compare analytic gradients of f, h, g against central differences at x."""
    if eps <= 0:
        raise InvalidArgumentError("eps must be positive")
    x = _check_x(problem, x)

    def deviation(sf: ScalarFunction) -> float:
        _, grad = sf(x)
        fd = _central_diff(sf.fn, x, eps)
        scale = max(1.0, float(np.max(np.abs(grad))) if grad.size else 1.0)
        return float(np.max(np.abs(grad - fd))) / scale

    return GradientCheckReport(
        objective=deviation(problem.objective),
        constraints={c.instance_id: deviation(c.fn) for c in problem.constraints()},
    )
