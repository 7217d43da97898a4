"""Augmented Lagrangian solver with exhaustive event logging.

The constrained problem is replaced by the unconstrained surrogate

    L(x) = f(x) + kappa.h(x) + lambda.g(x) + mu*(||h(x)||^2 + sum_{g_j>0} g_j(x)^2)

which is minimized repeatedly (damped Newton + backtracking line search) with
first-order dual updates in between. Every probed point, step-size shrink,
accepted update, and dual update is logged through the trace appender, so a
run can be replayed and audited post-mortem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DivergedError, InvalidArgumentError, LineSearchError
from .model import Problem, eval_constraints, eval_objective
from .trace import EventLogger, Trace, make_header, problem_metadata


@dataclass(frozen=True)
class DualState:
    """Multiplier estimates and penalty weight; lam is componentwise >= 0."""

    kappa: np.ndarray
    lam: np.ndarray
    mu: float = 1.0

    def __post_init__(self):
        if np.any(np.asarray(self.lam) < 0):
            raise InvalidArgumentError("inequality multipliers must be nonnegative")
        if self.mu <= 0:
            raise InvalidArgumentError("mu must be positive")

    @staticmethod
    def zeros(problem: Problem) -> "DualState":
        return DualState(
            kappa=np.zeros(len(problem.equalities)),
            lam=np.zeros(len(problem.inequalities)),
            mu=1.0,
        )


@dataclass(frozen=True)
class SolverOptions:
    alpha_init: float = 1.0      # first trial step length
    shrink: float = 0.5          # backtracking factor on rejection
    grow: float = 1.2            # step carry-over growth after acceptance
    wolfe_c1: float = 1e-4       # sufficient-decrease coefficient
    inner_tol: float = 1e-8      # ||grad L|| stop for the inner loop
    outer_tol: float = 1e-6      # max_violation stop for the outer loop
    step_tol: float = 1e-10      # ||dx|| stop
    max_inner: int = 100
    max_outer: int = 50
    mu_growth: float = 1.0       # penalty growth per outer iteration (1 = fixed)

    def __post_init__(self):
        if not (0.0 < self.shrink < 1.0 <= self.grow):
            raise InvalidArgumentError("need 0 < shrink < 1 <= grow")
        for name in ("alpha_init", "wolfe_c1", "inner_tol", "outer_tol", "step_tol"):
            if getattr(self, name) <= 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.max_inner < 0 or self.max_outer < 0:
            raise InvalidArgumentError("iteration caps must be nonnegative")
        if self.mu_growth < 1.0:
            raise InvalidArgumentError("mu_growth must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SolveResult:
    x_star: np.ndarray
    duals: DualState
    converged: bool
    feasible: bool
    trace: Trace


class LossEval(NamedTuple):
    """Full evaluation of the surrogate at one point (feeds eval-event payloads)."""

    x: np.ndarray
    f: float
    grad_f: np.ndarray
    h: np.ndarray
    g: np.ndarray
    Jh: np.ndarray
    Jg: np.ndarray
    L: float
    grad_L: np.ndarray

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.grad_L))

    @property
    def violation(self) -> float:
        worst = 0.0
        if self.h.size:
            worst = max(worst, float(np.max(np.abs(self.h))))
        if self.g.size:
            worst = max(worst, float(np.max(np.maximum(self.g, 0.0))))
        return worst


class _NonFiniteValue(Exception):
    pass


def _loss_eval(problem: Problem, x: np.ndarray, duals: DualState) -> LossEval:
    f, grad_f = eval_objective(problem, x)
    h, g, Jh, Jg = eval_constraints(problem, x)
    active = g > 0.0
    L = f + duals.kappa @ h + duals.lam @ g + duals.mu * (h @ h + g[active] @ g[active])
    grad_L = grad_f.copy()
    if h.size:
        grad_L += Jh.T @ (duals.kappa + 2.0 * duals.mu * h)
    if g.size:
        grad_L += Jg.T @ (duals.lam + 2.0 * duals.mu * np.where(active, g, 0.0))
    if not (math.isfinite(f) and math.isfinite(L)
            and np.all(np.isfinite(h)) and np.all(np.isfinite(g))
            and np.all(np.isfinite(grad_L))):
        raise _NonFiniteValue(f"non-finite evaluation at x with |x|_max={np.max(np.abs(x))}")
    return LossEval(x=x, f=f, grad_f=grad_f, h=h, g=g, Jh=Jh, Jg=Jg, L=float(L), grad_L=grad_L)


def augmented_loss(problem: Problem, x: np.ndarray, duals: DualState) -> tuple[float, np.ndarray]:
    """Value and gradient of the surrogate L at x (mu = 1 gives the plain form)."""
    le = _loss_eval(problem, np.asarray(x, dtype=float), duals)
    return le.L, le.grad_L


def _assemble_hessian(problem: Problem, le: LossEval, duals: DualState) -> Optional[np.ndarray]:
    """Hessian of L using available second derivatives, Gauss-Newton for the rest.

    Penalty curvature 2*mu*J^T J is always available from the Jacobians; exact
    constraint/objective curvature enters only where a hess handle exists.
    Returns None when the problem carries no curvature information at all.
    """
    n = problem.n
    H = np.zeros((n, n))
    have_info = False
    if problem.objective.hess is not None:
        H += problem.objective.hess(le.x)
        have_info = True
    for i, c in enumerate(problem.equalities):
        weight = duals.kappa[i] + 2.0 * duals.mu * le.h[i]
        if c.fn.hess is not None and weight != 0.0:
            H += weight * c.fn.hess(le.x)
        have_info = True
        H += 2.0 * duals.mu * np.outer(le.Jh[i], le.Jh[i])
    for j, c in enumerate(problem.inequalities):
        active = le.g[j] > 0.0
        weight = duals.lam[j] + (2.0 * duals.mu * le.g[j] if active else 0.0)
        if c.fn.hess is not None and weight != 0.0:
            H += weight * c.fn.hess(le.x)
        if active:
            have_info = True
            H += 2.0 * duals.mu * np.outer(le.Jg[j], le.Jg[j])
    return H if have_info else None


def _descent_direction(problem: Problem, le: LossEval, duals: DualState) -> np.ndarray:
    """Damped Newton step: (H + nu*I) delta = -grad, nu raised until descent."""
    H = _assemble_hessian(problem, le, duals)
    if H is None:
        return -le.grad_L
    nu = 1e-10
    eye = np.eye(problem.n)
    while nu <= 1e12:
        try:
            delta = np.linalg.solve(H + nu * eye, -le.grad_L)
        except np.linalg.LinAlgError:
            delta = None
        if delta is not None and np.all(np.isfinite(delta)) and float(le.grad_L @ delta) < 0.0:
            return delta
        nu *= 10.0
    return -le.grad_L


class LineSearchStep(NamedTuple):
    alpha_used: float
    x_new: np.ndarray
    accepted: LossEval


def line_search(
    loss: Callable[[np.ndarray], LossEval],
    x: np.ndarray,
    delta: np.ndarray,
    alpha: float,
    opts: SolverOptions,
    logger: Optional[EventLogger] = None,
    current: Optional[LossEval] = None,
) -> LineSearchStep:
    """Backtrack along delta until the Armijo condition holds.

    Every probe is logged as an eval event (probes are members of the
    trajectory S); every rejection logs a stepsize-shrink event. Raises
    LineSearchError when the step underflows below 1e-16 * alpha.
    """
    if alpha <= 0:
        raise InvalidArgumentError("alpha must be positive")
    if current is None:
        current = loss(x)
    slope = float(current.grad_L @ delta)
    if not slope < 0.0:
        raise InvalidArgumentError("delta is not a descent direction (grad.delta >= 0)")

    a = alpha
    best: Optional[LossEval] = None
    while True:
        x_new = x + a * delta
        cand = loss(x_new)
        if logger is not None:
            logger.eval(cand.x, cand.f, cand.h, cand.g, cand.L, cand.grad_norm, a)
        if cand.L <= current.L + opts.wolfe_c1 * a * slope:
            return LineSearchStep(alpha_used=a, x_new=x_new, accepted=cand)
        if best is None or cand.L < best.L:
            best = cand
        a_next = a * opts.shrink
        if a_next < 1e-16 * alpha:
            raise LineSearchError(
                f"line search underflow at alpha={a:.3e}",
                best_x=best.x, best_value=best.L,
            )
        if logger is not None:
            logger.stepsize_shrink(a, a_next)
        a = a_next


def inner_minimize(
    problem: Problem,
    x: np.ndarray,
    duals: DualState,
    opts: SolverOptions,
    logger: Optional[EventLogger] = None,
) -> np.ndarray:
    """Minimize L for fixed duals; returns the last accepted iterate.

    The trial step carries over between iterations as min(alpha_used * grow,
    alpha_init). Line search failure terminates the loop, keeping the current
    (best accepted) point.
    """
    x = np.asarray(x, dtype=float)
    alpha = opts.alpha_init
    current = _loss_eval(problem, x, duals)
    for _ in range(opts.max_inner):
        if current.grad_norm <= opts.inner_tol:
            break
        delta = _descent_direction(problem, current, duals)
        try:
            step = line_search(
                lambda z: _loss_eval(problem, z, duals),
                x, delta, alpha, opts, logger, current=current,
            )
        except LineSearchError:
            break
        if logger is not None:
            logger.x_update(step.x_new)
        step_norm = float(np.linalg.norm(step.x_new - x))
        x, current = step.x_new, step.accepted
        alpha = min(step.alpha_used * opts.grow, opts.alpha_init)
        if step_norm <= opts.step_tol:
            break
    return x


def update_duals(
    duals: DualState,
    h: np.ndarray,
    g: np.ndarray,
    mu_growth: float = 1.0,
    logger: Optional[EventLogger] = None,
) -> DualState:
    """First-order dual update: kappa += 2*mu*h, lambda = max(0, lambda + 2*mu*g)."""
    kappa = duals.kappa + 2.0 * duals.mu * np.asarray(h, dtype=float)
    lam = np.maximum(0.0, duals.lam + 2.0 * duals.mu * np.asarray(g, dtype=float))
    new = DualState(kappa=kappa, lam=lam, mu=duals.mu * mu_growth)
    if logger is not None:
        logger.dual_update(new.kappa, new.lam, new.mu)
    return new


def kkt_residual(problem: Problem, x: np.ndarray, duals: DualState) -> float:
    """Worst violation of the first-order optimality conditions at (x, duals)."""
    x = np.asarray(x, dtype=float)
    _, grad_f = eval_objective(problem, x)
    h, g, Jh, Jg = eval_constraints(problem, x)
    stationarity = grad_f.copy()
    if h.size:
        stationarity += Jh.T @ duals.kappa
    if g.size:
        stationarity += Jg.T @ duals.lam
    residual = float(np.max(np.abs(stationarity)))
    if h.size:
        residual = max(residual, float(np.max(np.abs(h))))
    if g.size:
        residual = max(residual, float(np.max(np.maximum(g, 0.0))))
        residual = max(residual, float(np.max(np.abs(duals.lam * g))))
        residual = max(residual, max(0.0, float(-np.min(duals.lam))))
    return residual


def solve(problem: Problem, x_init: np.ndarray, opts: Optional[SolverOptions] = None) -> SolveResult:
    """Run the full augmented Lagrangian loop, logging a complete trace.

    Converges when max_violation <= outer_tol and ||grad L|| <= inner_tol
    (checked with the duals the inner loop just minimized under). Raises
    DivergedError carrying the partial trace if evaluation goes non-finite.
    """
    opts = opts or SolverOptions()
    x = np.asarray(x_init, dtype=float)
    if x.shape != (problem.n,):
        raise InvalidArgumentError(f"x_init has shape {x.shape}, expected ({problem.n},)")
    duals = DualState.zeros(problem)
    trace = Trace(header=make_header(problem_metadata(problem), opts.to_dict()))
    logger = EventLogger(trace)

    try:
        le = _loss_eval(problem, x, duals)
        logger.eval(le.x, le.f, le.h, le.g, le.L, le.grad_norm, 0.0)
        converged = False
        for outer in range(opts.max_outer):
            logger.outer_iter(outer)
            x = inner_minimize(problem, x, duals, opts, logger)
            le = _loss_eval(problem, x, duals)
            if le.violation <= opts.outer_tol and le.grad_norm <= opts.inner_tol:
                converged = True
                break
            duals = update_duals(duals, le.h, le.g, opts.mu_growth, logger)
    except _NonFiniteValue as exc:
        logger.aborted(f"diverged: {exc}")
        raise DivergedError(str(exc), trace=trace) from exc

    # S must end at x*: append a closing eval if the last probe was rejected.
    last_eval = next(e for e in reversed(trace.events) if e.kind == "eval")
    if not np.array_equal(last_eval.payload["x"], x):
        logger.eval(le.x, le.f, le.h, le.g, le.L, le.grad_norm, 0.0)
    if converged:
        logger.converged()
    else:
        logger.aborted("outer iteration cap reached")
    return SolveResult(
        x_star=x,
        duals=duals,
        converged=converged,
        feasible=le.violation <= opts.outer_tol,
        trace=trace,
    )
