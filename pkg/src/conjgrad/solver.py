"""Conjugate gradient and steepest descent for SPD systems.

One CG step, from state (x, r, d, rho = r.r):

    alpha = rho / d.Ad
    x'    = x + alpha d
    r'    = r - alpha Ad
    beta  = r'.r' / rho
    d'    = r' + beta d

The residual is carried by the recurrence; ``true_residual_check_interval``
optionally re-anchors it to b - Ax every k steps.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BreakdownError, DimensionError, InvalidArgument, InvalidState, NonFiniteError
from .linalg import LinearSystem, as_vector, axpy, dot, matvec, norm


class StopReason(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    BREAKDOWN = "Breakdown"
    ZERO_RHS = "ZeroRhs"


@dataclass(frozen=True)
class SolverConfig:
    tol_rel: float = 1e-10
    max_iter: Optional[int] = None  # None -> 2n
    breakdown_eps: float = 1e-14
    capture_trace: bool = False
    true_residual_check_interval: int = 0

    def __post_init__(self):
        if not self.tol_rel > 0:
            raise InvalidArgument(f"tol_rel must be > 0, got {self.tol_rel}")
        if self.max_iter is not None and self.max_iter < 1:
            raise InvalidArgument(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.breakdown_eps >= 0:
            raise InvalidArgument(f"breakdown_eps must be >= 0, got {self.breakdown_eps}")
        if self.true_residual_check_interval < 0:
            raise InvalidArgument("true_residual_check_interval must be >= 0")

    def iteration_cap(self, n: int) -> int:
        return 2 * n if self.max_iter is None else self.max_iter


@dataclass(frozen=True, eq=False)
class IterationState:
    """Snapshot of iteration ``i``.

    ``alpha`` is the step size that produced this x (alpha_{i-1}) and ``beta``
    the coefficient that built this d (beta_i); both are None at i = 0.
    """

    i: int
    x: np.ndarray
    r: np.ndarray
    d: np.ndarray
    rho: float
    alpha: Optional[float] = None
    beta: Optional[float] = None


@dataclass(frozen=True, eq=False)
class SolveReport:
    iterations: int
    stop_reason: StopReason
    x: np.ndarray
    residual_norms: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    trace: Optional[list] = None
    method: str = "cg"
    rhs_norm: float = 0.0
    tol_rel: float = 1e-10

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def relative_residual(self) -> float:
        if self.rhs_norm == 0.0:
            return 0.0
        return self.residual_norms[-1] / self.rhs_norm


def _ensure_finite(*vectors):
    for v in vectors:
        if not np.all(np.isfinite(v)):
            raise NonFiniteError("iteration produced non-finite entries")


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def init_state(system: LinearSystem, x0=None) -> IterationState:
    """State 0: r = d = b - A x0."""
    x = np.zeros(system.n) if x0 is None else np.array(x0, dtype=np.float64)
    if x.ndim != 1 or x.size != system.n:
        raise DimensionError(f"x0 has shape {x.shape}, system has n={system.n}")
    _ensure_finite(x)
    r = system.rhs - matvec(system.operator, x)
    _ensure_finite(r)
    d = r.copy()
    _freeze(x, r, d)
    return IterationState(0, x, r, d, dot(r, r))


def compute_alpha(state: IterationState, ad, breakdown_eps: float = 1e-14) -> float:
    dad = dot(state.d, ad)
    if not dad > breakdown_eps * dot(state.d, state.d):
        raise BreakdownError(f"d^T A d = {dad:.3e} at iteration {state.i}: operator is not SPD "
                             "or the iteration has collapsed")
    return state.rho / dad


def compute_beta(rho_next: float, rho: float) -> float:
    if rho == 0.0:
        raise InvalidState("rho is zero; the iteration should already have stopped")
    return rho_next / rho


def _residual(system, x):
    return system.rhs - matvec(system.operator, x)


def _reanchor(config, i_next):
    k = config.true_residual_check_interval
    return k > 0 and i_next % k == 0


def cg_step(state: IterationState, system: LinearSystem, config: SolverConfig) -> IterationState:
    if not state.rho > 0:
        raise InvalidState(f"cg_step needs rho > 0, got {state.rho}")
    ad = matvec(system.operator, state.d)
    alpha = compute_alpha(state, ad, config.breakdown_eps)
    x = axpy(alpha, state.d, state.x)
    r = axpy(-alpha, ad, state.r)
    if _reanchor(config, state.i + 1):
        r = _residual(system, x)
    rho = dot(r, r)
    beta = compute_beta(rho, state.rho)
    d = axpy(beta, state.d, r)
    _ensure_finite(x, r, d)
    _freeze(x, r, d)
    return IterationState(state.i + 1, x, r, d, rho, alpha, beta)


def steepest_descent_step(state: IterationState, system: LinearSystem,
                          config: SolverConfig) -> IterationState:
    """One step along d = r with alpha = r.r / r.Ar; no direction recurrence."""
    if not state.rho > 0:
        raise InvalidState(f"step needs rho > 0, got {state.rho}")
    ar = matvec(system.operator, state.r)
    alpha = compute_alpha(state, ar, config.breakdown_eps)
    x = axpy(alpha, state.r, state.x)
    r = axpy(-alpha, ar, state.r)
    if _reanchor(config, state.i + 1):
        r = _residual(system, x)
    _ensure_finite(x, r)
    _freeze(x, r)
    return IterationState(state.i + 1, x, r, r, dot(r, r), alpha)


def _run(system, x0, config, step, method):
    if config is None:
        config = SolverConfig()
    rhs_norm = norm(system.rhs)
    if rhs_norm == 0.0:
        if x0 is not None:
            as_vector(x0, "x0")
        zero = np.zeros(system.n)
        _freeze(zero)
        trace = [IterationState(0, zero, zero, zero, 0.0)] if config.capture_trace else None
        return SolveReport(0, StopReason.ZERO_RHS, zero, [0.0], [], [], trace, method, 0.0,
                           config.tol_rel)

    state = init_state(system, x0)
    cap = config.iteration_cap(system.n)
    threshold = config.tol_rel * rhs_norm
    trace = [state] if config.capture_trace else None
    norms = [math.sqrt(state.rho)]
    alphas, betas = [], []

    while True:
        if norms[-1] <= threshold:
            reason = StopReason.CONVERGED
            break
        if state.i >= cap:
            reason = StopReason.MAX_ITERATIONS
            break
        try:
            nxt = step(state, system, config)
        except (BreakdownError, NonFiniteError):
            reason = StopReason.BREAKDOWN
            break
        if nxt.i > 1 and nxt.beta is not None:
            betas.append(state.beta)
        state = nxt
        alphas.append(state.alpha)
        norms.append(math.sqrt(state.rho))
        if trace is not None:
            trace.append(state)

    return SolveReport(state.i, reason, state.x, norms, alphas, betas, trace, method, rhs_norm,
                       config.tol_rel)


def solve(system: LinearSystem, x0=None, config: Optional[SolverConfig] = None) -> SolveReport:
    """Run CG from ``x0`` (zero if omitted) until the relative residual test passes.

    Breakdown and non-finite iterates end the loop with
    ``StopReason.BREAKDOWN``; the partial histories are kept.
    """
    return _run(system, x0, config, cg_step, "cg")


def steepest_descent_solve(system: LinearSystem, x0=None,
                           config: Optional[SolverConfig] = None) -> SolveReport:
    return _run(system, x0, config, steepest_descent_step, "sd")
