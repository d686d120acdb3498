"""Post-hoc checks of the CG identities over a captured solve trace.

Each check returns a :class:`CheckEntry` holding the worst normalised
violation and where it occurred. Normalisations are chosen so that scaling
the system to (cA, cb) leaves every outcome unchanged.

Indices whose residual has reached the noise floor
(rho_{i+1} <= 1e-28 rho_0) are skipped by the per-step checks; comparing
relative quantities there is meaningless.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgument, SingularMatrix
from .linalg import LinearSystem, Matrix, direct_solve, dot, frobenius_norm, matvec, norm
from .solver import IterationState, SolveReport, SolverConfig, solve

NOISE_FLOOR = 1e-28

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"
NOT_RUN = "not_run"


@dataclass(frozen=True)
class CheckEntry:
    name: str
    violation: float
    threshold: float
    normalization: str
    worst_index: Optional[int] = None
    status: str = PASS
    skipped_indices: tuple = ()

    @property
    def passed(self) -> bool:
        return self.status == PASS


@dataclass(frozen=True)
class InvariantReport:
    checks: tuple
    stop_reason: str
    iterations: int
    solve_report: Optional[SolveReport] = field(default=None, compare=False, repr=False)

    def __getitem__(self, name) -> CheckEntry:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def names(self):
        return [c.name for c in self.checks]

    @property
    def ok(self) -> bool:
        """True iff no check that actually ran failed."""
        return all(c.status != FAIL for c in self.checks)


@dataclass(frozen=True, eq=False)
class TrueSolutionProbe:
    x_exact: np.ndarray
    errors: list = field(default_factory=list)

    @classmethod
    def build(cls, trace, system):
        x_exact = direct_solve(system)
        return cls(x_exact, [s.x - x_exact for s in trace])


def _entry(name, worst, threshold, normalization, skipped=()):
    value, index = worst
    status = PASS if value <= threshold else FAIL
    return CheckEntry(name, float(value), threshold, normalization, index, status, tuple(skipped))


def _require_pairs(trace):
    if len(trace) < 2:
        raise InvalidArgument(f"check needs a trace of at least 2 states, got {len(trace)}")


def _at_noise_floor(trace, j):
    return trace[j].rho <= NOISE_FLOOR * trace[0].rho


def _track(worst, value, i):
    return (value, i) if value > worst[0] else worst


def check_residual_orthogonality(trace: Sequence[IterationState], threshold=1e-8) -> CheckEntry:
    """max_i |r_i . r_{i+1}| / (r_0 . r_0)."""
    _require_pairs(trace)
    rho0 = trace[0].rho
    worst, skipped = (0.0, None), []
    for i in range(len(trace) - 1):
        if _at_noise_floor(trace, i + 1):
            skipped.append(i)
            continue
        worst = _track(worst, abs(dot(trace[i].r, trace[i + 1].r)) / rho0, i)
    return _entry("residual_orthogonality", worst, threshold, "r0.r0", skipped)


def check_direction_conjugacy(trace: Sequence[IterationState], a: Matrix,
                              threshold=1e-8) -> CheckEntry:
    """max_i |d_i . A d_{i+1}| / (d_0 . A d_0)."""
    _require_pairs(trace)
    scale = dot(trace[0].d, matvec(a, trace[0].d))
    worst = (0.0, None)
    for i in range(len(trace) - 1):
        value = abs(dot(trace[i].d, matvec(a, trace[i + 1].d))) / abs(scale)
        worst = _track(worst, value, i)
    return _entry("direction_conjugacy", worst, threshold, "d0.Ad0")


def check_alpha_forms(trace: Sequence[IterationState], a: Matrix, threshold=1e-10,
                      breakdown_eps=1e-14) -> CheckEntry:
    """max_i |r_i . A d_i - d_i . A d_i| / |d_i . A d_i| over states that took a step.

    This is the identity that turns alpha = r.r / r.Ad into r.r / d.Ad.
    """
    worst, skipped = (0.0, None), []
    for i in range(len(trace) - 1):
        s = trace[i]
        ad = matvec(a, s.d)
        dad = dot(s.d, ad)
        if abs(dad) <= breakdown_eps * dot(s.d, s.d) or dad == 0.0:
            skipped.append(i)
            continue
        worst = _track(worst, abs(dot(s.r, ad) - dad) / abs(dad), i)
    return _entry("alpha_forms", worst, threshold, "|d_i.Ad_i|", skipped)


def beta_three_ways(prev: IterationState, nxt: IterationState, a: Matrix):
    """beta_{i+1} from the conjugacy condition, from alpha_i, and from rho alone."""
    ad = matvec(a, prev.d)
    dad = dot(prev.d, ad)
    from_conjugacy = -dot(prev.d, matvec(a, nxt.r)) / dad
    from_alpha = (1.0 / nxt.alpha) * nxt.rho / dad
    from_rho = nxt.rho / prev.rho
    return from_conjugacy, from_alpha, from_rho


def _rel_gap(u, v):
    scale = max(abs(u), abs(v))
    return 0.0 if scale == 0.0 else abs(u - v) / scale


def check_beta_forms(trace: Sequence[IterationState], a: Matrix, threshold=1e-8) -> CheckEntry:
    """Largest pairwise relative gap between the three beta formulas."""
    _require_pairs(trace)
    worst, skipped = (0.0, None), []
    for i in range(len(trace) - 1):
        prev, nxt = trace[i], trace[i + 1]
        if _at_noise_floor(trace, i + 1) or prev.rho == 0.0 or not nxt.alpha:
            skipped.append(i)
            continue
        if dot(prev.d, matvec(a, prev.d)) == 0.0:
            skipped.append(i)
            continue
        b18, b25, b35 = beta_three_ways(prev, nxt, a)
        gap = max(_rel_gap(b18, b25), _rel_gap(b18, b35), _rel_gap(b25, b35))
        worst = _track(worst, gap, i)
    return _entry("beta_forms", worst, threshold, "max(|beta|) per pair", skipped)


def check_scalar_symmetry(trace: Sequence[IterationState], a: Matrix,
                          threshold=1e-12) -> CheckEntry:
    """max_i |d_i . A r_{i+1} - r_{i+1} . A d_i| / (||d_i|| ||A||_F ||r_{i+1}||).

    The denominator bounds both sides, so the measure reflects asymmetry of A
    rather than cancellation inside either inner product.
    """
    a_norm = frobenius_norm(a)
    worst = (0.0, None)
    for i in range(len(trace) - 1):
        d, r_next = trace[i].d, trace[i + 1].r
        lhs = dot(d, matvec(a, r_next))
        rhs = dot(r_next, matvec(a, d))
        bound = norm(d) * a_norm * norm(r_next)
        if bound == 0.0:
            continue
        worst = _track(worst, abs(lhs - rhs) / bound, i)
    return _entry("scalar_symmetry", worst, threshold, "||d_i|| ||A||_F ||r_i+1||")


def check_error_relation(trace: Sequence[IterationState], system: LinearSystem,
                         threshold=1e-10, recurrence_threshold=1e-12) -> CheckEntry:
    """r_i = -A e_i against the oracle solution, plus e_{i+1} = e_i + alpha_i d_i.

    The reported violation is the larger of the two normalised quantities;
    the entry fails if either exceeds its own threshold.
    """
    try:
        probe = TrueSolutionProbe.build(trace, system)
    except SingularMatrix:
        return CheckEntry("error_relation", 0.0, threshold, "||b||", None, NOT_RUN)
    a = system.operator
    bnorm = norm(system.rhs)
    worst_res = (0.0, None)
    for i, (s, e) in enumerate(zip(trace, probe.errors)):
        worst_res = _track(worst_res, norm(s.r + matvec(a, e)) / bnorm, i)
    e0 = norm(probe.errors[0])
    worst_rec = (0.0, None)
    if e0 > 0.0:
        for i in range(len(trace) - 1):
            e_pred = probe.errors[i] + trace[i + 1].alpha * trace[i].d
            worst_rec = _track(worst_rec, norm(probe.errors[i + 1] - e_pred) / e0, i)
    failed = worst_res[0] > threshold or worst_rec[0] > recurrence_threshold
    worst = max(worst_res, worst_rec, key=lambda t: t[0])
    return CheckEntry("error_relation", float(worst[0]), threshold,
                      "||b|| (residual), ||e0|| (recurrence)", worst[1], FAIL if failed else PASS)


CHECK_NAMES = ("residual_orthogonality", "direction_conjugacy", "alpha_forms",
               "beta_forms", "scalar_symmetry", "error_relation")


def checks_over_trace(trace, system: LinearSystem, breakdown_eps=1e-14) -> tuple:
    a = system.operator
    if len(trace) < 2:
        return tuple(CheckEntry(name, 0.0, t, "", None, SKIPPED)
                     for name, t in zip(CHECK_NAMES, (1e-8, 1e-8, 1e-10, 1e-8, 1e-12, 1e-10)))
    return (
        check_residual_orthogonality(trace),
        check_direction_conjugacy(trace, a),
        check_alpha_forms(trace, a, breakdown_eps=breakdown_eps),
        check_beta_forms(trace, a),
        check_scalar_symmetry(trace, a),
        check_error_relation(trace, system),
    )


def run_all(system: LinearSystem, config: Optional[SolverConfig] = None,
            x0=None) -> InvariantReport:
    """Solve with trace capture on, then run every check over the trace."""
    config = replace(config or SolverConfig(), capture_trace=True)
    report = solve(system, x0, config)
    checks = checks_over_trace(report.trace, system, config.breakdown_eps)
    return InvariantReport(checks, report.stop_reason.value, report.iterations, report)
