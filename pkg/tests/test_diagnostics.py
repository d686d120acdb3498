from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import A22
from conjgrad.diagnostics import (CHECK_NAMES, FAIL, NOT_RUN, PASS, SKIPPED, TrueSolutionProbe,
                                  beta_three_ways, check_alpha_forms, check_beta_forms,
                                  check_direction_conjugacy, check_error_relation,
                                  check_residual_orthogonality, check_scalar_symmetry, run_all)
from conjgrad.errors import InvalidArgument
from conjgrad.linalg import (DenseMatrix, LinearSystem, dot, generate_laplacian_1d,
                             generate_random_spd, matvec, random_vector)
from conjgrad.solver import SolverConfig, solve


def trace_of(system, **kw):
    return solve(system, config=SolverConfig(capture_trace=True, **kw)).trace


@pytest.fixture
def trace22(system22):
    return trace_of(system22, tol_rel=1e-12)


@pytest.fixture
def identity_system():
    return LinearSystem(DenseMatrix(np.eye(3)), [1.0, -2.0, 0.5])


@pytest.fixture
def laplacian16():
    return LinearSystem(generate_laplacian_1d(16), random_vector(16, 3))


def test_orthogonality_identity(identity_system):
    entry = check_residual_orthogonality(trace_of(identity_system))
    assert entry.violation <= 1e-15 and entry.passed


def test_orthogonality_2x2_exact(trace22):
    assert dot(trace22[0].r, trace22[1].r) == 0.0
    assert check_residual_orthogonality(trace22).violation == 0.0


def test_orthogonality_laplacian(laplacian16):
    assert check_residual_orthogonality(trace_of(laplacian16)).passed


def test_checks_need_two_states(system22):
    short = trace_of(system22)[:1]
    with pytest.raises(InvalidArgument):
        check_residual_orthogonality(short)
    with pytest.raises(InvalidArgument):
        check_direction_conjugacy(short, system22.operator)
    with pytest.raises(InvalidArgument):
        check_beta_forms(short, system22.operator)


def test_conjugacy_identity(identity_system):
    entry = check_direction_conjugacy(trace_of(identity_system), identity_system.operator)
    assert entry.violation == 0.0 and entry.passed


def test_conjugacy_2x2(trace22, system22):
    ad1 = matvec(system22.operator, trace22[1].d)
    assert np.array_equal(ad1, [-1.375, 0.6875])
    assert abs(dot(trace22[0].d, ad1)) <= 1e-14
    assert check_direction_conjugacy(trace22, system22.operator).violation <= 1e-14


def test_conjugacy_laplacian(laplacian16):
    assert check_direction_conjugacy(trace_of(laplacian16), laplacian16.operator).passed


def test_alpha_forms_2x2(trace22, system22):
    a = system22.operator
    s0 = trace22[0]
    assert dot(s0.r, matvec(a, s0.d)) == dot(s0.d, matvec(a, s0.d))
    assert check_alpha_forms(trace22, a).violation <= 1e-14


def test_alpha_forms_random_spd():
    system = LinearSystem(generate_random_spd(32, 11, 1e3), random_vector(32, 12))
    entry = check_alpha_forms(trace_of(system), system.operator)
    assert entry.passed and entry.threshold == 1e-10


def test_beta_forms_2x2(trace22, system22):
    a = system22.operator
    assert np.array_equal(matvec(a, trace22[1].r), [-1.75, 0.25])
    b18, b25, b35 = beta_three_ways(trace22[0], trace22[1], a)
    for b in (b18, b25, b35):
        assert b == pytest.approx(0.0625, rel=0, abs=1e-13)
    entry = check_beta_forms(trace22, a)
    assert entry.passed
    # r_2 = 0: the converged step is skipped rather than compared
    assert entry.skipped_indices == (1,)


def test_beta_forms_converged_step_all_zero(identity_system):
    tr = trace_of(identity_system)
    assert beta_three_ways(tr[0], tr[1], identity_system.operator) == (0.0, 0.0, 0.0)


def test_beta_forms_laplacian(laplacian16):
    assert check_beta_forms(trace_of(laplacian16), laplacian16.operator).passed


def test_beta_forms_negative_control(laplacian16):
    tr = trace_of(laplacian16)
    k = 4
    tr[k] = replace(tr[k], alpha=tr[k].alpha * 1.01)
    entry = check_beta_forms(tr, laplacian16.operator)
    assert entry.status == FAIL and entry.worst_index == k - 1
    assert entry.violation == pytest.approx(0.01 / 1.01, rel=1e-6)


def test_scalar_symmetry_2x2(trace22, system22):
    a = system22.operator
    d0, r1 = trace22[0].d, trace22[1].r
    assert dot(d0, matvec(a, r1)) == dot(r1, matvec(a, d0)) == -1.25
    assert check_scalar_symmetry(trace22, a).passed


def test_scalar_symmetry_negative_control(trace22):
    bent = np.array(A22)
    bent[0, 1] += 1e-3
    entry = check_scalar_symmetry(trace22, DenseMatrix(bent))
    assert entry.status == FAIL and entry.violation > 1e-6


@settings(max_examples=15)
@given(n=st.integers(2, 48), seed=st.integers(0, 2**32), cond=st.floats(1.0, 1e4))
def test_scalar_symmetry_holds_for_symmetric_a(n, seed, cond):
    system = LinearSystem(generate_random_spd(n, seed, cond), random_vector(n, seed))
    assert check_scalar_symmetry(trace_of(system, max_iter=10 * n), system.operator).passed


def test_error_relation_2x2(trace22, system22):
    probe = TrueSolutionProbe.build(trace22, system22)
    assert np.allclose(probe.errors[0], [-1 / 11, -7 / 11], rtol=1e-15)
    assert np.allclose(-matvec(system22.operator, probe.errors[0]), trace22[0].r, rtol=1e-15)
    assert len(probe.errors) == len(trace22)
    assert check_error_relation(trace22, system22).passed


def test_error_relation_exact_start(system22):
    x = np.array([1 / 11, 7 / 11])
    tr = solve(system22, x, SolverConfig(capture_trace=True)).trace
    assert check_error_relation(tr, system22).violation <= 1e-15


def test_error_relation_laplacian(laplacian16):
    assert check_error_relation(trace_of(laplacian16), laplacian16).passed


def test_error_relation_not_run_on_singular():
    system = LinearSystem(DenseMatrix([[1.0, 1.0], [1.0, 1.0]]), [1.0, 1.0])
    tr = trace_of(system)
    assert check_error_relation(tr, system).status == NOT_RUN


def test_run_all_identity(identity_system):
    report = run_all(identity_system)
    assert report.names == list(CHECK_NAMES)
    assert all(c.passed and c.violation <= 1e-14 for c in report.checks)


def test_run_all_2x2(system22):
    report = run_all(system22, SolverConfig(tol_rel=1e-12))
    assert len(report.checks) == 6 and report.ok
    assert all(c.status == PASS for c in report.checks)


def test_run_all_breakdown():
    report = run_all(LinearSystem(DenseMatrix(-np.eye(2)), [1.0, 0.0]))
    assert report.stop_reason == "Breakdown" and report.iterations == 0
    assert all(c.status == SKIPPED for c in report.checks) and report.ok


def test_run_all_is_pure(laplacian16):
    a, b = run_all(laplacian16), run_all(laplacian16)
    assert a == b


@pytest.mark.parametrize("c", [1e-3, 3.0, 1e5])
@pytest.mark.parametrize("make", [
    lambda: LinearSystem(generate_laplacian_1d(20), random_vector(20, 5)),
    lambda: LinearSystem(generate_random_spd(12, 4, 10.0), random_vector(12, 5)),
])
def test_scale_invariance(make, c):
    base = make()
    a = base.operator.to_dense()
    scaled = LinearSystem(DenseMatrix(c * a), c * base.rhs)
    x, y = run_all(base), run_all(scaled)
    assert [e.status for e in x.checks] == [e.status for e in y.checks]
    for e, f in zip(x.checks, y.checks):
        assert f.violation <= max(10 * e.violation, 1e-14)


def test_power_of_two_scaling_is_exact():
    base = LinearSystem(generate_random_spd(12, 4, 100.0), random_vector(12, 5))
    scaled = LinearSystem(DenseMatrix(2.0**-20 * base.operator.data), 2.0**-20 * base.rhs)
    x, y = run_all(base), run_all(scaled)
    assert [e.violation for e in x.checks] == [e.violation for e in y.checks]
