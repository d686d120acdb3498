from fractions import Fraction

import hypothesis
import numpy as np
import pytest

from conjgrad.linalg import DenseMatrix, LinearSystem

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("default")

np.seterr(divide="raise", over="raise", invalid="raise")

A22 = [[4.0, 1.0], [1.0, 3.0]]
B22 = [1.0, 2.0]


@pytest.fixture
def system22():
    return LinearSystem(DenseMatrix(A22), B22)


def exact_cg(a, b, steps):
    """Textbook CG in rational arithmetic. Returns a list of per-step dicts."""
    a = [[Fraction(v) for v in row] for row in a]
    n = len(b)
    x = [Fraction(0)] * n
    r = [Fraction(v) for v in b]
    d = list(r)
    out = [dict(x=x, r=r, d=d)]
    for _ in range(steps):
        rr = sum(ri * ri for ri in r)
        if rr == 0:
            break
        ad = [sum(a[i][j] * d[j] for j in range(n)) for i in range(n)]
        alpha = rr / sum(di * adi for di, adi in zip(d, ad))
        x = [xi + alpha * di for xi, di in zip(x, d)]
        r = [ri - alpha * adi for ri, adi in zip(r, ad)]
        beta = sum(ri * ri for ri in r) / rr
        d = [ri + beta * di for ri, di in zip(r, d)]
        out.append(dict(x=x, r=r, d=d, alpha=alpha, beta=beta))
    return out


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
