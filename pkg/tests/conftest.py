"""Shared fixtures and helpers for the test suite."""
import numpy as np
import pytest

from enorbit.loops import AntiperiodicLoop

# Verdict lines from the acceptance gate, echoed after the run summary so
# they survive pytest's output capture (see test_acceptance._report).
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def circle_loop(radius=1.0, K=1, dim=2):
    """Fundamental-harmonic circle: u(t) = radius (cos 2pi t, sin 2pi t, 0...).

    |u(t)| is identically radius, which many closed-form oracles rely on.
    """
    nk = (K + 1) // 2
    a = np.zeros((nk, dim))
    b = np.zeros((nk, dim))
    a[0, 0] = radius
    b[0, 1] = radius
    return AntiperiodicLoop(dim=dim, K=K, a=a, b=b)


def fd_gradient(fun, loop, rel_step=1e-6):
    """Central finite differences of fun(loop) in every coefficient.

    Step per coefficient: rel_step * (1 + |coeff|), the convention the
    gradient tests pin.  Returns an array shaped like loop.packed().
    """
    base = loop.packed()
    out = np.zeros_like(base)
    flat = base.ravel()
    grad = out.ravel()
    for i in range(flat.size):
        step = rel_step * (1.0 + abs(flat[i]))
        plus = flat.copy()
        plus[i] += step
        minus = flat.copy()
        minus[i] -= step
        lp = AntiperiodicLoop.from_packed(loop.K, loop.dim, plus.reshape(base.shape))
        lm = AntiperiodicLoop.from_packed(loop.K, loop.dim, minus.reshape(base.shape))
        grad[i] = (fun(lp) - fun(lm)) / (2.0 * step)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
