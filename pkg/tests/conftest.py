import math

import numpy as np
import pytest

from painleve3d.gb import _make_point, loop_point
from painleve3d.rod_model import RodParams

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rod():
    return RodParams(alpha=3.0, mu=1.4)


def random_gb_points(rng, n, Theta_sign, alpha=3.0, mu_range=None, eta_range=(0.1, 10.0)):
    """(params, point, eta) triples drawn on the GB manifold."""
    from painleve3d.critical import mu_P

    lo = mu_P(alpha) * 1.0001
    mu_range = mu_range or (lo, 8.0)
    out = []
    while len(out) < n:
        params = RodParams(alpha, rng.uniform(*mu_range))
        tau = rng.uniform(0, 2 * math.pi)
        th, _, _ = loop_point(tau, params)
        Psi = rng.uniform(-1, 1) / math.sqrt(math.cos(th) ** 2 * math.sin(th))
        q = _make_point(tau, params, Psi, Theta_sign)
        if q is None or abs(q.Theta) < 1e-6:
            continue
        out.append((params, q, rng.uniform(*eta_range)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
