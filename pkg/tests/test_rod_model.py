import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from painleve3d.errors import DegenerateContact, DomainError, SlipSpeedZero
from painleve3d.oracle import DimensionalRod, oracle_scaled_rates
from painleve3d.rod_model import (
    DESING_KEYS,
    RodParams,
    ScaledState,
    slip_coeffs,
    contact_coeff_p,
    contact_coeff_rate,
    desingularized_rhs,
    free_accel_b,
    normal_force,
    slipping_rhs,
    wrap_angle,
)

thetas = st.floats(0.05, math.pi / 2 - 0.05)
phis = st.floats(-math.pi, math.pi)
rates = st.floats(-4, 4)
etas = st.floats(0.05, 5)
alphas = st.floats(0.2, 10)
mus = st.floats(0, 6)


def random_state(rng):
    return ScaledState(
        psi=rng.uniform(-3, 3), Psi=rng.uniform(-4, 4), theta=rng.uniform(0.05, 1.52),
        Theta=rng.uniform(-3, 3), phi=rng.uniform(-math.pi, math.pi), eta=rng.uniform(0.1, 4),
    )


@pytest.mark.parametrize("alpha,mu", [(-1.0, 1.0), (0.0, 1.0), (3.0, -0.1), (math.nan, 1.0)])
def test_params_reject_invalid(alpha, mu):
    with pytest.raises(DomainError):
        RodParams(alpha, mu)


def test_state_roundtrip_and_unknown_key():
    s = ScaledState(theta=0.7, Theta=-0.3, phi=-2.0, eta=1.5, Psi=0.2)
    assert ScaledState.from_dict(s.to_dict()) == s
    with pytest.raises(DomainError):
        ScaledState.from_dict({"theta": 0.5, "omega": 1.0})


@pytest.mark.parametrize("theta", [0.0, -0.1, math.pi / 2, 2.0])
def test_theta_outside_open_interval_is_rejected(rod, theta):
    with pytest.raises(DomainError):
        normal_force(ScaledState(theta=theta), rod)


def test_b_and_p_at_rest_on_symmetry_plane(rod):
    # no rotation: b = -1; p from direct evaluation
    assert free_accel_b(0.0, 0.0, 0.5) == -1.0
    p = contact_coeff_p(0.5, -math.pi / 2, rod)
    expected = 4 + 3 * math.sin(0.5) * (-1.4 * math.cos(0.5) - math.sin(0.5))
    assert p == pytest.approx(expected, rel=1e-15)


def test_degenerate_contact_and_zero_slip(rod):
    th = 0.9701554159882795  # p(th, -pi/2) = 0 at mu = 1.4
    with pytest.raises(DegenerateContact):
        normal_force(ScaledState(theta=th, phi=-math.pi / 2), rod)
    with pytest.raises(SlipSpeedZero):
        slipping_rhs(ScaledState(theta=0.5, eta=0.0), rod)


def test_slip_coefficients_match_independent_oracle():
    # 1000 random states, several rods with non-unit dimensions
    rng = np.random.default_rng(1)
    worst = 0.0
    checked = 0
    while checked < 1000:
        m, l, g = rng.uniform(0.5, 3, 3)
        rod = DimensionalRod(m, l, g, rng.uniform(0.05, 2))
        params = RodParams(rod.alpha, rng.uniform(0, 5))
        s = random_state(rng)
        if abs(contact_coeff_p(s.theta, s.phi, params)) < 1e-3:
            continue
        r = slipping_rhs(s, params)
        o = oracle_scaled_rates(rod, params.mu, s.eta, s.phi, s.psi, s.Psi, s.theta, s.Theta)
        for k in ("eta", "phi", "Psi", "Theta"):
            worst = max(worst, abs(getattr(r, k) - o[k]) / max(1.0, abs(o[k])))
        worst = max(worst, abs(normal_force(s, params) - o["Fz"]) / max(1.0, abs(o["Fz"])))
        worst = max(worst, abs(contact_coeff_p(s.theta, s.phi, params) - o["p"]))
        checked += 1
    assert worst < 1e-10


def test_kinematic_rates(rod):
    s = ScaledState(psi=0.3, phi=-1.2, eta=1.7, Psi=0.4, Theta=-0.2, theta=0.6)
    r = slipping_rhs(s, rod)
    assert r.x == pytest.approx(1.7 * math.cos(0.3 - 1.2))
    assert r.y == pytest.approx(1.7 * math.sin(0.3 - 1.2))
    assert (r.psi, r.theta, r.z, r.w) == (0.4, -0.2, 0.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(theta=thetas, phi=phis, Psi=rates, Theta=rates, eta=etas, alpha=alphas, mu=mus)
def test_desingularised_field_is_time_rescaled_slipping_field(theta, phi, Psi, Theta, eta, alpha, mu):
    params = RodParams(alpha, mu)
    s = ScaledState(theta=theta, phi=phi, Psi=Psi, Theta=Theta, eta=eta)
    p = contact_coeff_p(theta, phi, params)
    if abs(p) < 1e-3:
        return
    r = slipping_rhs(s, params)
    f = desingularized_rhs(s, params)
    scaled = np.array([getattr(r, k) for k in DESING_KEYS]) * eta * p
    assert np.allclose(f, scaled, rtol=1e-10, atol=1e-10)


@settings(max_examples=200, deadline=None)
@given(alpha=alphas, mu=st.floats(0.5, 8), theta=thetas, Psi=rates, Theta=rates, eta=etas,
       side=st.sampled_from([-1, 1]))
def test_contact_rate_on_boundary_is_proportional_to_b(alpha, mu, theta, Psi, Theta, eta, side):
    params = RodParams(alpha, mu)
    c, s_ = math.cos(theta), math.sin(theta)
    arg = (1 + alpha * c * c) / (alpha * mu * s_ * c)
    if arg > 1:
        return
    phi = -math.pi / 2 + side * math.acos(arg)
    st_ = ScaledState(theta=theta, phi=phi, Psi=Psi, Theta=Theta, eta=eta)
    b = free_accel_b(Psi, Theta, theta)
    expected = (1 + alpha) * alpha * mu * c * c * math.cos(phi) ** 2 * b
    assert contact_coeff_rate(st_, params) == pytest.approx(expected, rel=1e-8, abs=1e-10)


def test_coefficients_container(rod):
    k = slip_coeffs(ScaledState(theta=0.7, phi=-1.0, Psi=0.5, Theta=0.3), rod)
    assert len(k.as_tuple()) == 8
    assert k.d2 == pytest.approx(-3 * 1.4 * math.sin(0.7) * math.sin(-1.0) - 3 * math.cos(0.7))


@pytest.mark.parametrize("a,expected", [(0.0, 0.0), (math.pi, -math.pi), (-math.pi - 0.1, math.pi - 0.1)])
def test_wrap_angle(a, expected):
    assert float(wrap_angle(a)) == pytest.approx(expected)
