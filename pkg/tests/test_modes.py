import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from painleve3d.critical import PSI_L, THETA_L, critical_set
from painleve3d.errors import DomainError, GridTooLarge
from painleve3d.modes import (
    GridSpec,
    Mode,
    classify_mode,
    liftoff_at_zero_Theta,
    mode_from_values,
    mode_labels,
    sample_surfaces,
)
from painleve3d.rod_model import RodParams, ScaledState


@pytest.mark.parametrize("b,p,mode", [
    (-1.0, 2.0, Mode.SLIPPING), (0.5, 2.0, Mode.LIFTOFF), (-0.5, -0.1, Mode.INCONSISTENT),
    (0.5, -0.1, Mode.INDETERMINATE), (1e-12, 1.0, Mode.BOUNDARY), (-1.0, -1e-12, Mode.BOUNDARY),
])
def test_sign_table(b, p, mode):
    assert mode_from_values(b, p).mode == mode


@pytest.mark.parametrize("theta,phi,Theta,Psi,code", [
    (0.5, -math.pi / 2, 0.0, 0.0, "SLIP"),
    (1.1, -math.pi / 2, 0.0, 0.0, "INCON"),
    (1.1, -math.pi / 2, 2.0, 0.0, "INDET"),
    (0.6, -math.pi / 2, 0.0, 2.0, "LIFT"),
])
def test_classify_mode_examples(rod, theta, phi, Theta, Psi, code):
    s = ScaledState(theta=theta, phi=phi, Theta=Theta, Psi=Psi)
    assert classify_mode(s, rod).code == code


def test_classify_mode_requires_contact(rod):
    with pytest.raises(DomainError):
        classify_mode(ScaledState(z=0.1), rod)
    with pytest.raises(DomainError):
        classify_mode(ScaledState(theta=2.0), rod)


@settings(max_examples=200, deadline=None)
@given(theta=st.floats(0.01, 1.56), phi=st.floats(-3.14, 0.0),
       Theta=st.floats(-3, 3), Psi=st.floats(-4, 4))
def test_Theta_reflection_keeps_mode(theta, phi, Theta, Psi):
    rod = RodParams(3.0, 1.4)
    a = classify_mode(ScaledState(theta=theta, phi=phi, Theta=Theta, Psi=Psi), rod)
    b = classify_mode(ScaledState(theta=theta, phi=phi, Theta=-Theta, Psi=Psi), rod)
    c = classify_mode(ScaledState(theta=theta, phi=phi, Theta=Theta, Psi=-Psi), rod)
    assert a == b == c


def test_paradox_projection_inside_bounding_box(rod):
    cs = critical_set(rod)
    g = sample_surfaces(rod, 0.0)
    neg = g.p[:, :, 0] < 0
    TH, PH = np.meshgrid(g.theta, g.phi, indexing="ij")
    assert neg.any()
    assert TH[neg].min() >= cs.theta_1 and TH[neg].max() <= cs.theta_2
    assert PH[neg].min() >= cs.phi_1 and PH[neg].max() <= cs.phi_2


def test_no_paradox_below_mu_P():
    for Psi in (0.0, 2.0, 5.0):
        g = sample_surfaces(RodParams(3.0, 1.0), Psi)
        assert not (g.p < 0).any()
        assert g.count(Mode.INCONSISTENT) == g.count(Mode.INDETERMINATE) == 0


def test_inconsistent_region_vanishes_at_large_Psi(rod):
    assert sample_surfaces(rod, 0.0).count(Mode.INCONSISTENT) > 0
    assert sample_surfaces(rod, 5.0).count(Mode.INCONSISTENT) == 0


def test_grid_labels_match_pointwise(rod):
    spec = GridSpec(n_theta=7, n_phi=5, n_Theta=4)
    g = sample_surfaces(rod, 1.3, spec)
    for i, j, k in [(0, 0, 0), (3, 2, 1), (6, 4, 3), (5, 1, 2)]:
        s = ScaledState(theta=g.theta[i], phi=g.phi[j], Theta=g.Theta[k], Psi=1.3)
        assert classify_mode(s, rod).mode == g.labels[i, j, k]
    assert sum(g.count(m) for m in Mode) == g.labels.size


def test_grid_cap_and_validation(rod):
    with pytest.raises(GridTooLarge):
        GridSpec(n_theta=1000, n_phi=1000, n_Theta=11).validate()
    with pytest.raises(DomainError):
        GridSpec(theta=(0.0, 1.0)).validate()
    with pytest.raises(DomainError):
        GridSpec(n_phi=1).validate()


def test_grid_csv(rod):
    g = sample_surfaces(rod, 0.0, GridSpec(n_theta=3, n_phi=2, n_Theta=2))
    buf = io.StringIO()
    g.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "theta,phi,Theta,Psi,b,p,mode"
    assert len(lines) == 1 + 12


def test_liftoff_interval(rod):
    assert liftoff_at_zero_Theta(rod, 1.0) is None
    lo, hi = liftoff_at_zero_Theta(rod, PSI_L)
    assert lo == pytest.approx(THETA_L, abs=1e-6) and hi == pytest.approx(THETA_L, abs=1e-6)
    lo, hi = liftoff_at_zero_Theta(rod, 3.0)
    s = np.sin(np.array([lo, hi]))
    assert np.allclose(9.0 * (s - s**3), 1.0, atol=1e-12)
    assert lo < THETA_L < hi


def test_mode_labels_vectorised():
    out = mode_labels(np.array([-1.0, 1.0, -1.0, 1.0, 0.0]), np.array([1.0, 1.0, -1.0, -1.0, 1.0]))
    assert out.tolist() == [1, 2, 3, 4, 0]
