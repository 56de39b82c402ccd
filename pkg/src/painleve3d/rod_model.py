"""Scaled equations of motion for a slender rod slipping on a rough plane.

Lengths are scaled by the tip-to-centre distance ``l``, forces by ``m g`` and
time by ``1/omega`` with ``omega**2 = g / l``.  Two parameters remain: the
inertia ratio ``alpha = m l**2 / I0`` (3 for a uniform rod) and the Coulomb
coefficient ``mu``.

The desingularised vector field uses the time ``s`` with ``dt = eta * p * ds``
and acts on ``(eta, phi, psi, Psi, theta, Theta)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .errors import DegenerateContact, DomainError, SlipSpeedZero

TOL_P = 1e-9
TOL_ETA = 1e-9

STATE_KEYS = ("x", "y", "z", "w", "psi", "Psi", "theta", "Theta", "phi", "eta")
# ordering of the desingularised system
DESING_KEYS = ("eta", "phi", "psi", "Psi", "theta", "Theta")


@dataclass(frozen=True)
class RodParams:
    alpha: float = 3.0
    mu: float = 1.4

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.mu)):
            raise DomainError("alpha and mu must be finite")
        if self.alpha <= 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.mu < 0:
            raise DomainError(f"mu must be non-negative, got {self.mu}")


@dataclass(frozen=True)
class ScaledState:
    """Scaled rod state.

    While slipping ``z = w = 0``.  The same container is used for the time
    derivatives returned by :func:`slipping_rhs`.
    """

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    w: float = 0.0
    psi: float = 0.0
    Psi: float = 0.0
    theta: float = 0.5
    Theta: float = 0.0
    phi: float = -math.pi / 2
    eta: float = 1.0

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict) -> "ScaledState":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown state keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    def desingularized_vector(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in DESING_KEYS], dtype=float)

    def with_desingularized(self, vec) -> "ScaledState":
        return replace(self, **{k: float(v) for k, v in zip(DESING_KEYS, vec)})

    def check(self) -> "ScaledState":
        if not 0.0 < self.theta < math.pi / 2:
            raise DomainError(f"theta must lie in (0, pi/2), got {self.theta}")
        if self.eta < 0:
            raise DomainError(f"eta must be non-negative, got {self.eta}")
        return self


def wrap_angle(a):
    """Wrap an angle into [-pi, pi)."""
    return (np.asarray(a) + np.pi) % (2 * np.pi) - np.pi


def free_accel_b(Psi, Theta, theta):
    """Vertical free acceleration of the tip, (Psi^2 cos^2 + Theta^2) sin - 1."""
    return (Psi**2 * np.cos(theta) ** 2 + Theta**2) * np.sin(theta) - 1.0


def contact_coeff_p(theta, phi, params: RodParams):
    """Coefficient of F_z in the vertical tip acceleration."""
    a, mu = params.alpha, params.mu
    return 1.0 + a + a * np.sin(theta) * (mu * np.cos(theta) * np.sin(phi) - np.sin(theta))


def b_gradient(Psi, Theta, theta):
    """(db/dPsi, db/dTheta, db/dtheta)."""
    s, c = np.sin(theta), np.cos(theta)
    return (
        2.0 * Psi * c**2 * s,
        2.0 * Theta * s,
        (Psi**2 * c**2 + Theta**2) * c - 2.0 * Psi**2 * c * s**2,
    )


def p_gradient(theta, phi, params: RodParams):
    """(dp/dtheta, dp/dphi)."""
    a, mu = params.alpha, params.mu
    return (
        a * (mu * np.cos(2 * theta) * np.sin(phi) - np.sin(2 * theta)),
        a * mu * np.sin(theta) * np.cos(theta) * np.cos(phi),
    )


@dataclass(frozen=True)
class Coefficients:
    Q1: float
    Q2: float
    A1: float
    A2: float
    d1: float
    d2: float
    c1: float
    c2: float

    def as_tuple(self):
        return (self.Q1, self.Q2, self.A1, self.A2, self.d1, self.d2, self.c1, self.c2)


def _coeffs(Psi, Theta, theta, phi, params: RodParams) -> Coefficients:
    a, mu = params.alpha, params.mu
    s, c = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    kin = Psi**2 * c**2 + Theta**2
    return Coefficients(
        Q1=a * c * sp * (mu * c * sp - s) - (1 + a) * mu,
        Q2=a * c * cp * (mu * c * sp - s),
        A1=kin * c * sp,
        A2=kin * c * cp,
        d1=-a * mu * cp / c,
        d2=-a * mu * s * sp - a * c,
        c1=2.0 * Psi * Theta * math.tan(theta),
        c2=-(Psi**2) * s * c,
    )


def slip_coeffs(state: ScaledState, params: RodParams) -> Coefficients:
    """Q1, Q2, A1, A2, d1, d2, c1, c2 at ``state``."""
    state.check()
    return _coeffs(state.Psi, state.Theta, state.theta, state.phi, params)


def normal_force(state: ScaledState, params: RodParams, tol_p: float = TOL_P) -> float:
    """Normal force F_z = -b/p that keeps the tip on the plane."""
    state.check()
    p = contact_coeff_p(state.theta, state.phi, params)
    if abs(p) < tol_p:
        raise DegenerateContact(f"|p| = {abs(p):.3e} below tolerance {tol_p:.1e}")
    return float(-free_accel_b(state.Psi, state.Theta, state.theta) / p)


def slipping_rhs(
    state: ScaledState,
    params: RodParams,
    tol_p: float = TOL_P,
    tol_eta: float = TOL_ETA,
) -> ScaledState:
    """Time derivatives of every state component while slipping (z = w = 0)."""
    fz = normal_force(state, params, tol_p)
    if state.eta < tol_eta:
        raise SlipSpeedZero(f"eta = {state.eta:.3e} below tolerance {tol_eta:.1e}")
    k = slip_coeffs(state, params)
    eta = state.eta
    heading = state.psi + state.phi
    return ScaledState(
        x=eta * math.cos(heading),
        y=eta * math.sin(heading),
        z=0.0,
        w=0.0,
        psi=state.Psi,
        Psi=k.d1 * fz + k.c1,
        theta=state.Theta,
        Theta=k.d2 * fz + k.c2,
        phi=(k.Q2 * fz + k.A2 - eta * state.Psi) / eta,
        eta=k.Q1 * fz + k.A1,
    )


def desingularized_field(x, params: RodParams) -> np.ndarray:
    """Right-hand side f of x' = f(x) for x = (eta, phi, psi, Psi, theta, Theta)."""
    eta, phi, _psi, Psi, theta, Theta = x
    k = _coeffs(Psi, Theta, theta, phi, params)
    b = free_accel_b(Psi, Theta, theta)
    p = contact_coeff_p(theta, phi, params)
    return np.array(
        [
            eta * (-k.Q1 * b + k.A1 * p),
            -k.Q2 * b + (k.A2 - eta * Psi) * p,
            eta * p * Psi,
            eta * (-k.d1 * b + k.c1 * p),
            eta * p * Theta,
            eta * (-k.d2 * b + k.c2 * p),
        ]
    )


def desingularized_rhs(state: ScaledState, params: RodParams) -> np.ndarray:
    """Desingularised field at ``state``, ordered as ``DESING_KEYS``.

    Total on the domain: p = 0 and eta = 0 are regular points here.
    """
    return desingularized_field(state.desingularized_vector(), params)


def contact_coeff_rate(state: ScaledState, params: RodParams) -> float:
    """dp/ds along the desingularised flow.

    On p = 0 this reduces to -Q2 p_phi b = (1 + alpha) alpha mu cos^2(theta)
    cos^2(phi) b, so its sign is the sign of b.
    """
    f = desingularized_rhs(state, params)
    p_th, p_ph = p_gradient(state.theta, state.phi, params)
    return float(p_ph * f[1] + p_th * f[4])
