"""Closed-form critical friction coefficients, angles and azimuthal rates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import UndefinedValue
from .rod_model import RodParams

THETA_L = math.asin(1.0 / math.sqrt(3.0))
PSI_L = math.sqrt(1.5 * math.sqrt(3.0))
TOL_BND = 1e-9


def mu_P(alpha: float) -> float:
    return 2.0 * math.sqrt(alpha + 1.0) / alpha


def mu_C(alpha: float) -> float:
    return 2.0 / math.sqrt(3.0) * mu_P(alpha)


def mu_L(alpha: float) -> float:
    return (2.0 * alpha + 3.0) / (alpha * math.sqrt(2.0))


def theta_P(alpha: float) -> float:
    return math.atan(math.sqrt(1.0 + alpha))


def Psi_P(alpha: float) -> float:
    return ((2.0 + alpha) ** 3 / (1.0 + alpha)) ** 0.25


def tangency_rate(theta: float) -> float:
    """|Psi| at which b = 0 touches Theta = 0 at polar angle ``theta``."""
    return 1.0 / math.sqrt(math.cos(theta) ** 2 * math.sin(theta))


@dataclass(frozen=True)
class CriticalSet:
    mu_P: float
    mu_C: float
    mu_L: float
    theta_P: float
    theta_L: float
    Psi_L: float
    Psi_P: float
    theta_1: float | None = None
    theta_2: float | None = None
    phi_1: float | None = None
    phi_2: float | None = None
    Psi_1: float | None = None
    Psi_2: float | None = None

    @property
    def has_paradox(self) -> bool:
        return self.theta_1 is not None

    def to_dict(self) -> dict:
        order = ("mu_P", "mu_C", "mu_L", "theta_P", "theta_L", "theta_1", "theta_2",
                 "phi_1", "phi_2", "Psi_L", "Psi_1", "Psi_2", "Psi_P")
        return {k: getattr(self, k) for k in order if getattr(self, k) is not None}


def critical_set(params: RodParams) -> CriticalSet:
    a, mu = params.alpha, params.mu
    base = dict(
        mu_P=mu_P(a), mu_C=mu_C(a), mu_L=mu_L(a),
        theta_P=theta_P(a), theta_L=THETA_L, Psi_L=PSI_L, Psi_P=Psi_P(a),
    )
    roots = paradox_boundary_theta(-math.pi / 2, params)
    if roots is None:
        return CriticalSet(**base)
    th1, th2 = roots
    # phi range of the paradox region is widest at theta_P
    phis = paradox_boundary_phi(base["theta_P"], params)
    ph1, ph2 = phis if phis is not None else (-math.pi / 2, -math.pi / 2)
    return CriticalSet(
        **base, theta_1=th1, theta_2=th2, phi_1=ph1, phi_2=ph2,
        Psi_1=tangency_rate(th1), Psi_2=tangency_rate(th2),
    )


def mu_P_star(phi: float, alpha: float) -> float:
    """Smallest mu for which p < 0 is possible at relative slip angle ``phi``."""
    s = abs(math.sin(phi))
    if s == 0.0:
        raise UndefinedValue(f"no paradox possible at phi = {phi}")
    return mu_P(alpha) / s


def paradox_boundary_theta(phi: float, params: RodParams):
    """Both roots in theta of p(theta, phi) = 0, or None."""
    a, mu = params.alpha, params.mu
    half = 0.5 * mu * a * math.sin(phi)
    disc = half * half - (a + 1.0)
    # the double root at mu = mu_P can round either way
    if abs(disc) <= 1e-14 * (a + 1.0):
        disc = 0.0
    if disc < 0.0:
        return None
    r = math.sqrt(disc)
    return math.atan(-half - r), math.atan(-half + r)


def paradox_boundary_phi(theta: float, params: RodParams):
    """Both roots in phi of p(theta, phi) = 0, or None."""
    a, mu = params.alpha, params.mu
    if mu == 0.0:
        return None
    arg = (1.0 + a * math.cos(theta) ** 2) / (a * mu * math.sin(theta) * math.cos(theta))
    if arg > 1.0:
        # forgive rounding at the tangency point
        if arg > 1.0 + 1e-12:
            return None
        arg = 1.0
    d = math.acos(arg)
    return -math.pi / 2 - d, -math.pi / 2 + d


@dataclass(frozen=True)
class KinematicCase:
    """Case 1..7 with its mechanism; ``case_id`` is None on a boundary."""

    case_id: int | None
    mechanism: str
    boundaries: tuple = field(default_factory=tuple)

    @property
    def on_boundary(self) -> bool:
        return bool(self.boundaries)

    def label(self) -> str:
        if self.case_id is not None:
            return f"case {self.case_id} (mechanism {self.mechanism})"
        return f"boundary {'&'.join(self.boundaries)} (mechanism {self.mechanism})"


def _near(x, y, tol):
    return abs(x - y) <= tol * max(1.0, abs(y))


def classify_case(params: RodParams, Psi: float, tol_bnd: float = TOL_BND) -> KinematicCase:
    a, mu = params.alpha, params.mu
    w = abs(Psi)
    mP, mL = mu_P(a), mu_L(a)
    tags = []
    if _near(mu, mP, tol_bnd):
        tags.append("mu=mu_P")
        mech = "I|II"
    elif mu < mP:
        mech = "I"
    elif _near(mu, mL, tol_bnd):
        tags.append("mu=mu_L")
        mech = "II|III"
    else:
        mech = "II" if mu < mL else "III"

    if _near(w, PSI_L, tol_bnd):
        tags.append("Psi=Psi_L")
    if mech == "I":
        if tags:
            return KinematicCase(None, mech, tuple(tags))
        return KinematicCase(1 if w < PSI_L else 2, mech)

    cs = critical_set(params)
    if cs.Psi_1 is not None:
        # at mu = mu_L, Psi_1 = Psi_L and both tags are reported
        if _near(w, cs.Psi_1, tol_bnd):
            tags.append("Psi=Psi_1")
        if _near(w, cs.Psi_2, tol_bnd):
            tags.append("Psi=Psi_2")
    if tags:
        return KinematicCase(None, mech, tuple(tags))
    if w < PSI_L:
        cid = 3
    elif w < cs.Psi_1:
        cid = 4 if mech == "II" else 5
    elif w < cs.Psi_2:
        cid = 6
    else:
        cid = 7
    return KinematicCase(cid, mech)

