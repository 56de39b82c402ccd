"""Independent Newton-Euler model of the slipping rod in dimensional units.

Used as a reference for the closed-form scaled equations.  The rod is a
slender body with axial unit vector ``n`` (centre of mass to tip).  Its
rotational dynamics reduce to ``I0 * n x n'' = l * n x F``; projected onto the
tangent vectors ``dn/dpsi`` and ``dn/dtheta`` this yields two linear equations
for the angular accelerations.  The normal force is fixed by requiring the
tip to stay on the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class DimensionalRod:
    m: float = 1.0
    l: float = 1.0
    g: float = 9.81
    I0: float = 1.0 / 3.0

    def __post_init__(self):
        for name in ("m", "l", "g", "I0"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    @property
    def omega(self) -> float:
        return math.sqrt(self.g / self.l)

    @property
    def alpha(self) -> float:
        return self.m * self.l**2 / self.I0


def _frame(psi, theta):
    s, c = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(psi), math.cos(psi)
    n = np.array([c * sp, -c * cp, -s])
    n_psi = np.array([c * cp, c * sp, 0.0])
    n_th = np.array([-s * sp, s * cp, -c])
    n_pp = np.array([-c * sp, c * cp, 0.0])
    n_pt = np.array([-s * cp, -s * sp, 0.0])
    n_tt = np.array([-c * sp, c * cp, s])
    return n, n_psi, n_th, n_pp, n_pt, n_tt


def tip_response(rod: DimensionalRod, mu, psi, psi_dot, theta, theta_dot, slip_angle, Fz):
    """Tip acceleration and angular accelerations for a given normal force.

    ``slip_angle`` is the direction of the tip slip velocity in the plane.
    Returns ``(tip_accel, psi_ddot, theta_ddot)``.
    """
    n, n_psi, n_th, n_pp, n_pt, n_tt = _frame(psi, theta)
    F = Fz * np.array([-mu * math.cos(slip_angle), -mu * math.sin(slip_angle), 1.0])
    quad = n_pp * psi_dot**2 + 2.0 * n_pt * psi_dot * theta_dot + n_tt * theta_dot**2
    k = rod.l / rod.I0
    # n_psi and n_th are orthogonal, so the projected system is diagonal
    psi_ddot = (k * n_psi @ F - n_psi @ quad) / (n_psi @ n_psi)
    theta_ddot = (k * n_th @ F - n_th @ quad) / (n_th @ n_th)
    n_ddot = n_psi * psi_ddot + n_th * theta_ddot + quad
    com_accel = F / rod.m - np.array([0.0, 0.0, rod.g])
    return com_accel + rod.l * n_ddot, psi_ddot, theta_ddot


def dimensional_rates(rod: DimensionalRod, mu, u, v, psi, psi_dot, theta, theta_dot, Fz=None):
    """Rates for a tip slipping with velocity (u, v) on the plane.

    Returns a dict with the normal force and the accelerations
    ``u_dot, v_dot, psi_ddot, theta_ddot``.  By default Fz keeps the tip on
    the plane; passing ``Fz`` evaluates the rates at that force instead.
    """
    slip_angle = math.atan2(v, u)
    a0, _, _ = tip_response(rod, mu, psi, psi_dot, theta, theta_dot, slip_angle, 0.0)
    a1, _, _ = tip_response(rod, mu, psi, psi_dot, theta, theta_dot, slip_angle, 1.0)
    # tip vertical acceleration is affine in Fz
    slope = a1[2] - a0[2]
    if Fz is None:
        Fz = -a0[2] / slope
    acc, psi_ddot, theta_ddot = tip_response(rod, mu, psi, psi_dot, theta, theta_dot, slip_angle, Fz)
    return {
        "Fz": Fz,
        "u_dot": acc[0],
        "v_dot": acc[1],
        "z_ddot": acc[2],
        "psi_ddot": psi_ddot,
        "theta_ddot": theta_ddot,
        "contact_slope": slope,
        "free_accel": a0[2],
    }


def oracle_scaled_rates(rod: DimensionalRod, mu, eta, phi, psi, Psi, theta, Theta, Fz=None):
    """Scaled rates computed through the dimensional model.

    Input is a scaled state; it is converted to dimensional units, advanced
    through :func:`dimensional_rates` and converted back.  Returns a dict with
    keys ``eta, phi, Psi, Theta, Fz, p, b`` holding the scaled time
    derivatives, the scaled normal force, the scaled contact coefficient and
    the scaled free tip acceleration.  ``Fz`` (scaled) overrides the
    contact force when given.
    """
    w, lw = rod.omega, rod.l * rod.omega
    heading = psi + phi
    u = eta * lw * math.cos(heading)
    v = eta * lw * math.sin(heading)
    Fz_dim = None if Fz is None else Fz * rod.m * rod.g
    r = dimensional_rates(rod, mu, u, v, psi, Psi * w, theta, Theta * w, Fz_dim)
    speed2 = u * u + v * v
    eta_dot = (u * r["u_dot"] + v * r["v_dot"]) / math.sqrt(speed2)
    slip_angle_dot = (u * r["v_dot"] - v * r["u_dot"]) / speed2
    return {
        "eta": eta_dot / rod.g,
        "phi": (slip_angle_dot - Psi * w) / w,
        "Psi": r["psi_ddot"] / w**2,
        "Theta": r["theta_ddot"] / w**2,
        "Fz": r["Fz"] / (rod.m * rod.g),
        "p": r["contact_slope"] * rod.m,
        "b": r["free_accel"] / rod.g,
    }
