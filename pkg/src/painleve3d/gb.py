"""Tracing the set {b = 0, p = 0} at fixed azimuthal rate.

The paradox boundary p = 0 is a closed loop in (theta, phi).  Writing
``tan(theta) = sqrt(1 + alpha) * exp(L)`` and ``a = phi + pi/2`` it becomes
``cosh(L) = (mu / mu_P) * cos(a)``, a convex oval around the origin.  Points
are found along rays from the origin, which stays regular at the phi
extremes where a phi-parametrisation has a vertical tangent.  Theta then
follows from b = 0: ``Theta**2 = 1/sin(theta) - Psi**2 cos(theta)**2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .critical import mu_P, paradox_boundary_theta
from .errors import DomainError
from .rod_model import RodParams, contact_coeff_p, free_accel_b

TOL_ON = 1e-10


@dataclass(frozen=True)
class GBPoint:
    theta: float
    phi: float
    Theta: float
    Psi: float
    branch: str  # "-" for the smaller theta root of p = 0, "+" for the larger
    loop_angle: float = float("nan")

    def residual(self, params: RodParams) -> float:
        return max(
            abs(float(free_accel_b(self.Psi, self.Theta, self.theta))),
            abs(float(contact_coeff_p(self.theta, self.phi, params))),
        )


@dataclass
class GBCurve:
    points: list
    topology: str  # Closed | Arc | TwoArcs | Empty
    Theta_sign: int
    Psi: float
    segments: list = field(default_factory=list)  # index ranges of connected pieces

    def arrays(self):
        if not self.points:
            return {k: np.empty(0) for k in ("theta", "phi", "Theta")}
        return {k: np.array([getattr(q, k) for q in self.points]) for k in ("theta", "phi", "Theta")}

    def summary(self) -> dict:
        arr = self.arrays()
        ext = {}
        if self.points:
            for k in ("theta", "phi", "Theta"):
                ext[k] = [float(arr[k].min()), float(arr[k].max())]
        return {"topology": self.topology, "n_points": len(self.points),
                "n_segments": len(self.segments), "Psi": self.Psi,
                "Theta_sign": self.Theta_sign, "extremes": ext}

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["phi", "theta", "Theta", "Psi", "branch"])
        for q in self.points:
            w.writerow([f"{q.phi:.17g}", f"{q.theta:.17g}", f"{q.Theta:.17g}", f"{q.Psi:.17g}", q.branch])


def _kappa(params):
    return params.mu / mu_P(params.alpha)


def loop_point(tau: float, params: RodParams):
    """(theta, phi, L) where the ray at angle ``tau`` meets p = 0.

    Requires mu > mu_P.
    """
    kappa = _kappa(params)
    if kappa <= 1.0:
        raise DomainError("no paradox boundary for mu <= mu_P")
    c, s = math.cos(tau), math.sin(tau)
    lmax = math.acosh(kappa) + 1.0

    def g(r):
        return math.cosh(r * c) - kappa * math.cos(r * s)

    limits = []
    if abs(s) > 1e-15:
        limits.append(0.5 * math.pi / abs(s))
    if abs(c) > 1e-15:
        limits.append(lmax / abs(c))
    r = brentq(g, 0.0, min(limits), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    L, a = r * c, r * s
    theta = math.atan(math.sqrt(1.0 + params.alpha) * math.exp(L))
    return theta, a - 0.5 * math.pi, L


def _theta_sq(theta, Psi):
    return 1.0 / math.sin(theta) - Psi * Psi * math.cos(theta) ** 2


def _make_point(tau, params, Psi, Theta_sign, clamp=False):
    theta, phi, L = loop_point(tau, params)
    t2 = _theta_sq(theta, Psi)
    if t2 < 0.0:
        if not clamp:
            return None
        t2 = 0.0
    return GBPoint(theta, phi, Theta_sign * math.sqrt(t2), Psi, "-" if L < 0 else "+", tau)


def _loop_taus(params, n):
    """Loop angles roughly equispaced in (theta, phi) arclength.

    The four axis crossings (theta and phi extremes) are always included.
    """
    dense = np.linspace(0.0, 2 * math.pi, 8 * n + 1)
    pts = np.array([loop_point(t, params)[:2] for t in dense])
    seg = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    out = []
    for k in range(4):
        lo, hi = k * 2 * n, (k + 1) * 2 * n
        share = max(2, round(n * (arc[hi] - arc[lo]) / arc[-1]))
        target = np.linspace(arc[lo], arc[hi], share + 1)[:-1]
        out.append(np.interp(target, arc[lo:hi + 1], dense[lo:hi + 1]))
    return np.concatenate(out)


def trace_gb(params: RodParams, Psi: float, Theta_sign: int = 1, n_points: int = 400) -> GBCurve:
    """Sample the GB manifold at fixed ``Psi`` on one sheet of Theta's sign.

    Where Theta**2 changes sign along the loop the exact endpoint (Theta = 0)
    is located and inserted, so arcs end on the Theta = 0 plane.
    """
    if Theta_sign not in (1, -1):
        raise ValueError("Theta_sign must be +1 or -1")
    if _kappa(params) <= 1.0:
        return GBCurve([], "Empty", Theta_sign, Psi)
    taus = _loop_taus(params, n_points)
    h = np.array([_theta_sq(loop_point(t, params)[0], Psi) for t in taus])
    valid = h >= 0.0
    if not valid.any():
        return GBCurve([], "Empty", Theta_sign, Psi)
    if valid.all():
        pts = [_make_point(t, params, Psi, Theta_sign) for t in taus]
        return GBCurve(pts, "Closed", Theta_sign, Psi, [(0, len(pts))])

    def hfun(t):
        return _theta_sq(loop_point(t, params)[0], Psi)

    # rotate so the sequence starts at the beginning of a valid run
    m = len(taus)
    start = next(i for i in range(m) if valid[i] and not valid[i - 1])
    order = [(start + k) % m for k in range(m)]
    pts, segments, cur = [], [], []
    for j, i in enumerate(order):
        prev = order[j - 1]
        if valid[i] and not valid[prev]:
            t0, t1 = taus[prev], taus[i]
            if t1 < t0:
                t1 += 2 * math.pi
            te = brentq(hfun, t0, t1, xtol=1e-15)
            cur = [_make_point(te % (2 * math.pi), params, Psi, Theta_sign, clamp=True)]
        if valid[i]:
            cur.append(_make_point(taus[i], params, Psi, Theta_sign))
            nxt = order[(j + 1) % m]
            if not valid[nxt]:
                t0, t1 = taus[i], taus[nxt]
                if t1 < t0:
                    t1 += 2 * math.pi
                te = brentq(hfun, t0, t1, xtol=1e-15)
                cur.append(_make_point(te % (2 * math.pi), params, Psi, Theta_sign, clamp=True))
                segments.append((len(pts), len(pts) + len(cur)))
                pts.extend(cur)
                cur = []
    topology = {1: "Arc", 2: "TwoArcs"}.get(len(segments), f"Arcs{len(segments)}")
    return GBCurve(pts, topology, Theta_sign, Psi, segments)


def gb_point_at(params: RodParams, Psi: float, phi: float, branch: str, Theta_sign: int = 1):
    """The GB point above relative slip angle ``phi`` on root ``branch``, or None."""
    if not -math.pi < phi < 0.0:
        return None
    roots = paradox_boundary_theta(phi, params)
    if roots is None:
        return None
    theta = roots[0] if branch == "-" else roots[1]
    if not 0.0 < theta < 0.5 * math.pi:
        return None
    t2 = _theta_sq(theta, Psi)
    if t2 < 0.0:
        return None
    return GBPoint(theta, phi, Theta_sign * math.sqrt(t2), Psi, branch)
