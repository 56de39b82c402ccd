"""Contact-mode classification and grid sampling of the b = 0 and p = 0 surfaces."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .critical import PSI_L
from .errors import DomainError, GridTooLarge
from .rod_model import RodParams, ScaledState, contact_coeff_p, free_accel_b

TOL_BND = 1e-9
MAX_CELLS = 10_000_000


class Mode(enum.IntEnum):
    BOUNDARY = 0
    SLIPPING = 1
    LIFTOFF = 2
    INCONSISTENT = 3
    INDETERMINATE = 4


MODE_CODES = {
    Mode.BOUNDARY: "BND",
    Mode.SLIPPING: "SLIP",
    Mode.LIFTOFF: "LIFT",
    Mode.INCONSISTENT: "INCON",
    Mode.INDETERMINATE: "INDET",
}


@dataclass(frozen=True)
class ContactMode:
    mode: Mode
    sign_b: int
    sign_p: int

    @property
    def code(self) -> str:
        return MODE_CODES[self.mode]


def _sign(x, tol):
    return np.where(np.abs(x) < tol, 0, np.sign(x)).astype(np.int8)


def mode_labels(b, p, tol_bnd: float = TOL_BND) -> np.ndarray:
    """Vectorised sign table; zero signs map to ``Mode.BOUNDARY``."""
    sb, sp = _sign(np.asarray(b, float), tol_bnd), _sign(np.asarray(p, float), tol_bnd)
    out = np.full(sb.shape, Mode.BOUNDARY, dtype=np.int8)
    out[(sb < 0) & (sp > 0)] = Mode.SLIPPING
    out[(sb > 0) & (sp > 0)] = Mode.LIFTOFF
    out[(sb < 0) & (sp < 0)] = Mode.INCONSISTENT
    out[(sb > 0) & (sp < 0)] = Mode.INDETERMINATE
    return out


def mode_from_values(b: float, p: float, tol_bnd: float = TOL_BND) -> ContactMode:
    sb, sp = int(_sign(b, tol_bnd)), int(_sign(p, tol_bnd))
    return ContactMode(Mode(int(mode_labels(b, p, tol_bnd))), sb, sp)


def classify_mode(state: ScaledState, params: RodParams, tol_bnd: float = TOL_BND) -> ContactMode:
    if state.z != 0.0 or state.w != 0.0:
        raise DomainError("mode classification requires the tip on the plane (z = w = 0)")
    state.check()
    b = free_accel_b(state.Psi, state.Theta, state.theta)
    p = contact_coeff_p(state.theta, state.phi, params)
    return mode_from_values(float(b), float(p), tol_bnd)


@dataclass(frozen=True)
class GridSpec:
    theta: tuple = (1e-3, math.pi / 2 - 1e-3)
    phi: tuple = (-math.pi + 1e-3, 0.0)
    Theta: tuple = (0.0, 2.0)
    n_theta: int = 201
    n_phi: int = 201
    n_Theta: int = 201
    max_cells: int = MAX_CELLS

    def validate(self):
        lo, hi = self.theta
        if not (0 < lo < hi < math.pi / 2):
            raise DomainError("theta bounds must lie in (0, pi/2) and ascend")
        lo, hi = self.phi
        if not (-math.pi < lo < hi <= 0):
            raise DomainError("phi bounds must lie in (-pi, 0] and ascend")
        lo, hi = self.Theta
        if not (0 <= lo < hi):
            raise DomainError("Theta bounds must be non-negative and ascend")
        if min(self.n_theta, self.n_phi, self.n_Theta) < 2:
            raise DomainError("each axis needs at least two samples")
        cells = self.n_theta * self.n_phi * self.n_Theta
        if cells > self.max_cells:
            raise GridTooLarge(f"{cells} cells exceeds cap {self.max_cells}")

    def axes(self):
        return (
            np.linspace(*self.theta, self.n_theta),
            np.linspace(*self.phi, self.n_phi),
            np.linspace(*self.Theta, self.n_Theta),
        )


@dataclass
class SurfaceGrid:
    theta: np.ndarray
    phi: np.ndarray
    Theta: np.ndarray
    Psi: float
    b: np.ndarray
    p: np.ndarray
    labels: np.ndarray

    def count(self, mode: Mode) -> int:
        return int(np.count_nonzero(self.labels == mode))

    def fraction(self, mode: Mode) -> float:
        return self.count(mode) / self.labels.size

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "phi", "Theta", "Psi", "b", "p", "mode"])
        codes = np.array([MODE_CODES[Mode(i)] for i in range(5)])
        TH, PH, TD = np.meshgrid(self.theta, self.phi, self.Theta, indexing="ij")
        for row in zip(TH.ravel(), PH.ravel(), TD.ravel(), self.b.ravel(),
                       self.p.ravel(), codes[self.labels.ravel()]):
            w.writerow([f"{row[0]:.17g}", f"{row[1]:.17g}", f"{row[2]:.17g}",
                        f"{self.Psi:.17g}", f"{row[3]:.17g}", f"{row[4]:.17g}", row[5]])


def sample_surfaces(params: RodParams, Psi: float, spec: GridSpec | None = None,
                    tol_bnd: float = TOL_BND) -> SurfaceGrid:
    """Evaluate b, p and the contact mode on a (theta, phi, Theta) grid.

    Arrays are indexed ``[i_theta, i_phi, i_Theta]``.
    """
    spec = spec or GridSpec()
    spec.validate()
    th, ph, td = spec.axes()
    # b has no phi dependence and p no Theta dependence
    b2 = free_accel_b(Psi, td[None, :], th[:, None])
    p2 = contact_coeff_p(th[:, None], ph[None, :], params)
    shape = (th.size, ph.size, td.size)
    b = np.broadcast_to(b2[:, None, :], shape)
    p = np.broadcast_to(p2[:, :, None], shape)
    return SurfaceGrid(th, ph, td, float(Psi), b, p, mode_labels(b, p, tol_bnd))


def liftoff_at_zero_Theta(params: RodParams, Psi: float):
    """Interval of theta where b(Psi, 0, theta) > 0, or None.

    With s = sin(theta) the condition is Psi^2 (s - s^3) > 1.  At |Psi| = Psi_L
    the interval shrinks to the single point arcsin(1/sqrt(3)).
    """
    w2 = Psi * Psi
    if abs(Psi) < PSI_L * (1 - 1e-12):
        return None
    roots = np.roots([w2, 0.0, -w2, 1.0])
    s = np.sort([r.real for r in roots if abs(r.imag) < 1e-7 and 0 < r.real < 1])
    if s.size == 0:
        return None
    return math.asin(s[0]), math.asin(s[-1])
