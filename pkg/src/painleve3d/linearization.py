"""Linearisation of the desingularised flow about the GB manifold.

At a point with b = p = 0 the 6x6 Jacobian factors as ``J = A @ B`` where the
rows of ``B`` are the gradients of p and b.  The reduced 2x2 matrix
``K = B @ A`` drives (p, b) near the manifold and carries the only nonzero
eigenvalues of ``J``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .critical import mu_C, mu_P
from .errors import OffManifold, OffParadoxBoundary
from .gb import TOL_ON, GBPoint, _make_point, trace_gb
from .rod_model import (
    RodParams,
    _coeffs,
    b_gradient,
    contact_coeff_p,
    p_gradient,
)

TOL_EIG = 1e-10


class Stability(str, enum.Enum):
    STABLE_NODE = "StableNode"
    SADDLE = "Saddle"
    UNSTABLE_NODE = "UnstableNode"
    UNSTABLE_FOCUS = "UnstableFocus"
    STABLE_FOCUS = "StableFocus"
    NON_HYPERBOLIC = "NonHyperbolic"


@dataclass(frozen=True)
class KMatrix:
    K11: float
    K12: float
    K21: float
    K22: float
    at: GBPoint
    eta: float

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.K11, self.K12], [self.K21, self.K22]])

    @property
    def det(self) -> float:
        return self.K11 * self.K22 - self.K12 * self.K21

    @property
    def trace(self) -> float:
        return self.K11 + self.K22


def _entries(theta, phi, Psi, Theta, eta, params):
    a, mu = params.alpha, params.mu
    s, c, t = math.sin(theta), math.cos(theta), math.tan(theta)
    cp = math.cos(phi)
    m = a * mu * c * c * cp * cp
    twist = a * mu * s * c * cp
    return (
        m + eta * (Theta * (t - (1 + a) / t) - Psi * twist),
        (1 + a) * m,
        eta * Theta / t,
        eta * (2 * Psi * twist - 2 * Theta * t),
    )


def k_matrix(point: GBPoint, eta: float, params: RodParams, tol_on: float = TOL_ON) -> KMatrix:
    """Closed-form reduced Jacobian at a GB point."""
    res = point.residual(params)
    if not res < tol_on:
        raise OffManifold(f"point residual {res:.3e} exceeds {tol_on:.1e}")
    return KMatrix(*_entries(point.theta, point.phi, point.Psi, point.Theta, eta, params), point, eta)


def jacobian_factors(x, params: RodParams):
    """Factors (A, B) of the 6x6 Jacobian at x = (eta, phi, psi, Psi, theta, Theta).

    Only valid on b = p = 0, where terms multiplied by b or p drop out.
    """
    eta, phi, _psi, Psi, theta, Theta = x
    k = _coeffs(Psi, Theta, theta, phi, params)
    A = np.array([
        [eta * k.A1, -eta * k.Q1],
        [k.A2 - eta * Psi, -k.Q2],
        [eta * Psi, 0.0],
        [eta * k.c1, -eta * k.d1],
        [eta * Theta, 0.0],
        [eta * k.c2, -eta * k.d2],
    ])
    p_th, p_ph = p_gradient(theta, phi, params)
    b_Ps, b_Th, b_th = b_gradient(Psi, Theta, theta)
    B = np.array([
        [0.0, p_ph, 0.0, 0.0, p_th, 0.0],
        [0.0, 0.0, 0.0, b_Ps, b_th, b_Th],
    ])
    return A, B


def point_vector(point: GBPoint, eta: float, psi: float = 0.0) -> np.ndarray:
    return np.array([eta, point.phi, psi, point.Psi, point.theta, point.Theta])


def k_matrix_general(point: GBPoint, eta: float, params: RodParams) -> np.ndarray:
    """K as the product B @ A, without the closed-form simplification."""
    A, B = jacobian_factors(point_vector(point, eta), params)
    return B @ A


def matrix_product_eigen_reduce(A, B) -> np.ndarray:
    """Eigenvalues of A @ B from the small product B @ A, padded with zeros."""
    A, B = np.asarray(A, float), np.asarray(B, float)
    n, k = A.shape
    small = np.linalg.eigvals(B @ A).astype(complex)
    return np.concatenate([small, np.zeros(n - k, dtype=complex)])


@dataclass(frozen=True)
class EigenData:
    lambda_plus: complex
    lambda_minus: complex
    e_plus: np.ndarray | None
    e_minus: np.ndarray | None
    classification: Stability
    designated: np.ndarray | None = None  # separatrix direction, in (p, b)

    @property
    def is_complex(self) -> bool:
        return self.e_plus is None


def _eigvec(K, lam):
    (k11, k12), (k21, k22) = K
    v1 = np.array([k12, lam - k11])
    v2 = np.array([lam - k22, k21])
    v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
    nv = np.linalg.norm(v)
    if nv == 0.0:
        # K is a multiple of the identity; any direction works
        v, nv = np.array([0.0, 1.0]), 1.0
    v = v / nv
    if v[1] < 0 or (v[1] == 0 and v[0] < 0):
        v = -v
    return v


def eigen_classify(K, tol_eig: float = TOL_EIG) -> EigenData:
    """Eigenvalues, eigenvectors and stability type of a 2x2 matrix.

    Eigenvectors are unit vectors with non-negative b component.  The
    designated vector belongs to the algebraically smaller eigenvalue and is
    oriented towards p > 0, b < 0.
    """
    M = K.array if isinstance(K, KMatrix) else np.asarray(K, float)
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0.0:
        half = 0.5 * math.sqrt(-disc)
        lp, lm = complex(0.5 * tr, half), complex(0.5 * tr, -half)
        if abs(det) < tol_eig or abs(tr) < tol_eig:
            cls = Stability.NON_HYPERBOLIC
        else:
            cls = Stability.STABLE_FOCUS if tr < 0 else Stability.UNSTABLE_FOCUS
        return EigenData(lp, lm, None, None, cls)
    r = math.sqrt(disc)
    # avoid cancellation in the smaller root
    big = 0.5 * (tr + math.copysign(r, tr)) if tr != 0 else 0.5 * r
    other = det / big if big != 0 else -big
    lp, lm = max(big, other), min(big, other)
    if abs(det) < tol_eig:
        cls = Stability.NON_HYPERBOLIC
    elif det < 0:
        cls = Stability.SADDLE
    elif tr < 0:
        cls = Stability.STABLE_NODE
    else:
        cls = Stability.UNSTABLE_NODE
    ep, em = _eigvec(M, lp), _eigvec(M, lm)
    d = em.copy()
    if d[0] < 0 or (d[0] == 0 and d[1] > 0):
        d = -d
    return EigenData(complex(lp), complex(lm), ep, em, cls, d)


def two_d_eigen(theta: float, Theta: float, eta: float, params: RodParams):
    """Eigenpairs of K on the symmetry plane phi = -pi/2 with Psi = 0.

    Returns ``(lambda_1, lambda_2, e_1, e_2)`` with e_1 = (3 tan^2 - (1+alpha), 1)
    and e_2 = (0, 1).
    """
    a = params.alpha
    t = math.tan(theta)
    lam1 = eta * Theta * (t - (1 + a) / t)
    lam2 = -2.0 * eta * Theta * t
    return lam1, lam2, np.array([3 * t * t - (1 + a), 1.0]), np.array([0.0, 1.0])


@dataclass(frozen=True)
class QuarticCoeffs:
    theta: float
    phi: float
    eta: float
    A: float
    B: float
    Gamma: float
    Delta: float
    E: float
    M: float
    N: float
    C4: float
    C3: float
    C2: float
    C1: float
    C0: float

    @property
    def coeffs(self):
        return np.array([self.C4, self.C3, self.C2, self.C1, self.C0])

    def Theta_for(self, Psi: float) -> float:
        """Theta making det K vanish at azimuthal rate ``Psi``."""
        den = self.E - self.B * Psi
        num = (self.A + self.Delta * self.M) * Psi**2 + self.Gamma * Psi - self.Delta * self.N
        if den == 0.0:
            return math.nan
        return num / den

    def scaled_det(self, Psi: float, Theta: float) -> float:
        """det K * sin(theta) / (eta cos^5(theta))."""
        return (self.A * Psi**2 + self.B * Psi * Theta + self.Gamma * Psi
                - self.Delta * Theta**2 - self.E * Theta)


@dataclass(frozen=True)
class QuarticRoot:
    Psi: float
    Theta: float
    point: GBPoint


def _real_roots(coeffs, tol=1e-7):
    """Real roots of a real polynomial, repeated by multiplicity.

    A conjugate pair within ``tol`` (relative) of the real axis is a split
    double root and is reported twice.  The count therefore always has the
    parity of the degree.
    """
    c = np.trim_zeros(np.asarray(coeffs, float), "f")
    if c.size < 2:
        return np.empty(0)
    roots = np.roots(c)
    scale = np.maximum(1.0, np.abs(roots))
    n_upper = int(np.count_nonzero(roots.imag > tol * scale))
    nreal = c.size - 1 - 2 * n_upper
    real = roots[np.argsort(np.abs(roots.imag))[:nreal]].real
    d = np.polyder(c)
    out = []
    for r in real:
        for _ in range(4):
            dv = np.polyval(d, r)
            if dv == 0:
                break
            trial = r - np.polyval(c, r) / dv
            if abs(np.polyval(c, trial)) >= abs(np.polyval(c, r)):
                break
            r = trial
        out.append(r)
    return np.sort(np.array(out))


def _refine_root(q, Psi, Theta, iters=200):
    """Newton on (scaled det K, b) in (Psi, Theta).

    Converges linearly at the degenerate Theta = 0 double roots, where det K
    is quadratic in Theta, and quadratically elsewhere.
    """
    A, B, G, D, E, M, N = q.A, q.B, q.Gamma, q.Delta, q.E, q.M, q.N
    best = (Psi, Theta)
    best_res = math.inf
    for _ in range(iters):
        f1 = A * Psi**2 + B * Psi * Theta + G * Psi - D * Theta**2 - E * Theta
        f2 = M * Psi**2 + Theta**2 - N
        res = max(abs(f1), abs(f2))
        if res < best_res:
            best, best_res = (Psi, Theta), res
        if res < 1e-15:
            break
        j = np.array([[2 * A * Psi + B * Theta + G, B * Psi - 2 * D * Theta - E],
                      [2 * M * Psi, 2 * Theta]])
        try:
            dPsi, dTheta = np.linalg.solve(j, [f1, f2])
        except np.linalg.LinAlgError:
            break
        Psi, Theta = Psi - dPsi, Theta - dTheta
    return best


def det_k_quartic(theta: float, phi: float, eta: float, params: RodParams,
                  tol_p: float = 1e-9):
    """Coefficients of the quartic in Psi whose roots make det K vanish.

    Posed on p(theta, phi) = 0 with b = 0 folded in.  Returns the
    coefficients and a list of :class:`QuarticRoot` for the real roots.
    """
    p = float(contact_coeff_p(theta, phi, params))
    if abs(p) > tol_p:
        raise OffParadoxBoundary(f"|p| = {abs(p):.3e} at (theta, phi) = ({theta}, {phi})")
    a, mu = params.alpha, params.mu
    t = math.tan(theta)
    cp = math.cos(phi)
    sec2 = 1 + t * t
    A = -2 * eta * a * a * mu * mu * t**3 * cp**2
    B = 2 * eta * a * mu * cp * t * sec2 * (2 * t * t - (1 + a))
    G = 2 * a * a * mu * mu * cp**3 * t * t
    D = 2 * eta * t * sec2**2 * (t * t - (1 + a))
    E = a * mu * cp**2 * sec2 * (2 * t * t + (1 + a))
    M = math.cos(theta) ** 2
    N = 1 / math.sin(theta)
    q = QuarticCoeffs(
        theta, phi, eta, A, B, G, D, E, M, N,
        C4=(A + M * D) ** 2 + M * B * B,
        C3=2 * (A * G + M * (G * D - E * B)),
        C2=G * G - 2 * D * N * (A + M * D) - N * B * B + M * E * E,
        C1=2 * N * (E * B - G * D),
        C0=N * (N * D * D - E * E),
    )
    roots = []
    for Psi in _real_roots(q.coeffs):
        if M * Psi * Psi > N * (1 + 1e-6):
            continue
        # b = 0 fixes |Theta|; the sign is the one that zeroes det K.  This
        # stays well conditioned where the rational form Theta_for is 0/0.
        mag = math.sqrt(max(N - M * Psi * Psi, 0.0))
        Th = min((mag, -mag), key=lambda v: abs(q.scaled_det(Psi, v)))
        Psi, Th = _refine_root(q, float(Psi), Th)
        roots.append(QuarticRoot(float(Psi), Th, GBPoint(theta, phi, Th, float(Psi), "")))
    return q, roots


def zero_psi_focus_window(theta: float, phi: float, eta: float, params: RodParams,
                          gate_mu_C: bool = True):
    """Theta interval where K has complex eigenvalues at Psi = 0, or None.

    The discriminant of K is R2 Theta^2 + R1 Theta + R0 with
    R2 = eta^2 (3t - k/t)^2, R1 = 2 eta m (3t + k/t), R0 = m^2, k = 1 + alpha,
    m = alpha mu cos^2(theta) cos^2(phi) and t = tan(theta).  Both ends are
    negative.  Returns None in the degenerate cases m = 0 or R2 = 0, and, when
    ``gate_mu_C`` is set, for mu <= mu_C.  The gate is a convention: the
    window exists below mu_C too, and for small eta the Theta < 0 sheet can
    enter it.
    """
    a, mu = params.alpha, params.mu
    if gate_mu_C and mu <= mu_C(a):
        return None
    t = math.tan(theta)
    k = 1 + a
    m = a * mu * math.cos(theta) ** 2 * math.cos(phi) ** 2
    if m == 0.0 or 3 * t == k / t:
        return None
    lo = -m / (eta * (math.sqrt(3 * t) - math.sqrt(k / t)) ** 2)
    hi = -m / (eta * (math.sqrt(3 * t) + math.sqrt(k / t)) ** 2)
    return lo, hi


def ghastly_check(theta: float, eta: float, params: RodParams, Theta_sign: int) -> float:
    """Residual of the closed-form Psi = 0 condition for det K = 0.

    On p = 0 the value of cos^2(phi) is the same for both phi roots, so the
    residual depends on theta alone.
    """
    a, mu = params.alpha, params.mu
    t = math.tan(theta)
    s, c = math.sin(theta), math.cos(theta)
    sin_phi = -(1 + a * c * c) / (a * mu * s * c)
    cos2 = max(0.0, 1 - sin_phi * sin_phi)
    rhs = 2 * eta * math.sqrt(t) * (1 + t * t) ** 1.25 * ((1 + a) - t * t) / ((1 + a) + 2 * t * t)
    return a * mu * cos2 - Theta_sign * rhs


@dataclass(frozen=True)
class AsymptoticCoeffs:
    hat_mu: float
    hat_phi: float
    epsilon: float
    C4: float
    C3: float
    C2: float
    C1: float
    C0: float
    hat_theta_plus: float
    hat_theta_minus: float

    @property
    def coeffs(self):
        return np.array([self.C4, self.C3, self.C2, self.C1, self.C0])


def asymptotic_quartic(hat_mu: float, hat_phi: float, params: RodParams, epsilon: float = 1.0):
    """Leading-order quartic for mu = mu_P (1 + eps^2 hat_mu), phi = -pi/2 + eps hat_phi.

    The coefficients are homogeneous in (hat_mu, hat_phi^2), so only the
    combinations eps^2 hat_mu and eps hat_phi matter for the roots.
    Returns the coefficients and the sorted real roots in Psi.
    """
    if hat_mu < 0:
        raise ValueError("hat_mu must be non-negative")
    a = params.alpha
    h2 = hat_phi * hat_phi
    C4 = (1 + a) ** 2 * (2 * (2 + a) * hat_mu - h2)
    C2 = -((1 + a) * (2 + a)) ** 1.5 * (4 * (2 + a) * hat_mu - (3 + a) * h2)
    C0 = (1 + a) * (2 + a) ** 4 * (2 * hat_mu - h2)
    spread = 2 * hat_mu - h2
    th = math.sqrt(1 + a) / (2 + a) * math.sqrt(spread) if spread >= 0 else math.nan
    coeffs = AsymptoticCoeffs(hat_mu, hat_phi, epsilon, C4, 0.0, C2, 0.0, C0, th, -th)
    roots = []
    # biquadratic in Psi^2
    for w in _real_roots([C4, C2, C0]):
        if w >= 0:
            roots.extend([-math.sqrt(w), math.sqrt(w)])
    return coeffs, np.sort(np.array(roots))


def asymptotic_expansion_point(hat_mu, hat_phi, hat_theta, epsilon, params: RodParams):
    """(mu, phi, theta) for given perturbation variables."""
    a = params.alpha
    theta_P = math.atan(math.sqrt(1 + a))
    return (mu_P(a) * (1 + epsilon**2 * hat_mu),
            -math.pi / 2 + epsilon * hat_phi,
            theta_P + epsilon * hat_theta)


@dataclass(frozen=True)
class Bifurcation:
    point: GBPoint
    kind: str  # "det" (real eigenvalue crosses zero) or "trace" (complex pair crosses)


def nonhyperbolic_points(params: RodParams, Psi: float, eta: float, Theta_sign: int = 1,
                         n_points: int = 800):
    """GB points where det K, or the real part of a complex pair, vanishes.

    Sign changes along the traced curve are refined by root finding on the
    loop angle.
    """
    curve = trace_gb(params, Psi, Theta_sign, n_points)
    if not curve.points:
        return []

    def at(tau):
        return _make_point(tau % (2 * math.pi), params, Psi, Theta_sign, clamp=True)

    def det_at(tau):
        K = _entries_pt(at(tau))
        return K[0] * K[3] - K[1] * K[2]

    def trace_at(tau):
        K = _entries_pt(at(tau))
        return K[0] + K[3]

    def _entries_pt(q):
        return _entries(q.theta, q.phi, q.Psi, q.Theta, eta, params)

    out = []
    for lo, hi in curve.segments:
        seg = curve.points[lo:hi]
        taus = np.unwrap([q.loop_angle for q in seg])
        if curve.topology == "Closed":
            taus = np.append(taus, taus[0] + 2 * math.pi)
        dets = np.array([det_at(t) for t in taus])
        trs = np.array([trace_at(t) for t in taus])
        for i in range(len(taus) - 1):
            t0, t1 = taus[i], taus[i + 1]
            if dets[i] == 0.0:
                out.append(Bifurcation(at(t0), "det"))
            elif dets[i] * dets[i + 1] < 0:
                out.append(Bifurcation(at(brentq(det_at, t0, t1, xtol=1e-14)), "det"))
            disc0 = trs[i] ** 2 - 4 * dets[i]
            disc1 = trs[i + 1] ** 2 - 4 * dets[i + 1]
            if trs[i] * trs[i + 1] < 0 and disc0 < 0 and disc1 < 0:
                out.append(Bifurcation(at(brentq(trace_at, t0, t1, xtol=1e-14)), "trace"))
    return out


def eigen_sweep(curve, eta: float, params: RodParams):
    """Per-point K entries and eigen data along a traced curve."""
    rows = []
    for q in curve.points:
        K = KMatrix(*_entries(q.theta, q.phi, q.Psi, q.Theta, eta, params), q, eta)
        rows.append((q, K, eigen_classify(K)))
    return rows


def write_eigen_sweep_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["phi", "theta", "Theta", "Psi", "eta", "K11", "K12", "K21", "K22",
                "re_lp", "im_lp", "re_lm", "im_lm", "class"])
    for q, K, e in rows:
        vals = [q.phi, q.theta, q.Theta, q.Psi, K.eta, K.K11, K.K12, K.K21, K.K22,
                e.lambda_plus.real, e.lambda_plus.imag, e.lambda_minus.real, e.lambda_minus.imag]
        w.writerow([f"{v:.17g}" for v in vals] + [e.classification.value])
