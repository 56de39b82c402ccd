"""Event-driven integration of the slipping rod and separatrix experiments."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import AmbiguousOutcome, DomainError, NoSignChange, StepFailure
from .gb import GBPoint
from .linearization import eigen_classify, jacobian_factors, k_matrix, point_vector
from .rod_model import (
    DESING_KEYS,
    RodParams,
    ScaledState,
    b_gradient,
    contact_coeff_p,
    desingularized_field,
    free_accel_b,
    p_gradient,
    slipping_rhs,
)

EVENT_KINDS = ("CrossP0", "CrossB0", "EtaZero", "LeftDomain")
VERDICTS = {"CrossP0": "Inconsistent", "CrossB0": "LiftOff", "EtaZero": "Stuck",
            "LeftDomain": "LeftDomain"}


@dataclass(frozen=True)
class SimConfig:
    rtol: float = 1e-10
    atol: float = 1e-10
    first_step: float | None = None
    max_step: float = np.inf
    max_s: float = 1e3
    event_tol: float = 1e-12
    eta_floor: float = 1e-9
    stride: int = 1
    method: str = "DOP853"

    def __post_init__(self):
        for name in ("rtol", "atol", "max_s", "event_tol", "eta_floor"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.stride < 1:
            raise DomainError("stride must be at least 1")

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        return cls(**data)


@dataclass(frozen=True)
class Event:
    index: int
    kind: str
    s: float
    state: dict


@dataclass
class TrajectoryRecord:
    s: np.ndarray
    t: np.ndarray
    y: np.ndarray  # columns ordered as DESING_KEYS, then t, x, y
    b: np.ndarray
    p: np.ndarray
    Fz: np.ndarray
    events: list
    verdict: str
    near_events: list = field(default_factory=list)  # other events within event_tol of the last

    def state_at(self, i: int) -> ScaledState:
        vals = dict(zip(DESING_KEYS, self.y[i, :6]))
        return ScaledState(x=self.y[i, 7], y=self.y[i, 8], **vals)

    @property
    def final_state(self) -> ScaledState:
        return self.state_at(-1)

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "t", "eta", "phi", "psi", "Psi", "theta", "Theta", "b", "p", "Fz"])
        for i in range(self.s.size):
            vals = [self.s[i], self.t[i], *self.y[i, :6], self.b[i], self.p[i], self.Fz[i]]
            w.writerow([f"{v:.17g}" for v in vals])

    def events_json(self) -> str:
        return json.dumps([{"kind": e.kind, "s": e.s, "state": e.state} for e in self.events],
                          indent=2)


def _rhs(params):
    def f(_s, y):
        d = desingularized_field(y[:6], params)
        eta, phi, psi, _, theta, _ = y[:6]
        p = contact_coeff_p(theta, phi, params)
        dt = eta * p
        heading = psi + phi
        return np.concatenate([d, [dt, dt * eta * math.cos(heading), dt * eta * math.sin(heading)]])
    return f


def _event_funcs(params, config):
    def cross_p(_s, y):
        return contact_coeff_p(y[4], y[1], params)

    def cross_b(_s, y):
        return free_accel_b(y[3], y[5], y[4])

    def eta_zero(_s, y):
        return y[0] - config.eta_floor

    def left_domain(_s, y):
        return min(y[4], 0.5 * math.pi - y[4])

    funcs = [cross_p, cross_b, eta_zero, left_domain]
    for fn, direction in zip(funcs, (-1, 1, -1, -1)):
        fn.terminal = True
        fn.direction = direction
    return funcs


def _event_slope(kind, y, params):
    """d(event function)/ds at state y."""
    d = desingularized_field(y[:6], params)
    if kind == "CrossP0":
        p_th, p_ph = p_gradient(y[4], y[1], params)
        return p_ph * d[1] + p_th * d[4]
    if kind == "CrossB0":
        gPs, gTh, gth = b_gradient(y[3], y[5], y[4])
        return gPs * d[3] + gTh * d[5] + gth * d[4]
    if kind == "EtaZero":
        return d[0]
    return d[4] if y[4] < 0.25 * math.pi else -d[4]


def _state_dict(y):
    out = dict(zip(DESING_KEYS, map(float, y[:6])))
    out.update(t=float(y[6]), x=float(y[7]), y=float(y[8]))
    return out


def integrate_desingularized(initial: ScaledState, params: RodParams,
                             config: SimConfig | None = None) -> TrajectoryRecord:
    """Integrate in desingularised time until the first event or ``max_s``."""
    config = config or SimConfig()
    initial.check()
    p0 = contact_coeff_p(initial.theta, initial.phi, params)
    if p0 < 0:
        raise DomainError(f"initial p = {p0:.3e} < 0; start in slipping or on its closure")
    y0 = np.concatenate([initial.desingularized_vector(), [0.0, initial.x, initial.y]])
    funcs = _event_funcs(params, config)
    kw = dict(method=config.method, rtol=config.rtol, atol=config.atol,
              events=funcs, max_step=config.max_step)
    if config.first_step is not None:
        kw["first_step"] = config.first_step
    sol = solve_ivp(_rhs(params), (0.0, config.max_s), y0, **kw)
    if sol.status == -1:
        raise StepFailure(sol.message, last_state=_state_dict(sol.y[:, -1]))

    s, Y = sol.t, sol.y.T
    keep = np.arange(0, s.size, config.stride)
    if keep[-1] != s.size - 1:
        keep = np.append(keep, s.size - 1)
    s, Y = s[keep], Y[keep]

    events, near = [], []
    if sol.status == 1:
        hits = [(sol.t_events[k][0], EVENT_KINDS[k], sol.y_events[k][0])
                for k in range(len(funcs)) if sol.t_events[k].size]
        hits.sort(key=lambda h: h[0])
        for s_ev, kind, y_ev in hits:
            events.append(Event(len(s) - 1, kind, float(s_ev), _state_dict(y_ev)))
        # detect other events whose roots lie within event_tol of the terminal one
        y_end = Y[-1]
        for k, fn in enumerate(funcs):
            kind = EVENT_KINDS[k]
            if kind == events[-1].kind:
                continue
            g = fn(s[-1], y_end)
            if abs(g) <= abs(_event_slope(kind, y_end, params)) * config.event_tol + 1e-15:
                near.append(kind)
    b = free_accel_b(Y[:, 3], Y[:, 5], Y[:, 4])
    p = contact_coeff_p(Y[:, 4], Y[:, 1], params)
    with np.errstate(divide="ignore", invalid="ignore"):
        Fz = np.where(np.abs(p) > 1e-9, -b / p, np.nan)
    rec = TrajectoryRecord(s, Y[:, 6], Y, b, p, Fz, events, "MaxTime", near)
    rec.verdict = classify_outcome(rec, config, strict=False)
    return rec


def classify_outcome(record: TrajectoryRecord, config: SimConfig | None = None,
                     strict: bool = True) -> str:
    """Verdict from the terminating event.

    With ``strict`` an :class:`AmbiguousOutcome` is raised when another event
    falls within the event tolerance; otherwise ``"Ambiguous"`` is returned.
    """
    config = config or SimConfig()
    if not record.events:
        return "MaxTime"
    if record.near_events or (
        len(record.events) > 1
        and record.events[-1].s - record.events[-2].s <= config.event_tol
    ):
        kinds = {record.events[-1].kind, *record.near_events}
        if strict:
            raise AmbiguousOutcome(f"events {sorted(kinds)} within {config.event_tol:g}")
        return "Ambiguous"
    last = record.events[-1]
    st = last.state
    if last.kind == "CrossP0":
        b = free_accel_b(st["Psi"], st["Theta"], st["theta"])
        return "Inconsistent" if b < 0 else "Indeterminate"
    if last.kind == "CrossB0":
        return "LiftOff"
    return VERDICTS[last.kind]


def integrate_physical(initial: ScaledState, params: RodParams, t_end: float,
                       t_eval=None, rtol: float = 1e-11, atol: float = 1e-12):
    """Integrate the slipping equations in physical time.

    Returns the scipy solution; rows of ``sol.y`` follow ``DESING_KEYS``.
    Stops early if p or eta approach zero.
    """
    def f(_t, y):
        st = ScaledState(**dict(zip(DESING_KEYS, y)))
        r = slipping_rhs(st, params)
        return [getattr(r, k) for k in DESING_KEYS]

    def guard(_t, y):
        return min(contact_coeff_p(y[4], y[1], params) - 1e-6, y[0] - 1e-6)

    guard.terminal = True
    return solve_ivp(f, (0.0, t_end), initial.desingularized_vector(), method="DOP853",
                     rtol=rtol, atol=atol, t_eval=t_eval, events=guard, dense_output=True)


@dataclass(frozen=True)
class FanSpec:
    delta: float = 1e-3
    angle_tol: float = 1e-6
    margin: float = 1e-3  # keep fan ends off the p and b axes


@dataclass
class SeparatrixResult:
    angle: float  # separating direction in the (p, b) plane, radians
    direction: np.ndarray
    eigen_angle: float
    eigen_direction: np.ndarray
    angle_error_deg: float
    bracket: tuple  # (angle, verdict) pairs either side
    bracket_states: tuple
    classification: str
    n_integrations: int


def lift_to_normal_plane(x0, params: RodParams, target, iters: int = 20):
    """State near ``x0`` shifted along grad p, grad b so that (p, b) = target."""
    _, B = jacobian_factors(x0, params)
    c = np.zeros(2)
    x = x0.copy()
    for _ in range(iters):
        x = x0 + B.T @ c
        r = np.array([contact_coeff_p(x[4], x[1], params), free_accel_b(x[3], x[5], x[4])]) - target
        if np.max(np.abs(r)) < 1e-15:
            break
        _, Bx = jacobian_factors(x, params)
        c = c - np.linalg.solve(Bx @ B.T, r)
    return x


def find_separatrix(gb_point: GBPoint, eta: float, params: RodParams,
                    config: SimConfig | None = None, fan: FanSpec | None = None) -> SeparatrixResult:
    """Bisect a fan of initial conditions around a GB point.

    The fan lies in the slipping quadrant (p > 0, b < 0) of the plane spanned
    by grad p and grad b, at distance ``delta``.  The separating angle is
    compared with the designated eigenvector of K.
    """
    config = config or SimConfig()
    fan = fan or FanSpec()
    if not gb_point.Theta > 0:
        raise DomainError("separatrix search requires Theta > 0")
    eig = eigen_classify(k_matrix(gb_point, eta, params))
    x0 = point_vector(gb_point, eta)
    count = 0

    def verdict(angle):
        nonlocal count
        count += 1
        target = fan.delta * np.array([math.cos(angle), math.sin(angle)])
        x = lift_to_normal_plane(x0, params, target)
        st = ScaledState(**dict(zip(DESING_KEYS, x)))
        rec = integrate_desingularized(st, params, config)
        return rec.verdict, st

    lo, hi = -0.5 * math.pi + fan.margin, -fan.margin
    v_lo, s_lo = verdict(lo)
    v_hi, s_hi = verdict(hi)
    if v_lo == v_hi:
        raise NoSignChange(f"whole fan gives {v_lo}")
    while hi - lo > fan.angle_tol:
        mid = 0.5 * (lo + hi)
        v, st = verdict(mid)
        if v == v_lo:
            lo, s_lo = mid, st
        elif v == v_hi:
            hi, s_hi = mid, st
        else:
            # a third outcome (MaxTime, Ambiguous) sits on the separatrix itself
            lo = hi = mid
            break
    angle = 0.5 * (lo + hi)
    direction = np.array([math.cos(angle), math.sin(angle)])
    d = eig.designated if eig.designated is not None else np.array([math.nan, math.nan])
    eig_angle = math.atan2(d[1], d[0])
    err = abs(math.degrees(math.remainder(angle - eig_angle, 2 * math.pi)))
    return SeparatrixResult(angle, direction, eig_angle, d, err,
                            ((lo, v_lo), (hi, v_hi)), (s_lo, s_hi),
                            eig.classification.value, count)
