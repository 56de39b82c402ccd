"""Command-line entry point: emits CSV/JSON datasets and a run manifest."""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .critical import PSI_L, critical_set, mu_P
from .errors import PainleveError
from .gb import loop_point, trace_gb
from .linearization import (
    asymptotic_quartic,
    det_k_quartic,
    eigen_sweep,
    nonhyperbolic_points,
    write_eigen_sweep_csv,
)
from .modes import GridSpec, Mode, sample_surfaces
from .rod_model import RodParams, ScaledState
from .simulator import FanSpec, SimConfig, find_separatrix, integrate_desingularized

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 2, 3


def fmt(x) -> str:
    return f"{x:.17g}"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


class Output:
    """Collects text destined for ``--out`` (or stdout) and side files."""

    def __init__(self, out: str):
        self.out = out
        self.files = []

    def write_main(self, text: str):
        if self.out == "-":
            sys.stdout.write(text)
        else:
            Path(self.out).write_text(text)
            self.files.append(self.out)

    def write_side(self, suffix: str, text: str):
        if self.out == "-":
            return None
        path = str(Path(self.out).with_suffix("")) + suffix
        Path(path).write_text(text)
        self.files.append(path)
        return path


def _params(args) -> RodParams:
    return RodParams(alpha=args.alpha, mu=args.mu)


def cmd_critical(args, out: Output):
    cs = critical_set(_params(args))
    d = cs.to_dict()
    if args.format == "json":
        out.write_main(dumps(d))
    else:
        buf = io.StringIO()
        buf.write("name,value\n")
        for k, v in d.items():
            buf.write(f"{k},{fmt(v)}\n")
        out.write_main(buf.getvalue())
    return {"paradox": cs.has_paradox}


def cmd_modes(args, out: Output):
    spec = GridSpec(
        theta=(args.theta_min, args.theta_max), phi=(args.phi_min, args.phi_max),
        Theta=(args.Theta_min, args.Theta_max),
        n_theta=args.grid, n_phi=args.grid, n_Theta=args.grid, max_cells=args.max_cells,
    )
    g = sample_surfaces(_params(args), args.Psi, spec)
    counts = {m.name: g.count(m) for m in Mode}
    if args.format == "json":
        out.write_main(dumps({"Psi": args.Psi, "cells": int(g.labels.size), "counts": counts}))
    else:
        buf = io.StringIO()
        g.write_csv(buf)
        out.write_main(buf.getvalue())
    return {"counts": counts}


def cmd_gb(args, out: Output):
    params = _params(args)
    curve = trace_gb(params, args.Psi, args.Theta_sign, args.n_points)
    summary = curve.summary()
    if args.eig:
        bif = nonhyperbolic_points(params, args.Psi, args.eta, args.Theta_sign)
        summary["nonhyperbolic"] = [
            {"theta": b.point.theta, "phi": b.point.phi, "Theta": b.point.Theta, "kind": b.kind}
            for b in bif
        ]
    if args.format == "json":
        out.write_main(dumps(summary))
    else:
        buf = io.StringIO()
        if args.eig:
            write_eigen_sweep_csv(eigen_sweep(curve, args.eta, params), buf)
        else:
            curve.write_csv(buf)
        out.write_main(buf.getvalue())
        out.write_side(".summary.json", dumps(summary))
    if args.require_nonempty and curve.topology == "Empty":
        raise PainleveError(f"GB manifold is empty at Psi = {args.Psi}")
    return {"topology": curve.topology}


def cmd_quartic(args, out: Output):
    params = _params(args)
    rows = []
    if args.asymptotic is not None:
        # mu is taken from eps^2 hat_mu; phi from eps hat_phi across the admissible band
        e2 = args.asymptotic
        params = RodParams(args.alpha, mu_P(args.alpha) * (1 + e2))
        span = math.sqrt(2 * e2)
        for hp in np.linspace(-span, span, args.n_points):
            _, roots = asymptotic_quartic(e2, hp, params)
            for r in roots:
                rows.append(("asymptotic", -math.pi / 2 + hp, math.nan, math.nan, r))
    if params.mu > mu_P(params.alpha):
        for tau in np.linspace(0, 2 * math.pi, args.n_points, endpoint=False):
            th, ph, _ = loop_point(tau, params)
            _, roots = det_k_quartic(th, ph, args.eta, params)
            for r in roots:
                rows.append(("exact", ph, th, r.Theta, r.Psi))
    buf = io.StringIO()
    if args.format == "json":
        buf.write(dumps([dict(zip(("source", "phi", "theta", "Theta", "Psi"), r)) for r in rows]))
    else:
        buf.write("source,phi,cos_phi,theta,Theta,Psi\n")
        for src, ph, th, Th, Ps in rows:
            buf.write(f"{src},{fmt(ph)},{fmt(math.cos(ph))},{fmt(th)},{fmt(Th)},{fmt(Ps)}\n")
    out.write_main(buf.getvalue())
    return {"n_roots": len(rows), "Psi_L": PSI_L}


def _parse_ic(text: str) -> ScaledState:
    vals = {}
    for item in text.split(","):
        k, _, v = item.partition("=")
        if not _:
            raise argparse.ArgumentTypeError(f"expected key=value, got {item!r}")
        vals[k.strip()] = float(v)
    return ScaledState.from_dict(vals)


def _sim_config(args) -> SimConfig:
    return SimConfig(rtol=args.rtol, atol=args.atol, max_s=args.max_s,
                     event_tol=args.event_tol, stride=args.stride)


def cmd_simulate(args, out: Output):
    ic = args.ic if isinstance(args.ic, ScaledState) else _parse_ic(args.ic)
    rec = integrate_desingularized(ic, _params(args), _sim_config(args))
    buf = io.StringIO()
    rec.write_csv(buf)
    out.write_main(buf.getvalue())
    out.write_side(".events.json", rec.events_json() + "\n")
    return {"verdict": rec.verdict,
            "events": [{"kind": e.kind, "s": e.s, "state": e.state} for e in rec.events]}


def cmd_separatrix(args, out: Output):
    params = _params(args)
    curve = trace_gb(params, args.Psi, 1, args.n_points)
    if not curve.points:
        raise PainleveError("GB manifold is empty")
    target = np.array([args.theta, args.phi])
    pts = np.array([[q.theta, q.phi] for q in curve.points])
    q = curve.points[int(np.argmin(np.linalg.norm(pts - target, axis=1)))]
    res = find_separatrix(q, args.eta, params, _sim_config(args),
                          FanSpec(delta=args.delta, angle_tol=args.angle_tol))
    result = {
        "gb_point": {"theta": q.theta, "phi": q.phi, "Theta": q.Theta, "Psi": q.Psi},
        "eta": args.eta,
        "classification": res.classification,
        "separatrix_angle": res.angle,
        "eigenvector_angle": res.eigen_angle,
        "angle_error_deg": res.angle_error_deg,
        "bracket": [{"angle": a, "verdict": v} for a, v in res.bracket],
        "integrations": res.n_integrations,
    }
    out.write_main(dumps(result))
    return {"angle_error_deg": res.angle_error_deg}


def _common(p, mu_default=1.4):
    p.add_argument("--alpha", type=float, default=3.0, help="inertia ratio m l^2 / I0")
    p.add_argument("--mu", type=float, default=mu_default, help="friction coefficient")
    p.add_argument("--out", default="-", help="output file, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--json", dest="format", action="store_const", const="json",
                   help="shorthand for --format json")
    p.add_argument("--manifest", default=None, help="manifest path (default <out>.manifest.json)")


def _sim_flags(p):
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-10)
    p.add_argument("--max-s", dest="max_s", type=float, default=1e3)
    p.add_argument("--event-tol", dest="event_tol", type=float, default=1e-12)
    p.add_argument("--stride", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="painleve3d", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON file supplying defaults for any flag")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("critical", help="critical parameters for (alpha, mu)")
    _common(p)
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("modes", help="sample b, p and contact modes on a grid")
    _common(p)
    p.add_argument("--Psi", type=float, default=0.0)
    p.add_argument("--grid", type=int, default=201, help="samples per axis")
    p.add_argument("--theta-min", dest="theta_min", type=float, default=1e-3)
    p.add_argument("--theta-max", dest="theta_max", type=float, default=math.pi / 2 - 1e-3)
    p.add_argument("--phi-min", dest="phi_min", type=float, default=-math.pi + 1e-3)
    p.add_argument("--phi-max", dest="phi_max", type=float, default=0.0)
    p.add_argument("--Theta-min", dest="Theta_min", type=float, default=0.0)
    p.add_argument("--Theta-max", dest="Theta_max", type=float, default=2.0)
    p.add_argument("--max-cells", dest="max_cells", type=int, default=10_000_000)
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("gb", help="trace the GB manifold, optionally with eigen data")
    _common(p)
    p.add_argument("--Psi", type=float, default=0.0)
    p.add_argument("--Theta-sign", dest="Theta_sign", type=int, choices=(1, -1), default=1)
    p.add_argument("--n-points", dest="n_points", type=int, default=400)
    p.add_argument("--eig", action="store_true", help="emit the eigen sweep instead of points")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--require-nonempty", dest="require_nonempty", action="store_true")
    p.set_defaults(func=cmd_gb)

    p = sub.add_parser("quartic", help="roots of det K = 0 around the paradox boundary")
    _common(p)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--n-points", dest="n_points", type=int, default=400)
    p.add_argument("--asymptotic", type=float, default=None, metavar="EPS2MU",
                   help="also emit leading-order roots for eps^2 hat_mu = EPS2MU")
    p.set_defaults(func=cmd_quartic)

    p = sub.add_parser("simulate", help="integrate from an initial condition")
    _common(p)
    p.add_argument("--ic", default=None,
                   help="comma-separated key=value, e.g. theta=1.1,eta=2,phi=-1.9,Psi=0,Theta=0.9")
    _sim_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("separatrix", help="bisect the separatrix at a GB point")
    _common(p)
    p.add_argument("--Psi", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--theta", type=float, default=None, help="GB point nearest (theta, phi) is used")
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--n-points", dest="n_points", type=int, default=2000)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--angle-tol", dest="angle_tol", type=float, default=1e-6)
    _sim_flags(p)
    p.set_defaults(func=cmd_separatrix, format="json")
    return parser


REQUIRED = {
    "gb": lambda a: [] if not a.eig else ["eta"],
    "quartic": lambda a: ["eta"],
    "simulate": lambda a: ["ic"],
    "separatrix": lambda a: ["eta", "theta", "phi"],
}


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    if isinstance(cfg.get("ic"), dict):
        cfg["ic"] = ",".join(f"{k}={v}" for k, v in cfg["ic"].items())
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            valid = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in cfg.items() if k in valid})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    missing = [k for k in REQUIRED.get(args.command, lambda a: [])(args) if getattr(args, k) is None]
    if missing:
        parser.error(f"{args.command}: missing required value(s): "
                     + ", ".join("--" + m.replace("_", "-") for m in missing))

    if args.command == "simulate" and isinstance(args.ic, str):
        try:
            _parse_ic(args.ic)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            parser.error(f"simulate: bad --ic: {exc}")
    params = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    out = Output(args.out)
    start = time.perf_counter()
    code, info = EXIT_OK, {}
    try:
        info = args.func(args, out) or {}
    except PainleveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code, info = EXIT_DOMAIN, {"error": str(exc)}
    manifest = {
        "command": args.command,
        "parameters": params,
        "version": __version__,
        "outputs": list(out.files),
        "wall_time": time.perf_counter() - start,
        "exit_code": code,
        "result": info,
    }
    text = dumps(manifest)
    if args.manifest:
        Path(args.manifest).write_text(text)
    elif args.out != "-":
        Path(str(Path(args.out).with_suffix("")) + ".manifest.json").write_text(text)
    else:
        sys.stderr.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
