"""Command-line entry point: ``modwave <subcommand> ...``.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import criticality as crit
from . import mkdv, reduction
from .errors import ModwaveError
from .fixtures import ConfigError, fixture_path, load_param_file
from .tensors import analytic_bundle, bundle

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    param_file: str | None = None
    options: dict = field(default_factory=dict)
    fmt: str = "json"
    output: str | None = None
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.param_file is not None and not Path(self.param_file).is_file():
            raise ConfigError(f"parameter file not found: {self.param_file}")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise ConfigError(f"tolerance '{k}' must be positive, got {v}")


def _plain(obj):
    """Convert numpy containers and scalars to JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: fixed key order, shortest round-trip floats."""
    return json.dumps(_plain(obj), indent=2, allow_nan=False) + "\n"


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _param_file(args):
    path = args.params or (fixture_path(args.fixture) if args.fixture else None)
    if path is None:
        raise UsageError("give a parameter file or --fixture sw|cnls")
    return load_param_file(path)


def _find(pf, args):
    guess = args.guess if getattr(args, "guess", None) else pf.guess
    if guess is None:
        raise UsageError("no guess: pass --guess P1 P2 P3 or add 'guess' to the parameter file")
    pin = args.pin if getattr(args, "pin", None) is not None else pf.pin
    return crit.find_double_critical(pf.model, pf.fixed_state, guess, pin)


def _parse_tol(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--tol expects NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = float(v)
        except ValueError as exc:
            raise UsageError(f"--tol {k}: {v!r} is not a number") from exc
    return out


# -- subcommands -------------------------------------------------------------

def cmd_tensors(args):
    pf = _param_file(args)
    m = pf.model
    if args.slice:
        m, pt = m.at_slice(args.slice, pf.fixed_state)
    elif args.omega:
        pt = m.point(args.k, args.omega)
    else:
        pt = m.point_from_state(pf.fixed_state, args.k)
    b = analytic_bundle(m, pt, args.order) if args.analytic else bundle(m, pt, args.order)
    doc = {"model": m.name, "params": m.to_dict(), "point": pt.to_dict(), "bundle": b.to_dict()}
    _emit(dumps(doc), args.output)
    return EXIT_OK


def cmd_critical(args):
    pf = _param_file(args)
    if args.action == "find":
        cp = _find(pf, args)
        _emit(dumps(cp.to_dict()), args.output)
        return EXIT_OK
    if args.action == "trace":
        seed = _find(pf, args)
        window = pf.window_by_index()
        tr = crit.trace_curve(pf.model, pf.fixed_state, seed, args.steps, args.max_step,
                              args.direction, window)
        _emit(tr.to_csv() if args.format == "csv" else dumps(tr.to_dict()), args.output)
        return EXIT_OK
    grids = [np.linspace(*g) for g in args.grid]
    res = crit.scan_surfaces(pf.model, pf.fixed_state, *grids, threads=args.threads)
    res["model"] = pf.model.name
    doc = {k: res[k] for k in ("model", "axes", "grids", "det", "cubic", "valid")}
    _emit(dumps(doc), args.output)
    return EXIT_OK


def _cp_from_args(pf, args):
    if getattr(args, "critical_point", None):
        doc = json.loads(Path(args.critical_point).read_text())
        return crit.make_critical_point(pf.model, pf.fixed_state, doc["params_slice"])
    return _find(pf, args)


def _coeff_doc(pf, cp):
    b = bundle(cp.model, cp.pt, 3)
    co = reduction.assemble(cp.model, cp, b)
    kc = reduction.kuramoto_cubic(cp.model, cp)
    d1, d2 = reduction.kuramoto_stationarity(cp.model, cp)
    scale = max(np.linalg.norm(b.DkB), np.linalg.norm(b.D2kB))
    shifts = [abs(reduction.cubic_raw(b, cp.zeta, cp.delta + c * cp.zeta) - co.a1_raw)
              / abs(co.a1_raw) for c in (-10, -1, 1, 10)]
    checks = {
        "kuramoto_cubic": kc,
        "two_a1_raw": 2 * co.a1_raw,
        "kuramoto_rel_diff": abs(kc - 2 * co.a1_raw) / abs(co.a1_raw),
        "stationarity_first": float(np.linalg.norm(d1) / scale),
        "stationarity_second": float(np.linalg.norm(d2) / scale),
        "delta_gauge_max_rel": max(shifts),
        "residuals": cp.residuals,
    }
    return {
        "critical_point": cp.to_dict(),
        "coefficients": co.to_dict(),
        "checks": checks,
        "closed_form_report": reduction.closed_form_report(cp.model, cp, b, co),
    }, co


def cmd_coeffs(args):
    pf = _param_file(args)
    doc, _ = _coeff_doc(pf, _cp_from_args(pf, args))
    _emit(dumps(doc), args.output)
    return EXIT_OK


def cmd_kuramoto(args):
    pf = _param_file(args)
    cp = _cp_from_args(pf, args)
    b = bundle(cp.model, cp.pt, 3)
    co = reduction.assemble(cp.model, cp, b)
    kc = reduction.kuramoto_cubic(cp.model, cp)
    d1, d2 = reduction.kuramoto_stationarity(cp.model, cp)
    rel = abs(kc - 2 * co.a1_raw) / abs(co.a1_raw)
    doc = {"kuramoto_cubic": kc, "two_a1_raw": 2 * co.a1_raw, "rel_diff": rel,
           "tolerance": args.rtol, "first_derivative": d1, "second_derivative": d2}
    _emit(dumps(doc), args.output)
    return EXIT_OK if rel <= args.rtol else EXIT_CHECK


def _initial_field(spec, coeffs, L, N):
    kind, _, rest = spec.partition(":")
    if kind == "soliton":
        try:
            A, X0 = (float(v) for v in rest.split(","))
        except ValueError as exc:
            raise UsageError("--ic soliton:A,X0 expects two numbers") from exc
        return mkdv.soliton(coeffs, A, X0, L, N)
    if kind == "file":
        path = Path(rest)
        if not path.is_file():
            raise ConfigError(f"initial-condition file not found: {path}")
        if path.suffix == ".json":
            vals = np.asarray(json.loads(path.read_text())["q"], dtype=float)
        else:
            data = np.genfromtxt(path, delimiter=",", names=True)
            vals = np.asarray(data["q"], dtype=float)
        if vals.shape != (N,):
            raise ConfigError(f"{path}: expected {N} samples of q, found {vals.size}")
        return mkdv.WaveField(L, N, vals)
    raise UsageError(f"unknown --ic kind {kind!r}; use soliton:A,X0 or file:path")


def _simulate(coeffs, ic, L, N, T, dt=None, snap_every=0):
    f0 = _initial_field(ic, coeffs, L, N)
    run = mkdv.MkdvRun(coeffs, dt)
    f, diag, snaps = mkdv.integrate(run, f0, T, snap_every=snap_every)
    return f0, f, run, diag, snaps


def cmd_simulate(args):
    coeffs = (args.a0, args.a1, args.a2)
    f0, f, run, diag, snaps = _simulate(coeffs, args.ic, args.L, args.N, args.T, args.dt,
                                        args.snap_every)
    if args.format == "csv":
        frames = snaps or [f]
        lines = ["T,X,q"]
        for fr in frames:
            lines += [f"{fr.time!r},{x!r},{q!r}" for x, q in zip(fr.x.tolist(), fr.values.tolist())]
        _emit("\n".join(lines) + "\n", args.output)
        return EXIT_OK
    doc = {
        "coeffs": {"a0": coeffs[0], "a1": coeffs[1], "a2": coeffs[2]},
        "L": args.L, "N": args.N, "dt": run.dt, "T": f.time,
        "stability_bound": mkdv.stability_bound(coeffs, f0),
        "diagnostics": {"columns": ["T", "mass", "momentum", "energy"], "rows": diag},
        "frames": [{"T": fr.time, "q": fr.values} for fr in (snaps or [f])],
        "X": f.x,
    }
    _emit(dumps(doc), args.output)
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_checks

    try:
        checks, info = run_checks(_parse_tol(args.tol), seed=args.seed)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    ok = all(c.passed for c in checks)
    doc = {"passed": ok, "checks": [c.to_dict() for c in checks], "info": info}
    _emit(dumps(doc), args.output)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: {c.value:.3e} (tol {c.tolerance:g})", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_pipeline(args):
    pf = _param_file(args)
    cp = _find(pf, args)
    doc, co = _coeff_doc(pf, cp)
    sim = None
    if args.simulate:
        coeffs = (co.a0, co.a1, co.a2)
        B = abs(args.amplitude) * math.sqrt(abs(co.a1 / (6 * co.a2)))
        L = args.L or 40.0 / B
        ic = f"soliton:{args.amplitude!r},{L / 2!r}"
        f0, f, run, diag, _ = _simulate(coeffs, ic, L, args.N, args.T or 1.0, None)
        _, c, _ = mkdv.soliton_profile(coeffs, args.amplitude, [0.0], 0.0)
        exact = mkdv.soliton(coeffs, args.amplitude, L / 2, L, args.N, time=f.time)
        sim = {"L": L, "N": args.N, "T": f.time, "dt": run.dt, "speed": c,
               "shape_error": float(np.max(np.abs(f.values - exact.values))),
               "mass_drift": abs(diag[-1][1] - diag[0][1]) / max(abs(diag[0][1]), 1e-300)}
    out = {"model": pf.model.name, "a0": co.a0, "a1": co.a1, "a2": co.a2}
    out.update(doc)
    out["simulation"] = sim
    _emit(dumps(out), args.output)
    return EXIT_OK


# -- argument parsing --------------------------------------------------------

def _add_param_args(p, guess=True):
    p.add_argument("params", nargs="?", help="model parameter file (JSON)")
    p.add_argument("--fixture", choices=["sw", "cnls"], help="use a bundled fixture")
    if guess:
        p.add_argument("--guess", type=float, nargs=3, metavar=("P1", "P2", "P3"))
        p.add_argument("--pin", type=int, choices=[0, 1, 2])


def _add_output(p, formats=("json",)):
    p.add_argument("-o", "--output", help="write here instead of stdout")
    p.add_argument("--format", choices=formats, default=formats[0])


def _grid(text):
    try:
        lo, hi, n = text.split(":")
        return float(lo), float(hi), int(n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid axis must be LO:HI:N, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="modwave", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tensors", help="derivative tensors at a point")
    _add_param_args(p, guess=False)
    p.add_argument("--k", type=float, nargs=2, default=[0.0, 0.0])
    p.add_argument("--omega", type=float, nargs=2)
    p.add_argument("--slice", type=float, nargs=3, help="slice parameters instead of --k")
    p.add_argument("--order", type=int, choices=[1, 2, 3], default=3)
    p.add_argument("--analytic", action="store_true", help="exact tensors instead of FD")
    _add_output(p)
    p.set_defaults(func=cmd_tensors)

    p = sub.add_parser("critical", help="find, trace or scan double criticality")
    p.add_argument("action", choices=["find", "trace", "scan"])
    _add_param_args(p)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--max-step", type=float, default=0.02)
    p.add_argument("--direction", type=int, choices=[-1, 1], default=1)
    p.add_argument("--grid", type=_grid, nargs=3, metavar="LO:HI:N",
                   default=[(0.05, 0.95, 10), (0.1, 5.0, 10), (0.1, 5.0, 10)])
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for scan (default $MODWAVE_THREADS or all cores)")
    _add_output(p, ("json", "csv"))
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("coeffs", help="mKdV coefficients at a double-critical point")
    _add_param_args(p)
    p.add_argument("--critical-point", help="CriticalPoint JSON from 'critical find'")
    _add_output(p)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("kuramoto", help="Kuramoto cross-check of the cubic coefficient")
    _add_param_args(p)
    p.add_argument("--critical-point")
    p.add_argument("--rtol", type=float, default=1e-5)
    _add_output(p)
    p.set_defaults(func=cmd_kuramoto)

    p = sub.add_parser("simulate", help="integrate the mKdV")
    p.add_argument("--a0", type=float, default=1.0)
    p.add_argument("--a1", type=float, default=6.0)
    p.add_argument("--a2", type=float, default=1.0)
    p.add_argument("--L", type=float, default=40.0)
    p.add_argument("--N", type=int, default=512)
    p.add_argument("--dt", type=float, default=None, help="default: half the stability bound")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--ic", default="soliton:1,20", help="soliton:A,X0 or file:path")
    p.add_argument("--snap-every", type=int, default=0)
    _add_output(p, ("json", "csv"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the invariant suite at the bundled fixtures")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pipeline", help="find -> coefficients -> Kuramoto -> optional soliton run")
    _add_param_args(p)
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--N", type=int, default=512)
    p.add_argument("--T", type=float, default=None)
    _add_output(p)
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        RunConfig(args.command, getattr(args, "params", None),
                  fmt=getattr(args, "format", "json"), output=getattr(args, "output", None))
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"modwave: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModwaveError, np.linalg.LinAlgError) as exc:
        print(f"modwave: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"modwave: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
