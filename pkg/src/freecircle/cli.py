"""Command line front end.

Exit codes: 0 on success, 2 when a verification suite records a failed
inequality, 1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .equilibrium import FullSupportError, PreconditionError, solve_equilibrium
from .functionals import (
    energy,
    fisher_information_IQ,
    log_energy,
    log_energy_distance,
    potential_free_I,
    relative_entropy_H,
)
from .inequalities import poincare_rho_scan, sharpness_scan
from .instances import FAMILIES, random_trig_poly, rng_for
from .measures import (
    FourierSeries,
    InvalidInputError,
    InvalidMeasureError,
    Potential,
    UnsupportedMeasureError,
    angle_grid,
    load_measure,
    load_potential,
    series_to_json,
)
from .reports import SLACK_RTOL, digest
from .suites import SUITES, RunConfig, run_suite
from .transport import circle_wasserstein, modified_wasserstein

SCHEMA_VERSION = 1
ENV_CONFIG = "CFI_DEFAULT_CONFIG"

FUNCTIONALS = ("Energy", "LogEnergy", "FisherIQ", "RelEntropyH", "LogEnergyDistance", "PotentialFreeI")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _plain(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _write_json(path, report):
    text = json.dumps(_plain(report), indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_csv(path, rows):
    rows = [{k: v for k, v in _plain(r).items() if not isinstance(v, (dict, list))} for r in rows]
    cols = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        w.writerows(rows)


def _read_config(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InvalidInputError(f"config file {path} not found") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise InvalidInputError(f"{path}: top level must be an object")
    return obj


def build_config(args) -> RunConfig:
    """Defaults, then ``$CFI_DEFAULT_CONFIG``, then ``--config``, then explicit flags."""
    d: dict = {}
    env = os.environ.get(ENV_CONFIG)
    if env:
        d.update(_read_config(env))
    if getattr(args, "config", None):
        d.update(_read_config(args.config))
    for key in ("bandwidth", "grid", "seed", "count", "rho", "jobs", "family"):
        val = getattr(args, key, None)
        if val is not None:
            d[key] = val
    if getattr(args, "potential", None):
        d["potential"] = args.potential
    return RunConfig.from_dict(d)


def _envelope(command, cfg: RunConfig, inputs, result, t0, **extra):
    return {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "inputs_digest": digest(*inputs),
        "constants": {"bandwidth": cfg.bandwidth, "grid": cfg.grid, "seed": cfg.seed, "rho": cfg.rho,
                      "slack_rtol": SLACK_RTOL},
        "result": result,
        "timing": {"seconds": time.perf_counter() - t0},
        **extra,
    }


def _truncate(Q: Potential, cfg: RunConfig) -> Potential:
    return Q if Q.series.half_bandwidth <= cfg.bandwidth else Potential(Q.series.truncate(cfg.bandwidth))


# ------------------------------------------------------------------ subcommands


def cmd_equilibrium(args) -> int:
    t0 = time.perf_counter()
    cfg = build_config(args)
    if not args.potential:
        raise UsageError("equilibrium requires --potential")
    Q = _truncate(load_potential(args.potential), cfg)
    res = solve_equilibrium(Q, args.mass, cfg.grid)
    x = angle_grid(cfg.grid)
    samples = res.density.on_grid(cfg.grid)
    result = {
        "mass": res.mass,
        "constant_C": res.constant_C,
        "energy": res.energy,
        "min_density": res.min_density,
        "coefficients": series_to_json(res.density.trimmed())["coeffs"],
        "density_samples": samples,
    }
    _write_json(args.out, _envelope("equilibrium", cfg, [Q, args.mass], result, t0))
    if args.csv:
        _write_csv(args.csv, [{"x": a, "density": b} for a, b in zip(x, samples)])
    return 0


def cmd_distance(args) -> int:
    t0 = time.perf_counter()
    cfg = build_config(args)
    if not (args.mu and args.nu):
        raise UsageError("distance requires --mu and --nu")
    mu, nu = load_measure(args.mu), load_measure(args.nu)
    if args.standard:
        val = circle_wasserstein(mu, nu, args.p)
        result = {"kind": "standard", "p": args.p, "value": val}
        rows = None
    else:
        want_map = bool(args.csv) and not (mu.is_dirac or nu.is_dirac)
        r = modified_wasserstein(mu, nu, args.p, cfg.grid, return_map=want_map)
        result = {"kind": "modified", "p": args.p, "value": r.value,
                  "cut_points": list(r.cut_points) if r.cut_points else None}
        rows = None
        if r.map is not None:
            rows = [{"x": a, "theta": b} for a, b in zip(r.map.x, r.map.theta)]
    _write_json(args.out, _envelope("distance", cfg, [mu, nu, args.p], result, t0))
    if args.csv and rows:
        _write_csv(args.csv, rows)
    return 0


def cmd_functional(args) -> int:
    t0 = time.perf_counter()
    cfg = build_config(args)
    name = args.name
    mu = load_measure(args.mu) if args.mu else None
    if mu is None:
        raise UsageError(f"{name} requires --mu")
    if name in ("Energy", "FisherIQ"):
        if not args.potential:
            raise UsageError(f"{name} requires --potential")
        Q = _truncate(load_potential(args.potential), cfg)
        value = (energy if name == "Energy" else fisher_information_IQ)(Q, mu)
        inputs = [Q, mu]
    elif name == "LogEnergy":
        value, inputs = log_energy(mu), [mu]
    else:
        if not args.nu:
            raise UsageError(f"{name} requires --nu")
        nu = load_measure(args.nu)
        fn = {"RelEntropyH": relative_entropy_H, "LogEnergyDistance": log_energy_distance,
              "PotentialFreeI": potential_free_I}[name]
        value, inputs = fn(mu, nu), [mu, nu]
    _write_json(args.out, _envelope("functional", cfg, inputs, {"name": name, "value": value}, t0))
    return 0


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    cfg = build_config(args)
    out = run_suite(args.suite, cfg)
    report = _envelope("verify", cfg, [args.suite, repr(sorted(cfg.to_dict().items()))],
                       {"suite": args.suite, "passed": out["passed"], "summary": out["summary"]}, t0,
                       config=cfg.to_dict(), instances=out["instances"])
    report["timing"]["seconds"] = time.perf_counter() - t0
    _write_json(args.out, report)
    if args.csv:
        _write_csv(args.csv, out["instances"])
    return 0 if out["passed"] else 2


def cmd_scan(args) -> int:
    t0 = time.perf_counter()
    cfg = build_config(args)
    if args.what == "sharpness":
        Q = _truncate(load_potential(args.potential), cfg) if args.potential else Potential.zero()
        count = cfg.count or 100
        result = sharpness_scan(Q, cfg.family, count, cfg.seed, cfg.grid)
        inputs = [Q, cfg.family, count, cfg.seed]
    else:
        if not args.mu:
            raise UsageError("scan --what poincare-rho requires --mu")
        mu = load_measure(args.mu)
        tests = [FourierSeries.monomial(1)] + [random_trig_poly(rng_for(cfg.seed, "scan", j), 6, 1.0)
                                               for j in range(cfg.count or 20)]
        rhos = np.arange(args.rho_min, args.rho_max + 0.5 * args.rho_step, args.rho_step)
        result = {"rho_max": poincare_rho_scan(mu, tests, rhos), "functions": len(tests)}
        inputs = [mu, cfg.seed, len(tests)]
    _write_json(args.out, _envelope("scan", cfg, inputs, dict(result, what=args.what), t0))
    return 0


# ------------------------------------------------------------------ parser


def _common(p, config=False):
    p.add_argument("--out", help="JSON report path (default: stdout)")
    p.add_argument("--csv", help="CSV output path")
    p.add_argument("--bandwidth", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--seed", type=int)
    if config:
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--count", type=int)
        p.add_argument("--rho", type=float)
        p.add_argument("--jobs", type=int)
        p.add_argument("--family", choices=FAMILIES)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="freecircle", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("equilibrium", help="equilibrium measure of a potential")
    p.add_argument("--potential", help="potential JSON file")
    p.add_argument("--mass", type=float, default=1.0)
    _common(p)
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("distance", help="modified or standard Wasserstein distance")
    p.add_argument("--mu")
    p.add_argument("--nu")
    p.add_argument("--p", type=float, default=2.0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--modified", action="store_true", default=True)
    g.add_argument("--standard", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("functional", help="energy, Fisher information and potential-free functionals")
    p.add_argument("--name", choices=FUNCTIONALS, required=True)
    p.add_argument("--potential")
    p.add_argument("--mu")
    p.add_argument("--nu")
    _common(p)
    p.set_defaults(func=cmd_functional)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--potential", help="fixed potential file used instead of random ones")
    _common(p, config=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="exploratory scans without verdicts")
    p.add_argument("--what", choices=("sharpness", "poincare-rho"), default="sharpness")
    p.add_argument("--potential")
    p.add_argument("--mu")
    p.add_argument("--rho-min", type=float, default=0.40)
    p.add_argument("--rho-max", type=float, default=0.60)
    p.add_argument("--rho-step", type=float, default=0.001)
    _common(p, config=True)
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(
                ("equilibrium", "distance", "functional", "verify", "scan")))
        return args.func(args)
    except UsageError as exc:
        print(f"freecircle: usage error: {exc}", file=sys.stderr)
        return 1
    except (InvalidInputError, InvalidMeasureError, UnsupportedMeasureError, FullSupportError,
            PreconditionError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"freecircle: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
