"""Command-line front end: runs the band, orbit, density-evolution, ensemble,
Lyapunov, integral-sweep, explicit-formula, and mixing experiments and writes
figure-ready CSV/JSON files with the resolved configuration echoed into every
output.
"""
from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, ensemble, hill, lyapunov, maps, transfer
from .errors import (
    BracketError,
    ConfigurationError,
    DomainError,
    NonConvergenceError,
)
from .numerics import QUAD_TOL, ToleranceSpec

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

OUT_DIR_ENV = "HILLMAP_OUT_DIR"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; the contract here is exit 1
    def error(self, message):
        raise _UsageError(message)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.16e}"  # 17 significant digits, round-trip safe
    return str(x)


def _resolve_out(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not p.is_absolute():
        return Path(base) / p
    return p


def _write_csv(path, header, rows, config, timestamp):
    out = _resolve_out(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if timestamp:
        lines.append(f"# generated {datetime.datetime.now().isoformat()}")
    lines.append(f"# hillmap {__version__}")
    for key in sorted(config):
        lines.append(f"# config: {key} = {config[key]}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    out.write_text("\n".join(lines) + "\n")


def _write_json(path, payload, config, timestamp):
    out = _resolve_out(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    doc = {"config": config}
    if timestamp:
        doc["generated"] = datetime.datetime.now().isoformat()
    doc.update(payload)
    out.write_text(json.dumps(doc, indent=2) + "\n")


def _load_config_file(path: str) -> dict:
    text = Path(path).read_text()
    values = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line is not 'key = value': {raw!r}")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def _merge_config(args, parser_defaults: dict) -> dict:
    """flags > config file > defaults; unknown config keys rejected."""
    resolved = dict(parser_defaults)
    if getattr(args, "config", None):
        file_vals = _load_config_file(args.config)
        unknown = set(file_vals) - set(parser_defaults)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        for key, raw in file_vals.items():
            default = parser_defaults[key]
            cast = type(default) if default is not None else str
            if cast is bool:
                resolved[key] = raw.lower() in ("1", "true", "yes", "on")
            else:
                resolved[key] = cast(raw)
    for key in parser_defaults:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            resolved[key] = flag_val
    return resolved


def _potential_from(cfg) -> hill.Potential:
    name = cfg["potential"]
    if name == "free":
        return hill.Potential.free()
    if name == "constant":
        return hill.Potential.constant(cfg["value"] if cfg["value"] is not None else 1.0)
    if name == "cosine":
        amp = cfg["value"] if cfg["value"] is not None else 1.0
        return hill.Potential.cosine(amplitude=amp)
    if name == "piecewise":
        if not cfg["breakpoints"] or not cfg["values"]:
            raise ConfigurationError(
                "piecewise potential needs --breakpoints and --values"
            )
        bps = [float(v) for v in cfg["breakpoints"].split(",")]
        vals = [float(v) for v in cfg["values"].split(",")]
        return hill.Potential.piecewise_linear(bps, vals)
    raise ConfigurationError(f"unknown potential {name!r}")


# ----------------------------------------------------------------- subcommands

def _cmd_coeffs(cfg, timestamp):
    coeffs = maps.gen_logistic_coeffs(cfg["m"]).coefficients
    print(" ".join(str(c) for c in coeffs))
    if cfg["out"]:
        rows = [(len(coeffs) - 1 - i, c) for i, c in enumerate(coeffs)]
        _write_csv(cfg["out"], ["degree", "coefficient"], rows, cfg, timestamp)
    return EXIT_OK


def _cmd_bands(cfg, timestamp):
    V = _potential_from(cfg)
    l = cfg["l"]
    blist = hill.spectrum_bands(V, l, cfg["lambda_max"])
    fmt = cfg["format"] or ("json" if cfg["out"].endswith(".json") else "csv")
    if fmt == "json":
        _write_json(
            cfg["out"],
            {"bands": [list(b) for b in blist.bands], "warnings": list(blist.warnings)},
            cfg,
            timestamp,
        )
    else:
        rows = []
        ks = np.linspace(0.0, math.pi / l, cfg["k_points"])
        for idx in range(1, len(blist.bands) + 1):
            for k in ks:
                lam = hill.band_function(V, l, idx, float(k))
                rows.append((idx, float(k), lam))
        _write_csv(cfg["out"], ["band_index", "k", "lambda"], rows, cfg, timestamp)
    for warning in blist.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def _cmd_orbit(cfg, timestamp):
    family = cfg["map"].replace("-", "_")
    if family == "logistic":
        md = maps.MapDescriptor.logistic(cfg["r"])
    else:
        md = maps.MapDescriptor(family, m=cfg["m"])
    orbit = maps.iterate(md, cfg["x0"], cfg["n"])
    rows = list(enumerate(orbit.values.tolist()))
    _write_csv(cfg["out"], ["step", "value"], rows, cfg, timestamp)
    return EXIT_OK


def _cmd_density_evolve(cfg, timestamp):
    records, final = transfer.evolve_genlogistic(
        cfg["m"], cfg["steps"], resolution=cfg["resolution"], initial=cfg["init"]
    )
    fmt = cfg["format"] or ("csv" if cfg["out"].endswith(".csv") else "json")
    if fmt == "csv":
        rows = [
            (r["step"], r["l1_to_invariant"], r["mass"], r["resolution"])
            for r in records
        ]
        _write_csv(
            cfg["out"], ["step", "l1_to_invariant", "mass", "resolution"], rows,
            cfg, timestamp,
        )
    else:
        _write_json(cfg["out"], {"report": records}, cfg, timestamp)
    if cfg["save_density"]:
        _write_csv(
            cfg["save_density"],
            ["edge_left", "edge_right", "value"],
            final.to_csv_rows(),
            cfg,
            timestamp,
        )
    return EXIT_OK


def _cmd_ensemble(cfg, timestamp):
    dist = ensemble.InitialDistribution.shifted_gamma(clamp_to_domain=cfg["clamp"])
    if cfg["dist"] == "uniform":
        dist = ensemble.InitialDistribution.uniform(-2.0, 2.0)
    threads = cfg["threads"] or (os.cpu_count() or 1)  # 0 = auto
    report = ensemble.convergence_experiment(
        cfg["m"], dist, cfg["samples"], cfg["iters"], cfg["seed"], threads=threads
    )
    fmt = cfg["format"] or ("csv" if cfg["out"].endswith(".csv") else "json")
    if fmt == "csv":
        rows = list(enumerate(report.distances))
        _write_csv(cfg["out"], ["iteration", "wasserstein1"], rows, cfg, timestamp)
    else:
        payload = json.loads(report.to_json())
        _write_json(cfg["out"], {"report": payload}, cfg, timestamp)
    if report.fitted_slope is not None:
        print(f"fitted_slope = {report.fitted_slope:.6f} over iterations {report.fit_range}")
    return EXIT_OK


def _cmd_lyapunov(cfg, timestamp):
    if cfg["method"] == "quadrature":
        res = lyapunov.average_lyapunov_quadrature(cfg["m"])
    else:
        res = lyapunov.average_lyapunov_orbit(cfg["m"], cfg["x0"], cfg["n"])
    print(f"lyapunov({cfg['m']}) = {res.value:.10f} [{res.method}]")
    if cfg["out"]:
        _write_json(
            cfg["out"],
            {"result": {"m": res.m, "value": res.value, "method": res.method,
                        "error_estimate": res.error_estimate, "restarts": res.restarts}},
            cfg,
            timestamp,
        )
    return EXIT_OK


def _cmd_integral_sweep(cfg, timestamp):
    tol = ToleranceSpec(cfg["abs_tol"], QUAD_TOL.rel_tol, QUAD_TOL.max_steps)
    grid = np.linspace(cfg["a_min"], cfg["a_max"], cfg["count"])
    rows = [(float(a), lyapunov.I_integral(float(a), tol)) for a in grid]
    _write_csv(cfg["out"], ["a", "I"], rows, cfg, timestamp)
    return EXIT_OK


def _cmd_mathieu(cfg, timestamp):
    lam0 = maps.mathieu_lambda0()
    print(f"lambda0 = {lam0:.8f}")
    md = maps.MapDescriptor.logistic(4.0)
    direct = maps.iterate(md, cfg["x0"], cfg["n"]).values
    rows = []
    print(f"{'n':>3} {'cosine-cell':>22} {'direct':>22} {'diff':>10}")
    for n in range(cfg["n"] + 1):
        via = maps.mathieu_formula(cfg["x0"], n)
        rows.append((n, via, float(direct[n]), abs(via - direct[n])))
        print(f"{n:>3} {via:>22.15f} {direct[n]:>22.15f} {abs(via - direct[n]):>10.2e}")
    if cfg["out"]:
        _write_csv(
            cfg["out"], ["n", "formula", "direct", "abs_diff"], rows, cfg, timestamp
        )
    return EXIT_OK


def _cmd_mixing_check(cfg, timestamp):
    A = (Fraction(cfg["a_left"]), Fraction(cfg["a_right"]))
    B = (Fraction(cfg["b_left"]), Fraction(cfg["b_right"]))
    rows = []
    for n in range(1, cfg["n_max"] + 1):
        corr = transfer.mixing_correlation(cfg["m"], n, A, B)
        rows.append((n, float(corr), int(corr == 0)))
    _write_csv(cfg["out"], ["n", "correlation", "exact_zero"], rows, cfg, timestamp)
    return EXIT_OK


# ------------------------------------------------------------------- wiring

def _build_parser() -> _Parser:
    parser = _Parser(prog="hillmap", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, func, options):
        p = sub.add_parser(name)
        p.set_defaults(_func=func, _defaults=dict(options))
        p.add_argument("--config", default=None, help="key = value config file")
        p.add_argument("--no-timestamp", action="store_true")
        for key, default in options.items():
            flag = "--" + key.replace("_", "-")
            if isinstance(default, bool):
                p.add_argument(flag, dest=key, default=None,
                               action=argparse.BooleanOptionalAction)
            else:
                cast = type(default) if default is not None else str
                p.add_argument(flag, dest=key, type=cast, default=None)
        return p

    add("coeffs", _cmd_coeffs, {"m": 2, "out": None})
    add("bands", _cmd_bands, {
        "potential": "free", "value": None, "breakpoints": None, "values": None,
        "l": 1.0, "lambda_max": 40.0, "k_points": 33, "out": "bands.csv",
        "format": None,
    })
    add("orbit", _cmd_orbit, {
        "map": "logistic", "r": 4.0, "m": 2, "x0": 0.3, "n": 100,
        "out": "orbit.csv",
    })
    add("density-evolve", _cmd_density_evolve, {
        "m": 2, "steps": 5, "resolution": 2**14, "init": "uniform",
        "out": "evolution.json", "format": None, "save_density": None,
    })
    add("ensemble", _cmd_ensemble, {
        "m": 2, "samples": 10**6, "iters": 8, "seed": 0, "threads": 0,
        "dist": "shifted_gamma", "clamp": False, "out": "ensemble.json",
        "format": None,
    })
    add("lyapunov", _cmd_lyapunov, {
        "m": 2, "method": "quadrature", "x0": 0.123456, "n": 10**6, "out": None,
    })
    add("integral-sweep", _cmd_integral_sweep, {
        "a_min": -3.0, "a_max": 3.0, "count": 61, "abs_tol": QUAD_TOL.abs_tol,
        "out": "integral.csv",
    })
    add("mathieu", _cmd_mathieu, {"x0": 0.2, "n": 4, "out": None})
    add("mixing-check", _cmd_mixing_check, {
        "m": 2, "a_left": "0", "a_right": "1/4", "b_left": "1/4",
        "b_right": "1/2", "n_max": 6, "out": "mixing.csv",
    })
    return parser


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _merge_config(args, args._defaults)
        cfg["subcommand"] = args.subcommand
        return args._func(cfg, timestamp=not args.no_timestamp)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    except (ConfigurationError, DomainError, BracketError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
