"""Command-line front end: grid evaluation of G(x, t) and the validation suites.

Units are those of the Hamiltonian: hbar = 2m = 1, so a particle of momentum k
has energy k**2; x is a length and t has units of length**2.

Exit codes: 0 success, 1 invalid configuration, 2 numerical non-convergence
(partial results are still written, flagged ``converged=false``), 3 a
validation suite failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .errors import DomainError, NonConvergenceError
from .finite import FreeSector, greens_bruteforce
from .greens import greens, greens_infinite_c
from .params import PhysicsParams
from .validation import DEFAULT_THRESHOLDS, SUITES, run_suites

__all__ = ["RunConfig", "ConfigError", "build_parser", "cmd_compute", "cmd_validate", "main", "CSV_COLUMNS"]

MODES = ("finite-c", "infinite-c", "finite-N-oracle", "validate")
FORMATS = ("csv", "json")
CSV_COLUMNS = ("x", "t", "re_g", "im_g", "err", "theta_evals", "det_order", "converged")

EXIT_OK, EXIT_CONFIG, EXIT_NONCONV, EXIT_VALIDATE = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def parse_grid(spec) -> list[float]:
    """``"0.5,1,2"`` -> list; ``"a:b:n"`` -> n points from a to b inclusive; lists pass through."""
    if isinstance(spec, (int, float)):
        return [float(spec)]
    if isinstance(spec, (list, tuple)):
        vals = [float(v) for v in spec]
    else:
        spec = str(spec).strip()
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ConfigError(f"range must be start:stop:count, got {spec!r}")
            n = int(parts[2])
            if n < 1:
                raise ConfigError("range count must be >= 1")
            vals = [float(v) for v in np.linspace(float(parts[0]), float(parts[1]), n)]
        else:
            vals = [float(v) for v in spec.split(",") if v.strip()]
    if not vals:
        raise ConfigError("empty grid")
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError("grid values must be finite")
    return vals


@dataclass
class RunConfig:
    mode: str = "finite-c"
    c: float = 2.0
    kf: float = 1.0
    L: float | None = None
    N: int | None = None
    x: list = field(default_factory=lambda: [1.0])
    t: list = field(default_factory=lambda: [0.5])
    tol: float = 1e-6
    det_tol: float = 1e-10
    order_cap: int = 1024
    cutoff: int = 12
    damping: float = 0.0
    threads: int | None = None
    output: str | None = None
    format: str = "csv"
    seed: int = 0
    only: list | None = None
    thresholds: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        for name in ("tol", "det_tol"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be >= 1")
        self.x = parse_grid(self.x)
        self.t = parse_grid(self.t)
        if self.mode == "finite-N-oracle":
            if self.L is None or self.N is None:
                raise ConfigError("finite-N-oracle mode needs L and N")
            if self.damping < 0:
                raise ConfigError("damping must be >= 0")
        if self.mode in ("finite-c", "validate") and not (self.c > 0 and math.isfinite(self.c)):
            raise ConfigError("c must be positive and finite (use mode=infinite-c)")
        if not (self.kf > 0 and math.isfinite(self.kf)):
            raise ConfigError("kf must be positive")
        if self.mode != "finite-N-oracle" and any(x == 0.0 and t == 0.0 for x in self.x for t in self.t):
            raise ConfigError("the grid contains (0, 0), where G is a delta function")
        unknown = set(self.only or ()) - set(SUITES)
        if unknown:
            raise ConfigError(f"unknown suites {sorted(unknown)}; choose from {sorted(SUITES)}")
        unknown = set(self.thresholds) - set(DEFAULT_THRESHOLDS)
        if unknown:
            raise ConfigError(f"unknown thresholds {sorted(unknown)}")
        return self


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    return data


def _make_config(args) -> RunConfig:
    data = load_config(args.config) if args.config else {}
    for key in ("mode", "c", "kf", "L", "N", "x", "t", "tol", "threads", "output", "format", "seed", "only", "cutoff", "damping"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if args.command == "validate":
        data["mode"] = "validate"
    try:
        return RunConfig(**data).validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# ------------------------------------------------------------------ compute


def _point(cfg: RunConfig, x: float, t: float) -> dict:
    row = {"x": x, "t": t}
    try:
        if cfg.mode == "finite-N-oracle":
            p = PhysicsParams.finite(cfg.c, cfg.L, cfg.N)
            r = greens_bruteforce(x, complex(t, -cfg.damping), FreeSector.ground_state(p), cfg.cutoff)
            row.update(g=r.value, err=r.tail_estimate, theta_evals=0, det_order=0, converged=r.tail_estimate <= cfg.tol)
        else:
            if cfg.mode == "infinite-c":
                r = greens_infinite_c(x, t, cfg.kf, cfg.tol, det_tol=cfg.det_tol, order_cap=cfg.order_cap)
            else:
                r = greens(x, t, PhysicsParams.thermodynamic(cfg.c, cfg.kf), cfg.tol, det_tol=cfg.det_tol, order_cap=cfg.order_cap)
            row.update(g=r.value, err=r.abs_error_estimate, theta_evals=r.theta_evaluations, det_order=r.det_order, converged=r.converged)
    except NonConvergenceError:
        row.update(g=complex("nan+nanj"), err=math.inf, theta_evals=0, det_order=cfg.order_cap, converged=False)
    return row


def _record(row: dict) -> dict:
    g = complex(row["g"])
    return {
        "x": row["x"],
        "t": row["t"],
        "re_g": g.real,
        "im_g": g.imag,
        "err": row["err"],
        "theta_evals": int(row["theta_evals"]),
        "det_order": int(row["det_order"]),
        "converged": bool(row["converged"]),
    }


def evaluate_grid(cfg: RunConfig) -> list[dict]:
    points = sorted({(x, t) for x in cfg.x for t in cfg.t})
    workers = cfg.threads or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda pt: _point(cfg, *pt), points))
    return [_record(r) for r in rows]


def render(cfg: RunConfig, records: list[dict]) -> str:
    if cfg.format == "json":
        clean = [{k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in r.items()} for r in records]
        doc = {"config": asdict(cfg), "results": clean, "version": __version__}
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: (repr(v) if isinstance(v, float) else str(v).lower() if isinstance(v, bool) else v) for k, v in rec.items()})
    return buf.getvalue()


def _emit(cfg: RunConfig, text: str):
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_compute(cfg: RunConfig) -> int:
    records = evaluate_grid(cfg)
    _emit(cfg, render(cfg, records))
    return EXIT_OK if all(r["converged"] for r in records) else EXIT_NONCONV


# ----------------------------------------------------------------- validate


def cmd_validate(cfg: RunConfig) -> int:
    results = run_suites(cfg.only, seed=cfg.seed, thresholds=cfg.thresholds)
    lines = [f"{'suite':<20} {'check':<52} {'measured':>10} {'threshold':>10}  status"]
    for res in results:
        for ch in res.checks:
            lines.append(f"{res.name:<20} {ch.label:<52} {ch.measured:>10.3e} {ch.threshold:>10.1e}  {'PASS' if ch.passed else 'FAIL'}")
    text = "\n".join(lines) + "\n"
    if cfg.format == "json" and cfg.output:
        doc = {
            "config": asdict(cfg),
            "suites": [
                {"name": r.name, "passed": r.passed, "seconds": r.seconds, "checks": [asdict(c) | {"passed": c.passed} for c in r.checks]}
                for r in results
            ],
            "version": __version__,
        }
        _emit(cfg, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        sys.stdout.write(text)
    else:
        _emit(cfg, text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATE


# --------------------------------------------------------------------- main


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 1); 2 is reserved for non-convergence."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig keys; flags override it")
    common.add_argument("--mode", choices=MODES, help="finite-c (default), infinite-c, finite-N-oracle or validate")
    common.add_argument("--x", help="positions: comma list '0.5,1' or range 'start:stop:count'")
    common.add_argument("--t", help="times (units of length^2, energy = k^2), same syntax as --x")
    common.add_argument("--c", type=float, help="coupling strength (default 2)")
    common.add_argument("--kf", type=float, help="Fermi momentum (default 1)")
    common.add_argument("--L", type=float, help="box length for finite-N-oracle")
    common.add_argument("--N", type=int, help="particle number for finite-N-oracle")
    common.add_argument("--cutoff", type=int, help="label cutoff for finite-N-oracle")
    common.add_argument("--damping", type=float, help="imaginary time shift eps >= 0 for finite-N-oracle")
    common.add_argument("--tol", type=float, help="integration tolerance (default 1e-6)")
    common.add_argument("--threads", type=int, help="worker threads (default: CPU count)")
    common.add_argument("--output", help="output path (default: stdout)")
    common.add_argument("--format", choices=FORMATS, help="csv (default) or json")
    common.add_argument("--only", nargs="+", metavar="SUITE", help=f"validation suites to run: {', '.join(SUITES)}")
    common.add_argument("--seed", type=int, help="seed for randomized validation sweeps")
    parser = _Parser(
        prog="impgreen",
        description="Impurity Green's function of the 1D spin-1/2 Fermi gas (units: hbar = 2m = 1, energy = k^2).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("compute", parents=[common], help="evaluate G(x, t) on a grid")
    sub.add_parser("validate", parents=[common], help="run the validation suites")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _make_config(args)
    except ConfigError as exc:
        print(f"impgreen: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cfg.mode == "validate":
            return cmd_validate(cfg)
        return cmd_compute(cfg)
    except DomainError as exc:
        print(f"impgreen: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
