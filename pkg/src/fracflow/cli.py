"""Command-line interface: ``fracflow profile|compare|zeros``.

Configuration files are flat ``key=value`` text with ``#`` comments::

    nu=1
    alpha=0.5
    beta=0.5
    r_samples=0.25,0.5,0.75
    t_samples=0.2,0.5,1
    output=run.csv
    compare=oracle,fd

All floating-point output is written with 17 significant digits so that a
value read back from the CSV is the same double.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from fracflow import analytic_solution as an
from fracflow import fd_solver, laplace_oracle
from fracflow.errors import ConfigError, FracflowError, ParameterError
from fracflow.params import FlowConfig, FluidParams
from fracflow.special_functions import bessel_j1_zeros

PROFILE_HEADER = ["r", "t", "velocity", "stress", "method", "cancellation"]
COMPARE_HEADER = ["quantity", "r", "t", "series", "oracle", "fd",
                  "abs_series_oracle", "rel_series_oracle", "abs_series_fd", "rel_series_fd"]
SUMMARY_HEADER = ["pair", "quantity", "count", "max_rel", "median_rel", "tolerance", "pass"]
TOLERANCES = {"series-oracle": 1e-3, "series-fd": 2e-2}

_FLUID_KEYS = ("nu", "alpha", "rho", "beta")
_FLOW_FLOAT_KEYS = ("R", "Omega", "series_tol", "quad_tol")
_FLOW_INT_KEYS = ("n_modes", "k_max", "j_max", "stehfest_n")
_KNOWN = set(_FLUID_KEYS + _FLOW_FLOAT_KEYS + _FLOW_INT_KEYS) | {
    "r_samples", "t_samples", "output", "compare", "oracle_n", "fd_nr", "fd_dt"}
_REQUIRED = ("nu", "alpha", "r_samples", "t_samples")
_RANGES = {
    "nu": (lambda v: v > 0, "must be > 0"),
    "rho": (lambda v: v > 0, "must be > 0"),
    "alpha": (lambda v: v >= 0, "must be >= 0 (alpha1 = rho*alpha >= 0)"),
    "beta": (lambda v: 0 < v <= 1, "must lie in (0, 1]"),
    "R": (lambda v: v > 0, "must be > 0"),
}


@dataclass
class RunConfig:
    fluid: FluidParams
    flow: FlowConfig
    r_samples: np.ndarray
    t_samples: np.ndarray
    output_path: Path = Path("profile.csv")
    compare: frozenset = field(default_factory=lambda: frozenset({"oracle"}))
    oracle_n: int = 20
    fd_grid: fd_solver.Grid | None = None


def _fmt(x) -> str:
    return "" if x is None else "%.17g" % x


def _number(key, text, kind=float):
    try:
        return kind(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None


def _samples(key, text):
    parts = [p.strip() for p in text.split(",")]
    if not parts or any(p == "" for p in parts):
        raise ConfigError(f"{key}: malformed list {text!r}")
    vals = np.array([_number(key, p) for p in parts])
    if not np.all(np.isfinite(vals)):
        raise ConfigError(f"{key}: values must be finite")
    if np.any(np.diff(vals) <= 0):
        raise ConfigError(f"{key}: values must be strictly increasing")
    return vals


def parse_config(text: str) -> RunConfig:
    """Parse and validate a flat key=value configuration."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KNOWN:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    vals = {}
    for key in _FLUID_KEYS + _FLOW_FLOAT_KEYS + ("fd_dt",):
        if key in raw:
            vals[key] = _number(key, raw[key])
    for key in _FLOW_INT_KEYS + ("oracle_n", "fd_nr"):
        if key in raw:
            vals[key] = _number(key, raw[key], int)
    for key, (ok, msg) in _RANGES.items():
        if key in vals and not ok(vals[key]):
            raise ConfigError(f"{key}={vals[key]} out of range: {msg}")
    missing = [k for k in _REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")

    try:
        fluid = FluidParams(**{k: vals[k] for k in _FLUID_KEYS if k in vals})
        flow = FlowConfig(**{k: vals[k] for k in _FLOW_FLOAT_KEYS + _FLOW_INT_KEYS if k in vals})
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None

    r = _samples("r_samples", raw["r_samples"])
    t = _samples("t_samples", raw["t_samples"])
    if r[0] < 0 or r[-1] > flow.R:
        raise ConfigError(f"r_samples must lie in [0, R={flow.R}]")
    if t[0] < 0:
        raise ConfigError("t_samples must be >= 0")

    compare = frozenset(p.strip() for p in raw.get("compare", "oracle").split(",") if p.strip())
    if not compare <= {"oracle", "fd"}:
        raise ConfigError(f"compare: unknown stack(s) {sorted(compare - {'oracle', 'fd'})}")
    oracle_n = vals.get("oracle_n", 20)
    if oracle_n % 2 or not 8 <= oracle_n <= 20:
        raise ConfigError(f"oracle_n={oracle_n} must be even in [8, 20]")
    grid = None
    if "fd" in compare:
        try:
            grid = fd_solver.Grid.until(float(t[-1]) if t[-1] > 0 else vals.get("fd_dt", 1e-5),
                                        nr=vals.get("fd_nr", 201), dt=vals.get("fd_dt", 1e-5),
                                        R=flow.R)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None
    return RunConfig(fluid=fluid, flow=flow, r_samples=r, t_samples=t,
                     output_path=Path(raw.get("output", "profile.csv")),
                     compare=compare, oracle_n=oracle_n, fd_grid=grid)


def _workers() -> int:
    env = os.environ.get("FRACFLOW_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"FRACFLOW_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def _basis(cfg: RunConfig):
    return bessel_j1_zeros(cfg.flow.R, cfg.flow.n_modes)


def compute_profile(cfg: RunConfig, workers: int | None = None):
    """Velocity and stress :class:`FieldProfile` objects for a run."""
    basis = _basis(cfg)
    r, t = cfg.r_samples, cfg.t_samples
    try:
        vel = an.velocity_field(cfg.fluid, cfg.flow, basis, r, t, workers)
        tau = an.shear_field(cfg.fluid, cfg.flow, basis, r, t, workers)
    except FracflowError as exc:
        raise type(exc)(f"{exc} (while evaluating r in [{r[0]:g}, {r[-1]:g}], "
                        f"t in [{t[0]:g}, {t[-1]:g}])") from exc
    return vel, tau


def profile_csv(vel: an.FieldProfile, tau: an.FieldProfile) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(PROFILE_HEADER)
    for i, r in enumerate(vel.r_samples):
        for j, t in enumerate(vel.t_samples):
            mv, mt = vel.method[i, j], tau.method[i, j]
            method = mv if mv == mt else an.MIXED
            ind = max(vel.cancellation[i, j], tau.cancellation[i, j])
            out.writerow([_fmt(r), _fmt(t), _fmt(vel.values[i, j]), _fmt(tau.values[i, j]),
                          method, _fmt(ind)])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def run_profile(cfg: RunConfig, workers: int | None = None, plot: bool = False):
    """Compute the profile, write the CSV (and optionally a PNG) and return both fields."""
    vel, tau = compute_profile(cfg, workers)
    _write(cfg.output_path, profile_csv(vel, tau))
    if plot:
        from fracflow.plotting import plot_profile
        plot_profile(vel, tau, cfg.output_path.with_suffix(".png"))
    return vel, tau


@dataclass
class CompareReport:
    rows: list
    summary: list
    passed: bool

    def csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(COMPARE_HEADER)
        for row in self.rows:
            out.writerow([row[0]] + [_fmt(v) for v in row[1:]])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(SUMMARY_HEADER)
        for pair, qty, n, mx, med, tol, ok in self.summary:
            out.writerow([pair, qty, n, _fmt(mx), _fmt(med), _fmt(tol), "yes" if ok else "no"])
        return buf.getvalue()


def _deviation(a, b):
    if a is None or b is None:
        return None, None
    d = abs(a - b)
    if d == 0:
        return 0.0, 0.0
    return d, d / abs(b) if b != 0 else float("inf")


def compute_compare(cfg: RunConfig, workers: int | None = None) -> CompareReport:
    """Evaluate the series, the transform oracle and (optionally) the FD solver."""
    vel, tau = compute_profile(cfg, workers)
    basis = _basis(cfg)
    r, t = cfg.r_samples, cfg.t_samples
    pos = t > 0
    oracle = {"velocity": None, "stress": None}
    if "oracle" in cfg.compare and np.any(pos):
        n = cfg.oracle_n
        oracle["velocity"] = np.full((len(r), len(t)), np.nan)
        oracle["stress"] = np.full((len(r), len(t)), np.nan)
        oracle["velocity"][:, pos] = np.atleast_2d(laplace_oracle.velocity_via_inversion(
            cfg.fluid, cfg.flow, basis, r, t[pos], N=n)).reshape(len(r), -1)
        oracle["stress"][:, pos] = np.atleast_2d(laplace_oracle.shear_via_inversion(
            cfg.fluid, cfg.flow, basis, r, t[pos], N=n)).reshape(len(r), -1)
    fd_vals = None
    if "fd" in cfg.compare:
        field_ = fd_solver.simulate(cfg.fluid, cfg.flow, cfg.fd_grid)
        fd_vals = np.array([[field_.sample(ri, tj) for tj in t] for ri in r])

    rows = []
    rel = {(p, q): [] for p in TOLERANCES for q in ("velocity", "stress")}
    for qty, prof in (("velocity", vel), ("stress", tau)):
        for i, ri in enumerate(r):
            for j, tj in enumerate(t):
                s = float(prof.values[i, j])
                o = None
                if oracle[qty] is not None and np.isfinite(oracle[qty][i, j]):
                    o = float(oracle[qty][i, j])
                f = float(fd_vals[i, j]) if (fd_vals is not None and qty == "velocity") else None
                a_so, r_so = _deviation(s, o)
                a_sf, r_sf = _deviation(s, f)
                if r_so is not None:
                    rel[("series-oracle", qty)].append(r_so)
                if r_sf is not None:
                    rel[("series-fd", qty)].append(r_sf)
                rows.append([qty, ri, tj, s, o, f, a_so, r_so, a_sf, r_sf])

    summary = []
    passed = True
    for (pair, qty), vals in rel.items():
        if not vals:
            continue
        mx, med = float(np.max(vals)), float(np.median(vals))
        ok = mx <= TOLERANCES[pair]
        passed &= ok
        summary.append((pair, qty, len(vals), mx, med, TOLERANCES[pair], ok))
    return CompareReport(rows, summary, passed)


def run_compare(cfg: RunConfig, workers: int | None = None, plot: bool = False) -> CompareReport:
    """Write the comparison CSV and its summary CSV; return the report."""
    report = compute_compare(cfg, workers)
    _write(cfg.output_path, report.csv())
    _write(cfg.output_path.with_suffix(".summary.csv"), report.summary_csv())
    if plot:
        from fracflow.plotting import plot_compare
        plot_compare(report, cfg.output_path.with_suffix(".png"))
    return report


def zeros_csv(radius: float, count: int) -> str:
    basis = bessel_j1_zeros(radius, count)
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["n", "zero", "j2_at_R_zero"])
    for n, (z, w) in enumerate(zip(basis.zeros, basis.weights), 1):
        out.writerow([n, _fmt(z), _fmt(w)])
    return buf.getvalue()


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("profile", "velocity and stress profile to CSV"),
                        ("compare", "cross-check series, transform oracle and FD solver")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", type=Path)
        sp.add_argument("-o", "--output", type=Path, help="override the config's output path")
        sp.add_argument("--plot", action="store_true", help="also write a PNG next to the CSV")
    zp = sub.add_parser("zeros", help="print roots of J1(R r) = 0 as CSV")
    zp.add_argument("--radius", type=float, required=True)
    zp.add_argument("--count", type=int, required=True)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "zeros":
            sys.stdout.write(zeros_csv(args.radius, args.count))
            return 0
        cfg = parse_config(args.config.read_text(encoding="utf-8"))
        if args.output is not None:
            cfg.output_path = args.output
        workers = _workers()
        if args.command == "profile":
            run_profile(cfg, workers, args.plot)
            print(f"wrote {cfg.output_path}")
            return 0
        report = run_compare(cfg, workers, args.plot)
        sys.stdout.write(report.summary_csv())
        print(f"wrote {cfg.output_path}")
        return 0 if report.passed else 1
    except (FracflowError, OSError) as exc:
        print(f"fracflow: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
