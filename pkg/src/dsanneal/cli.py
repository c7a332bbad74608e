"""Command-line front end: ``run``, ``compare`` and ``synth``.

Exit codes are 0 on success, 2 for configuration errors and 3 for solver
failures. Sweeps run one task per ``(method, t_f)`` in worker processes
(count from ``DSANNEAL_WORKERS``, default all cores) and are collected in
grid order, so output files are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import csv
import functools
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import bounds
from .bath import OhmicBath, rwa_validity, tcl2_validity
from .closed import (ClosedRunSpec, InterferometerSpec, MagnusWarning, extrema_spacing,
                     interferometer_p00, magnus1_result, magnus2_p00, solve_exact)
from .opensystem import (OpenRunSpec, PositivityWarning, SemiEmpiricalParams,
                         average_dephasing_rate, rwa_closed_form, semi_empirical,
                         solve_lindblad_rwa, solve_redfield)
from .schedule import ScheduleWarning, cartesian_from_angular, schedule_from_dict

__all__ = ["main", "RunConfig", "SynthConfig", "run_sweep", "compare_results", "CSV_COLUMNS"]

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
CSV_COLUMNS = ("t_f_ns", "method", "P_G", "trace_err", "min_eig", "flags")
CLOSED_METHODS = ("exact", "magnus1", "magnus2", "ds_model")
OPEN_METHODS = ("redfield", "lindblad_rwa", "rwa_closed_form", "semi_empirical")
WORKERS_ENV = "DSANNEAL_WORKERS"


class ConfigError(Exception):
    """Invalid configuration; the message names the offending field."""


class SolverError(Exception):
    def __init__(self, method: str, t_f: float, cause: Exception):
        super().__init__(f"{method} failed at t_f={t_f!r}: {cause}")
        self.method, self.t_f = method, t_f


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Strict):
    min: float = Field(1.0, ge=0)
    max: float = Field(400.0, gt=0)
    count: int = Field(400, ge=2)
    spacing: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _order(self):
        if self.max <= self.min:
            raise ValueError("max must exceed min")
        if self.spacing == "log" and self.min <= 0:
            raise ValueError("log spacing needs min > 0")
        return self

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


class BathConfig(_Strict):
    temperature_mK: float = Field(gt=0)
    omega_c: float = Field(4.0, gt=0)
    eta: float | None = Field(None, ge=0)


class OutputConfig(_Strict):
    path: str = "results.csv"
    format: Literal["csv", "json"] = "csv"
    report: str | None = None


class RunConfig(_Strict):
    """Sweep description; see README for the JSON layout."""

    schedule: dict
    E0: float = Field(gt=0)
    frequency_convention: Literal["angular", "ordinary"] = "angular"
    t_f: GridConfig = GridConfig()
    methods: list[Literal["exact", "magnus1", "magnus2", "ds_model", "redfield",
                          "lindblad_rwa", "rwa_closed_form", "semi_empirical"]] = Field(
        min_length=1)
    bath: BathConfig | None = None
    g: float | None = Field(None, ge=0)
    eta_g2: float | None = Field(None, ge=0)
    gamma_deph: float = Field(0.0, ge=0)
    effective_temperature_mK: float | None = Field(None, gt=0)
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _consistency(self):
        open_sel = [m for m in self.methods if m in OPEN_METHODS]
        if open_sel and self.bath is None:
            raise ValueError(f"bath block required for {open_sel}")
        if not open_sel and self.bath is not None:
            raise ValueError("bath block given but no open-system method selected")
        if self.bath is not None:
            split = self.bath.eta is not None and self.g is not None
            if split == (self.eta_g2 is not None):
                raise ValueError("give either eta_g2 or both bath.eta and g")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must not repeat")
        if "ds_model" in self.methods and self.schedule.get("form") != "gaussian2":
            raise ValueError("ds_model needs a gaussian2 schedule")
        return self

    def open_bath(self) -> tuple[OhmicBath, float]:
        b = self.bath
        if self.eta_g2 is not None:
            return OhmicBath.from_temperature(self.eta_g2, b.omega_c, b.temperature_mK), 1.0
        return OhmicBath.from_temperature(b.eta, b.omega_c, b.temperature_mK), self.g


class SynthConfig(_Strict):
    schedule: dict
    points: int = Field(1001, ge=2)
    output: str = "schedule.csv"


def _field_path(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def load_config(path: str | os.PathLike, model=RunConfig):
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_field_path(exc)) from None


@functools.lru_cache(maxsize=8)
def _schedule(block_json: str):
    return schedule_from_dict(json.loads(block_json))


def build_schedule(block: dict):
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ScheduleWarning)
            a = _schedule(json.dumps(block, sort_keys=True))
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"schedule: {exc}") from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return a


# ---------------------------------------------------------------------------
# Sweep execution
# ---------------------------------------------------------------------------

def _row(t_f, method, p, trace_err=0.0, min_eig=float("nan"), flags=()):
    return {"t_f_ns": float(t_f), "method": method, "P_G": float(p),
            "trace_err": float(trace_err), "min_eig": float(min_eig),
            "flags": ";".join(flags)}


def _run_one(cfg_json: str, method: str, t_f: float) -> dict:
    cfg = RunConfig.model_validate_json(cfg_json)
    a = build_schedule(cfg.schedule)
    spec = ClosedRunSpec(a, cfg.E0, float(t_f), cfg.frequency_convention)
    flags = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            row = _dispatch(cfg, spec, method, flags)
        except Exception as exc:  # report any solver fault with its (method, t_f)
            raise SolverError(method, float(t_f), exc) from None
    for w in caught:
        if issubclass(w.category, MagnusWarning):
            flags.append("magnus_radius")
        elif issubclass(w.category, PositivityWarning):
            flags.append("positivity")
    row["flags"] = ";".join(sorted(set(flags)))
    return row


def _dispatch(cfg: RunConfig, spec: ClosedRunSpec, method: str, flags: list) -> dict:
    t_f = spec.t_f
    if method == "exact":
        return _row(t_f, method, solve_exact(spec).p00, 0.0)
    if method == "magnus1":
        return _row(t_f, method, magnus1_result(spec).p00)
    if method == "magnus2":
        return _row(t_f, method, magnus2_p00(spec).p00)
    if method == "ds_model":
        d = cfg.schedule
        tau_f = spec.schedule.tau_f
        mu = float(d["mu"]) if "mu" in d else float(d["mu_fraction"]) * tau_f
        ispec = InterferometerSpec.from_two_step(float(d["alpha"]), mu, spec.energy, tau_f,
                                                 cfg.gamma_deph, spec.schedule)
        return _row(t_f, method, float(interferometer_p00(ispec, t_f)))
    bath, g = cfg.open_bath()
    if not tcl2_validity(bath, g, t_f).ok:
        flags.append("tcl2_ratio")
    ospec = OpenRunSpec(spec, bath, g, method)
    if method == "redfield":
        r = solve_redfield(ospec)
        return _row(t_f, method, r.p_ground, r.trace_err, r.min_eig)
    if method == "lindblad_rwa":
        r = solve_lindblad_rwa(ospec)
        return _row(t_f, method, r.p_ground, r.trace_err, r.min_eig)
    if method == "rwa_closed_form":
        return _row(t_f, method, rwa_closed_form(ospec)["p_ground"])
    # semi_empirical
    from .bath import HBAR_OVER_KB

    T = cfg.effective_temperature_mK
    beta = 0.0 if T is None else HBAR_OVER_KB / T
    rate = average_dephasing_rate(spec.schedule, bath, g, t_f)
    p = semi_empirical(solve_exact(spec).p00, SemiEmpiricalParams(rate, beta, spec.energy), t_f)
    return _row(t_f, method, p)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be positive")
    return n


def run_sweep(cfg: RunConfig, workers: int | None = None) -> list[dict]:
    """All ``(t_f, method)`` rows, ordered by grid point then method."""
    build_schedule(cfg.schedule)
    grid = cfg.t_f.values()
    tasks = [(float(t), m) for t in grid for m in cfg.methods]
    cfg_json = cfg.model_dump_json()
    workers = worker_count() if workers is None else workers
    if workers == 1 or len(tasks) == 1:
        return [_run_one(cfg_json, m, t) for t, m in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(_run_one, cfg_json, m, t) for t, m in tasks]
        return [f.result() for f in futs]


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def write_csv(rows: list[dict], path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    Path(path).write_text(buf.getvalue())


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames is None or tuple(rd.fieldnames) != CSV_COLUMNS:
            raise ConfigError(f"{path}: expected columns {','.join(CSV_COLUMNS)}")
        return [{"t_f_ns": float(r["t_f_ns"]), "method": r["method"], "P_G": float(r["P_G"]),
                 "trace_err": float(r["trace_err"]), "min_eig": float(r["min_eig"]),
                 "flags": r["flags"]} for r in rd]


def validity_report(cfg: RunConfig) -> dict:
    """Bound certificates and bath diagnostics for the sweep."""
    a = build_schedule(cfg.schedule)
    grid = cfg.t_f.values()
    reports = []
    d = cfg.schedule
    if d.get("form") == "gaussian2":
        prog = a.progression
        reports.append(bounds.fourier_extension_bound(prog.alpha, prog.tau_star).to_dict())
        reports.append(bounds.k2_extension_bound(prog.alpha, prog.tau_star).to_dict())
        reports.append(bounds.magnus_convergence_check(0.5 * prog.total_angle).to_dict())
    out = {"bounds": reports}
    if cfg.bath is not None:
        bath, g = cfg.open_bath()
        t_max = float(grid.max())
        reports.append(bounds.tcl2_bound_report(bath, g, t_max).to_dict())
        rv = rwa_validity(bath, a, t_max)
        out["rwa"] = {"inverse_tau_B": rv.inverse_tau_B, "min_separation": rv.min_separation,
                      "failing_fraction": rv.failing_fraction, "t_f": t_max}
    return out


def _resolve(base: Path, p: str) -> Path:
    q = Path(p)
    return q if q.is_absolute() else base / q


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    base = Path(args.config).resolve().parent
    rows = run_sweep(cfg)
    out = _resolve(base, cfg.output.path)
    if cfg.output.format == "csv":
        write_csv(rows, out)
    else:
        out.write_text(json.dumps(rows, indent=1) + "\n")
    rep = _resolve(base, cfg.output.report) if cfg.output.report else \
        out.with_suffix(".validity.json")
    rep.write_text(json.dumps(validity_report(cfg), indent=1, sort_keys=True) + "\n")
    print(f"wrote {out} ({len(rows)} rows) and {rep}")
    return EXIT_OK


def compare_results(rows: list[dict], a: str, b: str) -> dict:
    """Deviation statistics and oscillation periods of two methods on shared ``t_f``."""
    by = {}
    for r in rows:
        by.setdefault(r["method"], {})[r["t_f_ns"]] = r["P_G"]
    for m in (a, b):
        if m not in by:
            raise ConfigError(f"method {m!r} not in results (have {sorted(by)})")
    shared = sorted(set(by[a]) & set(by[b]))
    if not shared:
        raise ConfigError("methods share no t_f points")
    t = np.array(shared)
    pa = np.array([by[a][x] for x in shared])
    pb = np.array([by[b][x] for x in shared])
    dev = np.abs(pa - pb)
    return {"method_a": a, "method_b": b, "points": len(shared),
            "max_abs_dev": float(dev.max()), "mean_abs_dev": float(dev.mean()),
            "period_a": extrema_spacing(t, pa), "period_b": extrema_spacing(t, pb)}


def cmd_compare(args) -> int:
    rows = read_csv(args.results)
    print(json.dumps(compare_results(rows, args.method_a, args.method_b), indent=1))
    return EXIT_OK


def schedule_table(a, n: int) -> dict:
    s = np.linspace(0.0, 1.0, n)
    c = cartesian_from_angular(a)
    return {"s": s, "A": np.asarray(c.A(s), float), "B": np.asarray(c.B(s), float),
            "Omega": np.asarray(a.omega(s), float), "theta": np.asarray(a.theta(s), float)}


def cmd_synth(args) -> int:
    cfg = load_config(args.config, SynthConfig)
    a = build_schedule(cfg.schedule)
    tab = schedule_table(a, cfg.points)
    out = _resolve(Path(args.config).resolve().parent, cfg.output)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ("s", "A", "B", "Omega", "theta")
    w.writerow(cols)
    for i in range(cfg.points):
        w.writerow([repr(float(tab[c][i])) for c in cols])
    out.write_text(buf.getvalue())
    print(f"wrote {out} ({cfg.points} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dsanneal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a t_f sweep from a JSON config")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)
    c = sub.add_parser("compare", help="compare two methods in a results CSV")
    c.add_argument("results")
    c.add_argument("method_a")
    c.add_argument("method_b")
    c.set_defaults(func=cmd_compare)
    s = sub.add_parser("synth", help="tabulate a schedule from a JSON config")
    s.add_argument("config")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
