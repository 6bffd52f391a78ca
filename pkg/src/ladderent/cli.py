"""Command-line front end: scans, comparisons, fits and oracle validation.

Every run writes into ``--out``: an aggregate CSV, one JSON record per
geometry and ``manifest.json``.  The manifest is written even when the run
fails, carrying the error category.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    GgmPoint,
    compare_exact_rvb,
    exact_ggm_point,
    fit_scaling,
    odd_even_report,
    rvb_ggm_point,
    rvb_recursion_checks,
    rvb_recursive_ggm_series,
)
from .errors import DomainError, LadderError
from .ggm import FULL_MAX_SITES, Strategy, validate_restricted_strategy
from .lattice import build_ladder
from .rvb.states import build_rvb_enumerated
from .spectral import DEFAULT_SEED, HamiltonianSpec, LanczosOptions, dense_hamiltonian, ground_state

CSV_COLUMNS = ("legs", "rungs", "boundary", "n", "model", "delta", "energy", "ggm",
               "lambda_sq", "strategy", "argmax_sites", "degeneracy_warning")
COMPARE_COLUMNS = ("legs", "rungs", "boundary", "n", "fidelity", "delta_e", "energy_exact",
                   "energy_rvb", "ggm_exact", "ggm_rvb")
FIT_COLUMNS = ("legs", "boundary", "model", "G_c", "k", "x", "sign", "residual", "points",
               "degenerate")
COMMANDS = ("exact-ggm", "rvb-ggm", "compare", "scan", "fit", "validate")
MODELS = ("exact", "rvb", "rvb-recursive")
VALIDATE_TARGETS = ("rvb-recursion", "restricted", "spectral", "all")
SIGN_HINTS = ("+", "-", "parity")

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_USAGE = 2
EXIT_COMPUTE = 3


class UsageError(Exception):
    pass


def parse_int_list(text: str) -> list[int]:
    """``"4"``, ``"1,3"``, ``"2..8"`` or mixtures such as ``"2..6,10"``."""
    out: set[int] = set()
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = (int(v) for v in part.split("..", 1))
                if hi < lo:
                    raise UsageError(f"empty range {part!r}")
                out.update(range(lo, hi + 1))
            else:
                out.add(int(part))
        except ValueError as exc:
            raise UsageError(f"bad integer list {text!r}") from exc
    if not out:
        raise UsageError(f"empty integer list {text!r}")
    return sorted(out)


@dataclass
class RunConfig:
    """Everything that determines the output of a run."""

    command: str
    legs: list[int] = field(default_factory=lambda: [2])
    rungs: list[int] = field(default_factory=lambda: [4])
    boundary: str = "periodic"
    model: str = "exact"
    J: float = 1.0
    delta: float = 1.0
    strategy: str = "restricted"
    seed: int = DEFAULT_SEED
    tol: float = 1e-10
    max_iter: int = 500
    delta_e_per_site: bool = False
    what: str = "all"
    max_spins: int = 16
    input: str | None = None
    sign_hint: str | None = None
    out: str = "ladderent-out"
    jobs: int = 1

    # jobs and out do not change results, so they stay out of the hash
    HASHED = ("command", "legs", "rungs", "boundary", "model", "J", "delta", "strategy", "seed",
              "tol", "max_iter", "delta_e_per_site", "what", "max_spins", "input", "sign_hint")

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            elif isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name.replace('_', '-')} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        values = parse_config_text(text)
        if "command" not in values:
            raise UsageError("config text lacks a command")
        cfg = cls(values.pop("command"))
        for key, raw in values.items():
            setattr(cfg, key, _coerce(key, raw))
        return cfg

    def digest(self) -> str:
        payload = {k: getattr(self, k) for k in self.HASHED}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()

    def lanczos(self) -> LanczosOptions:
        return LanczosOptions(tol=self.tol, max_iter=self.max_iter, seed=self.seed)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    if kind == "list[int]":
        return parse_int_list(raw)
    if kind == "bool":
        low = raw.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise UsageError(f"{key}: expected a boolean, got {raw!r}")
        return low in ("true", "1", "yes")
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise UsageError(f"{key}: cannot parse {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict:
    """Parse the ``key = value`` config grammar.

    One assignment per line; ``#`` starts a comment; blank lines are
    ignored; keys are long option names with ``-`` or ``_``; a repeated key
    keeps the last value.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ladderent",
        description="Genuine multisite entanglement of Heisenberg ladders.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", help="key = value file; flags override its entries")
        p.add_argument("--legs", help="leg counts: 2, 1,3 or 1..4")
        p.add_argument("--rungs", help="rung counts: 4, 4,6 or 2..10")
        p.add_argument("--boundary", choices=("open", "periodic"))
        p.add_argument("--model", choices=MODELS)
        p.add_argument("--J", type=float, dest="J", help="exchange coupling (> 0)")
        p.add_argument("--delta", type=float, help="XXZ anisotropy")
        p.add_argument("--strategy", choices=("full", "restricted"))
        p.add_argument("--jobs", type=int, help="worker processes (default LADDER_ENT_THREADS or 1)")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--tol", type=float, help="Lanczos eigenvalue tolerance")
        p.add_argument("--max-iter", type=int, dest="max_iter")
        p.add_argument("--delta-e-per-site", action="store_const", const=True,
                       dest="delta_e_per_site", help="report |E_rvb - E0| / n instead of / |E0|")
        p.add_argument("--what", choices=VALIDATE_TARGETS, help="validate: which oracle checks")
        p.add_argument("--max-spins", type=int, dest="max_spins", help="validate: size cap")
        p.add_argument("--input", help="fit: scan CSV to fit instead of computing one")
        p.add_argument("--sign-hint", choices=SIGN_HINTS, dest="sign_hint",
                       help="fit: '+' (G falls with n), '-' (G rises) or 'parity' "
                            "('-' for odd legs, '+' for even legs); needed for non-monotone data")
    return parser


_HELP = {
    "exact-ggm": "GGM of Lanczos ground states",
    "rvb-ggm": "GGM of RVB states (enumerated or recursive)",
    "compare": "fidelity and energy gap between exact and RVB states",
    "scan": "GGM over a grid of geometries",
    "fit": "finite-size scaling fits per leg count",
    "validate": "run the oracle checks",
}

_OPTION_KEYS = ("legs", "rungs", "boundary", "model", "J", "delta", "strategy", "seed", "out",
                "tol", "max_iter", "delta_e_per_site", "what", "max_spins", "input", "sign_hint",
                "jobs")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(args.command)
    if args.command == "rvb-ggm":
        cfg.model = "rvb"
    if args.command == "validate":
        cfg.max_spins = 20
    file_values = {}
    if args.config:
        try:
            file_values = parse_config_text(Path(args.config).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        for key, raw in file_values.items():
            if key != "command":
                setattr(cfg, key, _coerce(key, raw))
    env_jobs = os.environ.get("LADDER_ENT_THREADS")
    if env_jobs and "jobs" not in file_values:
        try:
            cfg.jobs = int(env_jobs)
        except ValueError as exc:
            raise UsageError(f"LADDER_ENT_THREADS must be an integer, got {env_jobs!r}") from exc
    for key in _OPTION_KEYS:
        value = getattr(args, key)
        if value is None:
            continue
        setattr(cfg, key, parse_int_list(value) if key in ("legs", "rungs") else value)
    _check_config(cfg)
    return cfg


def _check_config(cfg: RunConfig) -> None:
    if cfg.command == "exact-ggm" and cfg.model != "exact":
        raise UsageError("exact-ggm computes the exact model only")
    if cfg.command == "rvb-ggm" and cfg.model == "exact":
        raise UsageError("rvb-ggm needs --model rvb or rvb-recursive")
    if cfg.boundary not in ("open", "periodic"):
        raise UsageError(f"unknown boundary {cfg.boundary!r}")
    if cfg.model not in MODELS:
        raise UsageError(f"unknown model {cfg.model!r}")
    if cfg.strategy not in ("full", "restricted"):
        raise UsageError(f"unknown strategy {cfg.strategy!r}")
    if cfg.what not in VALIDATE_TARGETS:
        raise UsageError(f"unknown validation target {cfg.what!r}")
    if min(cfg.legs) < 1 or min(cfg.rungs) < 1:
        raise UsageError("legs and rungs must be positive")
    if cfg.sign_hint is not None and cfg.sign_hint not in SIGN_HINTS:
        raise UsageError(f"unknown sign hint {cfg.sign_hint!r}")
    if cfg.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if cfg.J <= 0:
        raise UsageError("--J must be positive")
    if cfg.model == "rvb-recursive" and cfg.strategy == "full":
        raise UsageError("the recursive RVB path supports the restricted strategy only")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    if isinstance(value, (tuple, list)):
        return " ".join(str(v) for v in value)
    return str(value)


def write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    path.write_text(buf.getvalue())


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _row_key(row: dict):
    return (row["legs"], row["rungs"], row["boundary"], row["model"], row["delta"])


def _grid(cfg: RunConfig, skipped: list) -> list[tuple[int, int]]:
    """Geometries of the run, dropping the ones the model cannot represent."""
    out = []
    for legs in cfg.legs:
        for rungs in cfg.rungs:
            if cfg.boundary == "periodic" and rungs < 3:
                skipped.append({"legs": legs, "rungs": rungs,
                                "reason": "periodic ladders need at least 3 rungs"})
                continue
            if cfg.model != "exact" and rungs % 2:
                skipped.append({"legs": legs, "rungs": rungs,
                                "reason": "RVB states need an even number of rungs"})
                continue
            if cfg.model == "rvb-recursive" and cfg.boundary == "periodic" and rungs < 4:
                skipped.append({"legs": legs, "rungs": rungs,
                                "reason": "periodic RVB ladders need at least 4 rungs"})
                continue
            out.append((legs, rungs))
    if not out:
        raise DomainError("no computable geometry in the requested grid")
    return out


def _ggm_task(task):
    legs, rungs, cfg = task
    start = time.perf_counter()
    geom = build_ladder(legs, rungs, cfg.boundary)
    if cfg.model == "exact":
        point = exact_ggm_point(geom, cfg.J, cfg.delta, cfg.strategy, cfg.lanczos())
    else:
        point = rvb_ggm_point(geom, cfg.strategy, cfg.J, cfg.delta)
    return point, time.perf_counter() - start


def _map(fn, tasks, jobs: int):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def compute_points(cfg: RunConfig, skipped: list, timings: dict) -> list[GgmPoint]:
    grid = _grid(cfg, skipped)
    if cfg.model == "rvb-recursive":
        points = []
        for legs in sorted({g[0] for g in grid}):
            start = time.perf_counter()
            ms = [m for lg, m in grid if lg == legs]
            points.extend(rvb_recursive_ggm_series(legs, ms, cfg.boundary))
            timings[f"L{legs}"] = time.perf_counter() - start
        return points
    results = _map(_ggm_task, [(legs, rungs, cfg) for legs, rungs in grid], cfg.jobs)
    for point, wall in results:
        timings[f"{point.legs}x{point.rungs}"] = wall
    return [p for p, _ in results]


def _point_row(p: GgmPoint) -> dict:
    return {c: getattr(p, c) for c in CSV_COLUMNS}


def _emit_points(cfg: RunConfig, out: Path, points: list[GgmPoint]) -> list[dict]:
    points = sorted(points, key=lambda p: _row_key(_point_row(p)))
    rows = [_point_row(p) for p in points]
    write_csv(out / "ggm.csv", CSV_COLUMNS, rows)
    records = out / "records"
    records.mkdir(exist_ok=True)
    for p in points:
        write_json(records / f"{p.legs}x{p.rungs}-{p.boundary}-{p.model}.json", asdict(p))
    _emit_series(out, rows, cfg.model)
    return rows


def _emit_series(out: Path, rows: list[dict], model: str) -> None:
    """Plot-ready ``n G`` columns, one file per leg count."""
    series = out / "series"
    series.mkdir(exist_ok=True)
    for legs in sorted({r["legs"] for r in rows}):
        sel = sorted((r["n"], r["ggm"]) for r in rows if r["legs"] == legs)
        text = "# n G\n" + "".join(f"{n} {_fmt(float(g))}\n" for n, g in sel)
        (series / f"{model}-L{legs}.dat").write_text(text)


def run_ggm(cfg: RunConfig, out: Path, report: dict) -> int:
    points = compute_points(cfg, report["skipped"], report["wall_times"])
    rows = _emit_points(cfg, out, points)
    report["rows"] = len(rows)
    report["degeneracy_warnings"] = [f"{r['legs']}x{r['rungs']}" for r in rows
                                     if r["degeneracy_warning"]]
    for r in rows:
        flag = "  [near-degenerate ground space]" if r["degeneracy_warning"] else ""
        print(f"{r['legs']}x{r['rungs']} {r['boundary']} {r['model']}: "
              f"G = {r['ggm']:.10f}{flag}")
    return EXIT_OK


def _compare_task(task):
    legs, rungs, cfg = task
    start = time.perf_counter()
    geom = build_ladder(legs, rungs, cfg.boundary)
    rec = compare_exact_rvb(geom, cfg.J, cfg.delta, Strategy.parse(cfg.strategy),
                            cfg.delta_e_per_site, cfg.lanczos())
    return rec, time.perf_counter() - start


def run_compare(cfg: RunConfig, out: Path, report: dict) -> int:
    model = cfg.model
    cfg.model = "rvb"
    grid = _grid(cfg, report["skipped"])
    cfg.model = model
    results = _map(_compare_task, [(lg, m, cfg) for lg, m in grid], cfg.jobs)
    records = sorted((r for r, _ in results), key=lambda r: (r.legs, r.rungs))
    for rec, wall in results:
        report["wall_times"][rec.geometry] = wall
    rows = [{**rec.to_dict(), "n": rec.legs * rec.rungs} for rec in records]
    write_csv(out / "compare.csv", COMPARE_COLUMNS, rows)
    records_dir = out / "records"
    records_dir.mkdir(exist_ok=True)
    for row in rows:
        write_json(records_dir / f"{row['geometry']}-compare.json", row)
    summary = {"max_fidelity": max(r["fidelity"] for r in rows),
               "min_delta_e": min(r["delta_e"] for r in rows),
               "delta_e_per_site": cfg.delta_e_per_site}
    write_json(out / "compare_summary.json", summary)
    report["summary"] = summary
    for r in rows:
        print(f"{r['geometry']}: F = {r['fidelity']:.6f}  dE = {r['delta_e']:.6f}")
    return EXIT_OK


def _read_scan_csv(path: str) -> list[dict]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read input CSV: {exc}") from exc
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(CSV_COLUMNS) - set(rows[0]):
        raise UsageError(f"{path} does not follow the scan CSV schema")
    for r in rows:
        for key in ("legs", "rungs", "n"):
            r[key] = int(r[key])
        for key in ("ggm", "lambda_sq", "delta"):
            r[key] = float(r[key])
    return rows


def run_fit(cfg: RunConfig, out: Path, report: dict) -> int:
    if cfg.input:
        rows = _read_scan_csv(cfg.input)
    else:
        rows = _emit_points(cfg, out, compute_points(cfg, report["skipped"],
                                                     report["wall_times"]))
    groups: dict = {}
    for r in rows:
        if r["rungs"] % 2:
            continue  # odd rungs oscillate and stay out of the fit
        groups.setdefault((r["legs"], r["boundary"], r["model"]), []).append((r["n"], r["ggm"]))
    fits, fit_rows, failures = {}, [], []
    for key in sorted(groups):
        legs, boundary, model = key
        hint = cfg.sign_hint
        if hint == "parity":
            hint = "-" if legs % 2 else "+"
        try:
            fit = fit_scaling(groups[key], hint)
        except DomainError as exc:
            failures.append({"legs": legs, "boundary": boundary, "model": model,
                             "category": exc.category, "message": str(exc)})
            continue
        fits.setdefault((boundary, model), {})[legs] = fit
        fit_rows.append({"legs": legs, "boundary": boundary, "model": model, "G_c": fit.G_c,
                         "k": fit.k, "x": fit.x, "sign": fit.sign, "residual": fit.residual,
                         "points": len(fit.points_used), "degenerate": fit.degenerate})
    write_csv(out / "fits.csv", FIT_COLUMNS, fit_rows)
    payload = {"fits": fit_rows, "skipped_fits": failures, "odd_even": {}}
    for (boundary, model), by_legs in sorted(fits.items()):
        try:
            rep = {"emitted": True, **odd_even_report(by_legs)}
        except DomainError as exc:
            rep = {"emitted": False, "reason": str(exc)}
        payload["odd_even"][f"{boundary}/{model}"] = rep
    write_json(out / "fits.json", payload)
    report["fits"] = len(fit_rows)
    for r in fit_rows:
        print(f"L={r['legs']} {r['boundary']} {r['model']}: G_c = {r['G_c']:.6f} "
              f"k = {r['k']:.4g} x = {r['x']:.4f} sign {r['sign']} rms = {r['residual']:.2e}")
    for f in failures:
        print(f"L={f['legs']}: no fit ({f['message']})")
    return EXIT_OK


def _spectral_checks(max_spins: int) -> list[dict]:
    checks = []
    cap = min(max_spins, 12)
    for legs in range(1, cap + 1):
        for rungs in range(1, cap // legs + 1):
            for boundary in ("open", "periodic"):
                if legs * rungs < 2 or (boundary == "periodic" and rungs < 3):
                    continue
                for delta in (1.0, 1.2, 1.4):
                    spec = HamiltonianSpec(build_ladder(legs, rungs, boundary), 1.0, delta)
                    e_dense = float(np.linalg.eigvalsh(dense_hamiltonian(spec))[0])
                    err = abs(ground_state(spec).energy - e_dense)
                    checks.append({"check": "lanczos_energy", "geometry": spec.geometry.label,
                                   "delta": delta, "error": err, "pass": err <= 1e-9})
    return checks


def _restricted_checks(max_spins: int) -> list[dict]:
    checks = []
    cap = min(max_spins, FULL_MAX_SITES)
    for legs in range(1, 5):
        for rungs in range(2, cap // legs + 1, 2):
            for boundary in ("open", "periodic"):
                if boundary == "periodic" and rungs < 4:
                    continue
                geom = build_ladder(legs, rungs, boundary)
                gs = ground_state(HamiltonianSpec(geom))
                states = {"exact": (gs.state, gs.degeneracy_warning),
                          "rvb": (build_rvb_enumerated(geom).state, False)}
                for label, (state, degenerate) in states.items():
                    rep = validate_restricted_strategy(state, geom)
                    checks.append({"check": f"restricted_{label}", "geometry": geom.label,
                                   "error": abs(rep["difference"]), "pass": rep["agree"],
                                   "argmax_full": rep["argmax_full"],
                                   "argmax_restricted": rep["argmax_restricted"],
                                   "degeneracy_warning": degenerate})
    return checks


def run_validate(cfg: RunConfig, out: Path, report: dict) -> int:
    checks = []
    if cfg.what in ("rvb-recursion", "all"):
        checks += rvb_recursion_checks(cfg.max_spins)
    if cfg.what in ("spectral", "all"):
        checks += _spectral_checks(cfg.max_spins)
    if cfg.what in ("restricted", "all"):
        checks += _restricted_checks(cfg.max_spins)
    failed = [c for c in checks if not c["pass"]]
    write_json(out / "validate.json", {"checks": checks, "failed": len(failed)})
    report["checks"] = len(checks)
    report["failed_checks"] = len(failed)
    for c in failed:
        print(f"FAIL {c['check']} {c['geometry']}: error {c['error']:.3e}")
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_FAILED_CHECKS if failed else EXIT_OK


RUNNERS = {"exact-ggm": run_ggm, "rvb-ggm": run_ggm, "scan": run_ggm, "compare": run_compare,
           "fit": run_fit, "validate": run_validate}


def _versions() -> dict:
    import numba
    import scipy
    return {"ladderent": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


def run(cfg: RunConfig) -> int:
    """Execute a validated config; returns the process exit status."""
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return EXIT_USAGE
    (out / "config.txt").write_text(cfg.to_text())
    report = {"command": cfg.command, "config": cfg.to_text(), "config_sha256": cfg.digest(),
              "versions": _versions(), "skipped": [], "wall_times": {}, "status": "running"}
    start = time.perf_counter()
    code = EXIT_COMPUTE
    try:
        code = RUNNERS[cfg.command](cfg, out, report)
        report["status"] = "ok" if code == EXIT_OK else "checks-failed"
    except LadderError as exc:
        error = {"category": exc.category, "type": type(exc).__name__, "message": str(exc)}
        report["status"] = "error"
        report["error"] = error
        write_json(out / "error.json", error)
        print(json.dumps(error), file=sys.stderr)
        code = EXIT_COMPUTE
    except BaseException as exc:
        report["status"] = "error"
        report["error"] = {"category": "internal", "type": type(exc).__name__,
                           "message": str(exc)}
        raise
    finally:
        report["exit_code"] = code
        report["wall_time_total"] = time.perf_counter() - start
        write_json(out / "manifest.json", report)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except UsageError as exc:
        parser.error(str(exc))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
