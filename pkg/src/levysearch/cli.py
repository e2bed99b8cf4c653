"""Experiment driver: config parsing, subcommands, CSV/JSON emission.

Subcommands
-----------
simulate     one detection-time estimate for a single target
sweep        detection.csv over a (mu grid) x (diameter grid) x shapes scan
sensitivity  scale-sensitivity scan at one torus size, phi summary
verify       empirical bound checks, one JSON per check plus checks.csv
fig2         the desk-scale reproduction artifacts (mu_sensitivity.csv from
             the full ensemble, heatmap.csv from square targets)

All outputs are deterministic for a fixed (config, seed, worker count): CSV
floats carry 17 significant digits, row order is fixed, and the run header
JSON records everything needed to reproduce bit-exactly.  Exit codes:
0 success, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from . import __version__, theory
from .errors import ConfigError
from .estimator import (
    detection_time,
    geometric_diameter_grid,
    scale_sensitivity,
    worst_over_ensemble,
)
from .steplaw import WalkSpec, analytics
from .target import ENSEMBLE_SHAPES, make_ensemble
from .walk import default_caps, trial_stream

DETECTION_COLUMNS = [
    "run_id", "n", "walk_kind", "mu", "L", "q", "ell", "D", "shape",
    "n_trials", "n_censored", "mean_time", "stderr_time", "mean_steps",
    "stderr_steps", "p50_time", "p90_time", "tau_analytic", "ratio_to_opt",
]
HEATMAP_COLUMNS = ["mu", "D", "ratio_to_opt"]
MU_SENSITIVITY_COLUMNS = ["mu", "phi", "phi_stderr", "argmax_D"]
CHECKS_COLUMNS = ["name", "passed", "n_probes", "stat_min", "stat_max",
                  "detail_file"]

FIG2_MU_GRID = tuple(round(1.2 + 0.2 * i, 1) for i in range(10))
FIG2_D_GRID = (1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 18.0, 25.0, 35.0, 50.0)

VERIFY_CHECKS = ("lb", "ub", "monotonicity", "distance", "projection",
                 "scaling")
# "scaling" is hours-scale; not in the default set
DEFAULT_CHECKS = ("lb", "ub", "monotonicity", "distance", "projection")

_WALK_KINDS = ("levy", "two_scales", "fixed")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str = "simulate"
    n: float = 1.0e4
    walk: str = "levy"
    mu: float = 2.0
    L: float = 100.0
    q: float = 0.1
    ell: float = 1.0
    D: float = 5.0
    D_grid: tuple[float, ...] | None = None
    mu_grid: tuple[float, ...] | None = None
    shapes: tuple[str, ...] = ENSEMBLE_SHAPES
    shape: str = "disc"
    n_trials: int = 500
    max_steps: int | None = None
    max_time: float | None = None
    seed: int = 1
    workers: int = 1
    out: str = "results"
    checks: tuple[str, ...] = DEFAULT_CHECKS
    n_samples: int | None = None

    def caps(self, D: float) -> tuple[int | None, float]:
        if self.max_steps is None and self.max_time is None:
            return default_caps(self.n, D)
        max_time = self.max_time if self.max_time is not None \
            else default_caps(self.n, D)[1]
        return (self.max_steps, max_time)

    def walk_spec(self, n: float | None = None) -> WalkSpec:
        n = self.n if n is None else n
        if self.walk == "levy":
            return WalkSpec.levy(self.mu, math.sqrt(n) / 2.0)
        if self.walk == "two_scales":
            return WalkSpec.two_scales(self.L, self.q)
        return WalkSpec.fixed(self.ell)


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_grid(key: str, raw: str) -> tuple[float, ...]:
    return tuple(_parse_float(key, part) for part in raw.split(",") if part.strip())


def _parse_names(key: str, raw: str, allowed: tuple[str, ...]) -> tuple[str, ...]:
    names = tuple(p.strip() for p in raw.split(",") if p.strip())
    for name in names:
        if name not in allowed:
            raise ConfigError(f"{key}: unknown value {name!r}; allowed: "
                              f"{', '.join(allowed)}")
    return names


_PARSERS = {
    "n": lambda r: _parse_float("n", r),
    "walk": lambda r: r.strip(),
    "mu": lambda r: _parse_float("mu", r),
    "L": lambda r: _parse_float("L", r),
    "q": lambda r: _parse_float("q", r),
    "ell": lambda r: _parse_float("ell", r),
    "D": lambda r: _parse_float("D", r),
    "D_grid": lambda r: _parse_grid("D_grid", r),
    "mu_grid": lambda r: _parse_grid("mu_grid", r),
    "shapes": lambda r: _parse_names("shapes", r, ENSEMBLE_SHAPES),
    "shape": lambda r: r.strip(),
    "n_trials": lambda r: _parse_int("n_trials", r),
    "max_steps": lambda r: _parse_int("max_steps", r),
    "max_time": lambda r: _parse_float("max_time", r),
    "seed": lambda r: _parse_int("seed", r),
    "workers": lambda r: _parse_int("workers", r),
    "out": lambda r: r.strip(),
    "checks": lambda r: _parse_names("checks", r, VERIFY_CHECKS),
    "n_samples": lambda r: _parse_int("n_samples", r),
}


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.n <= 4.0:
        raise ConfigError(f"n: torus area must exceed 4, got {cfg.n}")
    if cfg.walk not in _WALK_KINDS:
        raise ConfigError(f"walk: unknown kind {cfg.walk!r}; allowed: "
                          f"{', '.join(_WALK_KINDS)}")
    if cfg.walk == "levy" and not 1.0 < cfg.mu <= 3.0:
        raise ConfigError(f"mu: levy exponent must be in (1, 3], got {cfg.mu}")
    if cfg.walk == "two_scales":
        if not cfg.L > 1.0:
            raise ConfigError(f"L: must exceed 1, got {cfg.L}")
        if not 0.0 < cfg.q < 1.0:
            raise ConfigError(f"q: must be in (0, 1), got {cfg.q}")
    if cfg.walk == "fixed" and not cfg.ell >= 1.0:
        raise ConfigError(f"ell: must be >= 1, got {cfg.ell}")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError(f"seed: must be a 64-bit unsigned integer, got {cfg.seed}")
    if cfg.n_trials < 1:
        raise ConfigError(f"n_trials: must be >= 1, got {cfg.n_trials}")
    if cfg.workers < 1:
        raise ConfigError(f"workers: must be >= 1, got {cfg.workers}")
    if cfg.shape not in ENSEMBLE_SHAPES:
        raise ConfigError(f"shape: unknown value {cfg.shape!r}; allowed: "
                          f"{', '.join(ENSEMBLE_SHAPES)}")
    if cfg.max_steps is not None and cfg.max_steps < 0:
        raise ConfigError(f"max_steps: must be non-negative, got {cfg.max_steps}")
    if cfg.max_time is not None and cfg.max_time <= 0:
        raise ConfigError(f"max_time: must be positive, got {cfg.max_time}")
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat ``key=value`` config format.

    One pair per line; ``#`` starts a comment; unknown keys are errors (no
    silent typo absorption).  The levy cutoff is always ``sqrt(n)/2`` on the
    torus, so an ``ell_max`` key is rejected outright.
    """
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key=value, got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key == "ell_max":
            raise ConfigError(
                "ell_max: the cutoff is forced to sqrt(n)/2 on the torus and "
                "cannot be overridden")
        if key not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _PARSERS[key](raw)
    return _validate(ExperimentConfig(**values))


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])


def _run_id(cfg: ExperimentConfig) -> str:
    # identifies the experiment: storage location and parallelism are
    # excluded (results are worker-count invariant by construction)
    doc = asdict(cfg)
    doc.pop("out")
    doc.pop("workers")
    blob = json.dumps(doc, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _write_header(path: Path, cfg: ExperimentConfig, results: dict) -> None:
    doc = {
        "version": __version__,
        "run_id": _run_id(cfg),
        "command": cfg.command,
        "config": asdict(cfg),
        "master_seed": cfg.seed,
        "workers": cfg.workers,
        "results": results,
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str)
                    + "\n", encoding="utf-8")


def _detection_row(cfg: ExperimentConfig, spec: WalkSpec, D: float, shape: str,
                   res) -> dict:
    ratio = res.time.mean * max(D, 1.0) / cfg.n   # D < 1 clamps to the D=1 bucket
    return {
        "run_id": _run_id(cfg),
        "n": cfg.n,
        "walk_kind": spec.kind,
        "mu": spec.mu if spec.kind == "levy" else "",
        "L": spec.L if spec.kind == "two_scales" else "",
        "q": spec.q if spec.kind == "two_scales" else "",
        "ell": spec.ell if spec.kind == "fixed" else "",
        "D": D,
        "shape": shape,
        "n_trials": res.time.n_samples,
        "n_censored": res.time.n_censored,
        "mean_time": res.time.mean,
        "stderr_time": res.time.stderr,
        "mean_steps": res.steps.mean,
        "stderr_steps": res.steps.stderr,
        "p50_time": res.p50_time,
        "p90_time": res.p90_time,
        "tau_analytic": res.tau,
        "ratio_to_opt": ratio,
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _single_target(cfg: ExperimentConfig, shape: str, D: float, cell: int):
    side = math.sqrt(cfg.n)
    rng = trial_stream(cfg.seed, (1, cell))
    ensemble = make_ensemble(D, side, rng)
    for target in ensemble:
        if target.kind == shape:
            return target
    raise ConfigError(f"shape: {shape!r} not in the ensemble")


def _cmd_simulate(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], dict]:
    spec = cfg.walk_spec()
    target = _single_target(cfg, cfg.shape, cfg.D, 0)
    res = detection_time(spec, target, cfg.n_trials, cfg.caps(cfg.D), cfg.seed,
                         workers=cfg.workers, cell_key=(0, 0))
    row = _detection_row(cfg, spec, cfg.D, cfg.shape, res)
    csv_path = out / "detection.csv"
    _write_csv(csv_path, DETECTION_COLUMNS, [row])
    results = {
        "mean_time": res.time.mean,
        "stderr_time": res.time.stderr,
        "tau_analytic": res.tau,
        "wald_gap": res.wald_gap,
        "wald_stderr": res.wald_stderr,
        "lower_bound_only": res.time.lower_bound_only,
    }
    print(f"simulate: mean detection time {res.time.mean:.6g} "
          f"(stderr {res.time.stderr:.3g}, tau {res.tau:.6g}, "
          f"{res.time.n_censored} censored)")
    return [csv_path], results


def _cmd_sweep(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], dict]:
    if cfg.walk != "levy":
        raise ConfigError("walk: sweep scans the levy exponent grid; "
                          "set walk=levy")
    mu_grid = cfg.mu_grid or FIG2_MU_GRID
    D_grid = cfg.D_grid or geometric_diameter_grid(cfg.n)
    rows = []
    for mu in mu_grid:
        spec = WalkSpec.levy(mu, math.sqrt(cfg.n) / 2.0)
        for d_i, D in enumerate(D_grid):
            ens = worst_over_ensemble(
                spec, cfg.n, D, cfg.n_trials, cfg.caps(D), cfg.seed,
                workers=cfg.workers, cell_index=d_i, shapes=cfg.shapes)
            for shape in cfg.shapes:
                if shape in ens.per_shape:
                    rows.append(_detection_row(cfg, spec, D, shape,
                                               ens.per_shape[shape]))
    csv_path = out / "detection.csv"
    _write_csv(csv_path, DETECTION_COLUMNS, rows)
    print(f"sweep: wrote {len(rows)} rows")
    return [csv_path], {"rows": len(rows)}


def _cmd_sensitivity(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], dict]:
    spec = cfg.walk_spec()
    report = scale_sensitivity(
        spec, cfg.n, cfg.D_grid, cfg.n_trials, cfg.seed,
        caps=None if cfg.max_time is None and cfg.max_steps is None
        else cfg.caps(1.0),
        workers=cfg.workers)
    rows = []
    for cell in report.cells:
        worst = cell.ensemble.worst
        row = _detection_row(cfg, spec, cell.D, cell.ensemble.worst_shape, worst)
        rows.append(row)
    csv_path = out / "sensitivity.csv"
    _write_csv(csv_path, DETECTION_COLUMNS, rows)
    results = {
        "phi": report.phi,
        "phi_stderr": report.phi_stderr,
        "argmax_D": report.argmax_D,
        "D_grid": list(report.D_grid),
        "statistical_ties": [c.D for c in report.cells
                             if c.ensemble.statistical_tie],
    }
    print(f"sensitivity: phi = {report.phi:.6g} +- {report.phi_stderr:.3g} "
          f"at D = {report.argmax_D:g}")
    return [csv_path], results


def _cmd_fig2(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], dict]:
    """Desk-scale reproduction: sensitivity curve and square heat map.

    Default grids target a 100x100 torus.  With the default 500 trials per
    cell the full run takes roughly an hour of CPU time; trial counts are a
    config knob because the acceptance suite runs sharper (and the contract
    tests far smaller) grids.
    """
    if cfg.walk != "levy":
        raise ConfigError("walk: fig2 scans levy walks; set walk=levy")
    mu_grid = cfg.mu_grid or FIG2_MU_GRID
    D_grid = cfg.D_grid or FIG2_D_GRID
    side = math.sqrt(cfg.n)
    heat_rows = []
    mu_rows = []
    for mu in mu_grid:
        spec = WalkSpec.levy(mu, side / 2.0)
        report = scale_sensitivity(spec, cfg.n, D_grid, cfg.n_trials, cfg.seed,
                                   workers=cfg.workers)
        mu_rows.append({"mu": mu, "phi": report.phi,
                        "phi_stderr": report.phi_stderr,
                        "argmax_D": report.argmax_D})
        for d_i, D in enumerate(D_grid):
            square = _single_target(cfg, "square", D, d_i)
            res = detection_time(spec, square, cfg.n_trials, cfg.caps(D),
                                 cfg.seed, workers=cfg.workers,
                                 cell_key=(1000 + d_i, 0))
            heat_rows.append({"mu": mu, "D": D,
                              "ratio_to_opt": res.time.mean * max(D, 1.0) / cfg.n})
    heat_path = out / "heatmap.csv"
    mu_path = out / "mu_sensitivity.csv"
    _write_csv(heat_path, HEATMAP_COLUMNS, heat_rows)
    _write_csv(mu_path, MU_SENSITIVITY_COLUMNS, mu_rows)
    argmin = min(mu_rows, key=lambda r: r["phi"])["mu"]
    print(f"fig2: phi minimum at mu = {argmin:g}; "
          f"{len(heat_rows)} heat-map cells")
    return [heat_path, mu_path], {"argmin_mu": argmin,
                                  "mu_grid": list(mu_grid),
                                  "D_grid": list(D_grid)}


def _cmd_verify(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], dict]:
    ns = cfg.n_samples
    results = []
    for name in cfg.checks:
        if name == "lb":
            checks = [theory.check_lemma_lb(
                n_samples=ns or 1_000_000, master_seed=cfg.seed + 10)]
        elif name == "ub":
            checks = [theory.check_lemma_ub(
                n_samples=ns or 4_000_000, master_seed=cfg.seed + 11)]
        elif name == "monotonicity":
            checks = [theory.check_monotonicity(
                n_samples=ns or 1_000_000, master_seed=cfg.seed + 12)]
        elif name == "distance":
            checks = [theory.check_distance_claims(
                m=m, n_samples=ns or 1_000_000, master_seed=cfg.seed + 13)
                for m in (8, 32, 128)]
        elif name == "projection":
            checks = [theory.check_projection(
                mu, n_samples=ns or 10_000_000, master_seed=cfg.seed + 14)
                for mu in (1.5, 2.0, 2.5)]
        else:   # scaling
            checks = [theory.check_lower_bound_scaling(
                family, n_trials=cfg.n_trials, master_seed=cfg.seed + 15,
                workers=cfg.workers)
                for family in theory.SCALING_FAMILIES]
        results.extend(checks)

    paths = []
    rows = []
    for check in results:
        detail = out / f"check_{check.name}.json"
        detail.write_text(json.dumps(check.to_jsonable(), indent=2,
                                     sort_keys=True) + "\n", encoding="utf-8")
        paths.append(detail)
        rows.append({
            "name": check.name,
            "passed": check.passed,
            "n_probes": len(check.statistic),
            "stat_min": min(check.statistic),
            "stat_max": max(check.statistic),
            "detail_file": detail.name,
        })
        print(f"verify: {check.name}: {'PASS' if check.passed else 'FAIL'}")
    csv_path = out / "checks.csv"
    _write_csv(csv_path, CHECKS_COLUMNS, rows)
    paths.append(csv_path)
    return paths, {"passed": all(c.passed for c in results),
                   "checks": [c.name for c in results]}


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "sensitivity": _cmd_sensitivity,
    "verify": _cmd_verify,
    "fig2": _cmd_fig2,
}


# artifacts each command may create; removed on failure so no partial output
# survives a failed run
_ARTIFACTS = {
    "simulate": ("detection.csv",),
    "sweep": ("detection.csv",),
    "sensitivity": ("sensitivity.csv",),
    "verify": ("checks.csv", "check_*.json"),
    "fig2": ("heatmap.csv", "mu_sensitivity.csv"),
}


def _cleanup(cfg: ExperimentConfig, out: Path) -> None:
    for pattern in _ARTIFACTS[cfg.command]:
        for path in out.glob(pattern):
            path.unlink(missing_ok=True)
    (out / f"{cfg.command}_header.json").unlink(missing_ok=True)


def run(cfg: ExperimentConfig) -> int:
    """Execute a validated config; returns the process exit code."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    header = out / f"{cfg.command}_header.json"
    try:
        tau = analytics(cfg.walk_spec()).tau if cfg.command != "verify" else None
        paths, results = _COMMANDS[cfg.command](cfg, out)
        if tau is not None:
            results = {"tau_analytic": tau, **results}
        _write_header(header, cfg, results)
        return 0
    except ConfigError:
        _cleanup(cfg, out)
        raise
    except ValueError as exc:
        _cleanup(cfg, out)
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:                     # noqa: BLE001
        _cleanup(cfg, out)
        print(f"error: {exc}", file=sys.stderr)
        return 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levysearch",
        description="Intermittent random-walk search experiments on a torus")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="key=value config file")
        p.add_argument("--n", type=str)
        p.add_argument("--walk", type=str)
        p.add_argument("--mu", type=str)
        p.add_argument("--L", type=str)
        p.add_argument("--q", type=str)
        p.add_argument("--ell", type=str)
        p.add_argument("--D", type=str)
        p.add_argument("--D-grid", dest="D_grid", type=str)
        p.add_argument("--mu-grid", dest="mu_grid", type=str)
        p.add_argument("--shapes", type=str)
        p.add_argument("--shape", type=str)
        p.add_argument("--trials", dest="n_trials", type=str)
        p.add_argument("--max-steps", dest="max_steps", type=str)
        p.add_argument("--max-time", dest="max_time", type=str)
        p.add_argument("--seed", type=str)
        p.add_argument("--workers", type=str)
        p.add_argument("--out", type=str)
        p.add_argument("--checks", type=str)
        p.add_argument("--n-samples", dest="n_samples", type=str)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        else:
            cfg = ExperimentConfig()
        overrides = {}
        for key in _PARSERS:
            raw = getattr(args, key, None)
            if raw is not None:
                overrides[key] = _PARSERS[key](raw)
        cfg = _validate(replace(cfg, command=args.command, **overrides))
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
