"""Monte Carlo estimation of detection times and scale-sensitivity.

Trials are embarrassingly parallel.  Each trial's randomness comes from its
own stream (see :mod:`levysearch.walk`), so estimates are bit-identical for a
fixed master seed regardless of chunking or worker count.  Aggregation uses
numpy's pairwise summation over arrays assembled in trial order, which keeps
the reduction deterministic as well.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .steplaw import WalkSpec, analytics
from .target import TIE_PRECEDENCE, Target, make_ensemble
from .walk import CAP_NONE, default_caps, run_batch, trial_stream

__all__ = [
    "Estimate",
    "DetectionResult",
    "EnsembleResult",
    "SensitivityCell",
    "SensitivityReport",
    "detection_time",
    "worst_over_ensemble",
    "scale_sensitivity",
    "geometric_diameter_grid",
]

# trials per engine call; fixed so runs are reproducible under any worker count
_CHUNK = 1024

# seed-tree tags (spawn_key first element)
_KEY_ENSEMBLE = 1
_KEY_TRIALS = 2

_CENSOR_FLAG_FRACTION = 0.01


@dataclass(frozen=True, slots=True)
class Estimate:
    """Mean with uncertainty and censoring bookkeeping."""

    mean: float
    stderr: float
    n_samples: int
    n_censored: int

    @property
    def lower_bound_only(self) -> bool:
        """True when censoring exceeds 1%; the mean is then only a lower bound."""
        return self.n_censored >= _CENSOR_FLAG_FRACTION * self.n_samples


def _estimate(values: np.ndarray, n_censored: int) -> Estimate:
    n = values.size
    mean = float(values.mean()) if n else math.nan
    stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(mean, stderr, n, n_censored)


@dataclass(frozen=True)
class DetectionResult:
    """Detection-time estimate plus its companion step-count estimate.

    Carries the per-trial arrays so downstream consistency checks (the
    time-equals-steps-times-tau identity, split-half honesty) cost nothing.
    """

    time: Estimate
    steps: Estimate
    p50_time: float
    p90_time: float
    tau: float
    wald_gap: float
    wald_stderr: float
    times: np.ndarray = field(repr=False)
    step_counts: np.ndarray = field(repr=False)
    censored: np.ndarray = field(repr=False)

    def wald_ok(self, n_sigma: float = 3.0) -> bool:
        """Is mean time within ``n_sigma`` combined errors of mean steps * tau?"""
        return abs(self.wald_gap) <= n_sigma * self.wald_stderr


@dataclass(frozen=True)
class EnsembleResult:
    """Per-shape detection results at one diameter, plus the declared worst.

    ``worst_shape`` is the largest mean, except that within a two-combined-
    stderr tie band segments take precedence (they anchor the worst case).
    ``max_mean`` is always the raw maximum, whichever shape carries it.
    """

    D: float
    per_shape: dict[str, DetectionResult]
    worst_shape: str
    statistical_tie: bool

    @property
    def worst(self) -> DetectionResult:
        return self.per_shape[self.worst_shape]

    @property
    def max_mean(self) -> float:
        return max(r.time.mean for r in self.per_shape.values())


@dataclass(frozen=True)
class SensitivityCell:
    D: float
    ensemble: EnsembleResult
    ratio: float          # (D/n) * worst mean detection time
    ratio_stderr: float


@dataclass(frozen=True)
class SensitivityReport:
    """Scale-sensitivity scan: worst-case ratio to the optimal reference."""

    n: float
    D_grid: tuple[float, ...]
    cells: tuple[SensitivityCell, ...]
    phi: float
    phi_stderr: float
    argmax_D: float


def _run_chunk(args) -> tuple:
    spec, target, caps, master_seed, key, lo, hi = args
    return run_batch(spec, caps, master_seed, key, lo, hi,
                     detect_batch=target.detect_batch, side=target.center.side)


def detection_time(
    spec: WalkSpec,
    target: Target,
    n_trials: int,
    caps: tuple[int | None, float] | None,
    master_seed: int,
    *,
    workers: int = 1,
    cell_key: tuple[int, ...] = (0,),
) -> DetectionResult:
    """Expected detection time from uniformly random starts.

    Runs ``n_trials`` independent searches of ``target`` and returns the
    mean/stderr of the elapsed path time, the companion step-count estimate,
    P50/P90 quantiles (heavy tails make the mean alone a poor summary), and
    the step-time consistency gap ``mean_time - mean_steps * tau``.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    side = target.center.side
    if caps is None:
        caps = default_caps(side * side, target.diameter)
    key = (_KEY_TRIALS, *cell_key)
    tasks = [(spec, target, caps, master_seed, key, lo, min(lo + _CHUNK, n_trials))
             for lo in range(0, n_trials, _CHUNK)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]
    steps = np.concatenate([p[0] for p in parts])
    times = np.concatenate([p[1] for p in parts])
    censored = np.concatenate([p[2] for p in parts])
    n_cens = int(censored.sum())

    tau = analytics(spec).tau
    wald = times - steps * tau
    wald_gap = float(wald.mean())
    wald_stderr = float(wald.std(ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
    p50, p90 = (float(v) for v in np.percentile(times, [50.0, 90.0]))
    return DetectionResult(
        time=_estimate(times, n_cens),
        steps=_estimate(steps.astype(np.float64), n_cens),
        p50_time=p50,
        p90_time=p90,
        tau=tau,
        wald_gap=wald_gap,
        wald_stderr=wald_stderr,
        times=times,
        step_counts=steps,
        censored=censored,
    )


def _declare_worst(per_shape: dict[str, DetectionResult]) -> tuple[str, bool]:
    """Largest mean wins; within two combined stderr, segments take precedence."""
    top = max(per_shape, key=lambda s: per_shape[s].time.mean)
    t = per_shape[top].time
    tied = []
    for shape, res in per_shape.items():
        band = 2.0 * math.hypot(t.stderr, res.time.stderr)
        if t.mean - res.time.mean <= band:
            tied.append(shape)
    tie = len(tied) > 1
    for shape in TIE_PRECEDENCE:
        if shape in tied:
            return shape, tie
    return top, tie


def worst_over_ensemble(
    spec: WalkSpec,
    n: float,
    D: float,
    n_trials: int,
    caps: tuple[int | None, float] | None,
    master_seed: int,
    *,
    workers: int = 1,
    cell_index: int = 0,
    shapes: tuple[str, ...] | None = None,
) -> EnsembleResult:
    """Max detection time over the standard shape ensemble at diameter ``D``."""
    side = math.sqrt(n)
    ens_rng = trial_stream(master_seed, (_KEY_ENSEMBLE, cell_index))
    targets = make_ensemble(D, side, ens_rng)
    if shapes is not None and not any(t.kind in shapes for t in targets):
        raise ValueError(f"shape filter {shapes} matches no ensemble shape")
    per_shape: dict[str, DetectionResult] = {}
    # enumerate the full ensemble so each shape keeps its stream under filtering
    for shape_i, tgt in enumerate(targets):
        if shapes is not None and tgt.kind not in shapes:
            continue
        per_shape[tgt.kind] = detection_time(
            spec, tgt, n_trials, caps, master_seed,
            workers=workers, cell_key=(cell_index, shape_i))
    worst_shape, tie = _declare_worst(per_shape)
    return EnsembleResult(D=D, per_shape=per_shape, worst_shape=worst_shape,
                          statistical_tie=tie)


def geometric_diameter_grid(n: float) -> tuple[float, ...]:
    """Doubling grid 1, 2, 4, ... capped and terminated at sqrt(n)/2."""
    top = math.sqrt(n) / 2.0
    grid = []
    d = 1.0
    while d < top:
        grid.append(d)
        d *= 2.0
    grid.append(top)
    return tuple(grid)


def scale_sensitivity(
    spec: WalkSpec,
    n: float,
    D_grid: tuple[float, ...] | None,
    n_trials: int,
    master_seed: int,
    *,
    caps: tuple[int | None, float] | None = None,
    workers: int = 1,
    shapes: tuple[str, ...] | None = None,
) -> SensitivityReport:
    """Worst ratio of detection time to the ``n/D`` optimal reference.

    The supremum over diameters is approximated by the grid maximum; the
    supremum over shapes by the ensemble maximum.  Both approximations are
    visible in the report.
    """
    if D_grid is None:
        D_grid = geometric_diameter_grid(n)
    top = math.sqrt(n) / 2.0
    for D in D_grid:
        if not 1.0 <= D <= top * (1.0 + 1e-12):
            raise ValueError(f"diameter grid entry {D} outside [1, sqrt(n)/2]")
    cells = []
    for d_i, D in enumerate(D_grid):
        cell_caps = caps if caps is not None else default_caps(n, D)
        ens = worst_over_ensemble(spec, n, D, n_trials, cell_caps, master_seed,
                                  workers=workers, cell_index=d_i,
                                  shapes=shapes)
        ratio = (D / n) * ens.worst.time.mean
        ratio_stderr = (D / n) * ens.worst.time.stderr
        cells.append(SensitivityCell(D=D, ensemble=ens, ratio=ratio,
                                     ratio_stderr=ratio_stderr))
    best = max(range(len(cells)), key=lambda i: cells[i].ratio)
    return SensitivityReport(
        n=n,
        D_grid=tuple(D_grid),
        cells=tuple(cells),
        phi=cells[best].ratio,
        phi_stderr=cells[best].ratio_stderr,
        argmax_D=cells[best].D,
    )
