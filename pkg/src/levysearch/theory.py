"""Empirical verification of distributional bounds for the plane process.

Each check simulates the walk on the infinite plane (or scans torus
experiments), computes the statistic a claimed bound constrains, and records
pass/fail against thresholds frozen in ``calibration.json``.  The bounds in
question are existential (constants unspecified), so the calibrated constants
were fixed once at small scale and are then asserted at larger scale; they are
artifacts of this implementation, recorded in every result.

Every check is a pure function of (walk spec, probe grid, seed): reruns
reproduce statistics and verdicts exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import UnsupportedKindError
from .estimator import Estimate, SensitivityReport, scale_sensitivity
from .steplaw import WalkSpec, analytics, draws_per_step, normalization, sample_lengths
from .walk import run_batch, trial_stream

__all__ = [
    "RadialHistogram",
    "BoundCheck",
    "radial_pdf",
    "monotonicity_report",
    "check_monotonicity",
    "check_lemma_lb",
    "check_lemma_ub",
    "check_distance_claims",
    "check_projection",
    "check_lower_bound_scaling",
    "scaling_family",
    "SCALING_FAMILIES",
    "time_to_distance",
    "fit_loglog",
    "get_calibration",
]

_TWO_PI = 2.0 * math.pi
_CHUNK = 100_000

_DEFAULT_PLANE_ELL_MAX = 1.0e4


@lru_cache(maxsize=1)
def get_calibration() -> dict:
    """Frozen constants for the existential bounds; see the file for values."""
    path = Path(__file__).with_name("calibration.json")
    return json.loads(path.read_text())


@dataclass(frozen=True)
class RadialHistogram:
    """Annulus-binned sample counts of the walk's distance from the origin."""

    m: int
    bin_width: float
    counts: np.ndarray = field(repr=False)
    overflow: int
    n_samples: int
    density: np.ndarray = field(repr=False)   # per-annulus 2-D density estimate
    edges: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of one empirical bound verification."""

    name: str
    grid: dict
    statistic: list[float]
    criterion: str
    passed: bool
    calibration: dict
    details: dict = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        def conv(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            if isinstance(v, dict):
                return {k: conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            return v
        return {
            "name": self.name,
            "grid": conv(self.grid),
            "statistic": conv(self.statistic),
            "criterion": self.criterion,
            "passed": bool(self.passed),
            "calibration": conv(self.calibration),
            "details": conv(self.details),
        }


def fit_loglog(x, y) -> tuple[float, float, float]:
    """OLS fit of log(y) on log(x); returns (slope, intercept, R^2)."""
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    if lx.size < 2:
        raise ValueError("need at least two points for a log-log fit")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


# ---------------------------------------------------------------------------
# plane-walk sampling kernels
#
# Chunked: chunk c of a simulation keyed by `key` uses the stream
# (master_seed, (*key, c)) and draws (count, draws_per_step) uniforms per
# step, so results are reproducible for a fixed chunk size (a module
# constant) under any worker split.
# ---------------------------------------------------------------------------


def _plane_chunk(
    spec: WalkSpec,
    m: int,
    count: int,
    gen: np.random.Generator,
    *,
    want_max: bool = False,
    leq2_threshold: float | None = None,
):
    """One chunk of ``count`` plane walks run for ``m`` steps.

    Returns (x, y, max_r2 | None, per_step_leq_counts | None): the final
    coordinates plus, when asked, the running max of |Z(s)|^2 and per-step
    counts of walks with ``|Z(s)|^2 <= leq2_threshold``.
    """
    dps = draws_per_step(spec)
    x = np.zeros(count)
    y = np.zeros(count)
    max_r2 = np.zeros(count) if want_max else None
    leq = np.zeros(m, dtype=np.int64) if leq2_threshold is not None else None
    for s in range(m):
        u = gen.random((count, dps))
        if spec.kind == "fixed":
            lengths: np.ndarray | float = spec.ell
            u_theta = u[:, 0]
        else:
            lengths = sample_lengths(spec, u[:, 0])
            u_theta = u[:, 1]
        theta = (u_theta * _TWO_PI).astype(np.float32)
        x += lengths * np.cos(theta)
        y += lengths * np.sin(theta)
        if want_max or leq is not None:
            r2 = x * x + y * y
            if want_max:
                np.maximum(max_r2, r2, out=max_r2)
            if leq is not None:
                leq[s] = int((r2 <= leq2_threshold).sum())
    return x, y, max_r2, leq


def _iter_chunks(n_samples: int):
    lo = 0
    c = 0
    while lo < n_samples:
        yield c, min(_CHUNK, n_samples - lo)
        lo += _CHUNK
        c += 1


def radial_pdf(
    spec: WalkSpec,
    m: int,
    n_samples: int,
    bin_width: float,
    master_seed: int,
    *,
    r_max: float | None = None,
    key: tuple[int, ...] = (40,),
) -> RadialHistogram:
    """Histogram of |Z(m)| over plane walks, with the implied 2-D density.

    Only laws with a non-increasing step density qualify (the radial
    monotonicity property needs it), which excludes the two-scales law.
    """
    if spec.kind == "two_scales":
        raise UnsupportedKindError(
            "two_scales step law is not non-increasing; radial pdf check "
            "does not apply")
    if m < 1:
        raise ValueError(f"step index must be >= 1, got {m}")
    if bin_width <= 0.0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    if r_max is None:
        r_max = 64.0 * m
    edges = np.arange(0.0, r_max + bin_width, bin_width)
    counts = np.zeros(edges.size - 1, dtype=np.int64)
    total = 0
    for c, size in _iter_chunks(n_samples):
        gen = trial_stream(master_seed, (*key, m, c))
        x, y, _, _ = _plane_chunk(spec, m, size, gen)
        counts += np.histogram(np.hypot(x, y), bins=edges)[0]
        total += size
    areas = math.pi * (edges[1:] ** 2 - edges[:-1] ** 2)
    density = counts / (total * areas)
    return RadialHistogram(m=m, bin_width=bin_width, counts=counts,
                           overflow=total - int(counts.sum()),
                           n_samples=total, density=density, edges=edges)


def monotonicity_report(hist: RadialHistogram, n_sigma: float = 3.0) -> dict:
    """Adjacent-annulus increase violations and the 1/(pi r^2) ceiling check.

    A pair violates when the outer density exceeds the inner by more than
    ``n_sigma`` Poisson standard deviations; under a truly non-increasing
    density the number of violations stays within the false-positive budget
    of the test.  The ceiling applies to annuli with inner radius >= 1.
    """
    d = hist.density
    areas = math.pi * (hist.edges[1:] ** 2 + 0.0) - math.pi * hist.edges[:-1] ** 2
    var = hist.counts / (hist.n_samples * areas) ** 2
    diff = d[1:] - d[:-1]
    sigma = np.sqrt(var[1:] + var[:-1])
    increases = diff > n_sigma * sigma
    evaluated = (hist.counts[1:] + hist.counts[:-1]) > 0
    n_pairs = int(evaluated.sum())
    n_viol = int((increases & evaluated).sum())
    # one-sided 3-sigma false-positive rate per evaluated pair
    fp_rate = 0.5 * math.erfc(n_sigma / math.sqrt(2.0))
    budget = max(2, math.ceil(fp_rate * n_pairs))

    r_in = hist.edges[:-1]
    eligible = r_in >= 1.0
    ceiling = np.full_like(d, np.inf)
    ceiling[eligible] = 1.0 / (math.pi * r_in[eligible] ** 2)
    over = d > ceiling + n_sigma * np.sqrt(var)
    n_ceiling_viol = int(over.sum())
    return {
        "n_pairs": n_pairs,
        "violations": n_viol,
        "budget": budget,
        "monotone_ok": n_viol <= budget,
        "ceiling_violations": n_ceiling_viol,
        "ceiling_ok": n_ceiling_viol == 0,
    }


def check_monotonicity(
    m_values: tuple[int, ...] = (1, 8, 32),
    n_samples: int = 1_000_000,
    master_seed: int = 2026,
    *,
    spec: WalkSpec | None = None,
) -> BoundCheck:
    """Radial density of Z(m) is non-increasing and below 1/(pi r^2)."""
    cal = get_calibration()["monotonicity"]
    if spec is None:
        spec = WalkSpec.cauchy(cal["ell_max"])
    per_m = []
    stat = []
    for m in m_values:
        width = max(0.05, m / 160.0)
        hist = radial_pdf(spec, m, n_samples, width, master_seed, key=(41,))
        rep = monotonicity_report(hist, cal["n_sigma"])
        rep["m"] = m
        rep["bin_width"] = width
        per_m.append(rep)
        stat.append(float(rep["violations"]))
    passed = all(r["monotone_ok"] and r["ceiling_ok"] for r in per_m)
    return BoundCheck(
        name="radial_monotonicity",
        grid={"m": list(m_values)},
        statistic=stat,
        criterion="adjacent-annulus increases within the 3-sigma budget and "
                  "density <= 1/(pi r_inner^2) for r_inner >= 1",
        passed=passed,
        calibration=dict(cal),
        details={"per_m": per_m, "n_samples": n_samples,
                 "master_seed": master_seed},
    )


def check_lemma_lb(
    m_grid: tuple[int, ...] = (1, 8, 32, 128),
    n_samples: int = 1_000_000,
    master_seed: int = 2027,
    *,
    spec: WalkSpec | None = None,
) -> BoundCheck:
    """The walk sits in the ring [m, c'*m] at step m with probability >= floor.

    This is the simulable core of the density lower bound c/m^2: constant
    mass spread over an area of order m^2.  At m=1 the ring probability has
    the closed form a*(1 - 1/c'), which anchors the statistical suite.
    """
    cal = get_calibration()["lemma_lb"]
    if spec is None:
        spec = WalkSpec.cauchy(cal["ell_max"])
    c_prime = cal["c_prime"]
    floor = cal["floor"]
    alpha = cal["alpha"]
    for m in m_grid:
        if not 1 <= m <= alpha * spec.ell_max:
            raise ValueError(f"probe m={m} outside [1, alpha*ell_max] with "
                             f"alpha={alpha}, ell_max={spec.ell_max}")
    q_values = []
    stderrs = []
    anchor: dict = {}
    for m in m_grid:
        hits = 0
        total = 0
        for c, size in _iter_chunks(n_samples):
            gen = trial_stream(master_seed, (42, m, c))
            x, y, _, _ = _plane_chunk(spec, m, size, gen)
            r2 = x * x + y * y
            hits += int(((r2 >= m * m) & (r2 <= (c_prime * m) ** 2)).sum())
            total += size
        q = hits / total
        q_values.append(q)
        stderrs.append(math.sqrt(max(q * (1.0 - q), 1e-12) / total))
        if m == 1:
            expected = normalization(spec) * (1.0 - 1.0 / c_prime)
            z = (q - expected) / stderrs[-1]
            anchor = {"expected": expected, "observed": q, "z": z,
                      "ok": abs(z) <= 3.0}
    passed = min(q_values) >= floor and (not anchor or anchor["ok"])
    return BoundCheck(
        name="lemma_lb_ring",
        grid={"m": list(m_grid)},
        statistic=q_values,
        criterion=f"Pr(|Z(m)| in [m, {c_prime}m]) >= {floor} for all probes"
                  " (analytic anchor at m=1 within 3 stderr)",
        passed=passed,
        calibration=dict(cal),
        details={"stderr": stderrs, "anchor": anchor, "n_samples": n_samples,
                 "master_seed": master_seed},
    )


def check_lemma_ub(
    m_grid: tuple[int, ...] = (8, 16, 32, 64, 128, 256, 512),
    n_samples: int = 4_000_000,
    master_seed: int = 2028,
    *,
    spec: WalkSpec | None = None,
) -> BoundCheck:
    """Return probability to the unit ball obeys the log^2(m)/m^2 envelope.

    s(m) = Pr(|Z(m)| <= 1) * m^2 / log^2(m) must show no increasing trend and
    stay below the calibrated ceiling.  For large m the unit-ball probability
    is too small to resolve, so the probe radius widens to rho and the
    estimate Pr(|Z(m)| <= rho)/rho^2 stands in (by radial monotonicity it can
    only under-estimate); every widening is recorded.
    """
    cal = get_calibration()["lemma_ub"]
    if spec is None:
        spec = WalkSpec.cauchy(cal["ell_max"])
    if len(m_grid) < 5:
        raise ValueError("trend test needs at least 5 probe points")
    alpha = cal["alpha"]
    for m in m_grid:
        if not 2 <= m <= alpha * spec.ell_max:
            raise ValueError(f"probe m={m} outside [2, alpha*ell_max]")
    rhos = []
    s_values = []
    hits_list = []
    offset = {}
    # off-origin spot check at the first probe: by radial monotonicity the
    # return probability to a ball around any x with |x| > 1 cannot exceed
    # the one at the origin
    off_m = m_grid[0]
    off_x, off_y = 3.0 / math.sqrt(2.0), 3.0 / math.sqrt(2.0)
    for m in m_grid:
        rho = cal["rho_small"] if m < cal["rho_switch_m"] else cal["rho_large"]
        hits = 0
        hits_off = 0
        total = 0
        for c, size in _iter_chunks(n_samples):
            gen = trial_stream(master_seed, (43, m, c))
            x, y, _, _ = _plane_chunk(spec, m, size, gen)
            r2 = x * x + y * y
            hits += int((r2 <= rho * rho).sum())
            if m == off_m:
                dx, dy = x - off_x, y - off_y
                hits_off += int((dx * dx + dy * dy <= rho * rho).sum())
            total += size
        p_hat = hits / total / (rho * rho)
        s_values.append(p_hat * m * m / math.log(m) ** 2)
        rhos.append(rho)
        hits_list.append(hits)
        if m == off_m:
            sigma = math.sqrt(max(hits, 1) + max(hits_off, 1))
            offset = {
                "m": m, "norm_x": math.hypot(off_x, off_y),
                "hits_origin": hits, "hits_offset": hits_off,
                "ok": hits_off <= hits * 1.05 + 3.0 * sigma,
            }
    slope, intercept, r2fit = fit_loglog(m_grid, s_values)
    passed = (slope <= cal["slope_max"] and max(s_values) <= cal["ceiling"]
              and offset["ok"])
    return BoundCheck(
        name="lemma_ub_return",
        grid={"m": list(m_grid)},
        statistic=s_values,
        criterion=f"log-log slope of s(m) <= {cal['slope_max']} and "
                  f"max s(m) <= {cal['ceiling']}",
        passed=passed,
        calibration=dict(cal),
        details={"slope": slope, "intercept": intercept, "r2": r2fit,
                 "rho": rhos, "hits": hits_list, "offset_check": offset,
                 "n_samples": n_samples, "master_seed": master_seed},
    )


def check_distance_claims(
    m: int = 32,
    d_grid: tuple[float, ...] | None = None,
    n_samples: int = 1_000_000,
    master_seed: int = 2029,
    *,
    spec: WalkSpec | None = None,
) -> BoundCheck:
    """Excursion claims: the walk goes far fast, yet rarely strays too far.

    Verifies (i) Pr(exists s<=m: |Z(s)| >= d) >= 1 - e^{-cm/d}, including the
    high-probability point d = c'' m / log m where the failure mass must be
    below 10/m^2, and (ii) Pr(|Z(s)| <= c_far * m) >= delta for every s <= m.
    """
    cal = get_calibration()["distance"]
    if spec is None:
        spec = WalkSpec.cauchy(cal["ell_max"])
    lm = spec.max_step_length()
    if d_grid is None:
        top = lm / 3.0
        d_grid = []
        d = 1.0
        while d <= top and len(d_grid) < 12:
            d_grid.append(d)
            d *= 2.0
        d_grid = tuple(d_grid)
    for d in d_grid:
        if not 1.0 <= d <= lm / 3.0:
            raise ValueError(f"probe distance {d} outside [1, ell_max/3]")
    d_star = max(1.0, cal["c_doubleprime"] * m / math.log(m))
    probes = tuple(sorted(set(d_grid) | {d_star}))
    c_far = cal["c_far"]
    leq_counts = np.zeros(m, dtype=np.int64)
    exceed = np.zeros(len(probes), dtype=np.int64)
    total = 0
    for c, size in _iter_chunks(n_samples):
        gen = trial_stream(master_seed, (44, m, c))
        _, _, max_r2, leq = _plane_chunk(spec, m, size, gen,
                                         want_max=True,
                                         leq2_threshold=(c_far * m) ** 2)
        for i, d in enumerate(probes):
            exceed[i] += int((max_r2 >= d * d).sum())
        leq_counts += leq
        total += size
    p_reach = exceed / total
    stay_frac = leq_counts / total
    # exponential-deficiency fit: -log(1 - P) ~ c * m/d on unsaturated probes
    ys, xs = [], []
    for d, p in zip(probes, p_reach):
        miss = 1.0 - p
        if 0.0 < miss < 1.0:
            xs.append(m / d)
            ys.append(-math.log(miss))
    c_fit = float(np.dot(xs, ys) / np.dot(xs, xs)) if xs else math.nan
    p_star = float(p_reach[probes.index(d_star)])
    star_ok = p_star >= 1.0 - 10.0 / m**2
    stay_ok = float(stay_frac.min()) >= cal["delta"]
    return BoundCheck(
        name=f"distance_claims_m{m}",
        grid={"d": list(probes), "m": [m]},
        statistic=[float(p) for p in p_reach],
        criterion=f"Pr(reach d*={d_star:.3g} by step m) >= 1 - 10/m^2 and "
                  f"Pr(|Z(s)| <= {c_far}m) >= {cal['delta']} for all s <= m",
        passed=bool(star_ok and stay_ok),
        calibration=dict(cal),
        details={"d_star": d_star, "p_star": p_star,
                 "min_stay_fraction": float(stay_frac.min()),
                 "stay_fraction": stay_frac.tolist(),
                 "c_fit": c_fit, "n_samples": n_samples,
                 "master_seed": master_seed},
    )


def check_projection(
    mu: float,
    n_samples: int = 10_000_000,
    master_seed: int = 2030,
    *,
    ell_max: float | None = None,
) -> BoundCheck:
    """Single-step axis projections keep the power-law exponent mu.

    Fits the tail exponent of |V_1| from the empirical complementary CDF on
    a log grid inside [fit_lo, ell_max/2], checks sign symmetry, and compares
    the projected second moment between ell_max/10 and ell_max against the
    displayed order (ratio (L2/L1)^(3-mu), or log L2/log L1 at mu=3).
    """
    cal = get_calibration()["projection"]
    if ell_max is None:
        ell_max = cal["ell_max"]
    if not 1.0 < mu <= 3.0:
        raise ValueError(f"mu must be in (1, 3], got {mu}")
    if ell_max < 1.0e3:
        raise ValueError("need ell_max >= 1e3 for a usable fit window")
    spec = WalkSpec.levy(mu, ell_max)
    edges = np.geomspace(1.0, ell_max, 161)
    counts = np.zeros(edges.size - 1, dtype=np.int64)
    v_sum = 0.0
    v_sq = 0.0
    total = 0
    for c, size in _iter_chunks(n_samples):
        gen = trial_stream(master_seed, (45, c))
        u = gen.random((size, 2))
        lengths = sample_lengths(spec, u[:, 0])
        theta = (u[:, 1] * _TWO_PI).astype(np.float32)
        v1 = lengths * np.cos(theta)
        counts += np.histogram(np.abs(v1), bins=edges)[0]
        v_sum += float(v1.sum())
        v_sq += float((v1 * v1).sum())
        total += size
    # density on the log grid; fitting the density rather than the
    # complementary CDF avoids the cutoff-induced steepening that would bias
    # the exponent upward for mu < 2
    centers = np.sqrt(edges[:-1] * edges[1:])
    dens = counts / (total * np.diff(edges))
    window = (centers >= cal["fit_lo"]) \
        & (centers <= ell_max * cal["fit_hi_frac"]) \
        & (counts >= cal["min_tail_count"])
    slope, _, r2fit = fit_loglog(centers[window], dens[window])
    exponent = -slope

    mean_v = v_sum / total
    var_v = v_sq / total - mean_v**2
    sign_z = mean_v / math.sqrt(var_v / total)

    lo_cut = ell_max / 10.0
    n_strat = min(n_samples, 2_000_000)
    m2 = {}
    for tag, cut in (("lo", lo_cut), ("hi", ell_max)):
        s2 = 0.0
        tot = 0
        cspec = WalkSpec.levy(mu, cut)
        for c, size in _iter_chunks(n_strat):
            gen = trial_stream(master_seed, (46, 0 if tag == "lo" else 1, c))
            # stratified (jittered-grid) uniforms: variance control for the
            # heavy-tailed second moment; grid position is exact measure
            u = (np.arange(tot, tot + size) + gen.random(size)) / n_strat
            ell = sample_lengths(cspec, u)
            s2 += float((ell * ell).sum())
            tot += size
        m2[tag] = s2 / tot / 2.0      # E[V1^2] = E[ell^2] * E[cos^2] = M/2
    emp_ratio = m2["hi"] / m2["lo"]
    if mu == 3.0:
        display_ratio = math.log(ell_max) / math.log(lo_cut)
    else:
        display_ratio = 10.0 ** (3.0 - mu)
    ratio_ok = abs(emp_ratio / display_ratio - 1.0) <= cal["var_ratio_tol"]

    passed = (abs(exponent - mu) <= cal["exponent_tol"]
              and abs(sign_z) <= 3.0 and ratio_ok)
    return BoundCheck(
        name=f"projection_mu_{mu:g}",
        grid={"mu": [mu], "ell_max": [ell_max]},
        statistic=[exponent],
        criterion=f"fitted tail exponent within {cal['exponent_tol']} of mu, "
                  "sign symmetry within 3 stderr, projected second moment "
                  f"ratio within {cal['var_ratio_tol']} of the displayed order",
        passed=bool(passed),
        calibration=dict(cal),
        details={"exponent": exponent, "fit_r2": r2fit,
                 "fit_points": int(window.sum()), "sign_z": sign_z,
                 "m2_ratio": emp_ratio, "display_ratio": display_ratio,
                 "n_samples": n_samples, "master_seed": master_seed},
    )


# -- scaling-exponent experiments -------------------------------------------

def _two_scales_tuned(n: float) -> WalkSpec:
    L = n ** 0.375
    return WalkSpec.two_scales(L, L ** (-2.0 / 3.0))


SCALING_FAMILIES: dict[str, Callable[[float], WalkSpec]] = {
    "cauchy": lambda n: WalkSpec.cauchy(math.sqrt(n) / 2.0),
    "levy_mu_1.5": lambda n: WalkSpec.levy(1.5, math.sqrt(n) / 2.0),
    "fixed_quarter_power": lambda n: WalkSpec.fixed(n**0.25),
    "two_scales_tuned": _two_scales_tuned,
}


def scaling_family(name: str) -> Callable[[float], WalkSpec]:
    try:
        return SCALING_FAMILIES[name]
    except KeyError:
        raise UnsupportedKindError(
            f"unknown scaling family {name!r}; choose from "
            f"{sorted(SCALING_FAMILIES)}") from None


def _phi_excluding_censored(report: SensitivityReport) -> tuple[float, list]:
    cells = []
    excluded = []
    for cell in report.cells:
        est = cell.ensemble.worst.time
        if est.n_censored >= 0.5 * est.n_samples:
            excluded.append(cell.D)
        else:
            cells.append(cell.ratio)
    return max(cells), excluded


def check_lower_bound_scaling(
    family: str,
    n_grid: tuple[float, ...] = (1e3, 1e4, 1e5),
    n_trials: int = 400,
    master_seed: int = 2031,
    *,
    workers: int = 1,
) -> BoundCheck:
    """Growth exponent of the scale-sensitivity phi(n) across torus sizes.

    Families with proven polynomial lower bounds must show a positive log-log
    slope; the Cauchy control is asserted against the calibrated ceiling as
    stated.  Note the recorded ``log3_normalized_slope``: a polylog phi has
    raw local slope k/ln(n) (~0.3 at these n), so the raw-slope control
    threshold is not reachable at desk scale; the normalized slope is the
    diagnostic that distinguishes polylog from polynomial growth here.
    """
    cal = get_calibration()["scaling"]
    builder = scaling_family(family)
    threshold = cal["thresholds"][family]
    direction = cal["directions"][family]
    phis = []
    excluded_all = {}
    for i, n in enumerate(n_grid):
        spec = builder(n)
        rep = scale_sensitivity(spec, n, None, n_trials,
                                master_seed=master_seed + i, workers=workers)
        phi, excluded = _phi_excluding_censored(rep)
        phis.append(phi)
        if excluded:
            excluded_all[n] = excluded
    slope, intercept, r2fit = fit_loglog(n_grid, phis)
    norm = [p / math.log(n) ** 3 for p, n in zip(phis, n_grid)]
    norm_slope = fit_loglog(n_grid, norm)[0]
    if direction == "at_least":
        passed = slope >= threshold
        crit = f"log-log slope of phi(n) >= {threshold}"
    else:
        passed = slope <= threshold
        crit = f"log-log slope of phi(n) <= {threshold}"
    return BoundCheck(
        name=f"scaling_{family}",
        grid={"n": list(n_grid)},
        statistic=phis,
        criterion=crit,
        passed=bool(passed),
        calibration={"threshold": threshold, "direction": direction,
                     "n_trials": n_trials},
        details={"slope": slope, "r2": r2fit,
                 "log3_normalized_slope": norm_slope,
                 "log3_normalized_phi": norm,
                 "excluded_censored_cells": excluded_all,
                 "master_seed": master_seed},
    )


def time_to_distance(
    spec: WalkSpec,
    d: float,
    n_trials: int = 1000,
    caps: tuple[int | None, float] | None = None,
    master_seed: int = 2032,
) -> tuple[Estimate, Estimate]:
    """Expected time before a step endpoint first lies at distance >= d.

    Secondary statistic (no reference value): runs the walk on the plane from
    the origin.  Returns (time estimate, step-count estimate).
    """
    if caps is None:
        caps = (None, math.inf)

    def far(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return x * x + y * y >= d * d

    steps, times, censored, _ = run_batch(
        spec, caps, master_seed, (47,), 0, n_trials,
        detect_batch=far, side=None)
    n_c = int(censored.sum())
    t_est = Estimate(float(times.mean()),
                     float(times.std(ddof=1) / math.sqrt(n_trials)),
                     n_trials, n_c)
    s_est = Estimate(float(steps.mean()),
                     float(steps.std(ddof=1) / math.sqrt(n_trials)),
                     n_trials, n_c)
    return t_est, s_est
