"""Random-walk evolution on the plane and the torus, with path-time tracking.

Reproducibility convention
--------------------------
Every trial owns an independent random stream::

    PCG64(SeedSequence(entropy=master_seed, spawn_key=(*key_prefix, trial_index)))

A torus trial consumes two uniforms for its start point, then per step either
``(u_length, u_angle)`` (levy, two_scales) or ``(u_angle,)`` (fixed).  The
angle is ``2*pi*u`` evaluated in float32 trigonometry (an order of magnitude
faster than float64 and far below Monte Carlo resolution).  Plane trials start
at the origin and consume no start draws.  Because draws are consumed strictly
in step order per trial, results do not depend on batching or on how trials
are split across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import PlanePoint, TorusPoint, wrap
from .steplaw import WalkSpec, draws_per_step, sample_length, sample_lengths

__all__ = [
    "WalkState",
    "TrialRecord",
    "trial_stream",
    "step",
    "run_plane",
    "run_until",
    "run_batch",
    "default_caps",
    "CAP_NONE",
    "CAP_STEPS",
    "CAP_TIME",
]

_TWO_PI = 2.0 * math.pi

# block sizes by trial age; growth amortizes the per-generator call overhead
# while keeping wasted draws small for short trials
_BLOCK_SCHEDULE = (64, 128, 256, 512)

CAP_NONE, CAP_STEPS, CAP_TIME = 0, 1, 2

_NO_STEP_CAP = 2**62


def trial_stream(master_seed: int, key: Sequence[int]) -> np.random.Generator:
    """The deterministic stream for one unit of work under a master seed."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class WalkState:
    """Position, step counter, accumulated path time, and the trial's stream."""

    position: TorusPoint | PlanePoint
    step_index: int
    elapsed: float
    rng: np.random.Generator

    @classmethod
    def start(cls, position: TorusPoint | PlanePoint,
              rng: np.random.Generator) -> "WalkState":
        return cls(position=position, step_index=0, elapsed=0.0, rng=rng)


@dataclass(frozen=True, slots=True)
class TrialRecord:
    """Outcome of one search trial."""

    steps: int
    path_time: float
    censored: bool
    seed_index: int = 0
    cap_hit: int = CAP_NONE


def _draw_direction(u_theta: float) -> tuple[float, float]:
    theta = np.float32(_TWO_PI * u_theta)
    return float(np.cos(theta)), float(np.sin(theta))


def step(state: WalkState, spec: WalkSpec) -> WalkState:
    """Advance one ballistic step: sampled length, uniformly random direction.

    Speed is 1, so the step adds its length to the elapsed path time.
    """
    length = sample_length(spec, state.rng)
    cos_t, sin_t = _draw_direction(state.rng.random())
    dx, dy = length * cos_t, length * sin_t
    pos = state.position
    if isinstance(pos, TorusPoint):
        new_pos: TorusPoint | PlanePoint = wrap(pos.x + dx, pos.y + dy, pos.side)
    else:
        new_pos = PlanePoint(pos.x + dx, pos.y + dy)
    return WalkState(position=new_pos, step_index=state.step_index + 1,
                     elapsed=state.elapsed + length, rng=state.rng)


def run_plane(spec: WalkSpec, m: int, rng: np.random.Generator) -> list[PlanePoint]:
    """Trajectory of ``m`` steps on the infinite plane, starting at the origin."""
    if m < 0:
        raise ValueError(f"step count must be non-negative, got {m}")
    state = WalkState.start(PlanePoint(0.0, 0.0), rng)
    out = [state.position]
    for _ in range(m):
        state = step(state, spec)
        out.append(state.position)
    return out


def _normalize_caps(caps: tuple[int | None, float]) -> tuple[int, float]:
    max_steps, max_time = caps
    if max_steps is None or max_steps >= _NO_STEP_CAP:
        max_steps = _NO_STEP_CAP
    if max_steps < 0 or (max_time is not None and max_time < 0):
        raise ValueError(f"caps must be non-negative, got {caps}")
    if max_time is None:
        max_time = math.inf
    return int(max_steps), float(max_time)


def default_caps(n: float, D: float) -> tuple[int, float]:
    """Censoring caps generous enough that censoring stays below 0.1%."""
    d_eff = max(D, 1.0)
    return (_NO_STEP_CAP, 200.0 * (n / d_eff) * math.log(n) ** 3)


def run_until(
    spec: WalkSpec,
    detector: Callable[[TorusPoint], bool],
    start: TorusPoint,
    caps: tuple[int | None, float],
    rng: np.random.Generator,
    seed_index: int = 0,
) -> TrialRecord:
    """Walk on the torus until the detector fires at a step endpoint.

    The initial position counts as a step endpoint, so a start inside the
    extended set detects at zero steps.  Hitting a cap censors the trial;
    censoring is data, not an error.
    """
    max_steps, max_time = _normalize_caps(caps)
    state = WalkState.start(start, rng)
    while True:
        if detector(state.position):
            return TrialRecord(state.step_index, state.elapsed, False,
                               seed_index, CAP_NONE)
        if state.step_index >= max_steps:
            return TrialRecord(state.step_index, state.elapsed, True,
                               seed_index, CAP_STEPS)
        if state.elapsed >= max_time:
            return TrialRecord(state.step_index, state.elapsed, True,
                               seed_index, CAP_TIME)
        state = step(state, spec)


def run_batch(
    spec: WalkSpec,
    caps: tuple[int | None, float],
    master_seed: int,
    key_prefix: Sequence[int],
    lo: int,
    hi: int,
    *,
    detect_batch: Callable[[np.ndarray, np.ndarray], np.ndarray],
    side: float | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized equivalent of :func:`run_until` for trials ``[lo, hi)``.

    Torus mode (``side`` set) draws each trial's start uniformly from its own
    stream; plane mode starts every trial at the origin.  ``detect_batch``
    receives raw (unwrapped) coordinates and must handle the wrap itself,
    which :meth:`levysearch.target.Target.detect_batch` does.

    Returns ``(steps, times, censored, cap_kinds)`` arrays in trial order.
    """
    max_steps, max_time = _normalize_caps(caps)
    nb = hi - lo
    steps_out = np.zeros(nb, dtype=np.int64)
    times_out = np.zeros(nb, dtype=np.float64)
    censored = np.zeros(nb, dtype=bool)
    cap_kinds = np.zeros(nb, dtype=np.uint8)
    if nb == 0:
        return steps_out, times_out, censored, cap_kinds

    gens = [trial_stream(master_seed, (*key_prefix, i)) for i in range(lo, hi)]
    if side is not None:
        u0 = np.array([g.random(2) for g in gens])
        x = (u0[:, 0] - 0.5) * side
        y = (u0[:, 1] - 0.5) * side
    else:
        x = np.zeros(nb)
        y = np.zeros(nb)

    det0 = detect_batch(x, y)
    alive = ~det0
    if max_steps == 0:
        censored[alive] = True
        cap_kinds[alive] = CAP_STEPS
        alive[:] = False

    idx = np.flatnonzero(alive)
    gens = [gens[i] for i in idx]
    x, y = x[idx], y[idx]
    elapsed = np.zeros(idx.size)
    steps_done = 0
    block_i = 0
    dps = draws_per_step(spec)

    while idx.size:
        B = _BLOCK_SCHEDULE[min(block_i, len(_BLOCK_SCHEDULE) - 1)]
        B = min(B, max_steps - steps_done)
        if B <= 0:
            censored[idx] = True
            cap_kinds[idx] = CAP_STEPS
            steps_out[idx] = steps_done
            times_out[idx] = elapsed
            break
        k = idx.size
        u = np.empty((k, B, dps))
        for j, g in enumerate(gens):
            u[j] = g.random((B, dps))
        if spec.kind == "fixed":
            lengths = np.full((k, B), spec.ell)
            u_theta = u[:, :, 0]
        else:
            lengths = sample_lengths(spec, u[:, :, 0])
            u_theta = u[:, :, 1]
        theta = (u_theta * _TWO_PI).astype(np.float32)
        dx = lengths * np.cos(theta)
        dy = lengths * np.sin(theta)
        np.cumsum(dx, axis=1, out=dx)
        np.cumsum(dy, axis=1, out=dy)
        dx += x[:, None]
        dy += y[:, None]
        t_block = np.cumsum(lengths, axis=1, out=lengths)
        t_block += elapsed[:, None]

        mask = detect_batch(dx, dy)
        d_any = mask.any(axis=1)
        d_idx = np.where(d_any, mask.argmax(axis=1), B)
        if math.isfinite(max_time):
            t_idx = (t_block < max_time).sum(axis=1)
        else:
            t_idx = np.full(k, B, dtype=np.int64)
        stop = np.minimum(d_idx, t_idx)
        stopped = stop < B
        if stopped.any():
            rows = np.flatnonzero(stopped)
            gid = idx[rows]
            srow = stop[rows]
            detected = d_idx[rows] <= t_idx[rows]
            at_step = steps_done + srow + 1
            steps_out[gid] = at_step
            times_out[gid] = t_block[rows, srow]
            censored[gid] = ~detected
            cap_kinds[gid] = np.where(
                detected, CAP_NONE,
                np.where(at_step >= max_steps, CAP_STEPS, CAP_TIME))
        live = np.flatnonzero(~stopped)
        idx = idx[live]
        gens = [gens[r] for r in live]
        x = dx[live, -1]
        y = dy[live, -1]
        elapsed = t_block[live, -1]
        if side is not None and idx.size:
            # keep raw magnitudes bounded so float resolution stays fine
            h = side / 2.0
            x = (x + h) % side - h
            y = (y + h) % side - h
        steps_done += B
        block_i += 1

    return steps_out, times_out, censored, cap_kinds
