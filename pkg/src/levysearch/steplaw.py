"""Step-length laws: power-law walks with a cutoff, 2-scales, and fixed steps.

Provides exact inverse-CDF samplers plus closed-form analytics (normalization,
CDF, mean step length tau, second moment and variance) for every law.  All
samplers are deterministic functions of the uniform draws they consume, which
is what makes seeded runs reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedKindError

__all__ = ["WalkSpec", "StepLawAnalytics", "normalization", "cdf", "pdf",
           "sample_length", "sample_lengths", "analytics", "draws_per_step"]

# exponents this close to the logarithmic special cases are snapped to them,
# avoiding catastrophic cancellation in (ell_max^(2-mu) - 1)/(2 - mu)
_SNAP_TOL = 1e-9

# floor for uniform draws so inversion never produces a zero-length step
_U_FLOOR = 1e-300


@dataclass(frozen=True, slots=True)
class WalkSpec:
    """Which step-length process to run.

    ``kind`` is one of ``"levy"`` (power-law exponent ``mu``, cutoff
    ``ell_max``), ``"two_scales"`` (length ``L`` with probability ``q``, else
    1), or ``"fixed"`` (always ``ell``).  Use the classmethod constructors.
    """

    kind: str
    mu: float = 0.0
    ell_max: float = 0.0
    L: float = 0.0
    q: float = 0.0
    ell: float = 0.0

    @classmethod
    def levy(cls, mu: float, ell_max: float) -> "WalkSpec":
        if abs(mu - 2.0) < _SNAP_TOL:
            mu = 2.0
        elif abs(mu - 3.0) < _SNAP_TOL:
            mu = 3.0
        return cls(kind="levy", mu=mu, ell_max=ell_max)

    @classmethod
    def cauchy(cls, ell_max: float) -> "WalkSpec":
        return cls.levy(2.0, ell_max)

    @classmethod
    def two_scales(cls, L: float, q: float) -> "WalkSpec":
        return cls(kind="two_scales", L=L, q=q)

    @classmethod
    def fixed(cls, ell: float) -> "WalkSpec":
        return cls(kind="fixed", ell=ell)

    def __post_init__(self) -> None:
        if self.kind == "levy":
            if not 1.0 < self.mu <= 3.0:
                raise ValueError(f"levy exponent mu must be in (1, 3], got {self.mu}")
            if not self.ell_max > 1.0:
                raise ValueError(f"levy cutoff ell_max must exceed 1, got {self.ell_max}")
        elif self.kind == "two_scales":
            if not self.L > 1.0:
                raise ValueError(f"two_scales L must exceed 1, got {self.L}")
            if not 0.0 < self.q < 1.0:
                raise ValueError(f"two_scales q must be in (0, 1), got {self.q}")
        elif self.kind == "fixed":
            if not self.ell >= 1.0:
                raise ValueError(f"fixed step length must be >= 1, got {self.ell}")
        else:
            raise UnsupportedKindError(f"unknown walk kind {self.kind!r}")

    def max_step_length(self) -> float:
        """Largest length in the support of the law."""
        if self.kind == "levy":
            return self.ell_max
        if self.kind == "two_scales":
            return self.L
        return self.ell


@dataclass(frozen=True, slots=True)
class StepLawAnalytics:
    """Closed-form moments of a step-length law."""

    a: float
    tau: float
    second_moment: float
    variance: float


def normalization(spec: WalkSpec) -> float:
    """Normalization factor of the power-law density; levy kind only."""
    if spec.kind != "levy":
        raise UnsupportedKindError(f"normalization undefined for kind {spec.kind!r}")
    mu = spec.mu
    if math.isinf(spec.ell_max):
        return (mu - 1.0) / mu
    return 1.0 / (1.0 + (1.0 - spec.ell_max ** (1.0 - mu)) / (mu - 1.0))


def pdf(spec: WalkSpec, ell: float) -> float:
    """Step-length density of the levy law at ``ell``."""
    if spec.kind != "levy":
        raise UnsupportedKindError(f"pdf available for levy only, got {spec.kind!r}")
    if ell < 0.0:
        raise ValueError(f"length must be non-negative, got {ell}")
    a = normalization(spec)
    if ell <= 1.0:
        return a
    if ell < spec.ell_max:
        return a * ell ** (-spec.mu)
    return 0.0


def cdf(spec: WalkSpec, ell) -> float | np.ndarray:
    """P(step length <= ell); accepts scalars or numpy arrays."""
    arr = np.asarray(ell, dtype=np.float64)
    if np.any(arr < 0.0):
        raise ValueError("length must be non-negative")
    if spec.kind == "levy":
        a = normalization(spec)
        mu = spec.mu
        mid = np.minimum(arr, spec.ell_max)
        with np.errstate(divide="ignore"):
            tail = a * (1.0 + (1.0 - mid ** (1.0 - mu)) / (mu - 1.0))
        out = np.where(arr <= 1.0, a * arr, np.minimum(tail, 1.0))
        out = np.where(arr >= spec.ell_max, 1.0, out)
    elif spec.kind == "two_scales":
        out = np.where(arr < 1.0, 0.0, np.where(arr < spec.L, 1.0 - spec.q, 1.0))
    else:
        out = np.where(arr < spec.ell, 0.0, 1.0)
    return float(out) if np.isscalar(ell) else out


def sample_lengths(spec: WalkSpec, u: np.ndarray) -> np.ndarray:
    """Map uniforms on [0, 1) to step lengths via the inverse CDF.

    Not defined for the fixed law, which consumes no length draw.  Hot path:
    works in-place on one fresh buffer, never mutating the input.
    """
    if spec.kind == "fixed":
        raise UnsupportedKindError("fixed law consumes no length uniforms")
    if spec.kind == "two_scales":
        return np.where(np.asarray(u) <= 1.0 - spec.q, 1.0, spec.L)
    a = normalization(spec)
    mu = spec.mu
    # v = u/a, floored away from zero; u <= a is then v <= 1
    v = np.asarray(np.multiply(u, 1.0 / a))
    np.maximum(v, _U_FLOOR, out=v)
    if mu == 2.0:
        tail = np.asarray(np.subtract(2.0, v))
        np.maximum(tail, _U_FLOOR, out=tail)
        np.reciprocal(tail, out=tail)
    else:
        # tail = (1 - (mu-1)(v-1)) ** (1/(1-mu))
        tail = np.asarray(np.multiply(v, -(mu - 1.0)))
        tail += mu
        np.maximum(tail, _U_FLOOR, out=tail)
        with np.errstate(over="ignore"):
            np.power(tail, 1.0 / (1.0 - mu), out=tail)
    big = v > 1.0
    np.copyto(v, tail, where=big)
    if not math.isinf(spec.ell_max):
        np.minimum(v, spec.ell_max, out=v)
    return v


def sample_length(spec: WalkSpec, rng: np.random.Generator) -> float:
    """Draw one step length; consumes one uniform (none for the fixed law)."""
    if spec.kind == "fixed":
        return spec.ell
    return float(sample_lengths(spec, np.float64(rng.random())))


def draws_per_step(spec: WalkSpec) -> int:
    """Uniforms consumed per step: (length, angle) or just (angle)."""
    return 1 if spec.kind == "fixed" else 2


def analytics(spec: WalkSpec) -> StepLawAnalytics:
    """Exact mean, second moment and variance of one step length."""
    if spec.kind == "fixed":
        return StepLawAnalytics(1.0, spec.ell, spec.ell**2, 0.0)
    if spec.kind == "two_scales":
        tau = 1.0 - spec.q + spec.q * spec.L
        m2 = 1.0 - spec.q + spec.q * spec.L**2
        return StepLawAnalytics(1.0, tau, m2, m2 - tau * tau)
    a = normalization(spec)
    mu, lm = spec.mu, spec.ell_max
    if math.isinf(lm):
        tau = a / 2.0 + a / (mu - 2.0) if mu > 2.0 else math.inf
        m2 = math.inf
    else:
        if mu == 2.0:
            tau = a / 2.0 + a * math.log(lm)
        else:
            tau = a / 2.0 + a * (lm ** (2.0 - mu) - 1.0) / (2.0 - mu)
        if mu == 3.0:
            m2 = a / 3.0 + a * math.log(lm)
        else:
            m2 = a / 3.0 + a * (lm ** (3.0 - mu) - 1.0) / (3.0 - mu)
    var = m2 - tau * tau if math.isfinite(m2) else math.inf
    return StepLawAnalytics(a, tau, m2, var)
