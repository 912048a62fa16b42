"""Distribution descriptors and truncated targets.

A :class:`DistributionDescriptor` bundles the log-space functions of a
base distribution (log-pdf/pmf, log-CDF, log-survival), its mode and
support, and the central tendency / dispersion indices used to
standardize truncation depths.  A :class:`TruncatedTarget` pairs a
descriptor with a half-open interval ``]a, b]`` and precomputes the
log interval mass and the projected mode.

Interval masses are computed entirely in log space, but a mass whose
linear value is not representable as a nonzero double (log mass below
roughly -745) is deliberately collapsed to ``-inf`` and the target is
marked degenerate.  This is the representability limit that defines the
breakdown depth of the rejection sampler: samplers must impute on a
degenerate target rather than silently produce garbage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .logspace import LOG_HALF, log_diff_exp


class TruncationOverflow(ArithmeticError):
    """The quantile route produced a non-finite or out-of-interval value."""


class DegenerateTargetError(ValueError):
    """The interval mass underflowed and the policy forbids imputation."""


class SamplingBreakdownError(RuntimeError):
    """A rejection loop exhausted its iteration cap under an error policy."""


@dataclass(frozen=True)
class DistributionDescriptor:
    """A parameterized family member exposing log-space descriptors.

    ``log_pdf``, ``log_cdf`` and ``log_sf`` must accept float arrays and
    return float arrays; for discrete kinds they are step functions of a
    real argument (internally floored).  ``mu`` and ``sigma`` are the
    standardization indices used for safety ratios, not necessarily the
    mean and standard deviation.
    """

    family_name: str
    params: dict
    kind: str  # "discrete" | "continuous"
    support: tuple[float, float]
    log_pdf: Callable[[np.ndarray], np.ndarray]
    log_cdf: Callable[[np.ndarray], np.ndarray]
    log_sf: Callable[[np.ndarray], np.ndarray]
    mode: float
    mu: float
    sigma: float
    quantile: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.kind not in ("discrete", "continuous"):
            raise ValueError(f"kind must be 'discrete' or 'continuous', got {self.kind!r}")
        lo, hi = self.support
        if not lo <= self.mode <= hi:
            raise ValueError(f"mode {self.mode} outside support {self.support}")
        if self.kind == "discrete" and self.mode != math.floor(self.mode):
            raise ValueError(f"discrete mode must be an integer, got {self.mode}")

    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"


@dataclass(frozen=True)
class TruncationInterval:
    """Half-open truncation interval ``]a, b]``; either end may be infinite."""

    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"interval requires a < b, got ]{self.lower}, {self.upper}]")

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return (x > self.lower) & (x <= self.upper)


def project_mode(desc: DistributionDescriptor, interval: TruncationInterval) -> float:
    """Clamp the base mode into the truncation interval.

    Continuous: ``clamp(m, a, b)`` (the lower endpoint is the limiting
    infimum of the interval).  Discrete: ``max(floor(a) + 1, min(floor(b), m))``
    so the result is an integer support point strictly above ``a``.
    """
    a, b = interval.lower, interval.upper
    lo, hi = desc.support
    if desc.is_discrete:
        fa = math.floor(a) if math.isfinite(a) else a
        fb = math.floor(b) if math.isfinite(b) else b
        lo_pt = max(fa + 1.0 if math.isfinite(fa) else -math.inf, lo)
        hi_pt = min(fb, hi)
        if lo_pt > hi_pt:
            raise ValueError(
                f"no support point in ]{a}, {b}] for {desc.family_name}"
            )
        m = max(lo_pt, min(hi_pt, desc.mode))
    else:
        if a >= hi or b < lo:
            raise ValueError(
                f"]{a}, {b}] does not intersect the support {desc.support}"
            )
        m = max(a, min(b, desc.mode))
        m = max(lo, min(hi, m))
    return float(m)


def log_interval_mass(desc: DistributionDescriptor, interval: TruncationInterval) -> float:
    """log P(a < X <= b), choosing the stabler of the CDF and survival routes.

    The CDF route ``log(F(b) - F(a))`` is used while ``F(a)`` sits in the
    left tail (``log F(a) <= log 1/2``); otherwise the survival route
    ``log(S(a) - S(b))``.  Masses that underflow linear double precision
    collapse to ``-inf``.
    """
    a, b = interval.lower, interval.upper
    la_cdf = float(desc.log_cdf(np.asarray(a))) if a != -math.inf else -math.inf
    if la_cdf <= LOG_HALF:
        lb_cdf = float(desc.log_cdf(np.asarray(b))) if b != math.inf else 0.0
        lm = log_diff_exp(lb_cdf, min(la_cdf, lb_cdf))
    else:
        la_sf = float(desc.log_sf(np.asarray(a)))
        lb_sf = float(desc.log_sf(np.asarray(b))) if b != math.inf else -math.inf
        lm = log_diff_exp(la_sf, min(lb_sf, la_sf))
    lm = min(lm, 0.0)
    # representability limit: a mass whose double value rounds to zero is
    # treated as total underflow
    if math.exp(lm) == 0.0:
        return -math.inf
    return lm


@dataclass(frozen=True)
class TruncatedTarget:
    """A descriptor truncated to ``]a, b]`` with cached normalization."""

    base: DistributionDescriptor
    interval: TruncationInterval
    log_mass: float = field(init=False)
    proj_mode: float = field(init=False)
    log_peak: float = field(init=False)

    def __post_init__(self):
        pm = project_mode(self.base, self.interval)
        lm = log_interval_mass(self.base, self.interval)
        # peak of the truncated density at the projected mode; the interval
        # indicator is not applied (the projected mode may sit on the open
        # lower endpoint, where the density value is the relevant limit)
        lp = float(self.base.log_pdf(np.asarray(pm))) - lm if lm > -math.inf else math.inf
        object.__setattr__(self, "proj_mode", pm)
        object.__setattr__(self, "log_mass", lm)
        object.__setattr__(self, "log_peak", lp)

    @property
    def degenerate(self) -> bool:
        return self.log_mass == -math.inf

    def log_pdf(self, x):
        """log f_I(x): log f(x) - log P(I) inside ]a, b], else -inf."""
        x = np.asarray(x, dtype=float)
        inside = self.interval.contains(x)
        with np.errstate(invalid="ignore"):
            out = np.where(inside, self.base.log_pdf(x) - self.log_mass, -np.inf)
        if out.ndim == 0:
            return float(out)
        return out

    def cdf(self, x):
        """F_I(x) = P(a < X <= x) / P(I), computed from log-space masses."""
        if self.degenerate:
            raise DegenerateTargetError("interval mass underflowed; CDF undefined")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        a, b = self.interval.lower, self.interval.upper
        out = np.empty_like(x)
        for i, xi in enumerate(x):
            if xi <= a:
                out[i] = 0.0
            elif xi >= b:
                out[i] = 1.0
            else:
                lm = log_interval_mass(self.base, TruncationInterval(a, xi))
                out[i] = math.exp(lm - self.log_mass) if lm > -math.inf else 0.0
        out = np.minimum(out, 1.0)
        if out.size == 1:
            return float(out[0])
        return out

    def quantile(self, p: float) -> float:
        """Truncated quantile q(F(a) + p * P(I)) via the base quantile.

        The probability argument is deliberately assembled in linear
        space (this is the fragile inverse-transform pipeline whose
        breakdown the diagnostics measure).  Non-finite or out-of-interval
        results raise :class:`TruncationOverflow`.
        """
        if self.base.quantile is None:
            raise ValueError(f"{self.base.family_name} descriptor has no quantile function")
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {p}")
        if self.degenerate:
            raise TruncationOverflow(
                f"interval mass underflowed (log mass = -inf) for ]{self.interval.lower}, "
                f"{self.interval.upper}]"
            )
        a, b = self.interval.lower, self.interval.upper
        if p == 0.0:
            # the infimum of the truncated law: its smallest support point
            # (discrete) or the open lower endpoint as a limiting value
            if self.base.is_discrete:
                return project_mode_floor_lower(self.base, self.interval)
            return a
        fa = math.exp(float(self.base.log_cdf(np.asarray(a)))) if a != -math.inf else 0.0
        pp = fa + p * math.exp(self.log_mass)
        if p < 1.0 and pp >= 1.0:
            # the assembled probability saturated: the base quantile would
            # silently return sup X (the paper's imputation-as-supremum
            # failure), so surface it as the breakdown it is
            raise TruncationOverflow(
                f"probability argument saturated at 1.0 (F(a) = {fa!r}, p = {p})"
            )
        x = float(self.base.quantile(np.asarray(pp)))
        if not math.isfinite(x):
            raise TruncationOverflow(
                f"base quantile returned {x} at p' = {pp!r} (a = {a})"
            )
        if self.base.is_discrete:
            if math.isfinite(a) and x <= math.floor(a):
                raise TruncationOverflow(
                    f"quantile collapsed below the interval: {x} <= floor({a})"
                )
            if math.isfinite(b) and x > math.floor(b):
                raise TruncationOverflow(f"quantile escaped the interval: {x} > floor({b})")
        else:
            if x < a or x > b:
                raise TruncationOverflow(f"quantile {x} outside [{a}, {b}]")
        return x


def project_mode_floor_lower(desc: DistributionDescriptor, interval: TruncationInterval) -> float:
    """Smallest support point of the truncated discrete target."""
    a = interval.lower
    lo, _ = desc.support
    fa = math.floor(a) if math.isfinite(a) else -math.inf
    return float(max(fa + 1.0 if math.isfinite(fa) else -math.inf, lo))


def truncate(
    desc: DistributionDescriptor,
    lower: float = -math.inf,
    upper: float = math.inf,
) -> TruncatedTarget:
    """Build a truncated target for ``desc`` restricted to ``]lower, upper]``."""
    return TruncatedTarget(desc, TruncationInterval(lower, upper))
