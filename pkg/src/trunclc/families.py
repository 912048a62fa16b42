"""Built-in log-concave families and the registration API.

Every family exposes direct log-space evaluations of its pmf/pdf, CDF and
survival function.  Discrete pmfs use the saddle-point (Stirling-error /
binomial-deviance) construction so the log value keeps a full complement
of significant digits deep in the tails; CDF/survival values fall back to
a log-space tail summation once their linear-space evaluation loses
precision.

New families are added with :func:`register_family`, supplying the same
ingredients: parameter schema, log-density, log-CDF/survival, and a mode
function.  The gamma family carries an exception handler that reroutes
sampling through the exponential power distribution when the shape is
below one (the non-log-concave region).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special as sc
from scipy import stats as st

from .core import DistributionDescriptor
from .logspace import (
    LOG_2PI,
    log1mexp,
    log_diff_exp,
    log_gamma_lower_reg,
    log_gamma_upper_reg,
)

_LOG_SQRT_2PI = 0.5 * LOG_2PI
_LINEAR_FLOOR = 1e-280


class UnknownFamilyError(ValueError):
    pass


class ParameterError(ValueError):
    pass


# ---------------------------------------------------------------------------
# saddle-point pmf machinery (Loader-style stirlerr / bd0)

def _stirlerr(n):
    """log n! - Stirling approximation: lgamma(n+1) - (n+1/2)log n + n - log sqrt(2 pi)."""
    n = np.asarray(n, dtype=float)
    out = np.empty_like(n)
    small = n < 16.0
    if small.any():
        ns = n[small]
        out[small] = sc.gammaln(ns + 1.0) - ((ns + 0.5) * np.log(ns) - ns + _LOG_SQRT_2PI)
    if (~small).any():
        nl = n[~small]
        with np.errstate(over="ignore"):
            inv2 = 1.0 / (nl * nl)
        out[~small] = (
            1.0 / 12.0
            - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - inv2 / 1188.0) * inv2) * inv2)
            * inv2
        ) / nl
    return out


def _bd0(x, m):
    """Binomial deviance x log(x/m) + m - x, stable for x near m."""
    x = np.asarray(x, dtype=float)
    m = np.asarray(m, dtype=float)
    x, m = np.broadcast_arrays(x, m)
    out = np.empty(x.shape)
    near = np.abs(x - m) < 0.1 * (x + m)
    if (~near).any():
        xf, mf = x[~near], m[~near]
        out[~near] = sc.xlogy(xf, xf / mf) + mf - xf
    if near.any():
        xn, mn = x[near], m[near]
        v = (xn - mn) / (xn + mn)
        s = (xn - mn) * v
        ej = 2.0 * xn * v
        v2 = v * v
        for j in range(1, 1000):
            ej = ej * v2
            s1 = s + ej / (2 * j + 1)
            if np.array_equal(s1, s):
                break
            s = s1
        out[near] = s
    return out


def _log_binom_raw(x, n, p):
    """Saddle-point log of C(n,x) p^x (1-p)^(n-x) for real 0 <= x <= n."""
    x = np.asarray(x, dtype=float)
    n = np.asarray(n, dtype=float)
    x, n = np.broadcast_arrays(x, n)
    q = 1.0 - p
    out = np.empty(x.shape)
    at_zero = x == 0.0
    at_n = x == n
    mid = ~(at_zero | at_n)
    out[at_zero] = n[at_zero] * math.log1p(-p)
    out[at_n] = n[at_n] * math.log(p)
    if mid.any():
        xm, nm = x[mid], n[mid]
        out[mid] = (
            _stirlerr(nm)
            - _stirlerr(xm)
            - _stirlerr(nm - xm)
            - _bd0(xm, nm * p)
            - _bd0(nm - xm, nm * q)
            + 0.5 * (np.log(nm) - LOG_2PI - np.log(xm) - np.log(nm - xm))
        )
    return out


def _log_poisson_raw(k, lam):
    """Saddle-point log of exp(-lam) lam^k / k! for integer k >= 0."""
    k = np.asarray(k, dtype=float)
    out = np.empty(k.shape)
    zero = k == 0.0
    out[zero] = -lam
    if (~zero).any():
        km = k[~zero]
        out[~zero] = -_stirlerr(km) - _bd0(km, lam) - 0.5 * (LOG_2PI + np.log(km))
    return out


def _log_tail_sum(log_pmf, start, step, lo, hi, max_terms=200_000):
    """Log-space sum of a monotone pmf tail from ``start`` in direction ``step``."""
    j = float(start)
    anchor = None
    acc = 0.0
    for _ in range(max_terms):
        if j < lo or j > hi:
            break
        lj = float(log_pmf(np.asarray(j)))
        if anchor is None:
            if lj > -math.inf:
                anchor = lj
                acc = 1.0
        else:
            r = math.exp(lj - anchor)
            acc += r
            if r < acc * 1e-18:
                break
        if j + step == j:
            break  # beyond integer resolution of doubles
        j += step
    if anchor is None:
        return -math.inf
    return anchor + math.log(acc)


def _discrete_tail_functions(lin_cdf, lin_sf, log_pmf, lo, hi):
    """Build log_cdf / log_sf step functions of a real argument.

    ``lin_cdf``/``lin_sf`` evaluate the linear-space CDF / survival at
    integer points in [lo, hi); the tail-sum fallback takes over when
    they drop below the precision floor.
    """

    def log_cdf(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        k = np.atleast_1d(np.floor(x))
        out = np.full(k.shape, -np.inf)
        above = k >= hi
        mid = (k >= lo) & ~above
        out[above] = 0.0
        if mid.any():
            km = k[mid]
            lin = np.asarray(lin_cdf(km), dtype=float)
            vals = np.empty(km.shape)
            ok = lin > _LINEAR_FLOOR
            with np.errstate(divide="ignore"):
                vals[ok] = np.log(lin[ok])
            for i in np.nonzero(~ok)[0]:
                vals[i] = _log_tail_sum(log_pmf, km[i], -1.0, lo, hi)
            out[mid] = vals
        return float(out[0]) if scalar else out

    def log_sf(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        k = np.atleast_1d(np.floor(x))
        out = np.full(k.shape, 0.0)
        below = k < lo
        mid = ~below & (k < hi)
        out[~below & ~mid] = -np.inf
        if mid.any():
            km = k[mid]
            lin = np.asarray(lin_sf(km), dtype=float)
            vals = np.empty(km.shape)
            ok = lin > _LINEAR_FLOOR
            with np.errstate(divide="ignore"):
                vals[ok] = np.log(lin[ok])
            for i in np.nonzero(~ok)[0]:
                vals[i] = _log_tail_sum(log_pmf, km[i] + 1.0, 1.0, lo, hi)
            out[mid] = vals
        return float(out[0]) if scalar else out

    return log_cdf, log_sf


def _integer_mask(x):
    return (x == np.floor(x)) & np.isfinite(x)


# ---------------------------------------------------------------------------
# registry

@dataclass(frozen=True)
class ParamSpec:
    name: str
    check: Callable[[float], bool]
    constraint: str


@dataclass(frozen=True)
class FamilySpec:
    """Recipe for building descriptors of one family.

    ``exception_handler`` maps a parameter dict to an alternate batch
    sampling route (or None); it lets a family whose log-concavity fails
    on part of its parameter space delegate to a transformation-based
    sampler.
    """

    name: str
    params: tuple[ParamSpec, ...]
    builder: Callable[[dict], DistributionDescriptor]
    defaults: dict = field(default_factory=dict)
    exception_handler: Optional[Callable[[dict], Optional[Callable]]] = None


_REGISTRY: dict[str, FamilySpec] = {}


def register_family(spec: FamilySpec) -> None:
    _REGISTRY[spec.name] = spec


def get_family(name: str) -> FamilySpec:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownFamilyError(
            f"unknown family {name!r}; known: {sorted(_REGISTRY)}"
        ) from None


def list_families() -> list[str]:
    return sorted(_REGISTRY)


def build_descriptor(family: str, params: dict | None = None, **kwargs) -> DistributionDescriptor:
    """Build a descriptor, validating parameters against the family schema."""
    spec = get_family(family)
    given = dict(spec.defaults)
    given.update(params or {})
    given.update(kwargs)
    names = {ps.name for ps in spec.params}
    extra = set(given) - names
    if extra:
        raise ParameterError(f"{family}: unknown parameter(s) {sorted(extra)}")
    missing = names - set(given)
    if missing:
        raise ParameterError(f"{family}: missing parameter(s) {sorted(missing)}")
    for ps in spec.params:
        v = given[ps.name]
        if not np.isfinite(v) or not ps.check(float(v)):
            raise ParameterError(f"{family}: parameter {ps.name}={v!r} violates: {ps.constraint}")
    return spec.builder({k: float(v) for k, v in given.items()})


def exception_route(desc: DistributionDescriptor):
    """Return the alternate sampling route for this descriptor, if any."""
    spec = _REGISTRY.get(desc.family_name)
    if spec is None or spec.exception_handler is None:
        return None
    return spec.exception_handler(desc.params)


# ---------------------------------------------------------------------------
# exponential power distribution (ancillary; enables the gamma alpha < 1 route)

def epd_log_pdf(x, beta: float):
    """log density of the exponential power law: -|x|^beta - log(2 Gamma(1/beta + 1))."""
    if beta < 1.0:
        raise ParameterError(f"epd: beta={beta} violates: beta >= 1 (log-concave regime)")
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = -np.abs(x) ** beta - math.log(2.0) - sc.gammaln(1.0 / beta + 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def epd_to_gamma(x, beta: float):
    """Map an EPD(beta) variate to |x|^beta, which is gamma(1/beta, rate 1)."""
    if beta < 1.0:
        raise ParameterError(f"epd_to_gamma: beta={beta} violates: beta >= 1")
    x = np.asarray(x, dtype=float)
    out = np.abs(x) ** beta
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# builders

def _build_normal(params):
    mu, sigma = params["mu"], params["sigma"]

    def log_pdf(x):
        z = (np.asarray(x, dtype=float) - mu) / sigma
        return -0.5 * z * z - math.log(sigma) - _LOG_SQRT_2PI

    def log_cdf(x):
        return sc.log_ndtr((np.asarray(x, dtype=float) - mu) / sigma)

    def log_sf(x):
        return sc.log_ndtr(-(np.asarray(x, dtype=float) - mu) / sigma)

    def quantile(p):
        return mu + sigma * sc.ndtri(np.asarray(p, dtype=float))

    return DistributionDescriptor(
        family_name="normal", params=params, kind="continuous",
        support=(-math.inf, math.inf), log_pdf=log_pdf, log_cdf=log_cdf,
        log_sf=log_sf, mode=mu, mu=mu, sigma=sigma, quantile=quantile,
    )


def _build_poisson(params):
    lam = params["lambda"]

    def log_pmf(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        ok = _integer_mask(x) & (x >= 0.0)
        out = np.full(x.shape, -np.inf)
        if ok.any():
            out[ok] = _log_poisson_raw(x[ok], lam)
        return float(out[0]) if scalar else out

    log_cdf, log_sf = _discrete_tail_functions(
        lambda k: sc.gammaincc(k + 1.0, lam),
        lambda k: sc.gammainc(k + 1.0, lam),
        log_pmf, 0.0, math.inf,
    )

    def quantile(p):
        return st.poisson.ppf(np.asarray(p, dtype=float), lam)

    return DistributionDescriptor(
        family_name="poisson", params=params, kind="discrete",
        support=(0.0, math.inf), log_pdf=log_pmf, log_cdf=log_cdf,
        log_sf=log_sf, mode=math.floor(lam), mu=lam, sigma=math.sqrt(lam),
        quantile=quantile,
    )


def _build_binomial(params):
    n, p = params["n"], params["p"]

    def log_pmf(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        ok = _integer_mask(x) & (x >= 0.0) & (x <= n)
        out = np.full(x.shape, -np.inf)
        if ok.any():
            out[ok] = _log_binom_raw(x[ok], n, p)
        return float(out[0]) if scalar else out

    log_cdf, log_sf = _discrete_tail_functions(
        lambda k: sc.betainc(n - k, k + 1.0, 1.0 - p),
        lambda k: sc.betainc(k + 1.0, n - k, p),
        log_pmf, 0.0, n,
    )

    def quantile(q):
        return st.binom.ppf(np.asarray(q, dtype=float), int(n), p)

    mode = min(n, max(0.0, math.floor((n + 1.0) * p)))
    return DistributionDescriptor(
        family_name="binomial", params=params, kind="discrete",
        support=(0.0, n), log_pdf=log_pmf, log_cdf=log_cdf, log_sf=log_sf,
        mode=mode, mu=n * p, sigma=math.sqrt(n * p * (1.0 - p)), quantile=quantile,
    )


def _build_nbinom(params):
    # number of failures before the n-th complementary event; p is the
    # per-trial probability of the counted outcome (mean np/(1-p))
    n, p = params["n"], params["p"]

    def log_pmf(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        ok = _integer_mask(x) & (x >= 0.0)
        out = np.full(x.shape, -np.inf)
        if ok.any():
            k = x[ok]
            out[ok] = np.log(n) - np.log(n + k) + _log_binom_raw(
                np.full(k.shape, float(n)), n + k, 1.0 - p
            )
        return float(out[0]) if scalar else out

    log_cdf, log_sf = _discrete_tail_functions(
        lambda k: sc.betainc(n, k + 1.0, 1.0 - p),
        lambda k: sc.betainc(k + 1.0, n, p),
        log_pmf, 0.0, math.inf,
    )

    def quantile(q):
        return st.nbinom.ppf(np.asarray(q, dtype=float), n, 1.0 - p)

    mode = math.floor((n - 1.0) * p / (1.0 - p)) if n > 1.0 else 0.0
    return DistributionDescriptor(
        family_name="nbinom", params=params, kind="discrete",
        support=(0.0, math.inf), log_pdf=log_pmf, log_cdf=log_cdf, log_sf=log_sf,
        mode=mode, mu=n * p / (1.0 - p), sigma=math.sqrt(n * p) / (1.0 - p),
        quantile=quantile,
    )


def _build_geometric(params):
    # support {0, 1, ...}: number of non-events before the first event
    p = params["p"]
    lq = math.log1p(-p)

    def log_pmf(x):
        x = np.asarray(x, dtype=float)
        ok = _integer_mask(x) & (x >= 0.0)
        out = np.where(ok, math.log(p) + x * lq, -np.inf)
        if out.ndim == 0:
            return float(out)
        return out

    def log_sf(x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        out = np.where(k < 0.0, 0.0, (k + 1.0) * lq)
        if out.ndim == 0:
            return float(out)
        return out

    def log_cdf(x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        out = np.where(k < 0.0, -np.inf, log1mexp(np.minimum((k + 1.0) * lq, 0.0)))
        if out.ndim == 0:
            return float(out)
        return out

    def quantile(q):
        return st.geom.ppf(np.asarray(q, dtype=float), p) - 1.0

    # Table-1 indices: the mode (0) and base standard deviation
    return DistributionDescriptor(
        family_name="geometric", params=params, kind="discrete",
        support=(0.0, math.inf), log_pdf=log_pmf, log_cdf=log_cdf, log_sf=log_sf,
        mode=0.0, mu=0.0, sigma=math.sqrt(1.0 - p) / p, quantile=quantile,
    )


def _build_gamma(params):
    alpha, lam = params["alpha"], params["lambda"]

    if alpha == 1.0:
        # exponential closed forms: exact log-space tails at any depth
        def log_pdf(x):
            x = np.asarray(x, dtype=float)
            out = np.where(x >= 0.0, math.log(lam) - lam * x, -np.inf)
            return float(out) if out.ndim == 0 else out

        def log_cdf(x):
            x = np.asarray(x, dtype=float)
            out = np.where(x > 0.0, log1mexp(np.minimum(-lam * x, 0.0)), -np.inf)
            return float(out) if out.ndim == 0 else out

        def log_sf(x):
            x = np.asarray(x, dtype=float)
            out = np.where(x > 0.0, -lam * x, 0.0)
            return float(out) if out.ndim == 0 else out
    else:
        def log_pdf(x):
            x = np.asarray(x, dtype=float)
            scalar = x.ndim == 0
            x = np.atleast_1d(x)
            out = np.full(x.shape, -np.inf)
            pos = x > 0.0
            if pos.any():
                xp = x[pos]
                out[pos] = (
                    alpha * math.log(lam) + (alpha - 1.0) * np.log(xp)
                    - lam * xp - sc.gammaln(alpha)
                )
            return float(out[0]) if scalar else out

        def _log_cdf_scalar(x):
            return log_gamma_lower_reg(alpha, lam * x) if x > 0.0 else -math.inf

        def _log_sf_scalar(x):
            return log_gamma_upper_reg(alpha, lam * x) if x > 0.0 else 0.0

        log_cdf = np.vectorize(_log_cdf_scalar, otypes=[float])
        log_sf = np.vectorize(_log_sf_scalar, otypes=[float])

    def quantile(q):
        return st.gamma.ppf(np.asarray(q, dtype=float), alpha, scale=1.0 / lam)

    mode = (alpha - 1.0) / lam if alpha >= 1.0 else 0.0
    return DistributionDescriptor(
        family_name="gamma", params=params, kind="continuous",
        support=(0.0, math.inf), log_pdf=log_pdf, log_cdf=log_cdf, log_sf=log_sf,
        mode=mode, mu=alpha / lam, sigma=math.sqrt(alpha) / lam, quantile=quantile,
    )


def _gamma_exception_handler(params):
    if params["alpha"] < 1.0:
        from .devroye import epd_gamma_route

        return epd_gamma_route
    return None


def _build_invgauss(params):
    # log-density second derivative is 3/(2x^2) - lam/x^3: concave only for
    # x < 2*lam/3, so the rejection envelope is not a strict bound in the
    # far tail.  The excess mass is tiny at practical depths; run
    # check_log_concavity over the interval of interest to quantify.
    mu, lam = params["mu"], params["lambda"]

    def log_pdf(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.full(x.shape, -np.inf)
        pos = x > 0.0
        if pos.any():
            xp = x[pos]
            out[pos] = 0.5 * (math.log(lam) - LOG_2PI - 3.0 * np.log(xp)) - lam * (
                xp - mu
            ) ** 2 / (2.0 * mu * mu * xp)
        return float(out[0]) if scalar else out

    def _terms(x):
        rx = np.sqrt(lam / x)
        u1 = rx * (x / mu - 1.0)
        u2 = rx * (x / mu + 1.0)
        return sc.log_ndtr(u1), sc.log_ndtr(-u1), 2.0 * lam / mu + sc.log_ndtr(-u2)

    def log_cdf(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.full(x.shape, -np.inf)
        pos = x > 0.0
        if pos.any():
            t1, _, t2 = _terms(x[pos])
            out[pos] = np.minimum(np.logaddexp(t1, t2), 0.0)
        return float(out[0]) if scalar else out

    def log_sf(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros(x.shape)
        pos = x > 0.0
        if pos.any():
            _, s1, t2 = _terms(x[pos])
            out[pos] = log_diff_exp(s1, np.minimum(t2, s1))
        return float(out[0]) if scalar else out

    def quantile(q):
        return st.invgauss.ppf(np.asarray(q, dtype=float), mu / lam, scale=lam)

    mode = mu * (math.sqrt(1.0 + 9.0 * mu * mu / (4.0 * lam * lam)) - 3.0 * mu / (2.0 * lam))
    return DistributionDescriptor(
        family_name="invgauss", params=params, kind="continuous",
        support=(0.0, math.inf), log_pdf=log_pdf, log_cdf=log_cdf, log_sf=log_sf,
        mode=mode, mu=mu, sigma=math.sqrt(mu**3 / lam), quantile=quantile,
    )


def _build_epd(params):
    beta = params["beta"]
    a = 1.0 / beta

    def log_pdf(x):
        return epd_log_pdf(x, beta)

    def _log_sf_scalar(x):
        if x >= 0.0:
            return math.log(0.5) + log_gamma_upper_reg(a, x**beta)
        return float(log1mexp(math.log(0.5) + log_gamma_upper_reg(a, (-x) ** beta)))

    def _log_cdf_scalar(x):
        if x <= 0.0:
            return math.log(0.5) + log_gamma_upper_reg(a, (-x) ** beta)
        return float(log1mexp(math.log(0.5) + log_gamma_upper_reg(a, x**beta)))

    def quantile(q):
        q = np.asarray(q, dtype=float)
        u = 2.0 * q - 1.0
        mag = sc.gammaincinv(a, np.abs(u)) ** a
        out = np.sign(u) * mag
        return float(out) if out.ndim == 0 else out

    peak = -math.log(2.0) - sc.gammaln(a + 1.0)
    return DistributionDescriptor(
        family_name="epd", params=params, kind="continuous",
        support=(-math.inf, math.inf), log_pdf=log_pdf,
        log_cdf=np.vectorize(_log_cdf_scalar, otypes=[float]),
        log_sf=np.vectorize(_log_sf_scalar, otypes=[float]),
        mode=0.0, mu=0.0, sigma=math.exp(-peak), quantile=quantile,
    )


def _is_prob(v):
    return 0.0 < v < 1.0


register_family(FamilySpec(
    name="normal",
    params=(ParamSpec("mu", lambda v: True, "real"),
            ParamSpec("sigma", lambda v: v > 0, "sigma > 0")),
    builder=_build_normal,
    defaults={"mu": 0.0, "sigma": 1.0},
))
register_family(FamilySpec(
    name="poisson",
    params=(ParamSpec("lambda", lambda v: v > 0, "lambda > 0"),),
    builder=_build_poisson,
))
register_family(FamilySpec(
    name="binomial",
    params=(ParamSpec("n", lambda v: v >= 1 and v == int(v), "n a positive integer"),
            ParamSpec("p", _is_prob, "0 < p < 1")),
    builder=_build_binomial,
))
register_family(FamilySpec(
    name="nbinom",
    params=(ParamSpec("n", lambda v: v > 0, "n > 0"),
            ParamSpec("p", _is_prob, "0 < p < 1")),
    builder=_build_nbinom,
))
register_family(FamilySpec(
    name="geometric",
    params=(ParamSpec("p", _is_prob, "0 < p < 1"),),
    builder=_build_geometric,
))
register_family(FamilySpec(
    name="gamma",
    params=(ParamSpec("alpha", lambda v: v > 0, "alpha > 0"),
            ParamSpec("lambda", lambda v: v > 0, "lambda > 0")),
    builder=_build_gamma,
    defaults={"lambda": 1.0},
    exception_handler=_gamma_exception_handler,
))
register_family(FamilySpec(
    name="invgauss",
    params=(ParamSpec("mu", lambda v: v > 0, "mu > 0"),
            ParamSpec("lambda", lambda v: v > 0, "lambda > 0")),
    builder=_build_invgauss,
))
register_family(FamilySpec(
    name="epd",
    params=(ParamSpec("beta", lambda v: v >= 1, "beta >= 1 (log-concave regime)"),),
    builder=_build_epd,
))


# ---------------------------------------------------------------------------
# log-concavity probe

def check_log_concavity(
    desc: DistributionDescriptor,
    probe_range: tuple[float, float],
    n_probes: int = 200,
    tol: float = 1e-9,
    rng: np.random.Generator | None = None,
):
    """Probe the log-concavity of a descriptor over ``probe_range``.

    Discrete: verifies 2 l(x) >= l(x-1) + l(x+1) at every integer in the
    range.  Continuous: midpoint concavity on random pairs.  Returns
    ``(ok, violation)`` with the first violating probe, if any.
    """
    lo = max(probe_range[0], desc.support[0])
    hi = min(probe_range[1], desc.support[1])
    if lo > hi:
        raise ValueError("probe range does not intersect the support")
    if desc.is_discrete:
        ks = np.arange(math.ceil(lo), math.floor(hi) + 1.0)
        if ks.size > 2_000_000:
            raise ValueError("probe range too wide for an exhaustive integer scan")
        l = np.asarray(desc.log_pdf(ks), dtype=float)
        inner = np.isfinite(l[1:-1]) & np.isfinite(l[:-2]) & np.isfinite(l[2:])
        gap = 2.0 * l[1:-1] - l[:-2] - l[2:]
        bad = inner & (gap < -tol)
        if bad.any():
            i = int(np.argmax(bad))
            return False, (float(ks[i + 1]), float(gap[i]))
        return True, None
    rng = rng or np.random.default_rng(0)
    x1 = rng.uniform(lo, hi, size=n_probes)
    x2 = rng.uniform(lo, hi, size=n_probes)
    lm = np.asarray(desc.log_pdf((x1 + x2) / 2.0), dtype=float)
    l1 = np.asarray(desc.log_pdf(x1), dtype=float)
    l2 = np.asarray(desc.log_pdf(x2), dtype=float)
    fin = np.isfinite(l1) & np.isfinite(l2)
    gap = lm - (l1 + l2) / 2.0
    bad = fin & (gap < -tol)
    if bad.any():
        i = int(np.argmax(bad))
        return False, ((float(x1[i]), float(x2[i])), float(gap[i]))
    return True, None
