"""Family registry: standardization indices, modes, tail accuracy,
log-concavity, and the registration API."""

import math

import mpmath as mp
import numpy as np
import pytest
from scipy import stats as st

from trunclc import (
    DistributionDescriptor,
    FamilySpec,
    ParameterError,
    ParamSpec,
    UnknownFamilyError,
    build_descriptor,
    check_log_concavity,
    ds_sample_batch,
    epd_log_pdf,
    epd_to_gamma,
    register_family,
    truncate,
)
from trunclc.logspace import log1mexp

mp.mp.dps = 50


def brute_log_sum(desc, lo, hi):
    ks = np.arange(lo, hi + 1, dtype=float)
    lp = np.asarray(desc.log_pdf(ks), dtype=float)
    m = lp.max()
    return m + math.log(np.exp(lp - m).sum())


class TestStandardizationIndices:
    """mu / sigma per the central-tendency and dispersion conventions."""

    def test_poisson(self):
        d = build_descriptor("poisson", {"lambda": 4.0})
        assert (d.mu, d.sigma) == (4.0, 2.0)

    def test_geometric(self):
        d = build_descriptor("geometric", p=0.5)
        assert d.mu == 0.0
        assert d.sigma == pytest.approx(math.sqrt(0.5) / 0.5)

    def test_binomial(self):
        d = build_descriptor("binomial", n=10, p=0.5)
        assert d.mu == 5.0
        assert d.sigma == pytest.approx(math.sqrt(2.5))
        assert d.mode == 5.0  # oracle: argmax of the pmf by direct scan
        pm = st.binom.pmf(np.arange(11), 10, 0.5)
        assert np.argmax(pm) == 5

    def test_nbinom(self):
        d = build_descriptor("nbinom", n=4.0, p=0.25)
        assert d.mu == pytest.approx(4.0 * 0.25 / 0.75)
        assert d.sigma == pytest.approx(math.sqrt(1.0) / 0.75)

    def test_gamma(self):
        d = build_descriptor("gamma", alpha=4.0, **{"lambda": 2.0})
        assert d.mu == 2.0
        assert d.sigma == 1.0

    def test_invgauss(self):
        d = build_descriptor("invgauss", mu=2.0, **{"lambda": 4.0})
        assert d.mu == 2.0
        assert d.sigma == pytest.approx(math.sqrt(8.0 / 4.0))


class TestParameterValidation:
    def test_unknown_family(self):
        with pytest.raises(UnknownFamilyError):
            build_descriptor("zipf", s=2)

    def test_invalid_parameter_names_constraint(self):
        with pytest.raises(ParameterError, match="lambda > 0"):
            build_descriptor("poisson", {"lambda": -1.0})
        with pytest.raises(ParameterError, match="0 < p < 1"):
            build_descriptor("geometric", p=1.5)

    def test_missing_and_extra(self):
        with pytest.raises(ParameterError, match="missing"):
            build_descriptor("binomial", n=10)
        with pytest.raises(ParameterError, match="unknown parameter"):
            build_descriptor("poisson", {"lambda": 1.0, "scale": 2.0})


class TestModeIsArgmax:
    """The mode field maximizes the density (probed, not trusted)."""

    DISCRETE = [
        ("poisson", [{"lambda": v} for v in (0.3, 1.0, 2.5, 5.0, 17.2, 100.0)]),
        ("binomial", [{"n": 1, "p": 0.5}, {"n": 10, "p": 0.5}, {"n": 10, "p": 0.23},
                      {"n": 100, "p": 0.9}, {"n": 1000, "p": 0.01}, {"n": 7, "p": 0.999}]),
        ("nbinom", [{"n": 0.5, "p": 0.3}, {"n": 1.0, "p": 0.5}, {"n": 2.0, "p": 0.7},
                    {"n": 10.0, "p": 0.9}, {"n": 100.0, "p": 0.2}]),
        ("geometric", [{"p": v} for v in (0.1, 0.5, 0.9)]),
    ]
    CONTINUOUS = [
        ("normal", [{"mu": -3.0, "sigma": 0.5}, {"mu": 2.0, "sigma": 10.0}]),
        ("gamma", [{"alpha": a, "lambda": l} for a in (1.0, 1.5, 2.0, 10.0)
                   for l in (0.5, 2.0)]),
        ("invgauss", [{"mu": 1.0, "lambda": 1.0}, {"mu": 2.0, "lambda": 0.5},
                      {"mu": 0.5, "lambda": 3.0}]),
        ("epd", [{"beta": v} for v in (1.0, 1.7, 2.0, 4.0)]),
    ]

    @pytest.mark.parametrize("family,grid", DISCRETE)
    def test_discrete(self, family, grid):
        for params in grid:
            d = build_descriptor(family, params)
            lm = float(d.log_pdf(np.asarray(d.mode)))
            for delta in (-1.0, 1.0):
                neighbor = d.mode + delta
                ln = float(d.log_pdf(np.asarray(neighbor)))
                assert lm >= ln - 1e-12, (family, params, neighbor)

    @pytest.mark.parametrize("family,grid", CONTINUOUS)
    def test_continuous(self, family, grid):
        for params in grid:
            d = build_descriptor(family, params)
            delta = 1e-6 * d.sigma
            lm = float(d.log_pdf(np.asarray(d.mode)))
            for s in (-1.0, 1.0):
                x = d.mode + s * delta
                if not d.support[0] <= x <= d.support[1]:
                    continue
                assert lm >= float(d.log_pdf(np.asarray(x))) - 1e-12, (family, params)


class TestTailAccuracy:
    """log CDF / log survival against independent high-precision oracles."""

    def _probes(self, d, integer=False):
        lo = max(d.support[0], d.mu - 5.0 * d.sigma)
        hi = min(d.support[1], d.mu + 5.0 * d.sigma)
        xs = np.linspace(lo, hi, 20)
        if integer:
            xs = np.unique(np.floor(xs))
        return xs

    @pytest.mark.parametrize("family,params", [
        ("poisson", {"lambda": 7.0}),
        ("binomial", {"n": 50, "p": 0.3}),
        ("nbinom", {"n": 6.0, "p": 0.4}),
        ("geometric", {"p": 0.35}),
    ])
    def test_discrete_vs_brute_summation(self, family, params):
        d = build_descriptor(family, params)
        hi_sum = int(min(d.support[1], d.mu + 60.0 * d.sigma + 60))
        for k in self._probes(d, integer=True):
            want_cdf = brute_log_sum(d, int(d.support[0]), int(k))
            want_sf = brute_log_sum(d, int(k) + 1, hi_sum) if k < d.support[1] else -math.inf
            assert float(d.log_cdf(np.asarray(k))) == pytest.approx(want_cdf, rel=1e-10)
            if want_sf > -math.inf:
                assert float(d.log_sf(np.asarray(k))) == pytest.approx(want_sf, rel=1e-10)

    def test_normal_vs_mpmath(self):
        d = build_descriptor("normal", mu=1.0, sigma=2.0)
        for x in self._probes(d):
            z = (mp.mpf(x) - 1) / 2
            assert float(d.log_cdf(np.asarray(x))) == pytest.approx(
                float(mp.log(mp.ncdf(z))), rel=1e-12)
            assert float(d.log_sf(np.asarray(x))) == pytest.approx(
                float(mp.log(mp.ncdf(-z))), rel=1e-12)

    def test_gamma_vs_mpmath(self):
        d = build_descriptor("gamma", alpha=2.5, **{"lambda": 1.5})
        for x in self._probes(d):
            if x <= 0:
                continue
            z = mp.mpf(1.5) * mp.mpf(x)
            want_cdf = float(mp.log(mp.gammainc(mp.mpf(2.5), 0, z, regularized=True)))
            want_sf = float(mp.log(mp.gammainc(mp.mpf(2.5), z, mp.inf, regularized=True)))
            assert float(d.log_cdf(np.asarray(x))) == pytest.approx(want_cdf, rel=1e-10)
            assert float(d.log_sf(np.asarray(x))) == pytest.approx(want_sf, rel=1e-10)

    def test_epd_vs_mpmath(self):
        for beta in (1.0, 2.0, 3.5):
            d = build_descriptor("epd", beta=beta)
            a = mp.mpf(1) / beta
            for x in self._probes(d):
                xx = mp.mpf(abs(x)) ** beta
                half_tail = mp.mpf("0.5") * mp.gammainc(a, xx, mp.inf, regularized=True)
                want_sf = half_tail if x >= 0 else 1 - half_tail
                assert float(d.log_sf(np.asarray(x))) == pytest.approx(
                    float(mp.log(want_sf)), rel=1e-10), (beta, x)

    def test_invgauss_vs_mpmath_quadrature(self):
        # independent oracle: adaptive quadrature of the density itself
        d = build_descriptor("invgauss", mu=1.0, **{"lambda": 2.0})

        def pdf(x):
            return mp.sqrt(2 / (2 * mp.pi * x**3)) * mp.exp(
                -2 * (x - 1) ** 2 / (2 * x))

        for x in [0.2, 0.5, 1.0, 2.0, 4.0]:
            want_cdf = float(mp.log(mp.quad(pdf, [0, x])))
            want_sf = float(mp.log(mp.quad(pdf, [x, mp.inf])))
            assert float(d.log_cdf(np.asarray(x))) == pytest.approx(want_cdf, rel=1e-9)
            assert float(d.log_sf(np.asarray(x))) == pytest.approx(want_sf, rel=1e-9)

    def test_deep_tail_pmf_vs_mpmath(self):
        d = build_descriptor("poisson", {"lambda": 5.0})
        want = float(120 * mp.log(5) - 5 - mp.log(mp.factorial(120)))
        assert float(d.log_pdf(np.asarray(120.0))) == pytest.approx(want, rel=1e-13)
        b = build_descriptor("binomial", n=1000, p=0.3)
        want_b = float(
            mp.log(mp.binomial(1000, 990)) + 990 * mp.log(mp.mpf("0.3"))
            + 10 * mp.log(mp.mpf("0.7")))
        assert float(b.log_pdf(np.asarray(990.0))) == pytest.approx(want_b, rel=1e-13)

    def test_tail_sum_fallback_below_linear_floor(self):
        # survival at depths where the linear special function underflows
        d = build_descriptor("poisson", {"lambda": 5.0})
        got = float(d.log_sf(np.asarray(300.0)))
        want = brute_log_sum(d, 301, 700)
        assert got == pytest.approx(want, rel=1e-12)
        assert got < -600.0


class TestMemorylessnessIdentities:
    def test_geometric_shift_identity(self):
        # under the failures convention the exact identity is
        # log S(x+h) - log S(x) = h log(1-p)  (= log S(h-1))
        for p in (0.1, 0.5, 0.9):
            d = build_descriptor("geometric", p=p)
            lq = math.log1p(-p)
            for x in (0.0, 3.0, 17.0, 50.0):
                for h in (0.0, 1.0, 8.0, 50.0):
                    got = float(d.log_sf(np.asarray(x + h))) - float(
                        d.log_sf(np.asarray(x)))
                    assert got == pytest.approx(h * lq, abs=1e-10)

    def test_exponential_shift_identity(self):
        d = build_descriptor("gamma", alpha=1.0, **{"lambda": 0.7})
        for x in (0.0, 1.5, 40.0, 900.0):
            for h in (0.3, 2.0, 60.0):
                got = float(d.log_sf(np.asarray(x + h))) - float(d.log_sf(np.asarray(x)))
                assert got == pytest.approx(float(d.log_sf(np.asarray(h))), abs=1e-10)


class TestLogConcavity:
    def test_poisson_is_log_concave(self):
        d = build_descriptor("poisson", {"lambda": 5.0})
        ok, violation = check_log_concavity(d, (0.0, 100.0))
        assert ok and violation is None

    def test_gamma_below_one_is_not(self):
        d = build_descriptor("gamma", alpha=0.5, **{"lambda": 1.0})
        ok, violation = check_log_concavity(d, (1e-9, 10.0), n_probes=500)
        assert not ok and violation is not None

    def test_normal_is_log_concave(self):
        d = build_descriptor("normal", mu=0, sigma=1)
        ok, _ = check_log_concavity(d, (-10.0, 10.0), n_probes=500)
        assert ok

    @pytest.mark.parametrize("family,params,rng", [
        ("binomial", {"n": 40, "p": 0.3}, (0.0, 40.0)),
        ("nbinom", {"n": 3.0, "p": 0.6}, (0.0, 200.0)),
        ("geometric", {"p": 0.2}, (0.0, 300.0)),
        ("gamma", {"alpha": 3.0, "lambda": 2.0}, (1e-6, 30.0)),
        ("epd", {"beta": 1.5}, (-20.0, 20.0)),
    ])
    def test_builtin_families_pass_probe(self, family, params, rng):
        d = build_descriptor(family, params)
        ok, violation = check_log_concavity(d, rng, n_probes=400)
        assert ok, violation

    def test_invgauss_log_concave_region_only(self):
        # the inverse Gaussian log-density has second derivative
        # 3/(2x^2) - lambda/x^3: concave only below 2*lambda/3.  The probe
        # must accept the concave region and flag the convex tail.
        d = build_descriptor("invgauss", mu=1.0, **{"lambda": 3.0})
        ok, _ = check_log_concavity(d, (1e-6, 2.0 * 3.0 / 3.0 - 0.05), n_probes=500)
        assert ok
        bad, violation = check_log_concavity(d, (2.5, 40.0), n_probes=500)
        assert not bad and violation is not None


class TestExponentialPower:
    def test_log_pdf_values(self):
        assert epd_log_pdf(0.0, 1.0) == pytest.approx(math.log(0.5), abs=1e-14)
        # Gamma(1.5) = sqrt(pi)/2, so f(0; 2) = 1/sqrt(pi)
        assert epd_log_pdf(0.0, 2.0) == pytest.approx(-0.5723649429247001, abs=1e-13)
        assert epd_log_pdf(1.0, 1.0) == pytest.approx(-1.0 - math.log(2.0), abs=1e-14)

    def test_beta_below_one_rejected(self):
        with pytest.raises(ParameterError):
            epd_log_pdf(0.0, 0.5)

    def test_to_gamma_mapping(self):
        assert epd_to_gamma(-1.5, 2.0) == 2.25
        assert epd_to_gamma(0.0, 3.0) == 0.0

    def test_epd2_stream_maps_to_gamma_half(self):
        # EPD(2) is normal with variance 1/2; |X|^2 is chi^2_1 / 2, i.e.
        # gamma(1/2, 1) with mean 1/2
        target = truncate(build_descriptor("epd", beta=2.0))
        batch = ds_sample_batch(target, 100_000, rng=31)
        mapped = epd_to_gamma(batch.values, 2.0)
        # SE of the mean of gamma(0.5, 1) is sqrt(0.5)/sqrt(n)
        se = math.sqrt(0.5) / math.sqrt(mapped.size)
        assert abs(mapped.mean() - 0.5) < 4.0 * se


class TestRegistrationApi:
    def test_user_family_end_to_end(self):
        # a family is added by supplying its name, schema, and log-space
        # descriptor functions
        def build_laplace(params):
            m, b = params["m"], params["b"]

            def log_pdf(x):
                return -np.abs(np.asarray(x, dtype=float) - m) / b - math.log(2.0 * b)

            def log_cdf(x):
                x = np.asarray(x, dtype=float)
                lo = math.log(0.5) - (m - x) / b
                return np.where(x <= m, lo, log1mexp(np.minimum(
                    math.log(0.5) - (x - m) / b, 0.0)))

            def log_sf(x):
                x = np.asarray(x, dtype=float)
                hi = math.log(0.5) - (x - m) / b
                return np.where(x >= m, hi, log1mexp(np.minimum(
                    math.log(0.5) - (m - x) / b, 0.0)))

            def quantile(p):
                p = np.asarray(p, dtype=float)
                return np.where(p < 0.5, m + b * np.log(2.0 * p),
                                m - b * np.log1p(-np.minimum(p, 1.0)) - b * math.log(2.0))

            return DistributionDescriptor(
                family_name="laplace", params=params, kind="continuous",
                support=(-math.inf, math.inf), log_pdf=log_pdf, log_cdf=log_cdf,
                log_sf=log_sf, mode=m, mu=m, sigma=b, quantile=quantile,
            )

        register_family(FamilySpec(
            name="laplace",
            params=(ParamSpec("m", lambda v: True, "real"),
                    ParamSpec("b", lambda v: v > 0, "b > 0")),
            builder=build_laplace,
        ))
        d = build_descriptor("laplace", m=0.0, b=1.0)
        ok, _ = check_log_concavity(d, (-10.0, 10.0))
        assert ok
        # deep truncation: the excess over a is exponential(1/b) exactly
        target = truncate(d, lower=20.0)
        batch = ds_sample_batch(target, 20_000, rng=5)
        assert batch.is_clean(target)
        ks = st.kstest(batch.values - 20.0, st.expon.cdf)
        assert ks.pvalue > 0.001
