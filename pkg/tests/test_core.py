"""Truncated-target construction: interval mass, mode projection, density,
CDF and quantile contracts."""

import math

import numpy as np
import pytest
from scipy import integrate

from trunclc import (
    TruncationInterval,
    TruncationOverflow,
    build_descriptor,
    log_interval_mass,
    project_mode,
    truncate,
)
from trunclc.logspace import log_diff_exp


def brute_log_sum(desc, lo, hi):
    """Independent oracle: direct log-space summation of the pmf."""
    ks = np.arange(lo, hi + 1, dtype=float)
    lp = np.asarray(desc.log_pdf(ks), dtype=float)
    m = lp.max()
    return m + math.log(np.exp(lp - m).sum())


class TestLogIntervalMass:
    def test_full_interval_is_zero(self):
        d = build_descriptor("normal", mu=0, sigma=1)
        assert log_interval_mass(d, TruncationInterval()) == 0.0

    def test_half_line_by_symmetry(self):
        d = build_descriptor("normal", mu=0, sigma=1)
        got = log_interval_mass(d, TruncationInterval(0.0, math.inf))
        assert got == pytest.approx(math.log(0.5), abs=1e-14)

    def test_deep_tail_vs_mills_oracle(self):
        # oracle: mpmath log(Phi-bar(38)) = -726.55721601882013...
        d = build_descriptor("normal", mu=0, sigma=1)
        got = log_interval_mass(d, TruncationInterval(38.0, math.inf))
        assert got == pytest.approx(-726.55721601882013, abs=1e-9)

    def test_representability_underflow_collapses_to_neg_inf(self):
        d = build_descriptor("normal", mu=0, sigma=1)
        assert log_interval_mass(d, TruncationInterval(39.0, math.inf)) == -math.inf
        e = build_descriptor("gamma", alpha=1, **{"lambda": 1})
        assert log_interval_mass(e, TruncationInterval(745.0, math.inf)) > -math.inf
        assert log_interval_mass(e, TruncationInterval(746.0, math.inf)) == -math.inf

    def test_route_stability(self):
        # CDF route and survival route agree on the log scale wherever
        # both are finite and well conditioned
        d = build_descriptor("normal", mu=0, sigma=1)
        for a, b in [(-2.0, -0.5), (-1.0, 1.0), (0.5, 2.0), (-8.0, -6.0), (6.0, 8.0)]:
            cdf_route = log_diff_exp(
                float(d.log_cdf(np.asarray(b))), float(d.log_cdf(np.asarray(a)))
            )
            sf_route = log_diff_exp(
                float(d.log_sf(np.asarray(a))), float(d.log_sf(np.asarray(b)))
            )
            assert cdf_route == pytest.approx(sf_route, rel=1e-9)
            got = log_interval_mass(d, TruncationInterval(a, b))
            assert got == pytest.approx(cdf_route, rel=1e-9)

    def test_discrete_mass_matches_brute_force(self):
        d = build_descriptor("poisson", {"lambda": 5.0})
        got = log_interval_mass(d, TruncationInterval(12.0, math.inf))
        want = brute_log_sum(d, 13, 300)
        assert got == pytest.approx(want, rel=1e-12)
        got2 = log_interval_mass(d, TruncationInterval(4.0, 9.0))
        want2 = brute_log_sum(d, 5, 9)
        assert got2 == pytest.approx(want2, rel=1e-12)


class TestProjectMode:
    def test_continuous_clamp(self):
        d = build_descriptor("normal", mu=0, sigma=1)
        assert project_mode(d, TruncationInterval(3.0, math.inf)) == 3.0
        assert project_mode(d, TruncationInterval(-math.inf, -2.0)) == -2.0
        assert project_mode(d, TruncationInterval(-1.0, 1.0)) == 0.0

    def test_discrete_projection(self):
        d = build_descriptor("poisson", {"lambda": 5.0})
        assert project_mode(d, TruncationInterval(10.7, math.inf)) == 11.0
        assert project_mode(d, TruncationInterval(2.0, 20.0)) == 5.0
        assert project_mode(d, TruncationInterval(-math.inf, math.inf)) == 5.0

    def test_discrete_empty_interval_errors(self):
        d = build_descriptor("poisson", {"lambda": 5.0})
        with pytest.raises(ValueError):
            project_mode(d, TruncationInterval(9.2, 9.8))

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            TruncationInterval(2.0, 2.0)
        with pytest.raises(ValueError):
            TruncationInterval(5.0, 1.0)


class TestTruncLogPdf:
    def test_half_normal_value(self):
        # closed form: log(2 phi(0)) = -0.22579135264472744
        t = truncate(build_descriptor("normal", mu=0, sigma=1), lower=0.0)
        assert t.log_pdf(1e-12) == pytest.approx(-0.22579135264472744, abs=1e-9)

    def test_outside_interval_is_neg_inf(self):
        t = truncate(build_descriptor("normal", mu=0, sigma=1), lower=0.0, upper=2.0)
        assert t.log_pdf(-0.5) == -math.inf
        assert t.log_pdf(0.0) == -math.inf  # open lower endpoint
        assert t.log_pdf(2.0) > -math.inf   # closed upper endpoint
        assert t.log_pdf(2.0000001) == -math.inf

    def test_poisson_vs_summation_oracle(self):
        d = build_descriptor("poisson", {"lambda": 5.0})
        t = truncate(d, lower=12.0)
        want = float(d.log_pdf(np.asarray(13.0))) - brute_log_sum(d, 13, 200)
        assert t.log_pdf(13.0) == pytest.approx(want, rel=1e-12)

    def test_normalization_continuous(self):
        # numerical integral of the truncated density is 1 at moderate depth
        for family, params, a, b in [
            ("normal", {"mu": 0.0, "sigma": 1.0}, 1.0, math.inf),
            ("gamma", {"alpha": 2.0, "lambda": 1.0}, 5.0, 9.0),
            ("invgauss", {"mu": 1.0, "lambda": 1.0}, 0.5, 4.0),
        ]:
            t = truncate(build_descriptor(family, params), lower=a, upper=b)
            hi = b if math.isfinite(b) else a + 60.0
            val, _ = integrate.quad(
                lambda x: math.exp(t.log_pdf(x)), a, hi, limit=300
            )
            assert val == pytest.approx(1.0, abs=1e-6)

    def test_normalization_discrete(self):
        t = truncate(build_descriptor("poisson", {"lambda": 3.0}), lower=4.0, upper=9.0)
        total = sum(math.exp(t.log_pdf(float(k))) for k in range(5, 10))
        assert total == pytest.approx(1.0, abs=1e-6)


class TestTruncQuantile:
    def test_half_normal_median(self):
        # oracle: standard normal quantile at 0.75 = 0.6744897501960817
        t = truncate(build_descriptor("normal", mu=0, sigma=1), lower=0.0)
        assert t.quantile(0.5) == pytest.approx(0.6744897501960817, abs=1e-12)

    def test_p_zero_limits(self):
        t = truncate(build_descriptor("normal", mu=0, sigma=1), lower=1.5)
        assert t.quantile(0.0) == 1.5
        tp = truncate(build_descriptor("poisson", {"lambda": 5.0}), lower=2.0, upper=20.0)
        assert tp.quantile(0.0) == 3.0

    def test_overflow_at_ten_sigma(self):
        t = truncate(build_descriptor("normal", mu=0, sigma=1), lower=10.0)
        with pytest.raises(TruncationOverflow):
            t.quantile(0.5)

    def test_monotone_in_p(self):
        for target in [
            truncate(build_descriptor("normal", mu=0, sigma=1), lower=-1.0, upper=2.0),
            truncate(build_descriptor("poisson", {"lambda": 7.0}), lower=3.0, upper=30.0),
        ]:
            ps = np.linspace(0.001, 0.999, 41)
            qs = [target.quantile(float(p)) for p in ps]
            assert all(q2 >= q1 for q1, q2 in zip(qs, qs[1:]))

    def test_quantile_cdf_inversion(self):
        # F_I(q_I(p)) = p to 1e-8 on continuous targets with mass >= 1e-4
        targets = [
            truncate(build_descriptor("normal", mu=0, sigma=1), lower=-1.0, upper=2.0),
            truncate(build_descriptor("gamma", alpha=2, **{"lambda": 1}), lower=0.5, upper=4.0),
            truncate(build_descriptor("invgauss", mu=1, **{"lambda": 1}), lower=0.3, upper=2.0),
        ]
        for t in targets:
            a = t.interval.lower
            for p in [0.05, 0.2, 0.5, 0.8, 0.95]:
                x = t.quantile(p)
                la = float(t.base.log_cdf(np.asarray(a)))
                lx = float(t.base.log_cdf(np.asarray(x)))
                f_i = math.exp(log_diff_exp(lx, min(la, lx)) - t.log_mass)
                assert f_i == pytest.approx(p, abs=1e-8)


class TestDescriptorConsistency:
    def test_cdf_plus_sf_is_one(self):
        # |F + S - 1| <= 1e-12 wherever both are comfortably representable
        cases = [
            ("normal", {"mu": 0.0, "sigma": 1.0}, np.linspace(-6, 6, 25)),
            ("gamma", {"alpha": 2.0, "lambda": 0.5}, np.linspace(0.1, 20, 25)),
            ("invgauss", {"mu": 1.0, "lambda": 2.0}, np.linspace(0.05, 8, 25)),
            ("poisson", {"lambda": 7.0}, np.arange(0, 25, dtype=float)),
            ("geometric", {"p": 0.3}, np.arange(0, 30, dtype=float)),
        ]
        for family, params, xs in cases:
            d = build_descriptor(family, params)
            f = np.exp(np.asarray(d.log_cdf(xs), dtype=float))
            s = np.exp(np.asarray(d.log_sf(xs), dtype=float))
            keep = (f > 1e-300) & (s > 1e-300)
            assert np.all(np.abs(f[keep] + s[keep] - 1.0) <= 1e-12)

    def test_degenerate_target_flag(self):
        t = truncate(build_descriptor("normal", mu=0, sigma=1), lower=800.0)
        assert t.degenerate
        assert t.proj_mode == 800.0
