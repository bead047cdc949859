from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mile.errors import DomainError
from mile.numkern import bessel_i_ratio, log_bessel_i, log_gamma, scaled_bessel_term

mp.mp.dps = 40


def oracle_log_i(nu, x):
    return float(mp.log(mp.besseli(mp.mpf(nu), mp.mpf(x), maxterms=10**6)))


def oracle_series_log_i(nu, x):
    # ascending series in extended precision, independent of mpmath's besseli
    nu, x = mp.mpf(nu), mp.mpf(x)
    h = (x / 2) ** 2
    term = 1 / mp.gamma(nu + 1)
    total = term
    k = 0
    while True:
        k += 1
        term *= h / (k * (k + nu))
        total += term
        if term < total * mp.mpf(10) ** -38:
            break
    return float(nu * mp.log(x / 2) + mp.log(total))


class TestLogGamma:
    def test_known_values(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-15)
        assert log_gamma(10.0) == pytest.approx(12.80182748008146961120772, rel=1e-14)

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            log_gamma(x)

    @given(st.floats(0.5, 1e6))
    @settings(max_examples=50, deadline=None)
    def test_against_mpmath(self, x):
        ref = float(mp.loggamma(x))
        assert abs(log_gamma(x) - ref) <= 1e-12 * max(1.0, abs(ref))


class TestLogBesselI:
    def test_zero(self):
        assert log_bessel_i(0.0, 0.0) == 0.0
        assert log_bessel_i(2.0, 0.0) == -math.inf

    def test_half_order_closed_form(self):
        ref = math.log(math.sqrt(2 / math.pi) * math.cosh(1.0))
        assert log_bessel_i(-0.5, 1.0) == pytest.approx(ref, rel=1e-14)

    def test_frozen_large_order(self):
        assert log_bessel_i(499.0, 600.0) == pytest.approx(398.2909634028315296162336, rel=1e-13)

    @pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 5.0, 17.5, 100.0])
    @pytest.mark.parametrize("x", [1e-6, 0.01, 0.7, 3.0, 19.5, 20.5, 47.0, 99.0, 150.0, 200.0])
    def test_series_oracle_grid(self, nu, x):
        ref = oracle_series_log_i(nu, x)
        assert abs(log_bessel_i(nu, x) - ref) <= 1e-10 * max(abs(ref), 1e-300)

    @pytest.mark.parametrize("nu,x", [
        (199.0, 150.0), (200.0, 0.3), (250.0, 1e3), (999.0, 1300.0), (5000.0, 50.0),
        (2e4, 3e4), (3.3, 1e4), (0.0, 1e6), (2.5, 5e7), (150.0, 5e5),
    ])
    def test_all_regimes(self, nu, x):
        ref = oracle_log_i(nu, x)
        assert abs(log_bessel_i(nu, x) - ref) <= 1e-12 * abs(ref)

    @pytest.mark.parametrize("nu,x", [(1e7, 1e7), (1e6, 3e7), (5e6, 1e5), (300.0, 2e6)])
    def test_recurrence_at_extremes(self, nu, x):
        # I_{nu-1} - I_{nu+1} = (2 nu / x) I_nu; log errors scale with |ln I|
        mid = log_bessel_i(nu, x)
        up = math.exp(log_bessel_i(nu - 1, x) - mid)
        down = math.exp(log_bessel_i(nu + 1, x) - mid)
        tol = 8 * 2.3e-16 * abs(mid) * (up + down) + 1e-13
        assert abs(up - down - 2 * nu / x) <= tol

    def test_no_overflow_at_extremes(self):
        for nu, x in [(1e7, 1e7), (0.0, 1e7), (1e7, 1.0)]:
            assert math.isfinite(log_bessel_i(nu, x))

    @pytest.mark.parametrize("nu,x", [(-0.6, 1.0), (-0.5, 0.0), (1.0, -1.0), (math.nan, 1.0)])
    def test_domain(self, nu, x):
        with pytest.raises(DomainError):
            log_bessel_i(nu, x)


class TestRatio:
    def test_small_argument(self):
        assert bessel_i_ratio(0.0, 1e-8) == pytest.approx(0.5e-8, rel=1e-8)

    def test_large_argument(self):
        r = bessel_i_ratio(0.0, 1e6)
        assert 0.999999 < r < 1.0

    def test_frozen(self):
        assert bessel_i_ratio(5.0, 7.5) == pytest.approx(0.4899221910452616612361669, rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_i_ratio(1.0, 0.0)
        with pytest.raises(DomainError):
            bessel_i_ratio(-0.5, 1.0)

    @given(st.floats(0.0, 1e4), st.floats(1e-3, 1e4), st.floats(1.001, 2.0))
    @settings(max_examples=100, deadline=None)
    def test_increasing_and_below_one(self, nu, x, factor):
        a, b = bessel_i_ratio(nu, x), bessel_i_ratio(nu, x * factor)
        assert 0.0 < a < b < 1.0

    @pytest.mark.parametrize("nu,x", [(0.0, 0.3), (2.0, 30.0), (60.0, 10.0), (300.0, 450.0), (1e4, 3e4)])
    def test_against_mpmath(self, nu, x):
        ref = float(mp.besseli(nu + 1, x, maxterms=10**6) / mp.besseli(nu, x, maxterms=10**6))
        assert bessel_i_ratio(nu, x) == pytest.approx(ref, rel=1e-12)


class TestScaledTerm:
    def test_zero_order(self):
        s, z = 40.0, 0.8
        assert scaled_bessel_term(0.0, z, s) == pytest.approx(log_bessel_i(0.0, s * z / 2) / s, rel=1e-14)

    def test_zero_argument_limit(self):
        nu, s = 7.0, 30.0
        ref = (nu * math.log(s / 4) - math.lgamma(nu + 1)) / s
        assert scaled_bessel_term(nu, 0.0, s) == pytest.approx(ref, rel=1e-14)
        assert scaled_bessel_term(nu, 1e-12, s) == pytest.approx(ref, rel=1e-10)

    def test_frozen_large_order(self):
        assert scaled_bessel_term(999.0, 1.3, 2000.0) == pytest.approx(0.3328236861561756429860335, rel=1e-12)

    @pytest.mark.parametrize("s", [1000.0, 2000.0, 10000.0])
    def test_uniform_expansion_differences(self, s):
        nu = (s - 2) / 2

        def limit(z):
            r = math.sqrt(1 + z * z)
            return 0.5 * (r - math.log1p(r))

        zs = [0.1, 0.5, 1.3, 2.7, 5.0]
        for z1 in zs:
            for z2 in zs:
                got = scaled_bessel_term(nu, z1, s) - scaled_bessel_term(nu, z2, s)
                assert abs(got - (limit(z1) - limit(z2))) <= 1e-3

    def test_domain(self):
        with pytest.raises(DomainError):
            scaled_bessel_term(1.0, 1.0, 0.0)
