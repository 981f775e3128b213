"""Gaussian channel capacity: Monte Carlo estimates and analytic bounds."""

import math

import numpy as np
import pytest

from mdlvol.capacity import (
    LOW_SNR_THRESHOLD,
    awgn_packing_count,
    capacity_limit,
    capacity_lower_bound,
    capacity_mc,
    capacity_upper_bound,
    expected_wishart_logdet,
)
from mdlvol.numerics import RngStream, digamma

EULER_GAMMA = 0.5772156649015329


def _scalar_capacity_quadrature(snr, points=301):
    """Independent oracle for d = n = 1: E[log(1 + snr x^2)/2], x ~ N(0,1),
    via Gauss–Hermite quadrature (no Monte Carlo, no shared code path)."""
    t, w = np.polynomial.hermite.hermgauss(points)
    x = math.sqrt(2.0) * t
    vals = 0.5 * np.log1p(snr * x * x)
    return float(np.sum(w * vals) / math.sqrt(math.pi))


class TestCapacityMc:
    @pytest.mark.parametrize("snr", [0.5, 1.0, 10.0, 100.0])
    def test_scalar_channel_matches_quadrature_oracle(self, snr):
        est = capacity_mc(1, 1, snr, samples=20000, rng=RngStream(17))
        ref = _scalar_capacity_quadrature(snr)
        assert abs(est.value - ref) <= 4.0 * est.stderr

    def test_reported_fields(self):
        est = capacity_mc(3, 4, 5.0, samples=500, rng=RngStream(0))
        assert est.samples == 500
        assert est.stderr > 0.0
        assert est.lower_bound <= est.upper_bound
        assert est.low_snr  # 5 < 10

    def test_low_snr_flag_threshold(self):
        assert LOW_SNR_THRESHOLD == 10.0
        rng = RngStream(1)
        assert capacity_mc(2, 2, 9.99, samples=64, rng=rng).low_snr
        assert not capacity_mc(2, 2, 10.0, samples=64, rng=rng).low_snr

    def test_deterministic_for_same_stream(self):
        a = capacity_mc(4, 6, 20.0, samples=1000, rng=RngStream(5))
        b = capacity_mc(4, 6, 20.0, samples=1000, rng=RngStream(5))
        assert a.value == b.value
        assert a.stderr == b.stderr

    def test_threads_do_not_change_result(self):
        a = capacity_mc(3, 5, 2.0, samples=9000, rng=RngStream(8), threads=1)
        b = capacity_mc(3, 5, 2.0, samples=9000, rng=RngStream(8), threads=4)
        assert a.value == b.value

    def test_default_stream_is_seed_zero(self):
        a = capacity_mc(2, 3, 1.0, samples=128)
        b = capacity_mc(2, 3, 1.0, samples=128, rng=RngStream(0))
        assert a.value == b.value

    def test_sandwich_at_a_few_cells(self):
        for d, n, snr in ((1, 5, 10.0), (5, 1, 100.0), (7, 7, 10.0)):
            est = capacity_mc(d, n, snr, samples=4000, rng=RngStream(d * 100 + n))
            assert est.lower_bound - 3 * est.stderr <= est.value
            assert est.value <= est.upper_bound + 3 * est.stderr

    def test_capacity_grows_with_snr(self):
        rng = RngStream(2)
        low = capacity_mc(3, 3, 1.0, samples=4000, rng=rng.child(0))
        high = capacity_mc(3, 3, 50.0, samples=4000, rng=rng.child(1))
        assert high.value > low.value

    def test_input_validation(self):
        rng = RngStream(0)
        with pytest.raises(ValueError):
            capacity_mc(0, 1, 1.0, rng=rng)
        with pytest.raises(ValueError):
            capacity_mc(1, 0, 1.0, rng=rng)
        with pytest.raises(ValueError):
            capacity_mc(1, 1, 0.0, rng=rng)
        with pytest.raises(ValueError):
            capacity_mc(1, 1, -2.0, rng=rng)
        with pytest.raises(ValueError):
            capacity_mc(1, 1, 1.0, samples=0, rng=rng)


class TestAnalyticBounds:
    def test_upper_bound_closed_form_wide_and_tall(self):
        # d <= n branch: (d/2) log((n/d) snr + 1)
        assert capacity_upper_bound(2, 8, 3.0) == pytest.approx(
            1.0 * math.log(4.0 * 3.0 + 1.0), rel=1e-14)
        # d > n branch: (n/2) log(snr + 1)
        assert capacity_upper_bound(8, 2, 3.0) == pytest.approx(
            1.0 * math.log(4.0), rel=1e-14)

    def test_upper_bound_square_case(self):
        assert capacity_upper_bound(4, 4, 9.0) == pytest.approx(
            2.0 * math.log(10.0), rel=1e-14)

    def test_lower_bound_scalar_closed_form(self):
        # d = n = 1: (1/2) log(2 snr) + psi(1/2)/2, psi(1/2) = -gamma - 2 log 2.
        snr = 7.0
        ref = 0.5 * math.log(2 * snr) + 0.5 * (-EULER_GAMMA - 2 * math.log(2.0))
        assert capacity_lower_bound(1, 1, snr) == pytest.approx(ref, rel=1e-12)

    def test_lower_bound_swaps_roles_symmetrically(self):
        # The tall branch reuses the wide branch with roles of d and n swapped
        # and the log-SNR scale kept on the d side.
        d, n, snr = 6, 2, 50.0
        wide = capacity_lower_bound(n, d, snr * n / d)
        assert capacity_lower_bound(d, n, snr) == pytest.approx(wide, rel=1e-12)

    def test_lower_below_upper(self):
        for d in (1, 2, 5, 20):
            for n in (1, 3, 10):
                for snr in (1.0, 10.0, 100.0):
                    assert capacity_lower_bound(d, n, snr) < capacity_upper_bound(d, n, snr)

    def test_bounds_tighten_at_high_snr_square(self):
        # At snr -> inf both bounds approach (n/2) log snr + O(1).
        snr = 1e8
        lo = capacity_lower_bound(3, 3, snr)
        up = capacity_upper_bound(3, 3, snr)
        limit = capacity_limit(3, snr)
        assert abs(up - limit) < 3.0
        assert abs(lo - limit) < 6.0

    def test_capacity_limit_formula(self):
        assert capacity_limit(4, math.e ** 2) == pytest.approx(4.0, rel=1e-14)
        assert capacity_limit(2, 1.0) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            capacity_upper_bound(0, 1, 1.0)
        with pytest.raises(ValueError):
            capacity_lower_bound(1, 1, -1.0)
        with pytest.raises(ValueError):
            capacity_limit(0, 1.0)


class TestWishartLogdet:
    def test_frozen_oracle_value(self):
        # E[log det W_3(10, I)] = sum_i psi((10-i+1)/2) + 3 log 2, evaluated
        # once with mpmath-grade digamma: 6.2305478049029646.
        assert expected_wishart_logdet(3, 10) == pytest.approx(
            6.2305478049029646, rel=1e-12)

    def test_matches_digamma_sum(self):
        d, n = 4, 9
        ref = sum(digamma((n - i + 1) / 2.0) for i in range(1, d + 1)) + d * math.log(2.0)
        assert expected_wishart_logdet(d, n) == pytest.approx(ref, rel=1e-13)

    def test_monte_carlo_cross_check(self):
        # Dual route: simulate log det of Wishart(6, I_2) directly.
        d, n = 2, 6
        g = RngStream(31).generator()
        x = g.standard_normal((20000, n, d))
        gram = np.einsum("bij,bik->bjk", x, x)
        sign, logdet = np.linalg.slogdet(gram)
        mc = logdet.mean()
        se = logdet.std(ddof=1) / math.sqrt(len(logdet))
        assert abs(expected_wishart_logdet(d, n) - mc) <= 3.5 * se

    def test_requires_enough_samples(self):
        with pytest.raises(ValueError):
            expected_wishart_logdet(5, 4)
        assert math.isfinite(expected_wishart_logdet(5, 5))


class TestAwgnPackingCount:
    def test_closed_form(self):
        # (n/2) log(1 + P / sigma^2)
        assert awgn_packing_count(4, 3.0, 1.0) == pytest.approx(
            2.0 * math.log(4.0), rel=1e-14)

    def test_zero_power_packs_one_codeword(self):
        assert awgn_packing_count(10, 0.0, 2.0) == 0.0

    def test_tracks_capacity_limit_at_high_snr(self):
        n, p, nv = 6, 1e9, 1.0
        assert awgn_packing_count(n, p, nv) == pytest.approx(
            capacity_limit(n, p / nv), abs=1e-8)

    def test_validation(self):
        with pytest.raises(ValueError):
            awgn_packing_count(0, 1.0, 1.0)
        with pytest.raises(ValueError):
            awgn_packing_count(2, -1.0, 1.0)
        with pytest.raises(ValueError):
            awgn_packing_count(2, 1.0, 0.0)
