from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from scipy.stats import norm

from mile import rank_transform as rk
from mile.errors import DomainError, EstimationError, TieError


def simulate(rng, n, t, beta=1.0, scale=1.0):
    x = scale * rng.standard_normal((n, t, 1))
    return x, x[:, :, 0] * beta + rng.standard_normal((n, t))


class TestRanks:
    def test_example(self):
        np.testing.assert_array_equal(rk.compute_ranks([3.1, -2, 7]), [2, 1, 3])

    def test_monotone_invariance(self, rng):
        y = rng.standard_normal(6)
        np.testing.assert_array_equal(rk.compute_ranks(np.exp(y)), rk.compute_ranks(y))

    def test_against_argsort(self, rng):
        for _ in range(20):
            y = rng.standard_normal(7)
            np.testing.assert_array_equal(rk.compute_ranks(y), np.argsort(np.argsort(y)) + 1)

    def test_ties(self):
        with pytest.raises(TieError):
            rk.compute_ranks([1.0, 2.0, 1.0])

    def test_rank_vector_validation(self):
        with pytest.raises(DomainError):
            rk.RankVector(np.array([[1, 1, 3]]))


class TestPmf:
    def test_beta_zero_exact(self, rng):
        x = rng.standard_normal((3, 2))
        for m in ([1, 2, 3], [3, 1, 2]):
            assert rk.rank_log_pmf_mc(m, x, [0.0, 0.0], 50, rng) == pytest.approx(-math.log(6), abs=1e-15)

    def test_two_period_closed_form(self):
        rng = np.random.default_rng(5)
        x = np.array([[0.3], [1.1]])
        beta = 1.0
        vals = []
        for _ in range(5):
            vals.append(math.exp(rk.rank_log_pmf_mc([1, 2], x, [beta], 20000, rng)))
        ref = norm.cdf((x[1, 0] - x[0, 0]) * beta / math.sqrt(2))
        assert np.mean(vals) == pytest.approx(ref, abs=0.01)

    def test_orderings_sum_to_one_at_beta_zero(self, rng):
        x = rng.standard_normal((3, 1))
        table = rk.crn_table(100, 3, rng)
        tot = sum(math.exp(rk.rank_log_pmf_mc(np.array(p) + 1, x, [0.0], table=table))
                  for p in itertools.permutations(range(3)))
        assert tot == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("t", [2, 3, 4])
    def test_orderings_sum_tends_to_one(self, rng, t):
        x = rng.standard_normal((t, 1))
        totals = []
        for r in (200, 200000):
            table = rk.crn_table(r, t, rng)
            totals.append(sum(math.exp(rk.rank_log_pmf_mc(np.array(p) + 1, x, [0.7], table=table))
                              for p in itertools.permutations(range(t))))
        assert abs(totals[1] - 1.0) < 0.02

    def test_deterministic_given_seed(self):
        x = np.array([[0.1], [0.5], [-0.4]])
        a = rk.rank_log_pmf_mc([2, 3, 1], x, [0.8], 500, np.random.default_rng(9))
        b = rk.rank_log_pmf_mc([2, 3, 1], x, [0.8], 500, np.random.default_rng(9))
        assert a == b

    def test_crn_table_sorted(self, rng):
        t = rk.crn_table(50, 4, rng)
        assert np.all(np.diff(t, axis=1) > 0)


class TestEstimator:
    def test_objective_matches_pmf(self, rng):
        x, y = simulate(rng, 5, 3)
        data = rk.RankData(y, x)
        table = np.sort(rng.standard_normal((5, 300, 3)), axis=2)
        obj = rk.RankObjective(data, table)
        ranks = rk.RankVector.from_outcomes(y).ranks
        ref = np.mean([rk.rank_log_pmf_mc(ranks[i], x[i], [0.6], table=table[i]) for i in range(5)])
        assert obj([0.6]) == pytest.approx(ref, rel=1e-13)
        shared = rk.RankObjective(data, table[0])
        ref = np.mean([rk.rank_log_pmf_mc(ranks[i], x[i], [0.6], table=table[0]) for i in range(5)])
        assert shared([0.6]) == pytest.approx(ref, rel=1e-13)

    def test_crn_determinism(self, rng):
        x, y = simulate(rng, 50, 3)
        data = rk.RankData(y, x)
        a = rk.estimate_rank(data, 200, np.random.default_rng(3))
        b = rk.estimate_rank(data, 200, np.random.default_rng(3))
        assert a.theta == b.theta and a.value == b.value

    def test_monotone_invariance_bit_identical(self, rng):
        x, y = simulate(rng, 80, 3)
        shift = rng.standard_normal((80, 1))
        warped = np.exp(2.0 * y + shift) + 3.0 * (y + shift) ** 3
        a = rk.estimate_rank(rk.RankData(y, x), 200, np.random.default_rng(4))
        b = rk.estimate_rank(rk.RankData(warped, x), 200, np.random.default_rng(4))
        assert a.theta.beta == b.theta.beta

    def test_recovers_positive_slope(self, rng):
        x, y = simulate(rng, 400, 4)
        rep = rk.estimate_rank(rk.RankData(y, x), 500, rng)
        assert 0.7 < rep.theta.beta[0] < 1.2

    def test_zero_slope(self, rng):
        x, y = simulate(rng, 500, 2, beta=0.0)
        est = rk.estimate_rank(rk.RankData(y, x), 1000, rng).theta.beta[0]
        # exact T=2 likelihood curvature at beta = 0 gives the standard error
        dx = x[:, 1, 0] - x[:, 0, 0]
        se = 1 / math.sqrt(np.sum((norm.pdf(0) * dx / math.sqrt(2)) ** 2 / 0.25))
        assert abs(est) <= 3 * se

    def test_identification_and_validation(self, rng):
        y = rng.standard_normal((10, 3))
        x = np.ones((10, 3, 1))
        with pytest.raises(EstimationError):
            rk.estimate_rank(rk.RankData(y, x), 10, rng)
        with pytest.raises(DomainError):
            rk.RankData(y[:, :1], np.ones((10, 1, 1)))
