from __future__ import annotations

import math

import numpy as np
import pytest

from mile import comparators as cp
from mile.dyn_panel import simulate_dyn
from mile.errors import DegenerateDataError


def panel(rng, n, t, rho=0.5, s2=1.0, effects=None):
    eff = (lambda g, m: 2.0 * g.standard_normal(m)) if effects is None else effects
    return simulate_dyn(n, t, rho, s2, eff, rng=rng).Y


def test_within_ols_nickell_bias(rng):
    est = np.mean([cp.within_ols(panel(rng, 500, 5)) for _ in range(20)])
    assert est < 0.45


def test_within_ols_large_t(rng):
    assert cp.within_ols(panel(rng, 10000, 100)) == pytest.approx(0.5, abs=0.02)


def test_within_ols_degenerate():
    with pytest.raises(DegenerateDataError):
        cp.within_ols(np.zeros((5, 4)))


def test_bcols_affine(rng):
    y = panel(rng, 50, 6)
    r = cp.within_ols(y)
    res = cp.bcols(y)
    assert res.available
    assert res.rho == pytest.approx(7 / 6 * r + 1 / 6, rel=1e-15)


@pytest.mark.parametrize("fn", [cp.arellano_bond, cp.ahn_schmidt])
def test_unavailable_for_two_periods(rng, fn):
    res = fn(panel(rng, 50, 2))
    assert not res.available and math.isnan(res.rho)


@pytest.mark.parametrize("fn", [cp.arellano_bond, cp.ahn_schmidt])
def test_available_from_three_periods(rng, fn):
    res = fn(panel(rng, 50, 3))
    assert res.available and math.isfinite(res.rho)
    assert "cond_step2" in res.diagnostics


@pytest.mark.parametrize("fn", [cp.arellano_bond, cp.ahn_schmidt])
def test_noiseless_limit(rng, fn):
    y = panel(rng, 300, 5, s2=1e-12, effects=lambda g, m: 2.0 + g.standard_normal(m))
    y = y + 1e-6 * rng.standard_normal(y.shape)
    assert fn(y).rho == pytest.approx(0.5, abs=1e-3)


def test_noiseless_moments_vanish():
    t = 5
    eta = np.linspace(1.0, 3.0, 7)
    y = np.empty((7, t))
    prev = np.zeros(7)
    for s in range(t):
        prev = 0.5 * prev + eta
        y[:, s] = prev
    assert np.max(np.abs(cp.moments_ab(y, 0.5))) < 1e-12
    assert np.max(np.abs(cp.moments_as(y, 0.5))) < 1e-12


@pytest.mark.parametrize("fn", [cp.moments_ab, cp.moments_as])
def test_moments_centred_at_truth(rng, fn):
    g = np.vstack([fn(panel(rng, 100, 5), 0.5) for _ in range(100)])
    se = g.std(axis=0, ddof=1) / math.sqrt(g.shape[0])
    assert np.all(np.abs(g.mean(axis=0)) <= 3.5 * se)


def test_as_less_dispersed_than_ab(rng):
    ab, as_ = [], []
    for _ in range(200):
        y = panel(rng, 100, 5)
        ab.append(cp.arellano_bond(y).rho)
        as_.append(cp.ahn_schmidt(y).rho)
    assert np.mean((np.array(as_) - 0.5) ** 2) < np.mean((np.array(ab) - 0.5) ** 2)


def test_moment_counts():
    y = np.random.default_rng(0).standard_normal((40, 6))
    assert cp.arellano_bond(y).diagnostics["n_moments"] == 10
    assert cp.ahn_schmidt(y).diagnostics["n_moments"] == 14
