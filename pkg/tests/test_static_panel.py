from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from mile import static_panel as sp
from mile.errors import DomainError, EstimationError


def simulate(rng, n=400, t=5, beta=(1.0, -0.5), s2=1.5, rho=0.4):
    k = len(beta)
    x = rng.standard_normal((n, t, k))
    cov = s2 * sp.ar1_cov(rho, t).to_array()
    u = rng.multivariate_normal(np.zeros(t), cov, size=n)
    eta = 3.0 * rng.standard_normal((n, 1)) + x[:, :, 0].mean(axis=1, keepdims=True)
    return sp.StaticPanelData(eta + x @ np.asarray(beta) + u, x)


def test_diff_matrix():
    d = sp.diff_matrix(5)
    assert d.shape == (4, 5)
    np.testing.assert_array_equal(d @ np.ones(5), 0.0)
    assert np.linalg.matrix_rank(d @ d.T) == 4
    np.testing.assert_array_equal(d[1], [0, 1, -1, 0, 0])
    with pytest.raises(DomainError):
        sp.diff_matrix(1)


def test_ar1_cov():
    c = sp.ar1_cov(0.5, 3).to_array()
    np.testing.assert_allclose(c, np.array([[1, .5, .25], [.5, 1, .5], [.25, .5, 1]]) / 0.75)
    with pytest.raises(DomainError):
        sp.ar1_cov(1.0, 3)


def test_full_density_oracle(rng):
    data = simulate(rng, n=20, t=4)
    th = sp.ThetaStatic([0.8, -0.2], 1.3, -0.3)
    d = sp.diff_matrix(4)
    cov = th.sigma2 * d @ sp.ar1_cov(th.rho, 4).to_array() @ d.T
    ref = sum(stats.multivariate_normal(d @ data.x[i] @ th.beta, cov).logpdf(d @ data.y[i]) for i in range(20))
    assert sp.loglik_static(data, th) == pytest.approx(ref, rel=1e-12)


def test_translation_invariance(rng):
    data = simulate(rng, n=100, t=4)
    shifted = sp.StaticPanelData(data.y + 50.0 * rng.standard_normal((100, 1)), data.x)
    th = sp.ThetaStatic([1.0, -0.5], 1.5, 0.4)
    assert sp.loglik_static(shifted, th) == pytest.approx(sp.loglik_static(data, th), rel=1e-10)
    a, b = sp.estimate_static(data), sp.estimate_static(shifted)
    np.testing.assert_allclose(a.theta.beta, b.theta.beta, atol=1e-8)
    assert a.theta.rho == pytest.approx(b.theta.rho, abs=1e-7)


def test_profile_is_max_over_beta_sigma(rng):
    data = simulate(rng, n=50, t=4)
    rep = sp.estimate_static(data)
    th = rep.theta
    best = sp.loglik_static(data, th)
    assert sp.profile_loglik_static(data, th.rho) == pytest.approx(best, rel=1e-12)
    for db in ([0.01, 0], [0, -0.01]):
        assert sp.loglik_static(data, sp.ThetaStatic(th.beta + db, th.sigma2, th.rho)) < best
    assert sp.loglik_static(data, sp.ThetaStatic(th.beta, th.sigma2 * 1.01, th.rho)) < best


def test_recovers_truth(rng):
    rep = sp.estimate_static(simulate(rng, n=2000, t=5))
    np.testing.assert_allclose(rep.theta.beta, [1.0, -0.5], atol=0.03)
    assert rep.theta.sigma2 == pytest.approx(1.5, rel=0.05)
    assert rep.theta.rho == pytest.approx(0.4, abs=0.04)
    assert rep.std_errors["rho"] > 0 and rep.converged


def test_no_regressors(rng):
    data = simulate(rng, n=500, t=4, beta=(0.0,))
    rep = sp.estimate_static(sp.StaticPanelData(data.y))
    assert rep.theta.beta.size == 0
    assert rep.theta.rho == pytest.approx(0.4, abs=0.06)


def test_time_invariant_regressor_is_collinear(rng):
    data = simulate(rng, n=50, t=4, beta=(1.0,))
    x = np.repeat(rng.standard_normal((50, 1, 1)), 4, axis=1)
    with pytest.raises(EstimationError):
        sp.estimate_static(sp.StaticPanelData(data.y, x))


def test_validation():
    with pytest.raises(DomainError):
        sp.StaticPanelData(np.zeros((3, 1)))
    with pytest.raises(DomainError):
        sp.StaticPanelData(np.array([[1.0, np.nan]]))
    with pytest.raises(DomainError):
        sp.ThetaStatic([], 1.0, 1.0)
    with pytest.raises(DomainError):
        sp.estimate_static(sp.StaticPanelData(np.ones((1, 3)), np.ones((1, 3, 1))))
