from __future__ import annotations

import importlib
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mile.numkern import _pykernels as py

ck = pytest.importorskip("mile.numkern._ckernels")


@given(st.floats(-0.5, 1e6), st.floats(1e-8, 1e7))
@settings(max_examples=300, deadline=None)
def test_log_bessel_parity(nu, x):
    a, b = py.log_bessel_i(nu, x), ck.log_bessel_i(nu, x)
    assert abs(a - b) <= 1e-13 * max(1.0, abs(a))


@given(st.floats(0.0, 1e5), st.floats(1e-6, 1e6))
@settings(max_examples=200, deadline=None)
def test_ratio_parity(nu, x):
    assert py.bessel_i_ratio(nu, x) == pytest.approx(ck.bessel_i_ratio(nu, x), rel=1e-13)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_value_grad_parity(seed):
    r = np.random.default_rng(seed)
    n, t = float(r.integers(2, 5000)), float(r.integers(2, 50))
    args = (*r.uniform(0.1, 5, 6), n, t, r.uniform(-1, 1), r.uniform(0.2, 3), r.uniform(0, 5))
    np.testing.assert_allclose(py.dyn_value_grad(*args), ck.dyn_value_grad(*args), rtol=1e-12, atol=1e-14)
    args = (1.2, -0.3, 1.1, *r.uniform(0.1, 3, 3), float(r.integers(1, 400)), 2000.0,
            r.uniform(-2, 2), r.uniform(0, 3))
    np.testing.assert_allclose(py.iv_value_grad(*args), ck.iv_value_grad(*args), rtol=1e-12, atol=1e-14)


def test_selection_env_var():
    code = "from mile import BACKEND; print(BACKEND)"
    env = dict(os.environ, MILE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    env.pop("MILE_PURE_PYTHON")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "cython"


def test_default_backend_is_compiled():
    backend = importlib.import_module("mile.numkern._backend")
    if os.environ.get("MILE_PURE_PYTHON") != "1":
        assert backend.BACKEND == "cython"
