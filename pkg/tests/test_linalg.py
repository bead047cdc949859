from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mile.errors import DomainError
from mile.numkern import SymMat, duplication, sym_eig, unvech, vech


def test_vech_2x2():
    np.testing.assert_array_equal(vech(np.array([[1.0, 2.0], [2.0, 3.0]])), [1.0, 2.0, 3.0])


def test_duplication_2():
    expect = np.array([[1, 0, 0], [0, 1, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    np.testing.assert_array_equal(duplication(2), expect)


@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_duplication_maps_vech_to_vec(d, seed):
    a = np.random.default_rng(seed).standard_normal((d, d))
    s = a + a.T
    np.testing.assert_allclose(duplication(d) @ vech(s), s.reshape(-1, order="F"), atol=1e-14)


def test_round_trip(rng):
    a = rng.standard_normal((5, 5))
    s = a + a.T
    np.testing.assert_array_equal(unvech(vech(s)).to_array(), s)


def test_symmat_rejects_asymmetric():
    with pytest.raises(DomainError):
        SymMat.from_array(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_eig_identity_and_diag():
    vals, _ = sym_eig(np.eye(2))
    np.testing.assert_array_equal(vals, [1.0, 1.0])
    vals, vecs = sym_eig(np.diag([1.0, 3.0]))
    np.testing.assert_array_equal(vals, [3.0, 1.0])
    np.testing.assert_allclose(np.abs(vecs), [[0.0, 1.0], [1.0, 0.0]])


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_eig_reconstruction(seed):
    a = np.random.default_rng(seed).standard_normal((2, 2))
    s = a + a.T
    vals, vecs = sym_eig(s)
    assert vals[0] >= vals[1]
    np.testing.assert_allclose(vecs @ np.diag(vals) @ vecs.T, s, atol=1e-10 * max(1, np.abs(s).max()))
    np.testing.assert_allclose(s @ vecs, vecs * vals, atol=1e-10 * max(1, np.abs(s).max()))
