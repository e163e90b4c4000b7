import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from netsvm.errors import DimensionMismatch
from netsvm.svm import KernelSpec, kernel_eval, kernel_matrix
from netsvm.svm.kernels import KernelRowCache


def test_rbf_same_point_is_one():
    x = np.array([0.3, -2.0, 7.0])
    for g in (0.01, 0.5, 10.0):
        assert kernel_eval(KernelSpec("rbf", gamma=g), x, x) == 1.0


def test_rbf_hand_value():
    assert kernel_eval(KernelSpec("rbf", gamma=0.5), [0, 0], [1, 1]) == pytest.approx(math.exp(-1), abs=1e-12)
    assert round(math.exp(-1), 6) == 0.367879


def test_linear_dot():
    assert kernel_eval(KernelSpec("linear"), [1, 2], [3, 4]) == 11


def test_polynomial_and_sigmoid():
    assert kernel_eval(KernelSpec("polynomial", degree=2, gamma=1.0, coef0=1.0), [1, 2], [3, 4]) == 144
    assert kernel_eval(KernelSpec("sigmoid", gamma=0.1, coef0=0.0), [1, 2], [3, 4]) == pytest.approx(math.tanh(1.1))


def test_gamma_auto_resolves_to_inverse_dimension():
    spec = KernelSpec("rbf", gamma=0.0)
    assert spec.resolved(4).gamma == 0.25
    assert kernel_eval(spec, [0, 0, 0, 0], [1, 1, 1, 1]) == pytest.approx(math.exp(-1))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        kernel_eval(KernelSpec("linear"), [1, 2], [1, 2, 3])


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("rbf", degree=0)
    with pytest.raises(ValueError):
        KernelSpec("rbf", gamma=-1.0)
    assert KernelSpec("poly").kind == 1
    assert KernelSpec(2).name == "rbf"


@pytest.mark.parametrize("kind", ["linear", "polynomial", "rbf", "sigmoid"])
def test_matrix_matches_pointwise(kind):
    rng = np.random.default_rng(1)
    A, B = rng.normal(size=(5, 3)), rng.normal(size=(4, 3))
    spec = KernelSpec(kind, gamma=0.3, coef0=0.5, degree=3)
    K = kernel_matrix(spec, A, B)
    ref = np.array([[kernel_eval(spec, a, b) for b in B] for a in A])
    assert np.allclose(K, ref, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 4)), elements=st.floats(-10, 10)),
    st.floats(1e-3, 10),
)
def test_rbf_gram_is_symmetric_psd(X, gamma):
    K = kernel_matrix(KernelSpec("rbf", gamma=gamma), X, X)
    assert np.array_equal(K, K.T)
    assert np.linalg.eigvalsh(K).min() >= -1e-8
    assert ((K > 0) | np.isclose(K, 0)).all() and (K <= 1).all()


@pytest.mark.parametrize("budget", [0, 5, 10_000])
def test_row_cache_is_exact(budget):
    rng = np.random.default_rng(2)
    X = rng.normal(size=(9, 2))
    spec = KernelSpec("rbf", gamma=0.7)
    cache = KernelRowCache(spec, X, budget)
    full = kernel_matrix(spec, X, X)
    for i in [0, 3, 8, 0, 3, 5, 1, 8]:
        assert np.allclose(cache.row(i), full[i])
    assert np.allclose(cache.diagonal(), np.diag(full))
