import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from datl_gdp.data_ingest import Dataset
from datl_gdp.errors import EmptyDatasetError, InvalidHyperparameterError, NumericFailureError
from datl_gdp.regressors import ElmModel, KernelSpec, elm_fit, elm_predict, kernel_matrix, random_elm_fit

from conftest import random_dataset

RBF = KernelSpec("rbf", 0.5)


def test_zero_labels_give_zero_weights():
    d = random_dataset(np.random.default_rng(0), 15)
    d = Dataset(d.years, d.features, np.zeros(15), d.origin_tags)
    m = elm_fit(d, RBF, 10.0)
    assert np.all(m.out_weights == 0)
    assert np.all(m.predict(np.random.default_rng(1).normal(size=(5, 4))) == 0)


def test_single_point_interpolates():
    x0 = np.array([[0.3, -1.0, 2.0, 0.5]])
    m = elm_fit(Dataset([2000], x0, [5.0], ("A",)), RBF, 1e12)
    assert elm_predict(m, x0[0]) == pytest.approx(5.0, abs=1e-9)


def test_linear_kernel_arithmetic():
    m = ElmModel(np.array([[1.0, 0, 0, 0]]), KernelSpec("linear"), np.array([2.0]), 1.0)
    assert elm_predict(m, [3.0, 0, 0, 0]) == 6.0


def test_weights_solve_ridge_system():
    d = random_dataset(np.random.default_rng(2), 25)
    m = elm_fit(d, RBF, 100.0)
    K = kernel_matrix(d.features, d.features, RBF)
    assert np.allclose((K + np.eye(25) / 100.0) @ m.out_weights, d.labels, atol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_interpolation_at_large_C(seed):
    rng = np.random.default_rng(seed)
    d = random_dataset(rng, int(rng.integers(5, 60)))
    m = elm_fit(d, KernelSpec("rbf", 1.0), 1e12)
    scale = np.abs(d.labels).max()
    assert np.max(np.abs(m.predict(d.features) - d.labels)) <= 1e-6 * scale


def test_invalid_inputs():
    d = random_dataset(np.random.default_rng(0), 4)
    with pytest.raises(InvalidHyperparameterError):
        elm_fit(d, RBF, 0.0)
    with pytest.raises(EmptyDatasetError):
        elm_fit(d.take([]), RBF, 1.0)
    with pytest.raises(InvalidHyperparameterError):
        KernelSpec("rbf", -1.0)
    with pytest.raises(InvalidHyperparameterError):
        KernelSpec("poly")


def test_singular_system_is_numeric_failure():
    # duplicated rows with a linear kernel and no effective ridge
    X = np.ones((4, 4))
    d = Dataset(np.arange(4), X, [1.0, 2.0, 3.0, 4.0], ("A",) * 4)
    with pytest.raises(NumericFailureError):
        elm_fit(d, KernelSpec("linear"), 1e300)


def test_random_hidden_node_variant():
    d = random_dataset(np.random.default_rng(7), 30)
    a = random_elm_fit(d, seed=3)
    b = random_elm_fit(d, seed=3)
    assert a.input_weights.shape == (60, 4)
    assert np.array_equal(a.predict(d.features), b.predict(d.features))
    assert random_elm_fit(d, seed=3, hidden_nodes=500).input_weights.shape[0] == 500
    assert random_elm_fit(random_dataset(np.random.default_rng(7), 150), seed=0).input_weights.shape[0] == 200


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2**32 - 1), st.floats(1e-3, 10.0))
def test_rbf_kernel_matrix_properties(n, seed, gamma):
    X = np.random.default_rng(seed).normal(size=(n, 4))
    K = kernel_matrix(X, X, KernelSpec("rbf", gamma))
    assert np.array_equal(K, K.T)
    assert np.all(np.diag(K) == 1.0)
    assert np.all((K >= 0) & (K <= 1))
