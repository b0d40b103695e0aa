import numpy as np
import pytest

from otspaces.errors import NegativeWeight, NonSymmetric, NotPositiveSemidefinite, ShapeMismatch, ZeroMass
from otspaces.measures import (Coupling, DataMatrix, DiscreteMeasure, GaussianMeasure, StructuredObject,
                               as_histogram, check_coupling, make_histogram, product_coupling, symmetrize)


def test_make_histogram_examples():
    assert np.array_equal(make_histogram([1, 1]), [0.5, 0.5])
    assert np.array_equal(make_histogram([2, 0, 2]), [0.5, 0.0, 0.5])
    with pytest.raises(NegativeWeight):
        make_histogram([-1, 2])
    with pytest.raises(ZeroMass):
        make_histogram([0, 0])


def test_make_histogram_is_idempotent(rng):
    w = make_histogram(rng.random(17))
    assert abs(w.sum() - 1) <= 1e-12
    assert np.array_equal(make_histogram(w), w)


def test_histograms_are_read_only():
    w = make_histogram([1, 3])
    with pytest.raises(ValueError):
        w[0] = 1.0


def test_product_coupling_examples():
    assert np.array_equal(product_coupling([1.0], [1.0]).plan, [[1.0]])
    assert np.allclose(product_coupling([0.5, 0.5], [0.5, 0.5]).plan, 0.25)
    assert np.allclose(product_coupling([1, 0], [0.3, 0.7]).plan, [[0.3, 0.7], [0, 0]])


def test_check_coupling(rng):
    for _ in range(20):
        a, b = make_histogram(rng.random(4)), make_histogram(rng.random(6))
        assert check_coupling(product_coupling(a, b).plan, a, b, 1e-12)
    assert not check_coupling([[1, 0], [0, 0]], [0.5, 0.5], [0.5, 0.5])
    assert check_coupling(np.eye(3) / 3, np.full(3, 1 / 3), np.full(3, 1 / 3))
    with pytest.raises(ShapeMismatch):
        check_coupling(np.eye(2), [1.0], [1.0])


def test_coupling_clamps_tiny_negatives():
    P = np.array([[0.5, -1e-17], [0.0, 0.5]])
    c = Coupling(P, [0.5, 0.5], [0.5, 0.5])
    assert c.plan.min() == 0.0
    with pytest.raises(Exception):
        Coupling(np.array([[0.6, -0.1], [0.0, 0.5]]), [0.5, 0.5], [0.6, 0.4])


def test_symmetrize():
    C = np.array([[0, 1], [1 + 1e-12, 0]])
    assert np.array_equal(symmetrize(C), symmetrize(C).T)
    with pytest.raises(NonSymmetric):
        symmetrize(np.array([[0, 1], [2, 0]]))


def test_structured_object(rng):
    C = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    obj = StructuredObject(C, np.array([0, 1, 0]), None)
    assert obj.has_labels and obj.n == 3
    assert np.allclose(obj.weights, 1 / 3)
    perm = np.array([2, 0, 1])
    P = obj.permuted(perm)
    assert np.array_equal(P.structure, C[np.ix_(perm, perm)])
    with pytest.raises(ShapeMismatch):
        StructuredObject(C, np.zeros((2, 1)), None)


def test_discrete_measure_and_data_matrix():
    mu = DiscreteMeasure.from_points([0.0, 3.0])
    assert mu.n == 2 and mu.dim == 1 and np.allclose(mu.weights, 0.5)
    X = DataMatrix(np.ones((3, 2)), feature_weights=[1, 3])
    assert np.allclose(X.sample_weights, 1 / 3) and np.allclose(X.feature_weights, [0.25, 0.75])
    with pytest.raises(ShapeMismatch):
        DataMatrix(np.ones((3, 2)), sample_weights=[1, 1])


def test_gaussian_measure_checks():
    GaussianMeasure([0, 0], np.eye(2))
    with pytest.raises(NotPositiveSemidefinite):
        GaussianMeasure([0, 0], np.diag([1.0, -1.0]))
    with pytest.raises(ShapeMismatch):
        GaussianMeasure([0], np.eye(2))


def test_as_histogram_default_uniform():
    assert np.allclose(as_histogram(None, 4), 0.25)
