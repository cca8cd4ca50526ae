import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kil import DuplicateCenters, Kernel, NumericalFailure, gram, min_eigenvalue


def test_hat_gram_three_points(hat):
    A = gram(hat, [0.0, 0.5, 1.0])
    np.testing.assert_allclose(A, [[1, 0.5, 0], [0.5, 1, 0.5], [0, 0.5, 1]])
    assert min_eigenvalue(A) == pytest.approx(1 - np.sqrt(2) / 2)


@pytest.mark.parametrize("family,dim,tau", [
    ("wendland-hat", 1, 1.0),
    ("matern-half", 1, 1.0),
    ("matern-half", 2, 1.5),
    ("matern-three-half", 1, 2.0),
    ("matern-three-half", 2, 2.5),
])
def test_tau(family, dim, tau):
    assert Kernel(family, 1.0, dim).tau == tau


def test_hat_rejected_in_2d():
    with pytest.raises(ValueError):
        Kernel("wendland-hat", 1.0, 2)


@pytest.mark.parametrize("text", ["gauss:1", "matern-half:0", "matern-half:-1", "matern-half:x"])
def test_bad_descriptor(text):
    with pytest.raises(ValueError):
        Kernel.parse(text)


def test_profiles():
    r = np.array([0.0, 0.5, 2.0])
    np.testing.assert_allclose(Kernel("matern-half").profile(r), np.exp(-r))
    s3 = np.sqrt(3)
    np.testing.assert_allclose(Kernel("matern-three-half").profile(r), (1 + s3 * r) * np.exp(-s3 * r))
    np.testing.assert_allclose(Kernel("wendland-hat").profile(r), [1, 0.5, 0])


def test_sigma_scales_distance():
    k = Kernel.parse("wendland-hat:2.0")
    assert k.eval(0.0, 1.0) == pytest.approx(0.5)


def test_duplicates_rejected(hat):
    with pytest.raises(DuplicateCenters):
        gram(hat, [0.1, 0.2, 0.1])


def test_min_eigenvalue_rejects_nan():
    with pytest.raises(NumericalFailure):
        min_eigenvalue(np.array([[1.0, np.nan], [np.nan, 1.0]]))


def test_gram_symmetric_2d():
    k = Kernel("matern-three-half", 0.7, 2)
    X = np.random.default_rng(1).uniform(size=(30, 2))
    A = gram(k, X)
    assert np.array_equal(A, A.T)
    np.testing.assert_allclose(np.diag(A), 1.0)


@settings(max_examples=50, deadline=None)
@given(
    st.sampled_from(["wendland-hat", "matern-half", "matern-three-half"]),
    st.lists(st.floats(0, 1), min_size=2, max_size=15, unique=True),
)
def test_gram_positive_definite(family, xs):
    xs = np.sort(xs)
    if np.min(np.diff(xs)) < 1e-3:
        return
    assert min_eigenvalue(gram(Kernel(family), xs)) > 0
