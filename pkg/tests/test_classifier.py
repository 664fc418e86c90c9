import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import multivariate_normal

from viewdisagree.classifier import VAR_FLOOR, GaussianBayesClassifier
from viewdisagree.errors import EmptyClassError


def two_blobs(seed=0, n=(20, 20)):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, (n[0], 2)), rng.normal(4, 1, (n[1], 2))])
    y = np.repeat([1, 2], n)
    return X, y


class TestFit:
    def test_one_sample_per_class(self):
        X = np.array([[0.0, 1.0], [3.0, -2.0]])
        clf = GaussianBayesClassifier.fit(X, [1, 2])
        assert np.array_equal(clf.means, X)
        assert np.all(clf.variances == VAR_FLOOR)
        assert np.allclose(clf.priors, [0.5, 0.5])

    def test_priors_from_counts(self):
        X, y = two_blobs(n=(10, 30))
        assert np.allclose(GaussianBayesClassifier.fit(X, y).priors, [0.25, 0.75])
        assert np.allclose(GaussianBayesClassifier.fit(X, y, uniform_prior=True).priors, [0.5, 0.5])

    def test_missing_class(self):
        X, y = two_blobs()
        with pytest.raises(EmptyClassError):
            GaussianBayesClassifier.fit(X, y, classes=[0, 1, 2])

    def test_single_class(self):
        with pytest.raises(ValueError):
            GaussianBayesClassifier.fit([[0.0], [1.0]], [1, 1])


class TestPredict:
    def test_separated_training_accuracy(self):
        X, y = two_blobs(n=(5, 5))
        X = X + np.repeat([[0.0], [20.0]], 5, axis=0)
        labels, _ = GaussianBayesClassifier.fit(X, y).predict(X)
        assert np.mean(labels == y) == 1.0

    def test_midpoint_is_even(self):
        clf = GaussianBayesClassifier(np.array([1, 2]), np.array([[-1.0], [1.0]]), np.ones((2, 1)), np.array([0.5, 0.5]))
        assert np.allclose(clf.predict_proba([0.0]), [0.5, 0.5], atol=1e-12)
        # exact tie goes to the lower index
        assert clf.predict([0.0])[0] == 1

    def test_matches_scipy_route(self):
        X, y = two_blobs(seed=3, n=(12, 7))
        clf = GaussianBayesClassifier.fit(X, y)
        for x in np.random.default_rng(4).normal(2, 3, (10, 2)):
            joint = np.array(
                [
                    clf.priors[c] * multivariate_normal(X[y == label].mean(0), np.diag(X[y == label].var(0))).pdf(x)
                    for c, label in enumerate(clf.classes)
                ]
            )
            assert np.allclose(clf.predict_proba(x), joint / joint.sum(), rtol=1e-9)

    def test_far_query_no_nan(self):
        clf = GaussianBayesClassifier.fit(*two_blobs())
        p = clf.predict_proba(np.array([[1e6, -1e6], [1e150, 0.0]]))
        assert np.all(np.isfinite(p)) and np.allclose(p.sum(axis=1), 1.0)

    def test_batch_and_single_agree(self):
        X, y = two_blobs(seed=5)
        clf = GaussianBayesClassifier.fit(X, y)
        labels, conf = clf.predict(X[:4])
        for k in range(4):
            assert clf.predict(X[k]) == (labels[k], conf[k])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            GaussianBayesClassifier.fit(*two_blobs()).predict([1.0, 2.0, 3.0])

    @settings(max_examples=40, deadline=None)
    @given(
        shift=arrays(np.float64, (2,), elements=st.floats(-50, 50)),
        query=arrays(np.float64, (2,), elements=st.floats(-10, 10)),
    )
    def test_translation_invariance(self, shift, query):
        X, y = two_blobs(seed=7)
        a = GaussianBayesClassifier.fit(X, y)
        b = GaussianBayesClassifier.fit(X + shift, y)
        assert np.allclose(a.predict_proba(query), b.predict_proba(query + shift), atol=1e-6)
