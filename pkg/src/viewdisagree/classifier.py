"""Diagonal-covariance Gaussian Bayes classifier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import EmptyClassError

VAR_FLOOR = 1e-4


@dataclass(frozen=True, eq=False)
class GaussianBayesClassifier:
    classes: np.ndarray  # sorted labels
    means: np.ndarray  # (C, d)
    variances: np.ndarray  # (C, d), floored
    priors: np.ndarray  # (C,)

    @classmethod
    def fit(cls, X, y, classes=None, var_floor: float = VAR_FLOOR, uniform_prior: bool = False) -> GaussianBayesClassifier:
        """Per-class mean and floored diagonal variance; priors from class counts.

        ``classes`` fixes the label set; any of them absent from ``y`` raises
        :class:`EmptyClassError`.
        """
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        if X.ndim == 1:
            X = X[:, None]
        labels = np.unique(y) if classes is None else np.unique(np.asarray(classes))
        if len(labels) < 2:
            raise ValueError(f"need at least 2 classes, got {labels.tolist()}")
        means, variances, counts = [], [], []
        for c in labels:
            Xc = X[y == c]
            if len(Xc) == 0:
                raise EmptyClassError(int(c))
            means.append(Xc.mean(axis=0))
            variances.append(np.maximum(Xc.var(axis=0), var_floor))
            counts.append(len(Xc))
        counts = np.array(counts, dtype=float)
        priors = np.full(len(labels), 1.0 / len(labels)) if uniform_prior else counts / counts.sum()
        return cls(labels, np.array(means), np.array(variances), priors)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def _as_batch(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = X[None, :] if single else X
        if X.shape[1] != self.dim:
            raise ValueError(f"input has dimension {X.shape[1]}, classifier expects {self.dim}")
        return X, single

    def joint_log_likelihood(self, X) -> np.ndarray:
        X, _ = self._as_batch(X)
        diff = X[:, None, :] - self.means[None, :, :]
        ll = -0.5 * np.sum(np.log(2 * np.pi * self.variances)[None] + diff**2 / self.variances[None], axis=2)
        return ll + np.log(self.priors)[None, :]

    def predict_log_proba(self, X) -> np.ndarray:
        X, single = self._as_batch(X)
        jll = self.joint_log_likelihood(X)
        out = jll - logsumexp(jll, axis=1, keepdims=True)
        return out[0] if single else out

    def predict_proba(self, X) -> np.ndarray:
        return np.exp(self.predict_log_proba(X))

    def predict(self, X):
        """Argmax label and its posterior; ties go to the lowest class index."""
        proba = self.predict_proba(X)
        if proba.ndim == 1:
            idx = int(np.argmax(proba))
            return int(self.classes[idx]), float(proba[idx])
        idx = np.argmax(proba, axis=1)
        return self.classes[idx], proba[np.arange(len(idx)), idx]
