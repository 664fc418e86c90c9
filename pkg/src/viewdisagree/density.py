"""Product-Gaussian kernel density estimation and the KDE-ratio conditional."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def silverman_bandwidth(points) -> np.ndarray:
    """Per-dimension Silverman rule-of-thumb bandwidths.

    ``h_d = sigma_d * (4 / ((D + 2) * M)) ** (1 / (D + 4))`` with ``sigma_d`` the
    sample standard deviation.  A zero ``sigma_d`` is floored to
    ``1e-3 * (1 + |mean_d|)``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    M, D = pts.shape
    if M < 2:
        raise ValueError(f"silverman_bandwidth needs at least 2 points, got {M}")
    sigma = pts.std(axis=0, ddof=1)
    factor = (4.0 / ((D + 2) * M)) ** (1.0 / (D + 4))
    h = sigma * factor
    degenerate = sigma == 0
    h[degenerate] = 1e-3 * (1.0 + np.abs(pts.mean(axis=0)[degenerate]))
    return h


@dataclass(frozen=True, eq=False)
class KdeModel:
    points: np.ndarray
    bandwidths: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        h = np.asarray(self.bandwidths, dtype=float).reshape(-1)
        if pts.shape[0] < 1:
            raise ValueError("KdeModel needs at least one reference point")
        if h.shape[0] != pts.shape[1]:
            raise ValueError(f"{h.shape[0]} bandwidths for {pts.shape[1]}-D points")
        if not np.all(h > 0):
            raise ValueError("bandwidths must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "bandwidths", h)

    @classmethod
    def fit(cls, points) -> KdeModel:
        return cls(points, silverman_bandwidth(points))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def logpdf(self, x) -> np.ndarray:
        """Log density at each row of ``x`` (or at a single vector)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = x[None, :] if single else x
        if X.shape[1] != self.dim:
            raise ValueError(f"query has dimension {X.shape[1]}, model has {self.dim}")
        z = (X[:, None, :] - self.points[None, :, :]) / self.bandwidths
        log_k = -0.5 * np.sum(z * z, axis=2) - np.sum(np.log(self.bandwidths)) - self.dim * _LOG_SQRT_2PI
        out = logsumexp(log_k, axis=1) - np.log(len(self.points))
        return out[0] if single else out


def kde_eval(model: KdeModel, x) -> float:
    return float(np.exp(model.logpdf(np.asarray(x, dtype=float).reshape(-1))))


def conditional_log_distribution(joint, U_i, x_j) -> np.ndarray:
    """Log of the KDE-ratio conditional over every candidate in ``U_i`` given ``x_j``.

    ``joint`` is anything exposing ``logpdf`` over concatenated ``[x_i; x_j]``
    rows.  When every joint density underflows the conditional is uniform.
    """
    U = np.asarray(U_i, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    if len(U) == 0:
        raise ValueError("empty candidate set")
    xj = np.asarray(x_j, dtype=float).reshape(-1)
    log_f = np.asarray(joint.logpdf(np.hstack([U, np.broadcast_to(xj, (len(U), len(xj)))])), dtype=float)
    top = log_f.max()
    if not np.isfinite(top):
        return np.full(len(U), -np.log(len(U)))
    rel = log_f - top
    return rel - logsumexp(rel)


def conditional_prob(joint, U_i, x_i, x_j) -> float:
    """p(x_i | x_j) normalized over the candidate set ``U_i``; ``x_i`` must be a row of it."""
    U = np.asarray(U_i, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    hits = np.flatnonzero(np.all(U == np.asarray(x_i, dtype=float).reshape(-1), axis=1))
    if len(hits) == 0:
        raise ValueError("x_i is not in the candidate set")
    log_p = conditional_log_distribution(joint, U, x_j)
    # duplicated rows are the same candidate value; report the first
    return float(np.exp(log_p[hits[0]]))


def _log_kernel_matrix(queries: np.ndarray, refs: np.ndarray, h: np.ndarray) -> np.ndarray:
    z = (queries[:, None, :] - refs[None, :, :]) / h
    return -0.5 * np.sum(z * z, axis=2)


def pairwise_conditional_log_probs(view_i, view_j, bandwidths) -> np.ndarray:
    """Row ``k`` holds log p(x^i_m | x^j_k) over all candidates ``m`` of the pool.

    The joint KDE is built over the concatenated ``[view_i, view_j]`` rows with
    the given per-dimension bandwidths.  Its product kernel factorizes, so the
    unnormalized joint is a matrix product of the two per-view kernel matrices,
    evaluated with per-row rescaling.  Rows where the rescaled product
    underflows fall back to an exact log-sum-exp.
    """
    A_pts = np.asarray(view_i, dtype=float)
    B_pts = np.asarray(view_j, dtype=float)
    h = np.asarray(bandwidths, dtype=float)
    di = A_pts.shape[1]
    log_a = _log_kernel_matrix(A_pts, A_pts, h[:di])  # [m, l]
    log_b = _log_kernel_matrix(B_pts, B_pts, h[di:])  # [k, l]
    a_max = log_a.max(axis=1)
    b_max = log_b.max(axis=1)
    with np.errstate(divide="ignore"):
        F = np.exp(log_b - b_max[:, None]) @ np.exp(log_a - a_max[:, None]).T
        # b_max is constant along a row and cancels in the normalization
        log_f = np.log(F) + a_max[None, :]
    for k in np.flatnonzero(np.any(F < 1e-280, axis=1)):
        log_f[k] = logsumexp(log_a + (log_b[k] - b_max[k])[None, :], axis=1)
    top = log_f.max(axis=1, keepdims=True)
    dead = ~np.isfinite(top[:, 0])
    top[dead] = 0.0
    rel = log_f - top
    out = rel - logsumexp(rel, axis=1, keepdims=True)
    out[dead] = -np.log(log_f.shape[1])
    return out
