"""Conditional view entropy, foreground/background indicators and disagreement verdicts."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field, replace
from itertools import permutations

import numpy as np

from .dataset import BACKGROUND, MultiViewDataset
from .density import conditional_log_distribution, pairwise_conditional_log_probs, silverman_bandwidth


class Verdict(str, enum.Enum):
    REDUNDANT_FOREGROUND = "RedundantForeground"
    REDUNDANT_BACKGROUND = "RedundantBackground"
    VIEW_DISAGREEMENT = "ViewDisagreement"


@dataclass(frozen=True)
class PairVerdict:
    verdict: Verdict
    bit_ij: int  # m(x^i, x_k^j)
    bit_ji: int  # m(x^j, x_k^i)


def entropy_from_log_probs(log_p) -> float:
    """-sum p ln p with 0 ln 0 = 0, clipped into [0, ln n]."""
    log_p = np.asarray(log_p, dtype=float)
    p = np.exp(log_p)
    terms = p * np.where(p > 0, log_p, 0.0)
    return float(np.clip(-terms.sum(), 0.0, np.log(len(log_p)))) + 0.0


def conditional_view_entropy(joint, U_i, x_kj) -> float:
    """Entropy in nats of view i's conditional over the candidates ``U_i`` given ``x_kj``."""
    return entropy_from_log_probs(conditional_log_distribution(joint, U_i, x_kj))


def _row_entropies(log_p: np.ndarray) -> np.ndarray:
    p = np.exp(log_p)
    terms = p * np.where(p > 0, log_p, 0.0)
    return np.clip(-terms.sum(axis=1), 0.0, np.log(log_p.shape[1]))


@dataclass(eq=False)
class EntropyTable:
    """H(x^i | x_k^j) per ordered view pair, over one unlabeled pool.

    ``H[(i, j)]`` has one entry per pool sample, NaN where the pair was not
    evaluated.  ``threshold`` defaults to the per-pair mean and is what the
    indicator compares against.
    """

    V: int
    M: int
    H: dict
    mean: dict
    threshold: dict = field(default=None)

    def __post_init__(self):
        if self.threshold is None:
            self.threshold = dict(self.mean)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(self.H)

    def entry(self, i: int, j: int, k: int) -> float:
        try:
            value = self.H[(i, j)][k]
        except (KeyError, IndexError):
            raise KeyError(f"no entropy entry for pair ({i}, {j}), sample {k}") from None
        if np.isnan(value):
            raise KeyError(f"no entropy entry for pair ({i}, {j}), sample {k}")
        return float(value)

    def bits(self, i: int, j: int) -> np.ndarray:
        """Vector of m(x^i, x_k^j) over all k (0 where the entry is missing)."""
        return (self.H[(i, j)] < self.threshold[(i, j)]).astype(np.int8)

    def with_thresholds(self, thresholds) -> EntropyTable:
        """Copy with replaced thresholds; a scalar applies to every pair."""
        if np.isscalar(thresholds):
            thresholds = {p: float(thresholds) for p in self.H}
        return replace(self, threshold=dict(thresholds))

    def with_quantile(self, q: float) -> EntropyTable:
        """Thresholds at empirical quantile ``q`` of each pair's entropies.

        ``q == 1`` sits just above the maximum so every bit is 1.
        """
        th = {}
        for p, h in self.H.items():
            valid = h[~np.isnan(h)]
            if q >= 1.0:
                th[p] = float(np.nextafter(valid.max(), np.inf))
            else:
                th[p] = float(np.quantile(valid, q))
        return self.with_thresholds(th)

    def valid_samples(self) -> np.ndarray:
        ok = np.ones(self.M, dtype=bool)
        for h in self.H.values():
            ok &= ~np.isnan(h)
        return ok


def build_entropy_table(dataset: MultiViewDataset, active=None) -> EntropyTable:
    """Conditional view entropies for every ordered view pair over the unlabeled pool.

    With ``active`` (an ``(M, V)`` boolean mask), pair ``(i, j)`` only uses the
    samples whose views i and j are both active; the joint KDE, candidate set
    and mean are all restricted to them.
    """
    views = dataset.unlabeled.views
    M = len(dataset.unlabeled)
    if M == 0:
        raise ValueError("cannot build an entropy table over an empty unlabeled pool")
    active = np.ones((M, dataset.V), dtype=bool) if active is None else np.asarray(active, dtype=bool)
    H, mean = {}, {}
    for i, j in permutations(range(dataset.V), 2):
        rows = np.flatnonzero(active[:, i] & active[:, j])
        h = np.full(M, np.nan)
        if len(rows) == 1:
            h[rows] = 0.0
        elif len(rows) > 1:
            Xi, Xj = views[i][rows], views[j][rows]
            bw = silverman_bandwidth(np.hstack([Xi, Xj]))
            h[rows] = _row_entropies(pairwise_conditional_log_probs(Xi, Xj, bw))
        H[(i, j)] = h
        mean[(i, j)] = float(np.mean(h[rows])) if len(rows) else np.nan
    return EntropyTable(dataset.V, M, H, mean)


def indicator_m(table: EntropyTable, i: int, j: int, k: int) -> int:
    """1 iff H(x^i | x_k^j) lies strictly below the pair's threshold."""
    return int(table.entry(i, j, k) < table.threshold[(i, j)])


def _verdict(all_one: bool, all_zero: bool) -> Verdict:
    if all_one:
        return Verdict.REDUNDANT_FOREGROUND
    if all_zero:
        return Verdict.REDUNDANT_BACKGROUND
    return Verdict.VIEW_DISAGREEMENT


def classify_pair(table: EntropyTable, i: int, j: int, k: int) -> PairVerdict:
    b1 = indicator_m(table, i, j, k)
    b2 = indicator_m(table, j, i, k)
    return PairVerdict(_verdict(b1 and b2, not b1 and not b2), b1, b2)


def classify_sample(table: EntropyTable, k: int) -> Verdict:
    bits = [indicator_m(table, i, j, k) for i, j in permutations(range(table.V), 2)]
    return _verdict(all(bits), not any(bits))


def sample_verdict_codes(table: EntropyTable) -> np.ndarray:
    """Vectorized classify_sample: 0 foreground, 1 background, 2 disagreement."""
    stacked = np.stack([table.bits(i, j) for i, j in permutations(range(table.V), 2)])
    codes = np.full(table.M, 2, dtype=np.int8)
    codes[stacked.all(axis=0)] = 0
    codes[~stacked.any(axis=0)] = 1
    return codes


VERDICT_BY_CODE = (Verdict.REDUNDANT_FOREGROUND, Verdict.REDUNDANT_BACKGROUND, Verdict.VIEW_DISAGREEMENT)


# --- detection ROC ----------------------------------------------------------

@dataclass
class RocCurve:
    name: str
    quantiles: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    operating_point: tuple[float, float] | None
    auc: float
    defined: bool


def trapezoid_auc(fpr, tpr) -> float:
    order = np.lexsort((tpr, fpr))
    x, y = np.asarray(fpr)[order], np.asarray(tpr)[order]
    return float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.0))


def _rates(pred: np.ndarray, positive: np.ndarray) -> tuple[float, float]:
    tpr = np.sum(pred & positive) / np.sum(positive)
    fpr = np.sum(pred & ~positive) / np.sum(~positive)
    return float(fpr), float(tpr)


def detection_roc(dataset: MultiViewDataset, table: EntropyTable, threshold_grid=None) -> dict[str, RocCurve]:
    """Foreground and background detection ROCs swept over entropy-threshold quantiles.

    Foreground positives are pool samples whose views all show the same
    foreground class; background positives are all-background samples.
    """
    grid = np.linspace(0.0, 1.0, 101) if threshold_grid is None else np.asarray(threshold_grid, dtype=float)
    ok = table.valid_samples()
    labels = dataset.unlabeled.true_view_labels[ok]
    same = np.all(labels == labels[:, :1], axis=1)
    truth = {
        "foreground": same & (labels[:, 0] != BACKGROUND),
        "background": same & (labels[:, 0] == BACKGROUND),
    }
    code = {"foreground": 0, "background": 1}

    per_q = [sample_verdict_codes(table.with_quantile(q))[ok] for q in grid]
    at_mean = sample_verdict_codes(table)[ok]
    curves = {}
    for name, positive in truth.items():
        if positive.all() or not positive.any():
            nan = np.full(len(grid), np.nan)
            curves[name] = RocCurve(name, grid, nan, nan.copy(), None, float("nan"), False)
            continue
        pts = np.array([_rates(codes == code[name], positive) for codes in per_q])
        op = _rates(at_mean == code[name], positive)
        curves[name] = RocCurve(name, grid, pts[:, 0], pts[:, 1], op, trapezoid_auc(pts[:, 0], pts[:, 1]), True)
    return curves


def roc_to_csv(curves: dict[str, RocCurve]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row_type", "curve_name", "threshold_quantile", "fpr", "tpr", "auc"])
    for name, c in curves.items():
        if not c.defined:
            w.writerow(["undefined", name, "", "", "", ""])
            continue
        for q, f, t in zip(c.quantiles, c.fpr, c.tpr):
            w.writerow(["point", name, f"{q:.6g}", f"{f:.10g}", f"{t:.10g}", ""])
        w.writerow(["mean_threshold", name, "", f"{c.operating_point[0]:.10g}", f"{c.operating_point[1]:.10g}", ""])
        w.writerow(["auc", name, "", "", "", f"{c.auc:.10g}"])
    return buf.getvalue()
