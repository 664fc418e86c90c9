"""Co-training baseline, entropy-filtered multi-view bootstrapping, cross-modality bootstrapping."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .classifier import GaussianBayesClassifier
from .dataset import BACKGROUND, MultiViewDataset
from .density import silverman_bandwidth
from .disagreement import EntropyTable, build_entropy_table
from .errors import ConfigError, EmptyClassError


@dataclass
class BootstrapConfig:
    N: int = 6
    T: int = 100
    balance_classes: bool = True
    recompute_entropy: bool = False
    uniform_prior: bool = False

    def validate(self):
        if int(self.N) < 1:
            raise ConfigError("N", "must be >= 1")
        if int(self.T) < 1:
            raise ConfigError("T", "must be >= 1")


@dataclass
class TraceRow:
    iteration: int
    view: int
    labeled_size: int
    unlabeled_size: int
    test_ccr: float
    pairs_filtered: int


@dataclass
class BootstrapTrace:
    rows: list[TraceRow] = field(default_factory=list)
    # (iteration, source view i, target view j, sample k, copied) for every cross-label attempt
    events: list[tuple[int, int, int, int, bool]] = field(default_factory=list)
    # (iteration, view, sample) for every confident selection
    selections: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def n_iterations(self) -> int:
        return max((r.iteration for r in self.rows), default=0)

    def for_view(self, view: int) -> list[TraceRow]:
        return [r for r in self.rows if r.view == view]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "view", "labeled_size", "unlabeled_size", "test_ccr", "pairs_filtered"])
        for r in self.rows:
            # views are 1-based in the output file
            w.writerow([r.iteration, r.view + 1, r.labeled_size, r.unlabeled_size, f"{r.test_ccr:.10g}", r.pairs_filtered])
        return buf.getvalue()

    def __eq__(self, other):
        return (
            isinstance(other, BootstrapTrace)
            and self.rows == other.rows
            and self.events == other.events
            and self.selections == other.selections
        )


def select_confident(labels, confidence, candidates, N: int, balance: bool, classes) -> np.ndarray:
    """Top-N candidates by confidence, ties broken by lower sample index.

    With ``balance`` each predicted class contributes at most
    ``max(1, N // len(classes))`` samples.
    """
    order = np.lexsort((candidates, -confidence))
    ranked, ranked_labels = candidates[order], labels[order]
    if not balance:
        return ranked[:N]
    quota = max(1, N // len(classes))
    keep = np.zeros(len(ranked), dtype=bool)
    for c in classes:
        keep[np.flatnonzero(ranked_labels == c)[:quota]] = True
    return ranked[keep]


def _ccr(clf, X, y) -> float:
    if len(y) == 0:
        return float("nan")
    pred, _ = clf.predict(X)
    return float(np.mean(pred == y))


def _check_seeds(dataset: MultiViewDataset):
    if len(dataset.seed) == 0:
        raise EmptyClassError(-1, "seed sets are empty")
    if len(dataset.unlabeled) == 0:
        raise ValueError("unlabeled pool is empty")


def _bootstrap_loop(dataset: MultiViewDataset, config: BootstrapConfig, agree, on_iteration=None):
    config.validate()
    _check_seeds(dataset)
    V = dataset.V
    pool = dataset.unlabeled.views
    mask = dataset.unlabeled_mask.copy()
    S_X = [[x for x in dataset.seed.views[i]] for i in range(V)]
    S_y = [list(dataset.seed.true_view_labels[:, i]) for i in range(V)]
    classes = np.unique(dataset.seed.true_view_labels)
    for i in range(V):
        have = set(int(c) for c in S_y[i])
        for c in classes:
            if int(c) not in have:
                raise EmptyClassError(int(c), f"seed set of view {i + 1} has no samples of class {int(c)}")
    test = dataset.test

    def fit(i):
        return GaussianBayesClassifier.fit(
            np.array(S_X[i]), np.array(S_y[i]), classes=classes, uniform_prior=config.uniform_prior
        )

    trace = BootstrapTrace()
    t = 0
    while t < config.T and mask.any():
        t += 1
        if on_iteration is not None:
            agree = on_iteration(t, mask) or agree
        filtered = np.zeros(V, dtype=int)
        for i in range(V):
            cand = np.flatnonzero(mask[:, i])
            if len(cand) == 0:
                continue
            f_i = fit(i)
            labels, conf = f_i.predict(pool[i][cand])
            chosen = select_confident(labels, conf, cand, config.N, config.balance_classes, classes)
            label_of = dict(zip(cand.tolist(), labels.tolist()))
            for k in chosen:
                y = label_of[int(k)]
                trace.selections.append((t, i, int(k)))
                for j in range(V):
                    if j == i or not mask[k, j]:
                        continue
                    copied = bool(agree(i, j, k))
                    trace.events.append((t, i, j, int(k), copied))
                    if copied:
                        mask[k, j] = False
                        S_X[j].append(pool[j][k])
                        S_y[j].append(y)
                    else:
                        filtered[i] += 1
                mask[k, i] = False
                S_X[i].append(pool[i][k])
                S_y[i].append(y)
        for i in range(V):
            ccr = _ccr(fit(i), test.views[i], test.true_view_labels[:, i]) if len(test) else float("nan")
            trace.rows.append(TraceRow(t, i, len(S_y[i]), int(mask[:, i].sum()), ccr, int(filtered[i])))
    return [fit(i) for i in range(V)], trace


def cotrain_baseline(dataset: MultiViewDataset, config: BootstrapConfig):
    """Conventional co-training: every confident label is copied to all other views."""
    return _bootstrap_loop(dataset, config, lambda i, j, k: True)


def _agreement(table: EntropyTable):
    bits = {p: table.bits(*p) for p in table.pairs}

    def agree(i, j, k):
        return not (bits[(i, j)][k] ^ bits[(j, i)][k])

    return agree


def multiview_bootstrap(dataset: MultiViewDataset, table: EntropyTable, config: BootstrapConfig):
    """Co-training that only copies a label across views i, j when m_ij and m_ji agree.

    Each classifier still self-trains on its own confident samples.  With
    ``config.recompute_entropy`` the table is rebuilt every iteration over the
    views still unlabeled.
    """
    if table.M != len(dataset.unlabeled) or table.V != dataset.V:
        raise ValueError(f"entropy table covers {table.M} samples x {table.V} views, pool has {len(dataset.unlabeled)} x {dataset.V}")
    hook = None
    if config.recompute_entropy:
        def hook(t, mask):
            if t == 1:
                return None
            return _agreement(build_entropy_table(dataset, active=mask))
    return _bootstrap_loop(dataset, config, _agreement(table), on_iteration=hook)


# --- cross-modality bootstrapping ---------------------------------------------

@dataclass
class CrossModalReport:
    selected: np.ndarray  # pool indices in L, confidence order
    labels: np.ndarray  # strong-view labels y_k for L
    H_label_given_view: np.ndarray  # H(y | x_k^2)
    H_view_given_label: np.ndarray  # H(x^2 | y_k)
    bit_label: np.ndarray  # m(y, x_k^2)
    bit_view: np.ndarray  # m(x^2, y_k)
    passed: np.ndarray  # pairs kept in S

    @property
    def n_filtered(self) -> int:
        return int(np.sum(~self.passed))


def _entropy_rows(P: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(P), 0.0)
    return np.clip(-terms.sum(axis=1), 0.0, np.log(P.shape[1]))


def mixed_entropies(labels, X) -> tuple[np.ndarray, np.ndarray]:
    """Label/view conditional entropies for the labeled pairs ``(labels[k], X[k])``.

    Returns ``H(y | x_k)`` with p(y | x) proportional to the class-count
    weighted KDE of class y at x, and ``H(x | y_k)`` over the candidate set X
    with p(x | y) = f_y(x) / sum_x' f_y(x').  One Silverman bandwidth over X
    is shared by every class KDE.
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    onehot = (labels[:, None] == classes[None, :]).astype(float)
    if len(X) < 2:
        return np.zeros(len(X)), np.zeros(len(X))
    h = silverman_bandwidth(X)
    z = (X[:, None, :] - X[None, :, :]) / h
    log_k = -0.5 * np.sum(z * z, axis=2)
    # every row contains its own zero-distance kernel, so the shift keeps the max at 1
    K = np.exp(log_k - log_k.max(axis=1, keepdims=True))
    class_mass = K @ onehot  # [k, c] ~ n_c * f_c(x_k)
    p_label = class_mass / class_mass.sum(axis=1, keepdims=True)
    H_label = _entropy_rows(p_label)

    K_abs = np.exp(log_k)
    f_c = (K_abs @ onehot) / onehot.sum(axis=0)  # f_c(x_m) up to a shared constant
    p_view = (f_c / f_c.sum(axis=0, keepdims=True)).T  # [c, m]
    H_per_class = _entropy_rows(p_view)
    H_view = H_per_class[np.searchsorted(classes, labels)]
    return H_label, H_view


def cross_modality_bootstrap(strong_labels, strong_confidence, weak_view, N: int | None = None, apply_filter: bool = True):
    """Train the weak-view classifier from the N most confident strong-view labels.

    Pairs whose label/view indicators disagree are dropped before training.
    ``apply_filter=False`` trains on every pair in L.
    """
    labels = np.asarray(strong_labels)
    conf = np.asarray(strong_confidence, dtype=float)
    X = np.asarray(weak_view, dtype=float)
    M = len(labels)
    if N is None:
        N = M
    if not 1 <= N <= M:
        raise ConfigError("N", f"must lie in 1..{M}, got {N}")
    order = np.lexsort((np.arange(M), -conf))[:N]
    L_y, L_X = labels[order], X[order]

    H_label, H_view = mixed_entropies(L_y, L_X)
    bit_label = (H_label < H_label.mean()).astype(np.int8)
    bit_view = (H_view < H_view.mean()).astype(np.int8)
    passed = (bit_label ^ bit_view) == 0 if apply_filter else np.ones(N, dtype=bool)
    report = CrossModalReport(order, L_y, H_label, H_view, bit_label, bit_view, passed)

    classes = np.unique(L_y)
    S_y = L_y[passed]
    for c in classes:
        if not np.any(S_y == c):
            raise EmptyClassError(int(c), f"class {int(c)} lost every pair to the disagreement filter")
    if not np.any(S_y != BACKGROUND):
        raise EmptyClassError(BACKGROUND, "no foreground pairs to train the weak-view classifier")
    return GaussianBayesClassifier.fit(L_X[passed], S_y, classes=classes), report
