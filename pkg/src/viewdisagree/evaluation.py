"""Metrics, single trials and disagreement-rate sweeps."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._rng import make_rng, sub_seed
from .bootstrap import BootstrapConfig, cotrain_baseline, cross_modality_bootstrap, multiview_bootstrap
from .dataset import BACKGROUND, SyntheticConfig, generate_synthetic, split_labeled_unlabeled
from .disagreement import build_entropy_table, detection_roc

METHODS = ("baseline", "filtered", "crossmodal", "crossmodal_unfiltered")


def ccr(predictions, truths) -> float:
    """Fraction of predictions equal to the truth."""
    p, t = np.asarray(predictions), np.asarray(truths)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("ccr of an empty set is undefined")
    return float(np.count_nonzero(p == t)) / p.size


@dataclass
class TrialSettings:
    """Everything a trial needs besides the method, disagreement rate and seed."""

    data: SyntheticConfig = field(default_factory=SyntheticConfig)
    boot: BootstrapConfig = field(default_factory=BootstrapConfig)
    seeds_per_class: int = 5
    seed_background: bool = True
    label_noise: float = 0.1
    crossmodal_N: int | None = None


@dataclass
class TrialResult:
    method: str
    disagreement_rate: float
    ccr: dict  # view (1-based) -> test CCR
    auc: dict  # "foreground"/"background" -> AUC (NaN if not computed/undefined)
    rng_seed: int
    wall_time: float = 0.0
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def oracle_labels(true_labels, n_classes: int, noise: float, rng):
    """Flip a ``noise`` fraction of labels uniformly to a different class; random confidences."""
    y = np.asarray(true_labels).copy()
    flip = rng.random(len(y)) < noise
    shift = rng.integers(1, n_classes + 1, size=len(y))
    y[flip] = (y[flip] + shift[flip]) % (n_classes + 1)
    conf = rng.uniform(0.5, 1.0, size=len(y))
    return y, conf


def _aucs(dataset, table) -> dict:
    return {name: c.auc for name, c in detection_roc(dataset, table).items()}


def run_trial(method: str, settings: TrialSettings, split_seed: int) -> TrialResult:
    """One generate / inject / split / learn / evaluate cycle.

    Data comes from ``settings.data.rng_seed``; the seed split (or the strong
    label noise for cross-modal methods) from ``split_seed``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    start = time.perf_counter()
    cfg = settings.data
    ds = generate_synthetic(cfg)
    nan_auc = {"foreground": float("nan"), "background": float("nan")}

    if method in ("baseline", "filtered"):
        ds = split_labeled_unlabeled(ds, settings.seeds_per_class, sub_seed(split_seed, "split"), settings.seed_background)
        if method == "baseline":
            clfs, _ = cotrain_baseline(ds, settings.boot)
            auc = nan_auc
        else:
            table = build_entropy_table(ds)
            clfs, _ = multiview_bootstrap(ds, table, settings.boot)
            auc = _aucs(ds, table)
        scores = {}
        for i, clf in enumerate(clfs):
            pred, _ = clf.predict(ds.test.views[i])
            scores[i + 1] = ccr(pred, ds.test.true_view_labels[:, i])
    else:
        rng = make_rng(split_seed, "oracle")
        y, conf = oracle_labels(ds.unlabeled.true_view_labels[:, 0], cfg.n_foreground_classes, settings.label_noise, rng)
        clf, _ = cross_modality_bootstrap(
            y, conf, ds.unlabeled.views[1], settings.crossmodal_N, apply_filter=(method == "crossmodal")
        )
        pred, _ = clf.predict(ds.test.views[1])
        scores = {2: ccr(pred, ds.test.true_view_labels[:, 1])}
        auc = nan_auc
    return TrialResult(method, cfg.disagreement_rate, scores, auc, split_seed, time.perf_counter() - start)


# --- sweeps -----------------------------------------------------------------

@dataclass
class SweepCell:
    method: str
    rate: float
    view: int
    mean_ccr: float
    std_ccr: float
    trials: int


@dataclass
class SweepResult:
    rates: list[float]
    trials: list[TrialResult]
    cells: list[SweepCell]

    def cell(self, method: str, rate: float, view: int) -> SweepCell:
        for c in self.cells:
            if c.method == method and np.isclose(c.rate, rate) and c.view == view:
                return c
        raise KeyError((method, rate, view))

    @property
    def failures(self) -> list[TrialResult]:
        return [t for t in self.trials if not t.ok]


def _run_job(job):
    method, settings, seed, index = job
    try:
        result = run_trial(method, settings, seed)
    except Exception as exc:  # recorded, not raised: one bad corner must not sink the sweep
        result = TrialResult(method, settings.data.disagreement_rate, {}, {}, seed, failure=f"{type(exc).__name__}: {exc}")
    return index, result


def aggregate(trials: list[TrialResult]) -> list[SweepCell]:
    groups: dict = {}
    for t in trials:
        if not t.ok:
            groups.setdefault((t.method, t.disagreement_rate), {})
            continue
        for view, value in t.ccr.items():
            groups.setdefault((t.method, t.disagreement_rate), {}).setdefault(view, []).append(value)
    cells = []
    for (method, rate), per_view in sorted(groups.items(), key=lambda kv: (METHODS.index(kv[0][0]), kv[0][1])):
        for view in sorted(per_view):
            vals = np.array(per_view[view])
            cells.append(SweepCell(method, rate, view, float(vals.mean()), float(vals.std()), len(vals)))
    return cells


def run_sweep(methods, rates, trials_per_point: int, base_seed: int, settings: TrialSettings | None = None, jobs: int = 1) -> SweepResult:
    """Mean and standard deviation of test CCR per (method, rate, view).

    Trial ``t`` uses split seed ``base_seed + t``; the data seed is
    ``base_seed`` for every trial, so trials differ only in the random split.
    """
    methods, rates = list(methods), [float(r) for r in rates]
    if not methods:
        raise ValueError("empty method list")
    if not rates:
        raise ValueError("empty rate grid")
    if trials_per_point < 1:
        raise ValueError("trials_per_point must be >= 1")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    settings = settings or TrialSettings()
    jobs_list = []
    for method in methods:
        for rate in rates:
            cfg = replace(settings.data, disagreement_rate=rate, rng_seed=base_seed)
            s = replace(settings, data=cfg)
            for t in range(trials_per_point):
                jobs_list.append((method, s, base_seed + t, (method, rate, t)))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_job, jobs_list))
    else:
        results = [_run_job(j) for j in jobs_list]
    results.sort(key=lambda r: (methods.index(r[0][0]), r[0][1], r[0][2]))
    trials = [r for _, r in results]
    return SweepResult(rates, trials, aggregate(trials))


def sweep_to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "rate", "view", "mean_ccr", "std_ccr", "trials"])
    for c in result.cells:
        w.writerow([c.method, f"{c.rate:.6g}", c.view, f"{c.mean_ccr:.10g}", f"{c.std_ccr:.10g}", c.trials])
    return buf.getvalue()


def trials_to_csv(result: SweepResult) -> str:
    # wall time is deliberately omitted so reruns are byte-identical
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "rate", "seed", "view", "ccr", "auc_foreground", "auc_background", "failure"])
    for t in result.trials:
        auc_f = t.auc.get("foreground", float("nan"))
        auc_b = t.auc.get("background", float("nan"))
        if not t.ok:
            w.writerow([t.method, f"{t.disagreement_rate:.6g}", t.rng_seed, "", "", "", "", t.failure])
            continue
        for view, value in sorted(t.ccr.items()):
            w.writerow([t.method, f"{t.disagreement_rate:.6g}", t.rng_seed, view, f"{value:.10g}", f"{auc_f:.10g}", f"{auc_b:.10g}", ""])
    return buf.getvalue()


def plot_sweep(result: SweepResult, path) -> None:
    """Rate vs mean CCR with +-1 std whiskers, one line per (method, view)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "viewdisagree"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        keys = sorted({(c.method, c.view) for c in result.cells}, key=lambda k: (METHODS.index(k[0]), k[1]))
        for method, view in keys:
            cells = sorted((c for c in result.cells if c.method == method and c.view == view), key=lambda c: c.rate)
            ax.errorbar(
                [c.rate * 100 for c in cells], [c.mean_ccr for c in cells], yerr=[c.std_ccr for c in cells],
                marker="o", capsize=3, label=f"{method} (view {view})",
            )
        ax.set_xlabel("view disagreement (%)")
        ax.set_ylabel("CCR")
        ax.set_ylim(0, 1.05)
        ax.legend(loc="lower left", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
