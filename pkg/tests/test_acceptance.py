"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` and read the "acceptance criteria"
section of the terminal summary.
"""

import math
import time
from itertools import product

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from viewdisagree.bootstrap import BootstrapConfig, cotrain_baseline, multiview_bootstrap
from viewdisagree.cli import main
from viewdisagree.dataset import BACKGROUND, SyntheticConfig, generate_synthetic, split_labeled_unlabeled
from viewdisagree.density import KdeModel, conditional_log_distribution
from viewdisagree.disagreement import (
    EntropyTable,
    Verdict,
    build_entropy_table,
    classify_pair,
    conditional_view_entropy,
)
from viewdisagree.evaluation import TrialSettings, ccr, run_sweep

RATES = [round(0.1 * k, 1) for k in range(10)]
TRIALS = 10


def report(name: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def rate_sweep():
    start = time.perf_counter()
    result = run_sweep(["baseline", "filtered"], RATES, TRIALS, base_seed=0, settings=TrialSettings())
    return result, time.perf_counter() - start


def _per_view(result, method, rate):
    return [result.cell(method, rate, v).mean_ccr for v in (1, 2)]


def test_c1a_low_disagreement_both_methods(rate_sweep):
    result, _ = rate_sweep
    worst = min(min(_per_view(result, m, r)) for m in ("baseline", "filtered") for r in (0.0, 0.1, 0.2))
    report("1(a) CCR >= 0.90 at rate <= 0.2, both methods", worst >= 0.90 and not result.failures, f"lowest per-view mean CCR {worst:.3f}")


def test_c1b_filtered_beats_baseline_at_07(rate_sweep):
    result, _ = rate_sweep
    gaps = [f - b for f, b in zip(_per_view(result, "filtered", 0.7), _per_view(result, "baseline", 0.7))]
    report("1(b) filtered - baseline >= 0.15 at rate 0.7", min(gaps) >= 0.15, f"per-view gaps {gaps[0]:.3f}, {gaps[1]:.3f}")


def test_c1c_filtered_at_09(rate_sweep):
    result, _ = rate_sweep
    vals = _per_view(result, "filtered", 0.9)
    report("1(c) filtered CCR >= 0.80 at rate 0.9", min(vals) >= 0.80, f"per-view mean CCR {vals[0]:.3f}, {vals[1]:.3f}")


def test_c1_runtime(rate_sweep):
    _, seconds = rate_sweep
    report("1 runtime < 300 s", seconds < 300, f"full grid, 2 methods x {len(RATES)} rates x {TRIALS} trials in {seconds:.1f} s")


def test_c2_background_conditioning_raises_entropy():
    ds = generate_synthetic(SyntheticConfig(disagreement_rate=0.3, rng_seed=0))
    table = build_entropy_table(ds)
    labels = ds.unlabeled.true_view_labels
    parts, ok = [], True
    for i, j in table.pairs:
        h = table.H[(i, j)]
        bg, fg = h[labels[:, j] == BACKGROUND].mean(), h[labels[:, j] != BACKGROUND].mean()
        ok &= bg > fg
        parts.append(f"H({i + 1}|{j + 1}) bg {bg:.3f} > fg {fg:.3f}")
    report("2 background-conditioned entropy exceeds foreground", ok, "; ".join(parts))


def test_c3_detection_auc(rate_sweep):
    result, _ = rate_sweep
    trials = [t for t in result.trials if t.method == "filtered" and t.disagreement_rate == 0.3]
    assert len(trials) == TRIALS
    fg = np.mean([t.auc["foreground"] for t in trials])
    bg = np.mean([t.auc["background"] for t in trials])
    report("3 detection AUC >= 0.90 at rate 0.3", fg >= 0.90 and bg >= 0.90, f"foreground {fg:.3f}, background {bg:.3f}")


def test_c4_cross_modality():
    settings = TrialSettings(label_noise=0.1)
    result = run_sweep(["crossmodal", "crossmodal_unfiltered"], [0.5], TRIALS, base_seed=0, settings=settings)
    filt = result.cell("crossmodal", 0.5, 2).mean_ccr
    unfilt = result.cell("crossmodal_unfiltered", 0.5, 2).mean_ccr
    ok = filt >= 0.85 and filt - unfilt >= 0.10 and not result.failures
    report("4 cross-modal CCR >= 0.85 and >= 0.10 above unfiltered", ok, f"filtered {filt:.3f}, unfiltered {unfilt:.3f}, gap {filt - unfilt:.3f}")


class _Histogram:
    def __init__(self, points):
        self.points = [tuple(map(float, p)) for p in points]

    def logpdf(self, rows):
        counts = [sum(p == tuple(map(float, r)) for p in self.points) for r in rows]
        with np.errstate(divide="ignore"):
            return np.log(np.array(counts, dtype=float) / len(self.points))


def test_c5_entropy_oracle():
    joint = _Histogram([(0, 0), (0, 0), (1, 0), (2, 0), (3, 1)])
    U = np.array([[0.0], [1.0], [2.0], [3.0]])
    skew = conditional_view_entropy(joint, U, [0.0])
    hand = -(0.5 * math.log(0.5) + 0.5 * math.log(0.25))
    point = conditional_view_entropy(joint, U, [1.0])
    uniform = conditional_view_entropy(_Histogram([(0, 5), (1, 5), (2, 5), (3, 5), (9, 9)]), U, [5.0])
    ok = abs(skew - hand) <= 1e-6 and abs(uniform - math.log(4)) <= 1e-9 and point == 0.0
    report("5 histogram-oracle entropies", ok, f"|dH| {abs(skew - hand):.1e}, uniform err {abs(uniform - math.log(4)):.1e}, point mass {point}")


def test_c6_small_invariants(small_table):
    xor_ok = True
    for b1, b2 in product([0, 1], repeat=2):
        H = {(0, 1): np.array([0.0 if b1 else 1.0]), (1, 0): np.array([0.0 if b2 else 1.0])}
        t = EntropyTable(2, 1, H, {p: 0.5 for p in H})
        xor_ok &= (classify_pair(t, 0, 1, 0).verdict == Verdict.VIEW_DISAGREEMENT) == bool(b1 ^ b2)
    ccr_ok = ccr([1, 2, 1, 0], [1, 2, 0, 0]) == 0.75 and ccr([1], [2]) == 0.0 and ccr([0, 0], [0, 0]) == 1.0
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(40, 4)) * [1, 2, 1, 2]
    joint = KdeModel.fit(pts)
    norm_err = max(abs(np.exp(conditional_log_distribution(joint, pts[:, :2], q)).sum() - 1) for q in rng.normal(size=(1000, 2)) * 4)
    bound = math.log(small_table.M) + 1e-12
    range_ok = all(np.all((h >= 0) & (h <= bound)) for h in small_table.H.values())
    ok = xor_ok and ccr_ok and norm_err <= 1e-9 and range_ok
    report("6 exact small invariants", ok, f"xor {xor_ok}, ccr {ccr_ok}, max normalization err {norm_err:.1e}, entropy range {range_ok}")


def test_c7_disabled_filter_equals_baseline():
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(5):
        cfg = SyntheticConfig(
            per_class_count=int(rng.integers(20, 60)),
            test_per_class=10,
            disagreement_rate=float(rng.uniform(0, 0.8)),
            rng_seed=int(rng.integers(1 << 30)),
        )
        ds = split_labeled_unlabeled(generate_synthetic(cfg), 5, int(rng.integers(1 << 30)), include_background=True)
        boot = BootstrapConfig(N=int(rng.integers(2, 12)))
        forced = build_entropy_table(ds).with_thresholds(math.inf)
        assert all(np.all(forced.bits(*p) == 1) for p in forced.pairs)
        clf_a, tr_a = multiview_bootstrap(ds, forced, boot)
        clf_b, tr_b = cotrain_baseline(ds, boot)
        same = tr_a == tr_b and tr_a.to_csv() == tr_b.to_csv()
        for a, b in zip(clf_a, clf_b):
            same &= all(np.array_equal(getattr(a, f), getattr(b, f)) for f in ("classes", "means", "variances", "priors"))
        mismatches += not same
    report("7 all-ones indicators reproduce the baseline bit-for-bit", mismatches == 0, f"{5 - mismatches}/5 configurations identical")


def test_c8_determinism(tmp_path):
    small = ["--per-class", "30", "--test-per-class", "10", "--seed", "9"]
    outputs = {}
    for run in ("a", "b"):
        d = tmp_path / run
        main(["generate", *small, "--disagreement", "0.4", "-o", str(d / "data.jsonl")])
        main(["detect", "-i", str(d / "data.jsonl"), "-o", str(d / "detect")])
        for method in ("baseline", "filtered", "crossmodal", "crossmodal_unfiltered"):
            main(["bootstrap", "-i", str(d / "data.jsonl"), "-o", str(d / f"{method}.csv"), "--method", method, "--seed", "9"])
        main(["sweep", *small, "--rates", "0,0.5", "--trials", "2", "--methods", "baseline,filtered,crossmodal", "-o", str(d / "sweep")])
        outputs[run] = {p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}
    same = outputs["a"] == outputs["b"]
    csvs = sum(1 for p in outputs["a"] if p.suffix == ".csv")
    report("8 byte-identical reruns", same, f"{len(outputs['a'])} files compared ({csvs} CSV)")
