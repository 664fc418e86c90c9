"""Command-line entry point: ``viewdisagree {generate,detect,bootstrap,sweep}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from itertools import permutations
from pathlib import Path

import numpy as np

from ._rng import make_rng, sub_seed
from .bootstrap import BootstrapConfig, cotrain_baseline, cross_modality_bootstrap, multiview_bootstrap
from .dataset import BACKGROUND, SyntheticConfig, generate_synthetic, load_dataset, save_dataset, split_labeled_unlabeled
from .disagreement import VERDICT_BY_CODE, build_entropy_table, detection_roc, roc_to_csv, sample_verdict_codes
from .errors import ConfigError, DatasetFormatError
from .evaluation import METHODS, TrialSettings, oracle_labels, plot_sweep, run_sweep, sweep_to_csv, trials_to_csv

DATA_DEFAULTS = {
    "classes": 2,
    "per_class": 150,
    "test_per_class": 50,
    "dims": "2,2",
    "class_std": 1.0,
    "background_std": 1.0,
    "disagreement": 0.0,
    "no_redundant_background": False,
    "seeds_per_class": 5,
    "no_background_seed": False,
    "seed": 0,
}
BOOT_DEFAULTS = {"N": 6, "T": 100, "no_balance": False, "recompute_entropy": False, "uniform_prior": False}

DEFAULTS = {
    "generate": {**DATA_DEFAULTS, "output": None},
    "detect": {"input": None, "output_dir": None, "grid_size": 101},
    "bootstrap": {"input": None, "output": None, "method": "filtered", "label_noise": 0.1, "seed": 0, **BOOT_DEFAULTS},
    "sweep": {
        **DATA_DEFAULTS, **BOOT_DEFAULTS,
        "methods": "baseline,filtered", "rates": "0:0.9:0.1", "trials": 10, "label_noise": 0.1,
        "jobs": 1, "output_dir": None,
    },
}


def _data_flags(p: argparse.ArgumentParser):
    p.add_argument("--classes", type=int, help="number of foreground classes (default 2)")
    p.add_argument("--per-class", type=int, help="training samples per foreground class (default 150)")
    p.add_argument("--test-per-class", type=int, help="test samples per foreground class (default 50)")
    p.add_argument("--dims", help="comma-separated view dimensionalities (default 2,2)")
    p.add_argument("--class-std", type=float)
    p.add_argument("--background-std", type=float)
    p.add_argument("--disagreement", type=float, help="fraction of foreground samples with one background view")
    p.add_argument("--no-redundant-background", action="store_const", const=True)
    p.add_argument("--seeds-per-class", type=int, help="labeled seed samples per class (default 5)")
    p.add_argument("--no-background-seed", action="store_const", const=True)


def _boot_flags(p: argparse.ArgumentParser):
    p.add_argument("--N", type=int, help="samples labeled per view per iteration (default 6)")
    p.add_argument("--T", type=int, help="maximum iterations (default 100)")
    p.add_argument("--no-balance", action="store_const", const=True)
    p.add_argument("--recompute-entropy", action="store_const", const=True)
    p.add_argument("--uniform-prior", action="store_const", const=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="viewdisagree", description="View disagreement detection and multi-view bootstrapping.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic multi-view dataset")
    _data_flags(g)
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--config")

    d = sub.add_parser("detect", help="per-sample disagreement verdicts and detection ROCs")
    d.add_argument("-i", "--input", required=True)
    d.add_argument("-o", "--output-dir", required=True)
    d.add_argument("--grid-size", type=int, help="number of threshold quantiles (default 101)")
    d.add_argument("--config")

    b = sub.add_parser("bootstrap", help="one bootstrapping run on a dataset file")
    b.add_argument("-i", "--input", required=True)
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--method", choices=METHODS)
    b.add_argument("--label-noise", type=float, help="oracle strong-view label noise for cross-modal methods")
    b.add_argument("--seed", type=int)
    _boot_flags(b)
    b.add_argument("--config")

    s = sub.add_parser("sweep", help="CCR over a grid of disagreement rates")
    _data_flags(s)
    _boot_flags(s)
    s.add_argument("--methods", help="comma-separated subset of " + ",".join(METHODS))
    s.add_argument("--rates", help="start:stop:step (inclusive) or a comma list")
    s.add_argument("--trials", type=int)
    s.add_argument("--label-noise", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--jobs", type=int)
    s.add_argument("-o", "--output-dir", required=True)
    s.add_argument("--config")
    return parser


def _resolve(parser, args) -> dict:
    """Merge explicit flags over ``--config`` values over defaults; unknown config keys are rejected."""
    defaults = DEFAULTS[args.command]
    values = dict(defaults)
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"--config {args.config}: {exc}")
        if not isinstance(loaded, dict):
            parser.error("--config must hold a JSON object")
        unknown = sorted(set(loaded) - set(defaults))
        if unknown:
            parser.error(f"--config: unknown keys {unknown}")
        values.update(loaded)
    for key in defaults:
        given = getattr(args, key, None)
        if given is not None:
            values[key] = given
    return values


def parse_rates(text: str) -> list[float]:
    text = str(text)
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError("rate step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 10) for k in range(max(n, 0))]
    return [float(x) for x in text.split(",") if x.strip()]


def _synthetic_config(parser, v: dict) -> SyntheticConfig:
    try:
        dims = tuple(int(x) for x in str(v["dims"]).split(","))
    except ValueError:
        parser.error(f"--dims: cannot parse {v['dims']!r}")
    cfg = SyntheticConfig(
        n_foreground_classes=int(v["classes"]),
        per_class_count=int(v["per_class"]),
        test_per_class=int(v["test_per_class"]),
        dims=dims,
        class_std=float(v["class_std"]),
        background_std=float(v["background_std"]),
        disagreement_rate=float(v["disagreement"]),
        redundant_background=not v["no_redundant_background"],
        rng_seed=int(v["seed"]),
    )
    try:
        cfg.validate()
    except ConfigError as exc:
        flag = {"disagreement_rate": "--disagreement", "n_foreground_classes": "--classes", "per_class_count": "--per-class"}.get(exc.field, exc.field)
        parser.error(f"{flag} ({exc.field}): {exc}")
    if int(v["seeds_per_class"]) < 0:
        parser.error("--seeds-per-class must be non-negative")
    return cfg


def _boot_config(parser, v: dict) -> BootstrapConfig:
    cfg = BootstrapConfig(int(v["N"]), int(v["T"]), not v["no_balance"], bool(v["recompute_entropy"]), bool(v["uniform_prior"]))
    try:
        cfg.validate()
    except ConfigError as exc:
        parser.error(f"--{exc.field}: {exc}")
    return cfg


def _write(path, text: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _load(path):
    try:
        return load_dataset(path)
    except FileNotFoundError:
        raise SystemExit(f"viewdisagree: error: dataset file not found: {path}")
    except DatasetFormatError as exc:
        raise SystemExit(f"viewdisagree: error: {path}: {exc}")


def cmd_generate(parser, v) -> int:
    cfg = _synthetic_config(parser, v)
    ds = generate_synthetic(cfg)
    if int(v["seeds_per_class"]) > 0:
        try:
            ds = split_labeled_unlabeled(ds, int(v["seeds_per_class"]), sub_seed(cfg.rng_seed, "split"), not v["no_background_seed"])
        except ValueError as exc:
            print(f"viewdisagree: error: {exc}", file=sys.stderr)
            return 1
    save_dataset(ds, v["output"])
    summary = ds.summary()
    print(f"wrote {v['output']}: {summary['unlabeled']} unlabeled, {summary['seed']} seed, {summary['test']} test samples")
    print("class counts (unlabeled pool): " + ", ".join(f"{k}={n}" for k, n in summary["class_counts"].items()))
    print(f"samples with view disagreement: {summary['disagreement']}")
    return 0


def _plot_roc(curves, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "viewdisagree"}):
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        for name, c in curves.items():
            if not c.defined:
                continue
            order = np.lexsort((c.tpr, c.fpr))
            line, = ax.plot(c.fpr[order], c.tpr[order], label=f"{name} (AUC {c.auc:.3f})")
            ax.plot(*c.operating_point, "o", color=line.get_color())
        ax.plot([0, 1], [0, 1], ":", color="grey")
        ax.set_xlabel("false positive rate")
        ax.set_ylabel("true positive rate")
        ax.legend(loc="lower right", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def cmd_detect(parser, v) -> int:
    if int(v["grid_size"]) < 2:
        parser.error("--grid-size must be >= 2")
    ds = _load(v["input"])
    table = build_entropy_table(ds)
    codes = sample_verdict_codes(table)
    pairs = list(permutations(range(ds.V), 2))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sample_index", "verdict"] + [f"m_{i + 1}{j + 1}" for i, j in pairs] + [f"H_{i + 1}{j + 1}" for i, j in pairs])
    bits = {p: table.bits(*p) for p in pairs}
    for k in range(table.M):
        w.writerow([k, VERDICT_BY_CODE[codes[k]].value] + [int(bits[p][k]) for p in pairs] + [f"{table.H[p][k]:.10g}" for p in pairs])
    out = Path(v["output_dir"])
    _write(out / "verdicts.csv", buf.getvalue())

    curves = detection_roc(ds, table, np.linspace(0.0, 1.0, int(v["grid_size"])))
    _write(out / "roc.csv", roc_to_csv(curves))
    _plot_roc(curves, out / "roc.svg")

    labels = ds.unlabeled.true_view_labels
    same = np.all(labels == labels[:, :1], axis=1)
    truth = np.where(same & (labels[:, 0] != BACKGROUND), 0, np.where(same, 1, 2))
    print(f"{table.M} samples; verdicts correct: {np.mean(codes == truth):.3f}")
    for name, c in curves.items():
        print(f"{name} detection AUC: {c.auc:.4f}" if c.defined else f"{name} detection ROC: undefined (no positives or no negatives)")
    return 0


def cmd_bootstrap(parser, v) -> int:
    boot = _boot_config(parser, v)
    ds = _load(v["input"])
    method = v["method"]
    if method in ("baseline", "filtered"):
        if method == "baseline":
            clfs, trace = cotrain_baseline(ds, boot)
        else:
            clfs, trace = multiview_bootstrap(ds, build_entropy_table(ds), boot)
        _write(v["output"], trace.to_csv())
        last = trace.rows[-ds.V:]
        print(f"{trace.n_iterations} iterations; final test CCR " + ", ".join(f"view {r.view + 1}={r.test_ccr:.3f}" for r in last))
        return 0

    rng = make_rng(int(v["seed"]), "oracle")
    y, conf = oracle_labels(ds.unlabeled.true_view_labels[:, 0], ds.n_classes, float(v["label_noise"]), rng)
    try:
        clf, report = cross_modality_bootstrap(y, conf, ds.unlabeled.views[1], apply_filter=(method == "crossmodal"))
    except ValueError as exc:
        print(f"viewdisagree: error: {exc}", file=sys.stderr)
        return 1
    pred, _ = clf.predict(ds.test.views[1])
    test_ccr = float(np.mean(pred == ds.test.true_view_labels[:, 1])) if len(ds.test) else float("nan")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sample_index", "strong_label", "H_label_given_view", "H_view_given_label", "m_label", "m_view", "kept"])
    for row in zip(report.selected, report.labels, report.H_label_given_view, report.H_view_given_label, report.bit_label, report.bit_view, report.passed):
        k, y_k, h1, h2, b1, b2, kept = row
        w.writerow([int(k), int(y_k), f"{h1:.10g}", f"{h2:.10g}", int(b1), int(b2), int(kept)])
    _write(v["output"], buf.getvalue())
    print(f"kept {int(report.passed.sum())} of {len(report.passed)} pairs; weak-view test CCR {test_ccr:.3f}")
    return 0


def cmd_sweep(parser, v) -> int:
    methods = [m.strip() for m in str(v["methods"]).split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if not methods or bad:
        parser.error(f"--methods: unknown {bad}; choose from {','.join(METHODS)}")
    try:
        rates = parse_rates(v["rates"])
    except ValueError as exc:
        parser.error(f"--rates: {exc}")
    if not rates or any(not 0 <= r <= 1 for r in rates):
        parser.error("--rates: need a non-empty grid inside [0, 1]")
    if int(v["trials"]) < 1:
        parser.error("--trials must be >= 1")
    if int(v["jobs"]) < 1:
        parser.error("--jobs must be >= 1")
    data = _synthetic_config(parser, v)
    settings = TrialSettings(
        data=data,
        boot=_boot_config(parser, v),
        seeds_per_class=int(v["seeds_per_class"]),
        seed_background=not v["no_background_seed"],
        label_noise=float(v["label_noise"]),
    )
    result = run_sweep(methods, rates, int(v["trials"]), int(v["seed"]), settings, jobs=int(v["jobs"]))
    out = Path(v["output_dir"])
    _write(out / "sweep.csv", sweep_to_csv(result))
    _write(out / "trials.csv", trials_to_csv(result))
    plot_sweep(result, out / "sweep.svg")
    for c in result.cells:
        print(f"{c.method:>22s} rate={c.rate:.2f} view={c.view} CCR={c.mean_ccr:.3f}±{c.std_ccr:.3f} (n={c.trials})")
    if result.failures:
        print(f"{len(result.failures)} trial(s) failed; see trials.csv", file=sys.stderr)
        return 1
    return 0


COMMANDS = {"generate": cmd_generate, "detect": cmd_detect, "bootstrap": cmd_bootstrap, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    values = _resolve(sub, args)
    return COMMANDS[args.command](sub, values)


if __name__ == "__main__":
    sys.exit(main())
