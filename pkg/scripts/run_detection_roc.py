"""Detection ROC for redundant foreground / background samples, averaged over splits.

    python3 scripts/run_detection_roc.py --rate 0.3
"""

import argparse

import numpy as np

from viewdisagree._rng import sub_seed
from viewdisagree.dataset import BACKGROUND, SyntheticConfig, generate_synthetic, split_labeled_unlabeled
from viewdisagree.disagreement import build_entropy_table, detection_roc


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rate", type=float, default=0.3)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ds = generate_synthetic(SyntheticConfig(disagreement_rate=args.rate, rng_seed=args.seed))
    aucs = {"foreground": [], "background": []}
    gaps = []
    for t in range(args.trials):
        split = split_labeled_unlabeled(ds, 5, sub_seed(args.seed + t, "split"), include_background=True)
        table = build_entropy_table(split)
        for name, curve in detection_roc(split, table).items():
            aucs[name].append(curve.auc)
        labels = split.unlabeled.true_view_labels
        h = table.H[(0, 1)]
        gaps.append(h[labels[:, 1] == BACKGROUND].mean() - h[labels[:, 1] != BACKGROUND].mean())

    for name, vals in aucs.items():
        print(f"{name:>10s} AUC {np.mean(vals):.3f} +- {np.std(vals):.3f}")
    print(f"mean H(1|2) gap, background minus foreground conditioning: {np.mean(gaps):.3f}")


if __name__ == "__main__":
    main()
