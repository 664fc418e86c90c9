"""Weak-view CCR from noisy strong-view labels, with and without the disagreement filter.

    python3 scripts/run_crossmodal_sweep.py --noise 0.1
"""

import argparse

import numpy as np

from viewdisagree.evaluation import TrialSettings, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--noise", type=float, default=0.1)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rates = np.round(np.arange(10) * 0.1, 1).tolist()
    methods = ["crossmodal", "crossmodal_unfiltered"]
    result = run_sweep(methods, rates, args.trials, args.seed, TrialSettings(label_noise=args.noise))
    failed = {(t.method, t.disagreement_rate) for t in result.failures}
    print(f"{'rate':>5} {'filtered':>10} {'unfiltered':>11}")
    for r in rates:
        row = []
        for m in methods:
            try:
                row.append(f"{result.cell(m, r, 2).mean_ccr:.3f}")
            except KeyError:
                row.append("failed")
        mark = " *" if any(k[1] == r for k in failed) else ""
        print(f"{r:5.1f} {row[0]:>10} {row[1]:>11}{mark}")
    if failed:
        print("* some trials failed; see TrialResult.failure")


if __name__ == "__main__":
    main()
