"""Reporting numbers: error-rate reduction, review bounds and coverage.

Error-rate reductions are recomputed from printed accuracies by first
recovering the integer counts behind them; the review bounds show what
unreadable items do to an accuracy estimate; the coverage table uses a
simulated predictor whose confidence is calibrated.

    python demos/reporting.py
"""
from __future__ import annotations

import argparse

import numpy as np

from datelink.metrics import accuracy_from_percent, coverage_points, error_rate_reduction, review_bounds


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--n-test", type=int, default=4139, help="test-set size behind the percentages")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    base = accuracy_from_percent(85.17, args.n_test)
    print(f"baseline 85.17% of {args.n_test} = {round(base * args.n_test)} correct")
    naive_base = 0.8517
    for pct in (93.38, 95.19, 95.39, 95.63, 95.89, 96.18):
        exact = error_rate_reduction(base, accuracy_from_percent(pct, args.n_test))
        naive = error_rate_reduction(naive_base, pct / 100)
        print(f"  {pct:.2f}%  error rate change {exact:+.2f}% (from counts)  {naive:+.2f}% (from rounded percentages)")

    lo, hi, proj = review_bounds(n_correct=907, n_incorrect=43, n_unreadable=50)
    print(f"\nreview of 1000 items, 50 unreadable: lower {lo:.2%}  upper {hi:.2%}  projected {proj:.2%}")

    rng = np.random.default_rng(args.seed)
    conf = rng.uniform(size=500)
    correct = rng.random(500) < conf
    print("\ncalibrated predictor, 500 items\ncoverage  accuracy")
    for point in coverage_points(conf, correct, grid=(0.1, 0.25, 0.5, 0.75, 1.0)):
        print(f"{point.coverage:8.2f}  {point.accuracy:.4f}")


if __name__ == "__main__":
    main()
