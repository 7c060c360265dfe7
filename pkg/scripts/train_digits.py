#!/usr/bin/env python3
"""Desk-scale supervised digit training plus the ops-comparison report."""
import argparse
import os

from nsat.zoo.datasets import load_or_make
from nsat.zoo.erbp import ErbpRun, ErbpParams
from nsat.zoo.reference import train_reference
from nsat.zoo.report import synop_report, format_report, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default=None, help="IDX dataset dir (generated if absent)")
    ap.add_argument("--epochs", type=int, default=10)
    ap.add_argument("--train-n", type=int, default=5000)
    ap.add_argument("--test-n", type=int, default=1000)
    ap.add_argument("--eval-n", type=int, default=250)
    ap.add_argument("--out", default="results/digits")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    train, test = load_or_make(args.data, n_train=args.train_n, n_test=args.test_n)
    run = ErbpRun(train, test)
    run.run(epochs=args.epochs, eval_n=args.eval_n, log=print)
    final = run.evaluate(args.test_n)
    print(f"final test error ({args.test_n} digits): {final:.4f}")
    ref = train_reference(train, test, epochs=args.epochs)
    print(f"float reference final error: {ref.errors[-1]:.4f}")
    nsat_trace = [(err, ops) for (_ep, err, ops, _u) in run.history]
    ref_trace = list(zip(ref.errors, ref.macs))
    rows = synop_report(nsat_trace, ref_trace)
    print(format_report(rows))
    write_report(os.path.join(args.out, "ops_report.tsv"), rows)


if __name__ == "__main__":
    main()
