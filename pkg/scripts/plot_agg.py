#!/usr/bin/env python3
"""Render aggregate curves from an agg.csv produced by `bandit run`.

Convenience only; not part of the tested surface.
"""

import argparse
import csv
from collections import defaultdict


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("agg_csv")
    parser.add_argument("--metric", default="cum_regret")
    parser.add_argument("-o", "--out", default="agg.png")
    parser.add_argument("--logx", action="store_true")
    args = parser.parse_args()

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = defaultdict(lambda: ([], [], []))
    with open(args.agg_csv, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["metric"] != args.metric:
                continue
            t, mean, p75 = series[row["algorithm"]]
            t.append(int(row["t"]))
            mean.append(float(row["mean"]))
            p75.append(float(row["p75"]))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for alg, (t, mean, p75) in sorted(series.items()):
        line, = ax.plot(t, mean, label=alg)
        ax.fill_between(t, mean, p75, alpha=0.15, color=line.get_color())
    ax.set_xlabel("t")
    ax.set_ylabel(args.metric)
    if args.logx:
        ax.set_xscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
