"""Plot envelope tables written by `fdp envelope`.

    fdp envelope --input p.txt --method exact --output exact.csv
    fdp envelope --input p.txt --method asymptotic --output asym.csv
    python scripts/plot_envelope.py exact.csv asym.csv --xmax 0.01 --out envelopes.png

Thresholds in the second table of each file are drawn as dots on the axis.
"""

import argparse
import csv
import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_tables(path):
    with open(path) as f:
        blocks = f.read().strip().split("\n\n")
    envelope = list(csv.DictReader(io.StringIO(blocks[0])))
    thresholds = list(csv.DictReader(io.StringIO(blocks[1]))) if len(blocks) > 1 else []
    return envelope, thresholds


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("tables", nargs="+")
    parser.add_argument("--xmax", type=float, default=1.0)
    parser.add_argument("--out", default="envelope.png")
    args = parser.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4))
    for path in args.tables:
        envelope, thresholds = read_tables(path)
        t = [float(r["t"]) for r in envelope]
        g = [float(r["gamma_bar"]) for r in envelope]
        ax.step(t + [1.0], g + [g[-1]], where="post", label=path)
        for row in thresholds:
            ax.plot(float(row["t"]), 0.0, "o", clip_on=False)
    ax.set_xlim(0, args.xmax)
    ax.set_ylim(0, 1)
    ax.set_xlabel("threshold t")
    ax.set_ylabel("upper confidence envelope")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
