"""Independent dense reimplementation of graph construction and label
spreading, used to freeze expected outputs for the C++ tests.

Input is a feature CSV as written by write_feature_csv / `aspectra classify
--features-csv` (surface, six bits, label, gold). The script builds the RBF
affinity, keeps the k nearest neighbours per row (ties to the lower index),
symmetrizes by max, normalizes, iterates the spreading recursion and also
solves the fixed point directly.

    python3 label_spreading_oracle.py features.csv --k 5 [--sigma 1 --alpha 0.2]

Prints detected aspects (one per line) or, with --metrics, the confusion
counts and precision/recall/accuracy over rows that were unlabeled.
"""

import argparse
import csv

import numpy as np


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    names = ["word_length", "pos_noun", "freq_band", "head_word", "orthographic", "stopword"]
    x = np.array([[int(r[n]) for n in names] for r in rows], dtype=float)
    labels = np.array([int(r["label"]) for r in rows])
    gold = np.array([int(r["gold"]) if r["gold"] != "" else -1 for r in rows])
    surfaces = [r["surface"] for r in rows]
    return surfaces, x, labels, gold


def normalized_operator(x, k, sigma):
    m = len(x)
    d2 = ((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
    a = np.exp(-d2 / (2 * sigma * sigma))
    np.fill_diagonal(a, 0.0)
    knn = np.zeros_like(a)
    for i in range(m):
        order = sorted((j for j in range(m) if j != i), key=lambda j: (-a[i, j], j))
        for j in order[:k]:
            knn[i, j] = a[i, j]
    w = np.maximum(knn, knn.T)
    d = w.sum(axis=1)
    assert (d > 0).all(), "isolated node"
    inv = 1.0 / np.sqrt(d)
    return w * inv[:, None] * inv[None, :]


def spread(s, y0, alpha, tol, max_iter):
    y = y0.copy()
    for t in range(1, max_iter + 1):
        nxt = alpha * s @ y + (1 - alpha) * y0
        delta = np.linalg.norm(nxt - y)
        y = nxt
        if delta < tol:
            return y, t
    return y, max_iter


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("--k", type=int, required=True)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--alpha", type=float, default=0.2)
    ap.add_argument("--tol", type=float, default=1e-4)
    ap.add_argument("--max-iter", type=int, default=700)
    ap.add_argument("--metrics", action="store_true")
    args = ap.parse_args()

    surfaces, x, labels, gold = load(args.csv)
    s = normalized_operator(x, args.k, args.sigma)
    y0 = np.zeros((len(x), 2))
    for i, l in enumerate(labels):
        if l >= 0:
            y0[i, l] = 1.0
    y, iters = spread(s, y0, args.alpha, args.tol, args.max_iter)
    closed = (1 - args.alpha) * np.linalg.solve(np.eye(len(x)) - args.alpha * s, y0)
    assert np.abs(closed - spread(s, y0, args.alpha, 1e-12, 100000)[0]).max() < 1e-9

    pred = np.where(labels >= 0, labels, (y[:, 1] > y[:, 0]).astype(int))
    if args.metrics:
        test = labels < 0
        tp = int(((pred == 1) & (gold == 1) & test).sum())
        fp = int(((pred == 1) & (gold == 0) & test).sum())
        tn = int(((pred == 0) & (gold == 0) & test).sum())
        fn = int(((pred == 0) & (gold == 1) & test).sum())
        total = tp + fp + tn + fn
        print(f"iterations {iters}")
        print(f"tp {tp} fp {fp} tn {tn} fn {fn}")
        print(f"precision {tp / (tp + fp) if tp + fp else 0.0!r}")
        print(f"recall {tp / (tp + fn) if tp + fn else 0.0!r}")
        print(f"accuracy {(tp + tn) / total!r}")
    else:
        for surf, p in zip(surfaces, pred):
            if p == 1:
                print(surf)


if __name__ == "__main__":
    main()
