#!/usr/bin/env python3
"""Variance-ratio trend experiment.

Estimates the order-2 cumulant of the pattern count on complete binary
trees over a height sweep and reports kappa_2_hat / (D * upsilon), the
quantity that should drift toward 1 as the tree grows.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

import treepatterns as tp
from treepatterns.mc import k_statistics
from treepatterns.patterns import count_occurrences_batch


def ratio_at_height(alpha, h, samples, seed, batch=4000, bootstrap=200):
    tree = tp.make_complete_binary_tree(h)
    rng = np.random.default_rng(seed)
    counts = np.empty(samples, dtype=np.int64)
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        labels = np.argsort(rng.random((m, tree.n)), axis=1).astype(np.int64) + 1
        counts[done : done + m] = count_occurrences_batch(tree, alpha, labels)
        done += m
    k2 = float(k_statistics(counts, 2)[1])
    brng = np.random.default_rng(seed + 1)
    boots = [
        float(k_statistics(counts[brng.integers(0, samples, samples)], 2)[1])
        for _ in range(bootstrap)
    ]
    se = float(np.std(boots, ddof=1))
    denom = float(tp.d_constant(alpha, 2)) * tp.upsilon(tree, 2, alpha.k)
    return {"height": h, "n": tree.n, "k2": k2, "se": se,
            "ratio": k2 / denom, "ratio_se": se / denom}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", default="321")
    ap.add_argument("--heights", default="7,9,11")
    ap.add_argument("--samples", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true")
    ap.add_argument("--csv", action="store_true")
    args = ap.parse_args()

    alpha = tp.Pattern.parse(args.alpha)
    rows = []
    if args.csv:
        print("alpha,height,n,samples,seed,k2,se,ratio,ratio_se")
    for h in (int(x) for x in args.heights.split(",")):
        t0 = time.time()
        row = ratio_at_height(alpha, h, args.samples, args.seed + h)
        row["seconds"] = round(time.time() - t0, 1)
        rows.append(row)
        if args.csv:
            print(f"{alpha},{row['height']},{row['n']},{args.samples},{args.seed + h},"
                  f"{row['k2']:.10g},{row['se']:.6g},{row['ratio']:.8g},{row['ratio_se']:.4g}")
        elif not args.json:
            print(f"height {row['height']:2d} (n={row['n']}): "
                  f"ratio {row['ratio']:.4f} +- {row['ratio_se']:.4f} "
                  f"[{row['seconds']}s]")
    if args.json:
        print(json.dumps({"alpha": str(alpha), "samples": args.samples,
                          "seed": args.seed, "rows": rows}, indent=2))


if __name__ == "__main__":
    main()
