#!/usr/bin/env python3
"""Embedding-count scaling experiment on complete binary trees.

For each digraph, prints the exact embedding count per height together
with the count normalized by n^|A0| (ln n)^|A1|; the normalized column
staying inside a narrow band is the scaling law under test.
"""

from __future__ import annotations

import argparse
import math

from treepatterns import diamond, directed_path, make_complete_binary_tree, star, star_count_formula
from treepatterns.digraphs import classify_vertices, embedding_count_sink_profile


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--min-height", type=int, default=6)
    ap.add_argument("--max-height", type=int, default=12)
    ap.add_argument("--csv", action="store_true")
    args = ap.parse_args()

    graphs = {
        "path3": directed_path(3),
        "path4": directed_path(4),
        "star32": star(3, 2),
        "star22": star(2, 2),
        "diamond": diamond(),
    }
    if args.csv:
        print("graph,height,n,count,normalized")
    for name, g in graphs.items():
        cls = classify_vertices(g)
        rows = []
        for h in range(args.min_height, args.max_height + 1):
            t = make_complete_binary_tree(h)
            if name == "star32":
                cnt = star_count_formula(t, 3, 2)
            else:
                cnt = embedding_count_sink_profile(g, t)
            norm = cnt / (t.n ** len(cls.a0) * math.log(t.n) ** len(cls.a1))
            rows.append((h, t.n, cnt, norm))
            if args.csv:
                print(f"{name},{h},{t.n},{cnt},{norm:.6g}")
        if not args.csv:
            print(f"{name}: |A0|={len(cls.a0)} |A1|={len(cls.a1)} |A2|={len(cls.a2)}")
            for h, n, cnt, norm in rows:
                print(f"  height {h:2d}  n {n:5d}  count {cnt:16d}  normalized {norm:.5f}")
            spread = max(r[3] for r in rows) / min(r[3] for r in rows)
            print(f"  band spread: {spread:.3f}")


if __name__ == "__main__":
    main()
