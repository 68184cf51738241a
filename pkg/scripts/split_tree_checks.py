#!/usr/bin/env python3
"""Split-tree simulation experiments.

Three experiments over the binary-search-tree parameter preset:
  depths     -- fraction of nodes inside the (1/|mu|) ln n depth window
  pair-bound -- empirical shared-ancestry tail of a fixed ball pair
                against the (E sum V_i^2)^ell = (2/3)^ell envelope
  agreement  -- chi-square comparison of root-children subtree sizes
                between the trickle-down and multinomial generators
"""

from __future__ import annotations

import argparse
import math

import numpy as np

import treepatterns as tp
from treepatterns.verify import chi_square_two_sample, _root_child_sizes


def cmd_depths(args) -> None:
    params = tp.bst_params()
    center = 2.0 * math.log(args.n)
    window = math.log(args.n) ** 0.6
    print(f"n={args.n}: depth window {center:.2f} +- {window:.2f}")
    for i in range(args.trees):
        st = tp.generate_trickle_down(params, args.n, args.seed + i)
        depths = np.asarray(st.tree.depth)
        frac = float(np.mean(np.abs(depths - center) <= window))
        print(f"  seed {args.seed + i}: mean depth {depths.mean():.2f} "
              f"sd {depths.std():.2f} in-window fraction {frac:.4f}")


def cmd_pair_bound(args) -> None:
    params = tp.bst_params()
    balls = [args.n - 1, args.n]
    hits = np.zeros(args.max_ell + 1, dtype=np.int64)
    for i in range(args.trees):
        st = tp.generate_trickle_down(params, args.n, args.seed + i)
        c = st.ball_common_ancestors(balls)
        for ell in range(1, args.max_ell + 1):
            if c >= ell + 1:
                hits[ell] += 1
    rho = float(tp.same_child_probability_bound(params))
    print(f"balls {balls}, {args.trees} trees, envelope base {rho:.4f}")
    for ell in range(1, args.max_ell + 1):
        phat = hits[ell] / args.trees
        se = math.sqrt(max(phat * (1 - phat), 1e-12) / args.trees)
        print(f"  ell={ell}: P[c >= {ell + 1}] = {phat:.4f} (se {se:.4f})"
              f"  envelope {rho ** ell:.4f}")


def cmd_agreement(args) -> None:
    params = tp.bst_params()
    a = _root_child_sizes(tp.generate_trickle_down, params, args.n, args.trees, args.seed)
    b = _root_child_sizes(tp.generate_multinomial, params, args.n, args.trees,
                          args.seed + args.trees)
    stat, dof, p = chi_square_two_sample(a, b)
    print(f"two-sample chi-square: stat {stat:.3f} dof {dof} p-value {p:.4f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("depths")
    d.add_argument("--n", type=int, default=100_000)
    d.add_argument("--trees", type=int, default=5)
    d.add_argument("--seed", type=int, default=1000)
    d.set_defaults(fn=cmd_depths)

    pb = sub.add_parser("pair-bound")
    pb.add_argument("--n", type=int, default=1000)
    pb.add_argument("--trees", type=int, default=2000)
    pb.add_argument("--max-ell", type=int, default=6)
    pb.add_argument("--seed", type=int, default=12_000)
    pb.set_defaults(fn=cmd_pair_bound)

    ag = sub.add_parser("agreement")
    ag.add_argument("--n", type=int, default=50)
    ag.add_argument("--trees", type=int, default=2000)
    ag.add_argument("--seed", type=int, default=500)
    ag.set_defaults(fn=cmd_agreement)

    args = ap.parse_args()
    args.fn(args)


if __name__ == "__main__":
    main()
