"""Command-line surface: one subcommand per library operation.

Exit codes: 0 success, 1 validation/usage failure, 2 infeasibility
refusal.  Every command that consumes randomness records the resolved
seed in its output, and ``--json`` output embeds the full resolved
configuration so a run can be reproduced from its own artifact.

A config file (``--config FILE``) is a flat JSON object whose keys match
option names; explicit flags override config values, which override
defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from fractions import Fraction

from . import constants, digraphs, mc, patterns, splitgen, treeparams, verify
from .errors import Infeasible, InvalidInput
from .patterns import Pattern
from .trees import RootedTree, make_complete_binary_tree, make_path, tree_from_json


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt_float(x: float) -> str:
    return f"{x:.12g}"


def _fmt_value(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return _fmt_float(v)
    return v


def _load_tree(path: str):
    with open(path) as f:
        text = f.read()
    tree, bags, meta = tree_from_json(text)
    if bags is not None and meta is not None:
        return splitgen.split_tree_from_json(text)
    return tree


def _node_tree(t) -> RootedTree:
    return t.tree if isinstance(t, splitgen.SplitTree) else t


def _emit(args, doc: dict, text_lines: list[str]) -> None:
    if getattr(args, "json", False):
        payload = json.dumps(doc, indent=2, default=_fmt_value)
    elif getattr(args, "csv", False) and "csv" in doc:
        payload = doc["csv"]
    else:
        payload = "\n".join(text_lines)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as f:
            f.write(payload + "\n")
    else:
        print(payload)


def _resolved_config(args, keys: list[str]) -> dict:
    return {k: _fmt_value(getattr(args, k, None)) for k in keys}


# ---------------------------------------------------------------------------
# command implementations


def _cmd_tree_gen(args) -> int:
    kind = args.kind
    seed = args.seed if args.seed is not None else 0
    if kind == "complete":
        tree = make_complete_binary_tree(args.height)
        doc = tree.to_json()
    elif kind == "path":
        tree = make_path(args.length)
        doc = tree.to_json()
    elif kind in ("split-trickle", "split-multinomial"):
        params = splitgen.SplitParams(
            b=args.b, s=args.s, s0=args.s0, s1=args.s1,
            law=splitgen.law_from_spec(args.dist),
        )
        gen = (splitgen.generate_trickle_down if kind == "split-trickle"
               else splitgen.generate_multinomial)
        st = gen(params, args.balls, seed)
        doc = st.to_json()
    else:
        raise InvalidInput(f"unknown tree kind {kind!r}")
    if args.out:
        with open(args.out, "w") as f:
            f.write(doc + "\n")
    else:
        print(doc)
    return 0


def _cmd_tree_show(args) -> int:
    t = _load_tree(args.tree)
    tree = _node_tree(t)
    lines = [
        f"nodes: {tree.n}",
        f"height: {tree.height}",
        f"total path length: {treeparams.total_path_length(tree)}",
    ]
    doc = {"nodes": tree.n, "height": tree.height,
           "total_path_length": treeparams.total_path_length(tree)}
    if isinstance(t, splitgen.SplitTree):
        lines.append(f"balls: {t.n_balls}")
        doc["balls"] = t.n_balls
        doc["params"] = json.loads(t.to_json())["meta"]
    _emit(args, doc, lines)
    return 0


def _cmd_param(args) -> int:
    tree = _node_tree(_load_tree(args.tree))
    if args.action == "upsilon":
        mode = args.mode or "with_repetition"
        val = treeparams.upsilon(tree, args.r, args.k, mode=mode)
        doc = {"upsilon": str(val), "r": args.r, "k": args.k, "mode": mode}
        _emit(args, doc, [str(val)])
    elif args.action == "tpl":
        val = treeparams.total_path_length(tree)
        _emit(args, {"total_path_length": str(val)}, [str(val)])
    elif args.action == "ancestor-tail":
        val = treeparams.ancestor_tail(tree, args.ell)
        _emit(args, {"ancestor_tail": str(val), "ell": args.ell}, [str(val)])
    return 0


def _cmd_pattern(args) -> int:
    t = _load_tree(args.tree)
    alpha = Pattern.parse(args.alpha)
    if args.action == "count":
        n = t.n_balls if isinstance(t, splitgen.SplitTree) else t.n
        if args.labels:
            with open(args.labels) as f:
                labelling = json.load(f)
        else:
            labelling = patterns.sample_labelling(n, seed=args.seed or 0).tolist()
        val = patterns.count_occurrences(t, alpha, labelling)
        doc = {"count": val, "alpha": str(alpha), "seed": args.seed or 0,
               "labels_file": args.labels}
        _emit(args, doc, [str(val)])
    elif args.action == "mean":
        val = patterns.expected_occurrences(t, alpha)
        _emit(args, {"mean": str(val), "alpha": str(alpha)}, [str(val)])
    elif args.action == "dist":
        cap = args.max_universe or patterns.DEFAULT_UNIVERSE_CAP
        pmf = patterns.exact_distribution(t, alpha, max_universe=cap)
        lines = [f"{x}: {p}" for x, p in pmf.items()]
        _emit(args, {"pmf": {str(x): str(p) for x, p in pmf.items()}, "alpha": str(alpha)}, lines)
    return 0


def _parse_digraph(args) -> digraphs.Digraph:
    chosen = [bool(args.digraph), bool(args.star), bool(args.path), bool(args.diamond)]
    if sum(chosen) != 1:
        raise InvalidInput("choose exactly one of --digraph/--star/--path/--diamond")
    if args.digraph:
        with open(args.digraph) as f:
            return digraphs.digraph_from_edge_text(f.read())
    if args.star:
        k, r = (int(x) for x in args.star.split(","))
        return digraphs.star(k, r)
    if args.path:
        return digraphs.directed_path(int(args.path))
    return digraphs.diamond()


def _cmd_embed(args) -> int:
    if args.action == "count":
        g = _parse_digraph(args)
        t = _load_tree(args.tree)
        cls = digraphs.classify_vertices(g)
        val = digraphs.embedding_count(g, t)
        doc = {"count": str(val), "a0": len(cls.a0), "a1": len(cls.a1), "a2": len(cls.a2)}
        _emit(args, doc, [str(val)])
    elif args.action == "enumerate":
        fam = digraphs.enumerate_fused_paths(args.k, args.r, args.variant or "labelled")
        lines = [f"members: {len(fam)}"]
        for i, g in enumerate(fam.members):
            lines.append(f"[{i}] n={g.n} edges={sorted(g.edges)}")
        doc = {"k": fam.k, "r": fam.r, "variant": fam.variant, "count": len(fam),
               "members": [{"n": g.n, "edges": sorted(g.edges)} for g in fam.members]}
        _emit(args, doc, lines)
    return 0


def _cmd_const(args) -> int:
    if args.action == "d":
        alpha = Pattern.parse(args.alpha)
        val = constants.d_constant(alpha, args.r)
        _emit(args, {"d": str(val), "alpha": str(alpha), "r": args.r}, [str(val)])
    elif args.action == "a":
        val = constants.star_label_probability(args.k, args.alpha1, args.ell)
        _emit(args, {"a": str(val)}, [str(val)])
    elif args.action == "bernoulli":
        val = constants.bernoulli(args.r)
        _emit(args, {"bernoulli": str(val), "r": args.r}, [str(val)])
    elif args.action == "table":
        rows = constants.d_table(args.max_len or 6, args.max_r or 5)
        header = "k,alpha1_class,r,rational,factored"
        csv_lines = [header]
        text_lines = []
        for row in rows:
            cls = "|".join(map(str, row.alpha1_class))
            csv_lines.append(f"{row.k},{cls},{row.r},{row.value},{row.factored}")
            text_lines.append(f"k={row.k} a1 in {{{cls}}} r={row.r}: {row.value}  [{row.factored}]")
        doc = {
            "rows": [
                {"k": r.k, "alpha1_class": list(r.alpha1_class), "r": r.r,
                 "rational": str(r.value), "factored": r.factored}
                for r in rows
            ],
            "csv": "\n".join(csv_lines),
        }
        _emit(args, doc, text_lines if not args.csv else ["\n".join(csv_lines)])
    return 0


def _cmd_mc(args) -> int:
    t = _load_tree(args.tree)
    alpha = Pattern.parse(args.alpha)
    seed = args.seed if args.seed is not None else 0
    samples = args.samples or 1000
    if args.action == "cumulants":
        max_r = args.max_r or 4
        ests = mc.estimate_cumulants(t, alpha, max_r, samples, seed)
        lines = [
            f"r={e.order}: {_fmt_float(e.estimate)} +- {_fmt_float(e.standard_error)}"
            f" ({e.estimator}, {e.sample_count} samples)"
            for e in ests
        ]
        doc = {"alpha": str(alpha), "samples": samples, "seed": seed,
               "estimates": [asdict(e) for e in ests]}
        _emit(args, doc, lines)
    elif args.action == "ratio":
        r = args.r or 2
        ests = mc.estimate_cumulants(t, alpha, r, samples, seed)
        ratio = mc.theorem_ratio(t, alpha, r, ests[r - 1])
        tree_meta = {"nodes": _node_tree(t).n}
        if isinstance(t, splitgen.SplitTree):
            tree_meta["balls"] = t.n_balls
        doc = {
            "tree_meta": tree_meta,
            "alpha": str(alpha),
            "r": r,
            "estimate": ests[r - 1].estimate,
            "se": ests[r - 1].standard_error,
            "samples": samples,
            "seed": seed,
            "upsilon": str(ratio.upsilon),
            "d_constant": str(ratio.d_value),
            "ratio": ratio.ratio,
            "ratio_undefined": ratio.d_zero,
            "kappa_over_upsilon": ratio.kappa_over_upsilon,
        }
        if ratio.d_zero:
            lines = [
                "ratio undefined: the cumulant coefficient is 0 for this (alpha, r);"
                f" kappa_hat/upsilon = {_fmt_float(ratio.kappa_over_upsilon)}"
            ]
        else:
            lines = [f"ratio = {_fmt_float(ratio.ratio)}"]
        _emit(args, doc, lines)
    return 0


_VERIFY_KEYS = ("trees", "max_r", "k", "r", "n", "seeds", "max_nodes", "max_len")


def _cmd_verify(args) -> int:
    kwargs = {}
    for key in _VERIFY_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            kwargs[key] = val
    if getattr(args, "tree", None):
        if args.suite != "thm1":
            raise InvalidInput("--tree applies to the thm1 suite only")
        kwargs["tree"] = _node_tree(_load_tree(args.tree))
    report = verify.run_suite(args.suite, **kwargs)
    lines = [f"suite {report['suite']}: {'PASS' if report['passed'] else 'FAIL'}"]
    for c in report["checks"]:
        mark = "ok" if c["passed"] else "FAIL"
        lines.append(f"  [{mark}] {c['name']}: observed {c['observed']} expected {c['expected']}")
    _emit(args, report, lines)
    return 0 if report["passed"] else 1


# ---------------------------------------------------------------------------
# parser assembly


def _build_parser() -> _Parser:
    p = _Parser(prog="treepat", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON document")
    common.add_argument("--csv", action="store_true", help="emit CSV where supported")
    common.add_argument("--out", help="write output to a file instead of stdout")
    common.add_argument("--seed", type=int, help="seed for randomized operations (default 0)")
    common.add_argument("--threads", type=int, help="cap internal parallelism (recorded; results never depend on it)")
    common.add_argument("--config", help="flat JSON config file; flags override its keys")

    sub = p.add_subparsers(dest="group", required=True)

    tree = sub.add_parser("tree", help="generate and inspect trees")
    tsub = tree.add_subparsers(dest="action", required=True)
    tg = tsub.add_parser("gen", parents=[common])
    tg.add_argument("--kind", required=True,
                    choices=["complete", "path", "split-trickle", "split-multinomial"])
    tg.add_argument("--height", type=int)
    tg.add_argument("--length", type=int)
    tg.add_argument("--balls", type=int)
    tg.add_argument("--b", type=int, default=2)
    tg.add_argument("--s", type=int, default=1)
    tg.add_argument("--s0", type=int, default=1)
    tg.add_argument("--s1", type=int, default=0)
    tg.add_argument("--dist", default="bst", help='bst | dirichlet(a) | fixed(p1,p2,...)')
    tg.set_defaults(fn=_cmd_tree_gen)
    ts = tsub.add_parser("show", parents=[common])
    ts.add_argument("--tree", required=True)
    ts.set_defaults(fn=_cmd_tree_show)

    param = sub.add_parser("param", help="tree parameters")
    psub = param.add_subparsers(dest="action", required=True)
    pu = psub.add_parser("upsilon", parents=[common])
    pu.add_argument("--tree", required=True)
    pu.add_argument("--r", type=int, required=True)
    pu.add_argument("--k", type=int, required=True)
    pu.add_argument("--mode", choices=["with_repetition", "distinct"])
    pu.set_defaults(fn=_cmd_param)
    pt = psub.add_parser("tpl", parents=[common])
    pt.add_argument("--tree", required=True)
    pt.set_defaults(fn=_cmd_param)
    pa = psub.add_parser("ancestor-tail", parents=[common])
    pa.add_argument("--tree", required=True)
    pa.add_argument("--ell", type=int, required=True)
    pa.set_defaults(fn=_cmd_param)

    pat = sub.add_parser("pattern", help="pattern occurrence statistics")
    patsub = pat.add_subparsers(dest="action", required=True)
    pc = patsub.add_parser("count", parents=[common])
    pc.add_argument("--tree", required=True)
    pc.add_argument("--alpha", required=True)
    pc.add_argument("--labels", help="JSON file with an explicit labelling")
    pc.set_defaults(fn=_cmd_pattern)
    pm = patsub.add_parser("mean", parents=[common])
    pm.add_argument("--tree", required=True)
    pm.add_argument("--alpha", required=True)
    pm.set_defaults(fn=_cmd_pattern)
    pd = patsub.add_parser("dist", parents=[common])
    pd.add_argument("--tree", required=True)
    pd.add_argument("--alpha", required=True)
    pd.add_argument("--max-universe", type=int, dest="max_universe")
    pd.set_defaults(fn=_cmd_pattern)

    emb = sub.add_parser("embed", help="digraph embedding counts")
    esub = emb.add_subparsers(dest="action", required=True)
    ec = esub.add_parser("count", parents=[common])
    ec.add_argument("--tree", required=True)
    ec.add_argument("--digraph", help="edge-list file, one 'u v' per line")
    ec.add_argument("--star", help="K,R")
    ec.add_argument("--path", help="K")
    ec.add_argument("--diamond", action="store_true")
    ec.set_defaults(fn=_cmd_embed)
    ee = esub.add_parser("enumerate", parents=[common])
    ee.add_argument("--k", type=int, required=True)
    ee.add_argument("--r", type=int, required=True)
    ee.add_argument("--variant",
                    choices=["labelled", "unlabelled", "connected", "connectedOnly", "familyF"])
    ee.set_defaults(fn=_cmd_embed)

    con = sub.add_parser("const", help="exact rational constants")
    csub = con.add_subparsers(dest="action", required=True)
    cd = csub.add_parser("d", parents=[common])
    cd.add_argument("--alpha", required=True)
    cd.add_argument("--r", type=int, required=True)
    cd.set_defaults(fn=_cmd_const)
    ca = csub.add_parser("a", parents=[common])
    ca.add_argument("--k", type=int, required=True)
    ca.add_argument("--alpha1", type=int, required=True)
    ca.add_argument("--ell", type=int, required=True)
    ca.set_defaults(fn=_cmd_const)
    cb = csub.add_parser("bernoulli", parents=[common])
    cb.add_argument("--r", type=int, required=True)
    cb.set_defaults(fn=_cmd_const)
    ct = csub.add_parser("table", parents=[common])
    ct.add_argument("--max-len", type=int, dest="max_len")
    ct.add_argument("--max-r", type=int, dest="max_r")
    ct.set_defaults(fn=_cmd_const)

    mcp = sub.add_parser("mc", help="Monte Carlo cumulant estimation")
    msub = mcp.add_subparsers(dest="action", required=True)
    mcu = msub.add_parser("cumulants", parents=[common])
    mcu.add_argument("--tree", required=True)
    mcu.add_argument("--alpha", required=True)
    mcu.add_argument("--max-r", type=int, dest="max_r")
    mcu.add_argument("--samples", type=int)
    mcu.set_defaults(fn=_cmd_mc)
    mcr = msub.add_parser("ratio", parents=[common])
    mcr.add_argument("--tree", required=True)
    mcr.add_argument("--alpha", required=True)
    mcr.add_argument("--r", type=int)
    mcr.add_argument("--samples", type=int)
    mcr.set_defaults(fn=_cmd_mc)

    ver = sub.add_parser("verify", help="named verification suites", parents=[common])
    ver.add_argument("suite", choices=sorted(verify.SUITES))
    ver.add_argument("--tree", help="tree file (thm1 suite)")
    ver.add_argument("--trees", type=int)
    ver.add_argument("--max-r", type=int, dest="max_r")
    ver.add_argument("--k", type=int)
    ver.add_argument("--r", type=int)
    ver.add_argument("--n", type=int)
    ver.add_argument("--seeds", type=int)
    ver.add_argument("--max-nodes", type=int, dest="max_nodes")
    ver.add_argument("--max-len", type=int, dest="max_len")
    ver.set_defaults(fn=_cmd_verify)

    return p


def _apply_config(args) -> None:
    path = getattr(args, "config", None)
    if not path:
        return
    with open(path) as f:
        cfg = json.load(f)
    if not isinstance(cfg, dict):
        raise InvalidInput("config file must be a flat JSON object")
    for key, val in cfg.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) in (None, False):
            setattr(args, attr, val)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config(args)
        return args.fn(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except InvalidInput as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Infeasible as e:
        print(f"refused: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
