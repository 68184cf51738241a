"""Named verification suites.

Each suite returns a machine-readable report dict:

    {"suite": ..., "passed": bool, "config": {...}, "checks": [
        {"name": ..., "passed": bool, "observed": ..., "expected": ...,
         "tolerance": ...}, ...]}

Exact checks carry tolerance 0 and serialize values as strings; the
statistical suites record their seeds and sample counts so a report can
be reproduced byte-for-byte.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import constants, digraphs, mc, splitgen, treeparams
from .errors import InvalidInput
from .patterns import Pattern
from .trees import RootedTree, make_complete_binary_tree, random_tree

# Reference values for the cumulant coefficients D[k, alpha1-class, r],
# k = 2..6, r = 1..5, cross-checked by hand against the defining formula.
# The table suite asserts d_table reproduces all 55 entries bit-exactly.
REFERENCE_D_TABLE: dict[tuple[int, tuple[int, ...], int], Fraction] = {}


def _ref(k, cls, entries):
    for r, val in enumerate(entries, start=1):
        REFERENCE_D_TABLE[(k, cls, r)] = Fraction(val)


_ref(2, (1, 2), [Fraction(1, 2), Fraction(1, 2**2 * 3), 0, Fraction(-1, 2**3 * 3 * 5), 0])
_ref(3, (1, 3), [
    Fraction(1, 2 * 3),
    Fraction(1, 3**2 * 5),
    Fraction(2, 3**3 * 5 * 7),
    Fraction(-2, 3**3 * 5**2 * 7),
    Fraction(-(2**3), 3**4 * 5 * 7 * 11),
])
_ref(3, (2,), [
    Fraction(1, 2 * 3),
    Fraction(1, 2**2 * 3**2 * 5),
    Fraction(-1, 2**2 * 3**3 * 5 * 7),
    Fraction(-1, 2**3 * 3**3 * 5**2 * 7),
    Fraction(1, 2**2 * 3**4 * 5 * 7 * 11),
])
_ref(4, (1, 4), [
    Fraction(1, 2**3 * 3),
    Fraction(1, 2**6 * 7),
    Fraction(1, 2**8 * 5 * 7),
    Fraction(-3, 2**11 * 5 * 7**2 * 13),
    Fraction(-3, 2**12 * 7**2 * 13),
])
_ref(4, (2, 3), [
    Fraction(1, 2**3 * 3),
    Fraction(13, 2**6 * 3**2 * 5 * 7),
    Fraction(-1, 2**8 * 3**3 * 5 * 7),
    Fraction(-5591, 2**11 * 3**3 * 5**2 * 7**2 * 11 * 13),
    Fraction(199, 2**12 * 3**4 * 5 * 7**2 * 11 * 13),
])
_ref(5, (1, 5), [
    Fraction(1, 2**3 * 3 * 5),
    Fraction(1, 2**2 * 3**4 * 5**2),
    Fraction(1, 2**2 * 3**4 * 5**3 * 13),
    Fraction(29, 2**3 * 3**7 * 5**4 * 13 * 17),
    Fraction(-107, 2**2 * 3**8 * 5**5 * 7 * 13 * 17),
])
_ref(5, (2, 4), [
    Fraction(1, 2**3 * 3 * 5),
    Fraction(37, 2**6 * 3**4 * 5**2 * 7),
    Fraction(53, 2**8 * 3**4 * 5**3 * 7 * 11 * 13),
    Fraction(-849839, 2**11 * 3**7 * 5**4 * 7**2 * 11 * 13 * 17),
    Fraction(-1041109, 2**12 * 3**8 * 5**5 * 7**2 * 11 * 13 * 17 * 19),
])
_ref(5, (3,), [
    Fraction(1, 2**3 * 3 * 5),
    Fraction(1, 2**6 * 3 * 5**2 * 7),
    Fraction(-19, 2**8 * 3**3 * 5**3 * 7 * 11 * 13),
    Fraction(-(73**2), 2**11 * 3**3 * 5**4 * 7**2 * 11 * 13 * 17),
    Fraction(10061, 2**12 * 3**4 * 5**5 * 7**2 * 11 * 13 * 17 * 19),
])
_ref(6, (1, 6), [
    Fraction(1, 2**4 * 3**2 * 5),
    Fraction(1, 2**8 * 3**4 * 11),
    Fraction(1, 2**13 * 3**6 * 11),
    Fraction(1, 2**14 * 3**7 * 7 * 11**2),
    Fraction(-19, 2**19 * 3**9 * 7 * 11**2 * 13),
])
_ref(6, (2, 5), [
    Fraction(1, 2**4 * 3**2 * 5),
    Fraction(1, 2**8 * 3**2 * 5**2 * 11),
    Fraction(509, 2**13 * 3**6 * 5**3 * 7 * 11 * 13),
    Fraction(-233 * 619, 2**13 * 3**7 * 5**4 * 7 * 11**2 * 13 * 17 * 19),
    Fraction(-18928549, 2**19 * 3**9 * 5**5 * 7 * 11**2 * 13 * 17 * 19 * 23),
])
_ref(6, (3, 4), [
    Fraction(1, 2**4 * 3**2 * 5),
    Fraction(43, 2**8 * 3**4 * 5**2 * 7 * 11),
    Fraction(1, 2**11 * 3**6 * 5**3 * 7 * 13),
    Fraction(-211 * 9341, 2**15 * 3**7 * 5**4 * 7**2 * 11**2 * 13 * 17 * 19),
    Fraction(-47 * 3701, 2**17 * 3**9 * 5**5 * 7**2 * 11 * 13 * 17 * 19 * 23),
])


def _report(suite: str, config: dict, checks: list[dict]) -> dict:
    return {
        "suite": suite,
        "passed": all(c["passed"] for c in checks),
        "config": config,
        "checks": checks,
    }


def _check(name, observed, expected, tolerance=0) -> dict:
    if tolerance == 0:
        passed = observed == expected
    else:
        passed = abs(observed - expected) <= tolerance
    return {
        "name": name,
        "passed": bool(passed),
        "observed": str(observed),
        "expected": str(expected),
        "tolerance": str(tolerance),
    }


def verify_table(max_len: int = 6, max_r: int = 5) -> dict:
    """Every generated D value must match the reference table exactly."""
    rows = constants.d_table(max_len, max_r)
    checks = []
    for row in rows:
        key = (row.k, row.alpha1_class, row.r)
        if key in REFERENCE_D_TABLE:
            checks.append(
                _check(f"D[k={row.k},a1={row.alpha1_class},r={row.r}]", row.value,
                       REFERENCE_D_TABLE[key])
            )
    expected_n = sum(1 for (k, _, r) in REFERENCE_D_TABLE if k <= max_len and r <= max_r)
    checks.append(_check("entry-count", len(checks), expected_n))
    return _report("table", {"max_len": max_len, "max_r": max_r}, checks)


def verify_thm1(tree: RootedTree | None = None, max_r: int = 4, trees: int = 50,
                max_nodes: int = 8, seed: int = 2024) -> dict:
    """Exact-enumeration cumulants of the inversion count against the
    Bernoulli/upsilon closed form, order by order."""
    rng = np.random.default_rng(seed)
    pool = [tree] if tree is not None else [
        random_tree(int(rng.integers(2, max_nodes + 1)), rng) for _ in range(trees)
    ]
    alpha = Pattern((2, 1))
    checks = []
    for i, t in enumerate(pool):
        exact = mc.exact_cumulants(t, alpha, max_r)
        for r in range(2, max_r + 1):
            closed = constants.inversion_cumulant_exact(t, r)
            checks.append(_check(f"tree{i}(n={t.n}) r={r}", exact[r - 1], closed))
    return _report("thm1", {"max_r": max_r, "trees": len(pool), "seed": seed}, checks)


def verify_star_identity(k: int = 3, r: int = 2, trees: int = 50, max_nodes: int = 30,
                         seed: int = 77) -> dict:
    """Sum of embedding counts over the decomposition family equals the
    distinct-mode upsilon parameter, exactly, tree by tree."""
    fam = digraphs.enumerate_fused_paths(k, r, "familyF")
    rng = np.random.default_rng(seed)
    checks = []
    for i in range(trees):
        t = random_tree(int(rng.integers(2, max_nodes + 1)), rng)
        total = sum(digraphs.embedding_count(g, t) for g in fam.members)
        ups = treeparams.upsilon(t, r, k, mode="distinct")
        checks.append(_check(f"tree{i}(n={t.n})", total, ups))
    return _report(
        "star-identity",
        {"k": k, "r": r, "trees": trees, "max_nodes": max_nodes, "seed": seed,
         "family_size": len(fam)},
        checks,
    )


def verify_embed_scaling(heights: tuple[int, ...] = (6, 7, 8, 9, 10, 11, 12),
                         band: float = 3.0) -> dict:
    """Normalized embedding counts stay in a multiplicative band across heights."""
    graphs = {
        "path3": digraphs.directed_path(3),
        "star32": digraphs.star(3, 2),
        "diamond": digraphs.diamond(),
    }
    checks = []
    ratio_table: dict[str, list[float]] = {}
    for name, g in graphs.items():
        cls = digraphs.classify_vertices(g)
        ratios = []
        for h in heights:
            t = make_complete_binary_tree(h)
            if name == "star32":
                cnt = digraphs.star_count_formula(t, 3, 2)
            else:
                cnt = digraphs.embedding_count_sink_profile(g, t)
            norm = t.n ** len(cls.a0) * math.log(t.n) ** len(cls.a1)
            ratios.append(cnt / norm)
        ratio_table[name] = ratios
        spread = max(ratios) / min(ratios)
        checks.append(
            {"name": f"{name} band", "passed": spread < band,
             "observed": f"{spread:.6g}", "expected": f"< {band}",
             "tolerance": "multiplicative band",
             "ratios": [f"{x:.6g}" for x in ratios]}
        )
    return _report("embed-scaling", {"heights": list(heights), "band": band}, checks)


def verify_split_good_nodes(n: int = 100_000, seeds: int = 20, threshold: float = 0.9,
                            required: int = 19, seed0: int = 1000) -> dict:
    """Fraction of nodes within the depth window around (1/|mu|) ln n."""
    params = splitgen.bst_params()
    center = 2.0 * math.log(n)  # |mu| = 1/2 for the bst law
    window = math.log(n) ** 0.6
    fractions = []
    for i in range(seeds):
        st = splitgen.generate_trickle_down(params, n, seed0 + i)
        depths = np.asarray(st.tree.depth)
        fractions.append(float(np.mean(np.abs(depths - center) <= window)))
    hits = sum(1 for f in fractions if f >= threshold)
    checks = [
        {"name": f"good-node fraction >= {threshold} in >= {required}/{seeds} trees",
         "passed": hits >= required,
         "observed": f"{hits}/{seeds} trees passed; fractions {['%.4f' % f for f in fractions]}",
         "expected": f">= {required}/{seeds}",
         "tolerance": f"center {center:.3f}, window {window:.3f}"}
    ]
    return _report(
        "split-good-nodes",
        {"n": n, "seeds": seeds, "threshold": threshold, "required": required, "seed0": seed0},
        checks,
    )


def chi_square_two_sample(a: np.ndarray, b: np.ndarray, min_expected: float = 5.0):
    """Two-sample chi-square over pooled categories (pooled tails so every
    cell's pooled count is >= min_expected).  Returns (stat, dof, pvalue)."""
    from scipy.stats import chi2

    hi = int(max(a.max(), b.max())) + 1
    ca = np.bincount(a, minlength=hi).astype(float)
    cb = np.bincount(b, minlength=hi).astype(float)
    cells_a, cells_b = [], []
    acc_a = acc_b = 0.0
    for i in range(hi):
        acc_a += ca[i]
        acc_b += cb[i]
        if acc_a + acc_b >= 2 * min_expected:
            cells_a.append(acc_a)
            cells_b.append(acc_b)
            acc_a = acc_b = 0.0
    if acc_a or acc_b:
        if cells_a:
            cells_a[-1] += acc_a
            cells_b[-1] += acc_b
        else:
            cells_a, cells_b = [acc_a], [acc_b]
    ka = np.asarray(cells_a)
    kb = np.asarray(cells_b)
    na, nb = ka.sum(), kb.sum()
    if len(ka) < 2:
        raise InvalidInput("chi-square needs at least two pooled categories")
    # standard two-sample statistic with sample-size weights
    k1 = math.sqrt(nb / na)
    k2 = math.sqrt(na / nb)
    with np.errstate(invalid="ignore"):
        terms = (k1 * ka - k2 * kb) ** 2 / (ka + kb)
    stat = float(np.nansum(terms))
    dof = len(ka) - 1
    return stat, dof, float(chi2.sf(stat, dof))


def verify_generator_agreement(n: int = 50, trees: int = 10_000, alpha: float = 0.01,
                               seed0: int = 500) -> dict:
    """Root-children subtree sizes: trickle-down vs multinomial, chi-square."""
    params = splitgen.bst_params()
    a = _root_child_sizes(splitgen.generate_trickle_down, params, n, trees, seed0)
    b = _root_child_sizes(splitgen.generate_multinomial, params, n, trees, seed0 + trees)
    stat, dof, p = chi_square_two_sample(a, b)
    checks = [
        {"name": f"chi-square p-value > {alpha}", "passed": p > alpha,
         "observed": f"stat={stat:.4f} dof={dof} p={p:.6f}", "expected": f"p > {alpha}",
         "tolerance": f"significance {alpha}"}
    ]
    return _report(
        "generator-agreement",
        {"n": n, "trees": trees, "alpha": alpha, "seed0": seed0}, checks,
    )


def _root_child_sizes(gen, params, n, trees, seed0) -> np.ndarray:
    """Ball count in the root's first child subtree (0 when pruned away)."""
    sizes = np.zeros(trees, dtype=np.int64)
    for i in range(trees):
        st = gen(params, n, seed0 + i)
        kids = st.tree.children[st.tree.root]
        if not kids:
            sizes[i] = 0
            continue
        first = kids[0]
        in_first = 0
        for v in [first] + st.tree.descendant_slice(first):
            in_first += len(st.bags[v])
        sizes[i] = in_first
    return sizes


SUITES = {
    "thm1": verify_thm1,
    "table": verify_table,
    "star-identity": verify_star_identity,
    "embed-scaling": verify_embed_scaling,
    "split-good-nodes": verify_split_good_nodes,
    "generator-agreement": verify_generator_agreement,
}


def run_suite(name: str, **kwargs) -> dict:
    if name not in SUITES:
        raise InvalidInput(f"unknown verify suite {name!r}; have {sorted(SUITES)}")
    return SUITES[name](**kwargs)
