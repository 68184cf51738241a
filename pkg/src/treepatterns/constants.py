"""Exact rational constants for the cumulant asymptotics.

Everything here is computed end-to-end in ``fractions.Fraction``; floats
never enter.  The two building blocks are the star-labelling probability

    a(k, a1, ell) = ((a1-1) ell)! ((k-a1) ell)!
                    / [ ((a1-1)! (k-a1)!)^ell ((k-1) ell + 1)! ]

(the chance that a uniform labelling of an ell-ray star of ray length k
puts every ray in the relative order of a pattern starting with a1), and
the alternating sum over set partitions of [r] that turns those joint
probabilities into the order-r cumulant coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

from .errors import Infeasible, InvalidInput
from .patterns import Pattern
from .trees import RootedTree

MAX_SET_PARTITION_R = 15
MAX_BERNOULLI = 50


def star_label_probability(k: int, alpha1: int, ell: int) -> Fraction:
    """a(k, alpha1, ell): all ``ell`` rays of the star read as the pattern."""
    if k < 2:
        raise InvalidInput("k must be >= 2")
    if not (1 <= alpha1 <= k):
        raise InvalidInput(f"alpha1 must be in 1..{k}, got {alpha1}")
    if ell < 1:
        raise InvalidInput("ell must be >= 1")
    num = math.factorial((alpha1 - 1) * ell) * math.factorial((k - alpha1) * ell)
    den = (math.factorial(alpha1 - 1) * math.factorial(k - alpha1)) ** ell
    den *= math.factorial((k - 1) * ell + 1)
    return Fraction(num, den)


def iter_set_partitions(items: Sequence) -> Iterator[list[list]]:
    """Every partition of ``items`` into nonempty blocks, exactly once."""
    if len(items) > MAX_SET_PARTITION_R:
        raise Infeasible(
            f"{len(items)} items: Bell-number growth; guard is {MAX_SET_PARTITION_R}"
        )
    items = list(items)

    def rec(rest: list):
        if not rest:
            yield []
            return
        first, tail = rest[0], rest[1:]
        for part in rec(tail):
            for i in range(len(part)):
                yield part[:i] + [[first] + part[i]] + part[i + 1 :]
            yield [[first]] + part

    return rec(items)


def bell_number(r: int) -> int:
    b = [1]
    for m in range(r):
        b.append(sum(math.comb(m, j) * b[j] for j in range(m + 1)))
    return b[r]


PatternLike = Union[Pattern, tuple[int, int]]


def _k_alpha1(alpha: PatternLike) -> tuple[int, int]:
    if isinstance(alpha, Pattern):
        return alpha.k, alpha.first
    k, a1 = alpha
    return k, a1


def d_constant(alpha: PatternLike, r: int) -> Fraction:
    """Cumulant coefficient for the pattern; depends only on (k, alpha1).

    D = sum over set partitions tau of [r] of
        (-1)^(|tau|-1) (|tau|-1)! prod_{block s} a(k, alpha1, |s|)
    """
    k, a1 = _k_alpha1(alpha)
    if r < 1:
        raise InvalidInput("r must be >= 1")
    a_cache = {}
    total = Fraction(0)
    for part in iter_set_partitions(list(range(r))):
        q = len(part)
        term = Fraction((-1) ** (q - 1) * math.factorial(q - 1))
        for block in part:
            m = len(block)
            if m not in a_cache:
                a_cache[m] = star_label_probability(k, a1, m)
            term *= a_cache[m]
        total += term
    return total


def bernoulli(r: int) -> Fraction:
    """B_r with the B_1 = -1/2 convention, by the binomial recurrence."""
    if r < 0:
        raise InvalidInput("r must be >= 0")
    if r > MAX_BERNOULLI:
        raise Infeasible(f"r = {r} exceeds the Bernoulli guard ({MAX_BERNOULLI})")
    B = [Fraction(1)]
    for m in range(1, r + 1):
        s = sum(Fraction(math.comb(m + 1, j)) * B[j] for j in range(m))
        B.append(-s / (m + 1))
    return B[r]


def inversion_cumulant_exact(tree: RootedTree, r: int) -> Fraction:
    """Exact order-r cumulant of the inversion count of a uniform labelling.

    Equals B_r (-1)^r / r * (upsilon(T; r, 2) - n) with the tuple sum taken
    over ordered r-tuples with repetition (the mode the exact-enumeration
    oracle pins down).
    """
    from .treeparams import upsilon

    if r < 2:
        raise InvalidInput("the closed form applies for r >= 2")
    ups = upsilon(tree, r, 2, mode="with_repetition")
    return bernoulli(r) * (-1) ** r / r * (ups - tree.n)


def moments_to_cumulants(moments: Sequence[Fraction]) -> list[Fraction]:
    """Raw moments m_1..m_R -> cumulants k_1..k_R (exact)."""
    if not moments:
        raise InvalidInput("need at least the first moment")
    ms = [Fraction(m) for m in moments]
    ks: list[Fraction] = []
    for r in range(1, len(ms) + 1):
        k = ms[r - 1]
        for j in range(1, r):
            k -= math.comb(r - 1, j - 1) * ks[j - 1] * ms[r - j - 1]
        ks.append(k)
    return ks


def cumulants_to_moments(cumulants: Sequence[Fraction]) -> list[Fraction]:
    if not cumulants:
        raise InvalidInput("need at least the first cumulant")
    ks = [Fraction(c) for c in cumulants]
    ms: list[Fraction] = []
    for r in range(1, len(ks) + 1):
        m = ks[r - 1]
        for j in range(1, r):
            m += math.comb(r - 1, j - 1) * ks[j - 1] * ms[r - j - 1]
        ms.append(m)
    return ms


# ---------------------------------------------------------------------------
# table of D values


@dataclass(frozen=True)
class TableRow:
    k: int
    alpha1_class: tuple[int, ...]  # {a1, k+1-a1}, sorted
    r: int
    value: Fraction

    @property
    def factored(self) -> str:
        return format_factored(self.value)


def format_factored(x: Fraction) -> str:
    """Render p/q with the denominator in prime-factorized form."""
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    num = abs(x.numerator)
    den = x.denominator
    if den == 1:
        return f"{sign}{num}"
    parts = []
    for p, e in _factorize(den):
        parts.append(f"{p}^{e}" if e > 1 else f"{p}")
    return f"{sign}{num}/({'*'.join(parts)})"


def _factorize(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def d_table(max_len: int = 6, max_r: int = 5) -> list[TableRow]:
    """One row per (k, alpha1 class, r); classes pair a1 with k+1-a1.

    The pairing is exact: the defining formula depends on the unordered
    pair {alpha1 - 1, k - alpha1}.
    """
    if max_len > 8 or max_r > 6:
        raise Infeasible("table guard: max_len <= 8 and max_r <= 6")
    rows = []
    for k in range(2, max_len + 1):
        classes = []
        for a1 in range(1, k // 2 + 1 + (k % 2)):
            cls = tuple(sorted({a1, k + 1 - a1}))
            if cls not in classes:
                classes.append(cls)
        for cls in classes:
            for r in range(1, max_r + 1):
                rows.append(TableRow(k=k, alpha1_class=cls, r=r, value=d_constant((k, cls[0]), r)))
    return rows
