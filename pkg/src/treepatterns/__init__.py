"""Permutation-pattern statistics in random labellings of rooted trees
and random split trees: exact rational constants, generalized path-length
parameters, digraph embedding counts, tree generators, and Monte Carlo
verification experiments."""

from .constants import (
    bernoulli,
    d_constant,
    d_table,
    inversion_cumulant_exact,
    moments_to_cumulants,
    star_label_probability,
)
from .digraphs import (
    Digraph,
    classify_vertices,
    diamond,
    directed_path,
    embedding_count,
    enumerate_fused_paths,
    star,
    star_count_formula,
)
from .errors import Infeasible, InvalidInput
from .mc import CumulantEstimate, estimate_cumulants, exact_cumulants, theorem_ratio
from .patterns import (
    Pattern,
    count_occurrences,
    exact_distribution,
    expected_occurrences,
    sample_labelling,
)
from .splitgen import (
    BallOrder,
    SplitParams,
    SplitTree,
    bst_params,
    generate_multinomial,
    generate_trickle_down,
    same_child_probability_bound,
)
from .treeparams import ancestor_tail, total_path_length, upsilon
from .trees import (
    NodeSetAncestry,
    RootedTree,
    make_complete_binary_tree,
    make_path,
    random_tree,
    tree_from_json,
)

__version__ = "0.1.0"
