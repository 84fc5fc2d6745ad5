"""Covering arrays: canonical forms, isomorph-free generation and juxtaposition search."""

from .bounds import Bound, can_bound
from .budget import Budget
from .canonical import (
    CanonicalForm,
    are_isomorphic,
    canonical_minimum,
    is_minimum,
    is_partial_minimum,
    lex_compare,
    lex_vector,
)
from .core import (
    BlockSplit,
    CoverageTracker,
    CoveringArray,
    Params,
    SymbolPermutation,
    find_uncovered,
    split_by_last_column,
    verify_prefix,
    verify_strength,
    vstack,
    with_constant_column,
)
from .errors import BudgetExhausted, CAError, FormatError, InvalidArgument, MissingLibraryError
from .generator import CaLibrary, brute_force_distinct, generate_distinct
from .search import (
    JuxtapositionState,
    SearchResultSet,
    ValidMultiset,
    cak,
    construct,
    extend_column,
    generate_juxtapositions,
    valid_multisets,
)

__version__ = "0.1.0"
