"""Array representation, strength checks and the block transforms.

Symbols are stored as ``uint8`` in row-major order. A t-tuple over columns
``c_0 < c_1 < ... < c_{t-1}`` is ranked in mixed radix as
``sum(x_j * v**(t-1-j))``; bit vectors in :class:`CoverageTracker` use that
rank as the bit index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument

SYMBOL_DTYPE = np.uint8
MAX_ORDER = 256


@dataclass(frozen=True)
class Params:
    """Row count, strength, column count and order of a covering array."""

    N: int
    t: int
    k: int
    v: int

    def __post_init__(self):
        for name in ("N", "t", "k", "v"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise InvalidArgument(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.N < 1 or self.k < 1 or self.t < 1:
            raise InvalidArgument(f"N, t and k must be positive: {self}")
        if not 2 <= self.v <= MAX_ORDER:
            raise InvalidArgument(f"v must be in [2, {MAX_ORDER}], got {self.v}")
        if self.t > self.k:
            raise InvalidArgument(f"strength {self.t} exceeds column count {self.k}")

    @property
    def tuples(self) -> int:
        """Number of t-tuples each t-column subarray has to cover."""
        return self.v**self.t

    @property
    def feasible(self) -> bool:
        """False when N is below the trivial v**t lower bound."""
        return self.N >= self.tuples

    def __str__(self):
        return f"CA({self.N};{self.t},{self.k},{self.v})"


def as_cells(data, v: int | None = None) -> np.ndarray:
    """Return ``data`` as a 2-D uint8 array, checking the symbol range."""
    cells = np.asarray(data)
    if cells.ndim != 2:
        raise InvalidArgument(f"expected a 2-D array, got shape {cells.shape}")
    if cells.size and (cells.min() < 0 or (v is not None and cells.max() >= v)):
        bad = np.argwhere((cells < 0) | (cells >= (v if v is not None else MAX_ORDER)))[0]
        raise InvalidArgument(
            f"symbol {cells[tuple(bad)]} at row {bad[0]}, column {bad[1]} is outside 0..{v - 1}"
        )
    return np.ascontiguousarray(cells, dtype=SYMBOL_DTYPE)


class CoveringArray:
    """An immutable N x k array over ``{0, ..., v-1}`` with a declared strength.

    The declared strength is a label; :meth:`is_valid` checks it.
    """

    __slots__ = ("cells", "params", "_key")

    def __init__(self, cells, v: int, t: int):
        arr = as_cells(cells, v)
        N, k = arr.shape
        self.params = Params(N, t, k, v)
        arr = arr.copy()
        arr.flags.writeable = False
        self.cells = arr
        self._key = None

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], v: int, t: int) -> "CoveringArray":
        return cls(np.array([list(r) for r in rows]), v, t)

    N = property(lambda self: self.params.N)
    t = property(lambda self: self.params.t)
    k = property(lambda self: self.params.k)
    v = property(lambda self: self.params.v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def is_valid(self) -> bool:
        return verify_strength(self, self.t)

    def with_strength(self, t: int) -> "CoveringArray":
        return CoveringArray(self.cells, self.v, t)

    def rows(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in row) for row in self.cells]

    def key(self) -> bytes:
        """Bytes of the column-major flattening; equal shapes compare like lex vectors."""
        if self._key is None:
            self._key = self.cells.tobytes(order="F")
        return self._key

    def __eq__(self, other):
        if not isinstance(other, CoveringArray):
            return NotImplemented
        return self.params == other.params and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash((self.params, self.key()))

    def __repr__(self):
        return f"CoveringArray({self.params})"


def _cells_v(A, v: int | None) -> tuple[np.ndarray, int]:
    if isinstance(A, CoveringArray):
        if v is not None and v != A.v:
            raise InvalidArgument(f"order mismatch: array has v={A.v}, caller passed {v}")
        return A.cells, A.v
    if v is None:
        raise InvalidArgument("v is required when passing a bare array")
    return as_cells(A, v), v


def tuple_weights(s: int, v: int) -> np.ndarray:
    """Mixed-radix weights ``v**(s-1-j)`` for ranking an s-tuple."""
    return v ** np.arange(s - 1, -1, -1, dtype=np.int64)


def tuple_ranks(cells: np.ndarray, cols: Sequence[int], v: int) -> np.ndarray:
    """Rank of each row's tuple on ``cols`` (ascending column order)."""
    return cells[:, list(cols)].astype(np.int64) @ tuple_weights(len(cols), v)


def unrank_tuple(rank: int, s: int, v: int) -> tuple[int, ...]:
    digits = []
    for _ in range(s):
        rank, d = divmod(rank, v)
        digits.append(d)
    return tuple(reversed(digits))


def find_uncovered(A, s: int, v: int | None = None) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """First (column set, tuple) that is missing at strength ``s``, or ``None``.

    Column sets are visited in lexicographic order, missing tuples in rank
    order.
    """
    cells, v = _cells_v(A, v)
    k = cells.shape[1]
    if s < 0 or s > k:
        raise InvalidArgument(f"strength {s} is outside 0..{k}")
    if s == 0:
        return None if cells.shape[0] else ((), ())
    total = v**s
    for cols in itertools.combinations(range(k), s):
        seen = np.zeros(total, dtype=bool)
        seen[tuple_ranks(cells, cols, v)] = True
        if not seen.all():
            return cols, unrank_tuple(int(np.argmin(seen)), s, v)
    return None


def verify_strength(A, s: int, v: int | None = None) -> bool:
    """True iff every s-column subarray of ``A`` contains all ``v**s`` tuples."""
    return find_uncovered(A, s, v) is None


def _subset_covered(cells: np.ndarray, cols: Sequence[int], v: int) -> int:
    bits = 0
    for rank in np.unique(tuple_ranks(cells, cols, v)):
        bits |= 1 << int(rank)
    return bits


@dataclass
class CoverageTracker:
    """Per-subset coverage bit vectors at a fixed strength.

    Bit ``rank`` of ``bits[cols]`` is set when the tuple of that rank occurs on
    columns ``cols``. The tracker is owned by one search branch; use
    :meth:`copy` before descending if the parent state has to survive.
    """

    s: int
    v: int
    bits: dict[tuple[int, ...], int] = field(default_factory=dict)

    @property
    def full(self) -> int:
        return self.v**self.s

    def covered(self, cols: tuple[int, ...]) -> int:
        return self.bits.get(cols, 0).bit_count()

    def complete(self, cols: tuple[int, ...]) -> bool:
        return self.covered(cols) == self.full

    def record(self, cells: np.ndarray, cols: tuple[int, ...]) -> bool:
        """OR the rows of ``cells`` into the subset ``cols``; return completeness."""
        self.bits[cols] = self.bits.get(cols, 0) | _subset_covered(cells, cols, self.v)
        return self.complete(cols)

    def add_column(self, cells: np.ndarray, r: int) -> bool:
        """Record every s-subset of columns ``0..r`` that contains ``r``."""
        ok = True
        for head in itertools.combinations(range(r), self.s - 1):
            ok &= self.record(cells, head + (r,))
        return ok

    def copy(self) -> "CoverageTracker":
        return CoverageTracker(self.s, self.v, dict(self.bits))


def verify_prefix(J, r: int, s: int, v: int | None = None,
                  tracker: CoverageTracker | None = None) -> bool:
    """Check only the s-subsets of columns ``0..r`` that include column ``r``.

    Subsets not involving ``r`` are assumed certified by earlier calls. When a
    ``tracker`` is given the coverage of the new subsets is recorded into it.
    """
    cells, v = _cells_v(J, v)
    if s < 1:
        raise InvalidArgument(f"strength must be positive, got {s}")
    if r < s - 1:
        raise InvalidArgument(f"column index {r} is too small for strength {s}")
    if r >= cells.shape[1]:
        raise InvalidArgument(f"column index {r} out of range for {cells.shape[1]} columns")
    if tracker is None:
        tracker = CoverageTracker(s, v)
    elif tracker.s != s or tracker.v != v:
        raise InvalidArgument("tracker strength/order does not match")
    return tracker.add_column(cells, r)


@dataclass(frozen=True)
class SymbolPermutation:
    """A bijection on ``{0, ..., v-1}``; ``mapping[x]`` is the image of ``x``."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        mapping = tuple(int(x) for x in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise InvalidArgument(f"not a bijection on 0..{len(mapping) - 1}: {mapping}")
        object.__setattr__(self, "mapping", mapping)

    @property
    def v(self) -> int:
        return len(self.mapping)

    @classmethod
    def identity(cls, v: int) -> "SymbolPermutation":
        return cls(tuple(range(v)))

    @classmethod
    def all(cls, v: int) -> list["SymbolPermutation"]:
        """All v! permutations in lexicographic order (identity first)."""
        return [cls(p) for p in itertools.permutations(range(v))]

    def inverse(self) -> "SymbolPermutation":
        inv = [0] * self.v
        for x, y in enumerate(self.mapping):
            inv[y] = x
        return SymbolPermutation(tuple(inv))

    def compose(self, other: "SymbolPermutation") -> "SymbolPermutation":
        """``self`` after ``other``."""
        return SymbolPermutation(tuple(self.mapping[x] for x in other.mapping))

    def as_array(self) -> np.ndarray:
        return np.array(self.mapping, dtype=SYMBOL_DTYPE)

    def __call__(self, col):
        return relabel_column(col, self)


def permutation_table(v: int) -> np.ndarray:
    """``(v!, v)`` array of all symbol permutations, lexicographic order."""
    return np.array(list(itertools.permutations(range(v))), dtype=SYMBOL_DTYPE)


def relabel_column(col, eps) -> np.ndarray:
    """Apply the symbol permutation ``eps`` element-wise to ``col``."""
    table = eps.as_array() if isinstance(eps, SymbolPermutation) else np.asarray(eps, dtype=SYMBOL_DTYPE)
    col = np.asarray(col)
    if col.size and (col.min() < 0 or col.max() >= len(table)):
        raise InvalidArgument(f"column holds symbols outside 0..{len(table) - 1}")
    return table[col.astype(np.intp)]


def vstack(blocks: Sequence) -> CoveringArray | np.ndarray:
    """Concatenate blocks vertically, in order.

    With :class:`CoveringArray` blocks the result is a CoveringArray whose
    declared strength is the smallest block strength (adding rows never loses
    coverage). Bare arrays give a bare array.
    """
    if not blocks:
        raise InvalidArgument("vstack needs at least one block")
    cas = [b for b in blocks if isinstance(b, CoveringArray)]
    if cas and len(cas) != len(blocks):
        raise InvalidArgument("cannot mix CoveringArray and bare array blocks")
    if cas:
        if len({b.k for b in cas}) != 1 or len({b.v for b in cas}) != 1:
            raise InvalidArgument("blocks differ in column count or order")
        return CoveringArray(np.vstack([b.cells for b in cas]), cas[0].v, min(b.t for b in cas))
    arrays = [np.asarray(b) for b in blocks]
    if any(a.ndim != 2 for a in arrays) or len({a.shape[1] for a in arrays}) != 1:
        raise InvalidArgument("blocks differ in column count")
    return np.vstack(arrays).astype(SYMBOL_DTYPE)


def constant_column(sizes: Sequence[int]) -> np.ndarray:
    """The column E: ``sizes[i]`` copies of symbol ``i``, in order."""
    return np.repeat(np.arange(len(sizes), dtype=SYMBOL_DTYPE), list(sizes))


def with_constant_column(J, sizes: Sequence[int], t: int | None = None):
    """Append E (block-constant column) to ``J``.

    ``len(sizes)`` is the order v. For a CoveringArray input the result keeps
    ``J``'s declared strength unless ``t`` is given.
    """
    sizes = [int(x) for x in sizes]
    if any(x < 0 for x in sizes):
        raise InvalidArgument(f"negative block size in {sizes}")
    cells = J.cells if isinstance(J, CoveringArray) else np.asarray(J)
    if sum(sizes) != cells.shape[0]:
        raise InvalidArgument(f"block sizes sum to {sum(sizes)}, array has {cells.shape[0]} rows")
    if isinstance(J, CoveringArray) and len(sizes) != J.v:
        raise InvalidArgument(f"need {J.v} block sizes, got {len(sizes)}")
    out = np.hstack([cells, constant_column(sizes)[:, None]]).astype(SYMBOL_DTYPE)
    if isinstance(J, CoveringArray):
        return CoveringArray(out, J.v, J.t if t is None else t)
    return out


@dataclass(frozen=True)
class BlockSplit:
    """Rows of an array grouped by their last-column symbol, last column dropped.

    Blocks are bare arrays because a block may be empty.
    """

    blocks: tuple[np.ndarray, ...]
    sizes: tuple[int, ...]

    @property
    def v(self) -> int:
        return len(self.blocks)

    def block(self, i: int, t: int) -> CoveringArray:
        """Block ``i`` wrapped as a CoveringArray of declared strength ``t``."""
        if self.sizes[i] == 0:
            raise InvalidArgument(f"block {i} is empty")
        return CoveringArray(self.blocks[i], self.v, t)

    def stacked(self) -> np.ndarray:
        return np.vstack(self.blocks)


def split_by_last_column(C) -> BlockSplit:
    """Stable-sort rows by the last column and cut into one block per symbol."""
    if isinstance(C, CoveringArray):
        cells, v = C.cells, C.v
    else:
        cells = as_cells(C)
        v = int(cells.max()) + 1 if cells.size else 1
    if cells.shape[1] < 2:
        raise InvalidArgument("need at least two columns to split")
    last = cells[:, -1]
    order = np.argsort(last, kind="stable")
    rows = cells[order, :-1]
    sizes = np.bincount(last, minlength=v)
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    blocks = tuple(np.ascontiguousarray(rows[bounds[i]:bounds[i + 1]]) for i in range(v))
    return BlockSplit(blocks, tuple(int(x) for x in sizes))
