"""Lexicographic order on arrays and minimum representatives of isomorphism classes.

Two arrays are isomorphic when one becomes the other under a row
permutation, a column permutation and an independent symbol permutation in
every column. Arrays are compared by their column-major flattening.

The minimum is found column position by column position. For a fixed column
order and relabeling the best row order is the lexicographic sort of the
rows, so column ``L`` of the result is the chosen source column, relabeled
and sorted inside each group ("cell") of rows that agree on the first ``L``
columns. Sorting inside a cell only depends on the symbol counts of the
cell, which lets every candidate be ranked from a count table. All partial
states tying for the smallest column are kept; states that used the same
column set and induce the same ordered row partition behave identically
afterwards and are merged.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import CoveringArray, as_cells, permutation_table
from .errors import InvalidArgument


class Order(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


def lex_vector(A) -> np.ndarray:
    """Column-major flattening of ``A``."""
    cells = A.cells if isinstance(A, CoveringArray) else np.asarray(A)
    return cells.ravel(order="F").copy()


def lex_compare(A, B) -> Order:
    a, b = lex_vector(A), lex_vector(B)
    shape_a = A.shape if isinstance(A, CoveringArray) else np.shape(A)
    shape_b = B.shape if isinstance(B, CoveringArray) else np.shape(B)
    if tuple(shape_a) != tuple(shape_b):
        raise InvalidArgument(f"cannot compare shapes {shape_a} and {shape_b}")
    diff = np.flatnonzero(a != b)
    if diff.size == 0:
        return Order.EQ
    return Order.LT if a[diff[0]] < b[diff[0]] else Order.GT


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """Minimum representative of an isomorphism class."""

    array: CoveringArray

    @cached_property
    def lex(self) -> np.ndarray:
        return lex_vector(self.array)

    @property
    def key(self) -> bytes:
        return self.array.key()

    @property
    def params(self):
        return self.array.params

    def __eq__(self, other):
        if not isinstance(other, CanonicalForm):
            return NotImplemented
        return self.array == other.array

    def __lt__(self, other):
        return self.key < other.key

    def __hash__(self):
        return hash(self.array)


class _State:
    """A partial arrangement: columns placed so far and the ordered row cells."""

    __slots__ = ("used", "perms", "order", "cid", "ncells")

    def __init__(self, used, perms, order, cid, ncells):
        self.used = used
        self.perms = perms
        self.order = order
        self.cid = cid
        self.ncells = ncells

    def bounds(self) -> np.ndarray:
        return np.searchsorted(self.cid, np.arange(self.ncells + 1))


class _Refiner:
    def __init__(self, cells: np.ndarray, v: int):
        self.cells = cells
        self.N, self.k = cells.shape
        self.v = v
        self.perm = permutation_table(v).astype(np.intp)
        self.inv = np.argsort(self.perm, axis=1)

    def root(self) -> _State:
        return _State((), (), np.arange(self.N), np.zeros(self.N, dtype=np.intp), 1)

    def counts(self, state: _State, col) -> np.ndarray:
        """``(ncells, v)`` symbol counts of ``col`` (a full-length column) per cell."""
        x = np.asarray(col)[state.order].astype(np.intp)
        return np.bincount(state.cid * self.v + x, minlength=state.ncells * self.v).reshape(state.ncells, self.v)

    def keys(self, counts: np.ndarray) -> list[bytes]:
        """Rank key of every relabeling of a column with per-cell ``counts``.

        Smaller key means a smaller per-cell-sorted column: a cell with more
        zeros is smaller, ties go to more ones, and so on.
        """
        rc = counts[:, self.inv].transpose(1, 0, 2)
        enc = (self.N - rc).astype(">u2")
        return [row.tobytes() for row in enc]

    def own_key(self, counts: np.ndarray) -> bytes:
        return (self.N - counts).astype(">u2").tobytes()

    def extend(self, state: _State, c: int, p: int) -> _State:
        x = self.cells[state.order, c].astype(np.intp)
        y = self.perm[p][x]
        code = state.cid * self.v + y
        idx = np.argsort(code, kind="stable")
        code = code[idx]
        cid = np.zeros(self.N, dtype=np.intp)
        if self.N > 1:
            cid[1:] = np.cumsum(code[1:] != code[:-1])
        return _State(state.used + (c,), state.perms + (p,), state.order[idx], cid, int(cid[-1]) + 1)

    @staticmethod
    def signature(state: _State, N: int):
        cell_of_row = np.empty(N, dtype=np.int16)
        cell_of_row[state.order] = state.cid
        return tuple(sorted(state.used)), cell_of_row.tobytes()

    def step(self, states, target: bytes | None):
        """Advance every state by one column position.

        With ``target`` (the key of the array's own column) return ``None`` as
        soon as a strictly smaller candidate exists, otherwise the states that
        tie with the target. Without it keep the states achieving the minimum.
        Returns ``(best_key, next_states)``.
        """
        best = target
        chosen: list[tuple[_State, int, int]] = []
        for st in states:
            used = set(st.used)
            for c in range(self.k):
                if c in used:
                    continue
                ks = self.keys(self.counts(st, self.cells[:, c]))
                for p, key in enumerate(ks):
                    if best is None or key < best:
                        if target is not None:
                            return None
                        best = key
                        chosen = [(st, c, p)]
                    elif key == best:
                        chosen.append((st, c, p))
        nxt = {}
        for st, c, p in chosen:
            ns = self.extend(st, c, p)
            sig = self.signature(ns, self.N)
            if sig not in nxt:
                nxt[sig] = ns
        return best, list(nxt.values())

    def arrange(self, state: _State) -> np.ndarray:
        cols = [self.perm[p][self.cells[:, c].astype(np.intp)] for c, p in zip(state.used, state.perms)]
        B = np.stack(cols, axis=1) if cols else np.zeros((self.N, 0), dtype=np.intp)
        order = np.lexsort(B.T[::-1]) if cols else np.arange(self.N)
        return B[order].astype(np.uint8)


def _cells_v(A, v):
    if isinstance(A, CoveringArray):
        return A.cells, A.v, A.t
    if v is None:
        raise InvalidArgument("v is required when passing a bare array")
    return as_cells(A, v), v, None


def canonical_minimum(A, v: int | None = None, t: int | None = None) -> CanonicalForm:
    """The lexicographically smallest array isomorphic to ``A``.

    ``t`` sets the declared strength of the result for bare-array input; a
    CoveringArray keeps its own.
    """
    cells, v, declared = _cells_v(A, v)
    t = declared if declared is not None else t
    ref = _Refiner(cells, v)
    states = [ref.root()]
    for _ in range(ref.k):
        _, states = ref.step(states, None)
    B = ref.arrange(states[0])
    return CanonicalForm(CoveringArray(B, v, t if t is not None else 1))


def rows_sorted(cells: np.ndarray) -> bool:
    """True when rows are in non-decreasing lexicographic order."""
    if cells.shape[0] < 2 or cells.shape[1] == 0:
        return True
    a, b = cells[:-1].astype(np.int16), cells[1:].astype(np.int16)
    d = b - a
    nz = d != 0
    first = np.argmax(nz, axis=1)
    has = nz.any(axis=1)
    return bool(np.all(~has | (d[np.arange(len(d)), first] > 0)))


def minimal_states(cells: np.ndarray, v: int):
    """Per-level lists of states that reproduce ``cells`` column by column.

    Returns ``None`` if ``cells`` is not the minimum of its class. Level ``L``
    holds the states that tie with the first ``L`` columns (level 0 is the
    empty arrangement).
    """
    if not rows_sorted(cells):
        return None
    ref = _Refiner(cells, v)
    states = [ref.root()]
    ident = states[0]
    levels = [states]
    for L in range(ref.k):
        target = ref.own_key(ref.counts(ident, cells[:, L]))
        res = ref.step(states, target)
        if res is None:
            return None
        states = res[1]
        levels.append(states)
        ident = ref.extend(ident, L, 0)
    return levels


def _identity_state(ref: _Refiner, L: int) -> _State:
    """The arrangement using columns ``0..L-1`` unchanged (rows already sorted)."""
    st = ref.root()
    for c in range(L):
        st = ref.extend(st, c, 0)
    return st


def is_minimum(A, v: int | None = None) -> bool:
    """True iff ``A`` equals its own canonical minimum (early exit)."""
    cells, v, _ = _cells_v(A, v)
    return minimal_states(cells, v) is not None


def are_isomorphic(A, B, v: int | None = None) -> bool:
    ca, va, _ = _cells_v(A, v)
    cb, vb, _ = _cells_v(B, v)
    if ca.shape != cb.shape or va != vb:
        raise InvalidArgument(f"cannot compare shapes {ca.shape} (v={va}) and {cb.shape} (v={vb})")
    return canonical_minimum(ca, va).key == canonical_minimum(cb, vb).key


def _cell_verdict(cand: np.ndarray, cand_exact: bool, target: np.ndarray, exact_upto: int) -> int:
    """Compare one cell of a candidate column with the same cell of the target.

    ``cand`` holds symbol counts of the candidate cell (lower bounds unless
    ``cand_exact``). Target counts are exact for symbols below ``exact_upto``.
    Returns -1 if the candidate is strictly smaller for every completion,
    0 if the cells are equal, and 1 when no decision is possible (or the
    candidate is larger).
    """
    v = len(target)
    for s in range(exact_upto):
        if cand[s] > target[s]:
            return -1
        if cand[s] < target[s]:
            return 1
    return 0 if exact_upto == v and cand_exact else 1


def is_partial_minimum(A, r: int, v: int | None = None) -> bool:
    """Bounded check that a partially filled array can still be a class minimum.

    The first ``r`` cells in column-major order are filled; the rest of ``A``
    is ignored. Returns ``False`` only when some isomorphism is strictly
    smaller on the filled region for every possible completion, so a prefix of
    a true minimum always passes. Prefixes that pass may still be pruned later.
    """
    cells, v, _ = _cells_v(A, v)
    N, k = cells.shape
    if r < 0 or r > N * k:
        raise InvalidArgument(f"filled-cell count {r} outside 0..{N * k}")
    full, m = divmod(r, N)
    if full == k:
        return is_minimum(cells, v)
    prefix = cells[:, :full]
    levels = minimal_states(prefix, v)
    if levels is None:
        return False
    if m == 0:
        return True
    col = cells[:, full].astype(np.intp)
    known = np.zeros(N, dtype=bool)
    known[:m] = True
    # rows agreeing on the prefix must carry non-decreasing new values
    same = np.ones(N, dtype=bool)
    if full:
        same[1:] = np.all(prefix[1:] == prefix[:-1], axis=1)
    same[0] = False
    for i in range(1, m):
        if same[i] and col[i] < col[i - 1]:
            return False
    ref = _Refiner(prefix, v)
    for L, states in enumerate(levels):
        ident = _identity_state(ref, L)
        tb = ident.bounds()
        target_counts = np.zeros((ident.ncells, v), dtype=np.intp)
        exact_upto = np.full(ident.ncells, v)
        source = prefix[:, L] if L < full else col
        for q in range(ident.ncells):
            lo, hi = tb[q], tb[q + 1]
            if L == full and hi > m:
                hi = max(lo, m)
                # rows past m are unknown; known values of a minimum are sorted,
                # so counts below the last known symbol are already final
                exact_upto[q] = int(col[hi - 1]) if hi > lo else 0
            target_counts[q] = np.bincount(source[lo:hi].astype(np.intp), minlength=v)
        for st in states:
            b = st.bounds()
            rows_known = known[st.order]
            for p in range(len(ref.perm)):
                y = ref.perm[p][col[st.order]]
                for q in range(st.ncells):
                    sl = slice(b[q], b[q + 1])
                    kn = rows_known[sl]
                    cnt = np.bincount(y[sl][kn], minlength=v)
                    verdict = _cell_verdict(cnt, bool(kn.all()), target_counts[q], int(exact_upto[q]))
                    if verdict < 0:
                        return False
                    if verdict > 0:
                        break
    return True
