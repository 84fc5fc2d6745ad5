"""Isomorph-free generation of all covering arrays with given parameters.

The generator is orderly and works one column at a time. A class minimum
has sorted rows and every column prefix of it is again a class minimum, so
the minima with ``j + 1`` columns are exactly the minimal extensions of the
minima with ``j`` columns. For each minimal parent a compiled depth-first
search lists the admissible next columns in lexicographic order, filling
cells top to bottom and pruning with

* row sortedness: rows that agree on the parent take non-decreasing values,
* column order: the new column is not smaller than the previous one,
* coverage feasibility: for every set ``S`` of ``min(j, t-1)`` parent
  columns each pair (value on ``S``, new symbol) must still be able to reach
  ``v**(t-1-|S|)`` occurrences with the rows left,
* partial minimality: an arrangement recorded while certifying the parent
  that is already strictly smaller on the filled cells.

Every surviving column is checked exactly with :func:`minimal_states`.
"""

from __future__ import annotations

import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .budget import Budget
from .canonical import CanonicalForm, canonical_minimum, minimal_states
from .core import CoveringArray, Params, permutation_table, tuple_weights
from .errors import BudgetExhausted, InvalidArgument

log = logging.getLogger(__name__)

BRUTE_FORCE_MAX_BITS = 24


@dataclass(frozen=True)
class CaLibrary:
    """All pairwise non-isomorphic CA(N;t,k,v), one class minimum each.

    ``complete`` is False for libraries cut short by a budget; those cannot
    back a nonexistence claim.
    """

    params: Params
    members: tuple[CanonicalForm, ...]
    complete: bool = True

    def __post_init__(self):
        members = tuple(self.members)
        for m in members:
            if m.params != self.params:
                raise InvalidArgument(f"member {m.params} does not match library {self.params}")
        keys = [m.key for m in members]
        if keys != sorted(keys):
            raise InvalidArgument("library members must be sorted by lex order")
        if len(set(keys)) != len(keys):
            raise InvalidArgument("library contains duplicate members")
        object.__setattr__(self, "members", members)

    @classmethod
    def from_forms(cls, params: Params, forms, complete: bool = True) -> "CaLibrary":
        unique = {f.key: f for f in forms}
        return cls(params, tuple(unique[k] for k in sorted(unique)), complete)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]


@dataclass
class GenerationStats:
    nodes: int = 0
    candidates: int = 0
    per_level: list[int] = field(default_factory=list)
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "candidates": self.candidates,
            "per_level": " ".join(map(str, self.per_level)),
            "wall_time": round(self.wall_time, 3),
        }


def _identity_bounds(P: np.ndarray, L: int) -> np.ndarray:
    """Cell boundaries of rows agreeing on the first ``L`` columns (rows sorted)."""
    N = P.shape[0]
    if L == 0 or N < 2:
        return np.array([0, N])
    brk = np.flatnonzero(np.any(P[1:, :L] != P[:-1, :L], axis=1)) + 1
    return np.concatenate(([0], brk, [N]))


class _ParentContext:
    """Kernel inputs describing one minimal parent with ``j`` columns."""

    def __init__(self, P: np.ndarray, p: Params, perms: np.ndarray):
        N, j = P.shape
        v, t = p.v, p.t
        self.P = P
        self.same = np.ones(N, dtype=np.bool_)
        if j:
            self.same[1:] = np.all(P[1:] == P[:-1], axis=1)
        self.same[0] = False
        self.prev = P[:, j - 1].astype(np.int64) if j else np.zeros(N, dtype=np.int64)
        self.has_prev = j > 0

        s = min(j, t - 1)
        self.need = v ** (t - 1 - s)
        w = tuple_weights(s, v)
        groups = []
        for cols in itertools.combinations(range(j), s):
            rank = P[:, list(cols)].astype(np.int64) @ w if s else np.zeros(N, dtype=np.int64)
            groups.append(np.unique(rank, return_inverse=True)[1].reshape(N))
        self.groups = np.asarray(groups, dtype=np.int64)

        levels = minimal_states(P, v)
        if levels is None:
            raise InvalidArgument("parent is not a class minimum")
        flat = [(L, st) for L, sts in enumerate(levels) for st in sts if L > 0 or j > 0]
        S = len(flat)
        self.st_level = np.array([L for L, _ in flat], dtype=np.int64)
        self.st_order = np.zeros((S, N), dtype=np.int64)
        self.st_bounds = np.zeros((S, N + 1), dtype=np.int64)
        self.st_ncells = np.zeros(S, dtype=np.int64)
        for a, (_, st) in enumerate(flat):
            b = st.bounds()
            self.st_order[a] = st.order
            self.st_bounds[a, : len(b)] = b
            self.st_ncells[a] = st.ncells
        self.tcounts = np.zeros((max(j, 1), N, v), dtype=np.int64)
        for L in range(j):
            b = _identity_bounds(P, L)
            for q in range(len(b) - 1):
                self.tcounts[L, q] = np.bincount(P[b[q] : b[q + 1], L], minlength=v)
        ib = _identity_bounds(P, j)
        self.id_bounds = np.zeros(N + 1, dtype=np.int64)
        self.id_bounds[: len(ib)] = ib
        self.id_ncells = len(ib) - 1
        self.jlevel = j
        self.perms = perms

    def candidates(self, counters: np.ndarray, cap: int = 1024) -> np.ndarray:
        N = self.P.shape[0]
        v = self.perms.shape[1]
        while True:
            out = np.zeros((cap, N), dtype=np.int64)
            n = _kernels.column_candidates(
                N, v, self.same, self.prev, self.has_prev, self.groups, self.need,
                self.perms, self.st_level, self.st_order, self.st_bounds, self.st_ncells,
                self.tcounts, self.id_bounds, self.id_ncells, self.jlevel, len(self.st_level) > 0,
                out, counters,
            )
            if n >= 0:
                return out[:n].astype(np.uint8)
            cap *= 4


def _extend(P: np.ndarray, p: Params, perms: np.ndarray) -> tuple[list[np.ndarray], int, int]:
    """Minimal children of ``P``; also returns kernel nodes and candidate count."""
    ctx = _ParentContext(P, p, perms)
    counters = np.zeros(1, dtype=np.int64)
    cols = ctx.candidates(counters)
    kids = []
    for y in cols:
        child = np.column_stack([P, y]) if P.shape[1] else y.reshape(-1, 1)
        if minimal_states(child, p.v) is not None:
            kids.append(np.ascontiguousarray(child))
    return kids, int(counters[0]), len(cols)


def generate_distinct(p: Params, *, workers: int = 1, budget: Budget | None = None,
                      progress: float | None = None) -> CaLibrary:
    """One class minimum for every isomorphism class of CA(p.N; p.t, p.k, p.v)."""
    return generate_with_stats(p, workers=workers, budget=budget, progress=progress)[0]


def generate_with_stats(p: Params, *, workers: int = 1, budget: Budget | None = None,
                        progress: float | None = None) -> tuple[CaLibrary, GenerationStats]:
    """One class minimum for every isomorphism class of CA(p.N; p.t, p.k, p.v).

    The result is sorted by lex order and does not depend on ``workers``.
    Raises ``BudgetExhausted`` (with statistics and the members completed so
    far as an incomplete library) if ``budget`` runs out.
    """
    if workers < 1:
        raise InvalidArgument(f"workers must be >= 1, got {workers}")
    stats = GenerationStats()
    start = time.monotonic()
    if not p.feasible:
        return CaLibrary(p, ()), stats
    perms = permutation_table(p.v).astype(np.int64)
    frontier = [np.zeros((p.N, 0), dtype=np.uint8)]
    last_report = start
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for j in range(p.k):
            nxt: list[np.ndarray] = []

            def absorb(result):
                kids, nodes, cands = result
                nxt.extend(kids)
                stats.nodes += nodes
                stats.candidates += cands
                if budget is not None:
                    budget.charge(nodes)

            def check(done):
                nonlocal last_report
                now = time.monotonic()
                if progress is not None and now - last_report >= progress:
                    last_report = now
                    log.info("%s: column %d/%d, parent %d/%d, %d children, %d nodes, %.0fs",
                             p, j + 1, p.k, done, len(frontier), len(nxt), stats.nodes, now - start)
                if budget is not None and budget.exhausted():
                    stats.wall_time = now - start
                    stats.per_level.append(len(nxt))
                    partial = CaLibrary.from_forms(
                        p, [_as_form(c, p) for c in nxt], complete=False) if j == p.k - 1 else CaLibrary(p, (), False)
                    raise BudgetExhausted(
                        f"generation of {p} stopped at column {j + 1} ({budget.describe()})",
                        stats=stats, partial=partial)

            if pool is None:
                for n, P in enumerate(frontier):
                    absorb(_extend(P, p, perms))
                    check(n + 1)
            else:
                chunk = max(1, workers * 4)
                for lo in range(0, len(frontier), chunk):
                    for res in pool.map(lambda P: _extend(P, p, perms), frontier[lo : lo + chunk]):
                        absorb(res)
                    check(min(lo + chunk, len(frontier)))
            nxt.sort(key=lambda c: c.tobytes(order="F"))
            stats.per_level.append(len(nxt))
            log.debug("%s: %d minimal arrays with %d columns", p, len(nxt), j + 1)
            frontier = nxt
            if not frontier:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    stats.wall_time = time.monotonic() - start
    done = [c for c in frontier if c.shape[1] == p.k]
    return CaLibrary.from_forms(p, [_as_form(c, p) for c in done]), stats


def _as_form(cells: np.ndarray, p: Params) -> CanonicalForm:
    return CanonicalForm(CoveringArray(cells, p.v, p.t))


def _strength_mask(arrays: np.ndarray, t: int, v: int) -> np.ndarray:
    """Vectorised strength test for a stack of arrays ``(M, N, k)``."""
    M, N, k = arrays.shape
    ok = np.ones(M, dtype=bool)
    w = tuple_weights(t, v)
    full = v**t
    for cols in itertools.combinations(range(k), t):
        rank = arrays[:, :, list(cols)].astype(np.int64) @ w
        seen = np.zeros((M, full), dtype=bool)
        np.put_along_axis(seen, rank, True, axis=1)
        ok &= seen.all(axis=1)
    return ok


def brute_force_distinct(p: Params, max_bits: int = BRUTE_FORCE_MAX_BITS, chunk: int = 1 << 16) -> CaLibrary:
    """Reference enumeration of all ``v**(N*k)`` arrays, bucketed by canonical form.

    Only arrays whose rows and columns are both in non-decreasing order are
    canonicalised; the class minimum has both properties, so every class is
    still reached. Refuses instances above ``max_bits`` bits of state.
    """
    bits = p.N * p.k * np.log2(p.v)
    if bits > max_bits:
        raise InvalidArgument(f"brute force over {p} needs {bits:.1f} bits of state (limit {max_bits})")
    if not p.feasible:
        return CaLibrary(p, ())
    N, k, v = p.N, p.k, p.v
    total = v ** (N * k)
    place = v ** np.arange(N * k - 1, -1, -1, dtype=np.int64)
    row_w = v ** np.arange(k - 1, -1, -1, dtype=np.int64)
    col_w = v ** np.arange(N - 1, -1, -1, dtype=np.int64)
    found: dict[bytes, CanonicalForm] = {}
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        digits = (idx[:, None] // place) % v
        arrays = digits.reshape(-1, k, N).transpose(0, 2, 1)
        rcode = arrays @ row_w
        ccode = arrays.transpose(0, 2, 1) @ col_w
        keep = np.all(np.diff(rcode, axis=1) >= 0, axis=1) & np.all(np.diff(ccode, axis=1) >= 0, axis=1)
        arrays = arrays[keep]
        if not len(arrays):
            continue
        arrays = arrays[_strength_mask(arrays, p.t, v)]
        for a in arrays:
            form = canonical_minimum(CoveringArray(a.astype(np.uint8), v, p.t))
            found.setdefault(form.key, form)
    return CaLibrary(p, tuple(found[key] for key in sorted(found)))
