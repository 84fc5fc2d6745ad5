"""Existence search for CA(N;t+1,k+1,v) by juxtaposing libraries of CA(N_i;t,k,v).

A CA(N;t+1,k+1,v) with its constant-per-block last column removed splits
into ``v`` stacked blocks, each a CA(N_i;t,k,v). Conversely, stacking ``v``
such blocks (with the block index as an extra column) gives strength t+1
exactly when every (t+1)-column subarray of the stack is covered. The
search therefore runs over

* valid multisets: nondecreasing block sizes summing to N, each at least
  CAN(t,k,v) (or its best known lower bound),
* tuples of library members, one per block (with equal sizes visited once
  as unordered pairs),
* juxtapositions: block 0 is kept as it is; blocks 1..v-1 range over all
  column permutations and per-column relabelings of their member.

Juxtapositions are filled column by column: for column ``r`` the free
blocks 1..v-1 are placed in turn, each choosing an unused source column and
a relabeling (identity first, then lexicographic order). After the last
block of a column ``r >= t`` is placed the prefix must have strength t+1.
"""

from __future__ import annotations

import itertools
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _kernels
from .bounds import can_bound
from .budget import Budget
from .canonical import CanonicalForm, canonical_minimum
from .core import CoveringArray, Params, permutation_table, verify_prefix, verify_strength, with_constant_column
from .errors import BudgetExhausted, InvalidArgument, MissingLibraryError
from .generator import CaLibrary, generate_distinct

log = logging.getLogger(__name__)

EXISTS = "exists"
NONEXISTENT = "nonexistent"
NOT_FOUND_PARTIAL = "not-found-partial"
BUDGET_EXHAUSTED = "budget-exhausted"

ENGINES = ("compiled", "python")


@dataclass(frozen=True, order=True)
class ValidMultiset:
    """Block sizes N_0 <= ... <= N_{v-1} of a candidate decomposition."""

    sizes: tuple[int, ...]

    @property
    def N(self) -> int:
        return sum(self.sizes)

    @property
    def v(self) -> int:
        return len(self.sizes)

    def __str__(self):
        return " ".join(map(str, self.sizes))


def valid_multisets(N: int, t: int, k: int, v: int) -> list[ValidMultiset]:
    """All nondecreasing ``v``-part compositions of ``N`` with parts >= CAN(t,k,v).

    Where CAN is unknown its lower bound is used, which can only add
    multisets. The list is in lexicographic order.
    """
    low = can_bound(t, k, v).value
    out: list[ValidMultiset] = []

    def rec(prefix: list[int], left: int, parts: int):
        if parts == 1:
            if left >= (prefix[-1] if prefix else low):
                out.append(ValidMultiset(tuple(prefix + [left])))
            return
        first = prefix[-1] if prefix else low
        for n in range(first, left // parts + 1):
            rec(prefix + [n], left - n, parts - 1)

    if N >= v * low:
        rec([], N, v)
    return out


@dataclass
class SearchStats:
    """Counters of one search; all of them are sums over tuples."""

    multisets: int = 0
    tuples: int = 0
    nodes: int = 0
    juxtapositions: int = 0
    pruned: int = 0
    leaf_visits: int = 0
    raw_results: int = 0
    wall_time: float = 0.0
    per_multiset: dict = field(default_factory=dict)

    def add(self, other: "SearchStats") -> None:
        for name in ("tuples", "nodes", "juxtapositions", "pruned", "leaf_visits", "raw_results"):
            setattr(self, name, getattr(self, name) + getattr(other, name))

    def as_dict(self) -> dict:
        d = {name: getattr(self, name) for name in
             ("multisets", "tuples", "nodes", "juxtapositions", "pruned", "leaf_visits", "raw_results")}
        d["wall_time"] = round(self.wall_time, 3)
        for key, value in sorted(self.per_multiset.items()):
            d[f"tuples[{key}]"] = value
        return d


class ResultCollector:
    """Thread-safe sink: canonicalises emitted arrays and keeps one per class."""

    def __init__(self, v: int, t: int, limit: int | None = None):
        self.v = v
        self.t = t
        self.limit = limit
        self._lock = threading.Lock()
        self._seen: set[bytes] = set()
        self._forms: dict[bytes, CanonicalForm] = {}

    def add(self, cells: np.ndarray) -> bool:
        """Record one completed array; returns True if its class is new."""
        raw = cells.tobytes()
        with self._lock:
            if raw in self._seen:
                return False
            self._seen.add(raw)
        form = canonical_minimum(CoveringArray(cells, self.v, self.t))
        with self._lock:
            if form.key in self._forms:
                return False
            self._forms[form.key] = form
            return True

    @property
    def full(self) -> bool:
        return self.limit is not None and len(self._forms) >= self.limit

    def members(self) -> list[CanonicalForm]:
        with self._lock:
            return [self._forms[k] for k in sorted(self._forms)]

    def __len__(self):
        return len(self._forms)


@dataclass
class SearchResultSet:
    params: Params
    members: list[CanonicalForm]
    stats: SearchStats
    multisets: list[ValidMultiset]
    complete: bool = True

    @property
    def verdict(self) -> str:
        if self.members:
            return EXISTS
        return NONEXISTENT if self.complete else NOT_FOUND_PARTIAL

    def __len__(self):
        return len(self.members)


def _block_cells(A) -> np.ndarray:
    if isinstance(A, CanonicalForm):
        A = A.array
    if isinstance(A, CoveringArray):
        return A.cells
    return np.asarray(A, dtype=np.uint8)


def _tuple_params(T: Sequence) -> tuple[int, int, int]:
    arrays = [A.array if isinstance(A, CanonicalForm) else A for A in T]
    if len(arrays) < 2:
        raise InvalidArgument("a tuple needs at least two blocks")
    if not all(isinstance(A, CoveringArray) for A in arrays):
        raise InvalidArgument("tuple members must be covering arrays")
    t, k, v = arrays[0].t, arrays[0].k, arrays[0].v
    for A in arrays:
        if (A.t, A.k, A.v) != (t, k, v):
            raise InvalidArgument("tuple members must share t, k and v")
    if len(arrays) != v:
        raise InvalidArgument(f"need {v} blocks for order {v}, got {len(arrays)}")
    return t, k, v


class JuxtapositionState:
    """Mutable state of the reference (pure Python) juxtaposition search.

    ``J`` holds block 0 unchanged in its first rows; ``assigned[i][j]`` is
    True while source column ``j`` of block ``i`` is placed.
    """

    def __init__(self, T: Sequence, prune: bool = True):
        self.t, self.k, self.v = _tuple_params(T)
        self.blocks = [_block_cells(A) for A in T]
        self.sizes = [b.shape[0] for b in self.blocks]
        self.offsets = np.concatenate(([0], np.cumsum(self.sizes)))
        self.N = int(self.offsets[-1])
        self.J = np.zeros((self.N, self.k), dtype=np.uint8)
        self.J[: self.sizes[0]] = self.blocks[0]
        self.assigned = np.zeros((self.v, self.k), dtype=bool)
        self.perms = permutation_table(self.v)
        self.prune = prune
        self.stats = SearchStats()

    def rows(self, i: int) -> slice:
        return slice(int(self.offsets[i]), int(self.offsets[i + 1]))

    def completed(self) -> np.ndarray:
        return with_constant_column(self.J, self.sizes)


def extend_column(state: JuxtapositionState, i: int, r: int, sink) -> None:
    """Place column ``r`` of free block ``i`` and recurse (reference engine)."""
    st = state
    for j in range(st.k):
        if st.assigned[i, j]:
            continue
        st.assigned[i, j] = True
        src = st.blocks[i][:, j]
        for eps in st.perms:
            st.J[st.rows(i), r] = eps[src]
            st.stats.nodes += 1
            if i < st.v - 1:
                extend_column(st, i + 1, r, sink)
                continue
            if st.prune and r >= st.t and not verify_prefix(st.J, r, st.t + 1, st.v):
                st.stats.pruned += 1
                continue
            if r < st.k - 1:
                extend_column(st, 1, r + 1, sink)
                continue
            st.stats.leaf_visits += 1
            if st.prune or verify_strength(st.J, st.t + 1, st.v):
                st.stats.juxtapositions += 1
                sink.add(st.completed())
        st.assigned[i, j] = False


class _CompiledJuxtaposer:
    """Drives the resumable kernel for one tuple."""

    def __init__(self, T: Sequence, prune: bool, early_prune: bool, cap: int = 1024):
        self.t, self.k, self.v = t, k, v = _tuple_params(T)
        blocks = [_block_cells(A) for A in T]
        self.sizes = [b.shape[0] for b in blocks]
        self.off = np.concatenate(([0], np.cumsum(self.sizes))).astype(np.int64)
        N = int(self.off[-1])
        self.src = np.vstack(blocks).astype(np.uint8)
        self.J = np.zeros((N, k), dtype=np.uint8)
        self.J[: self.sizes[0]] = blocks[0]
        self.perms = permutation_table(v).astype(np.uint8)
        subs, start = [], [0]
        for r in range(k):
            subs.extend(itertools.combinations(range(r), t))
            start.append(len(subs))
        self.sub_cols = np.array(subs, dtype=np.int64).reshape(-1, t)
        self.sub_start = np.array(start, dtype=np.int64)
        self.all_sub = np.array(list(itertools.combinations(range(k), t + 1)), dtype=np.int64).reshape(-1, t + 1)
        self.W = -(-(v ** (t + 1)) // 64)
        maxsub = max(1, max(start[r + 1] - start[r] for r in range(k)))
        npos = k * (v - 1)
        self.base = np.zeros((k, maxsub, self.W), dtype=np.uint64)
        _kernels.juxtapose_init(self.J, self.off, t, v, self.sub_cols, self.sub_start, self.base, self.W)
        self.bits = np.zeros((npos, maxsub, self.W), dtype=np.uint64)
        self.prank = np.zeros((npos, maxsub, max(self.sizes)), dtype=np.int64)
        self.remaining = np.array([sum(self.sizes[i + 1:]) for i in range(v)], dtype=np.int64)
        self.state = np.array([0, 1], dtype=np.int64)
        self.choice = np.full(npos, -1, dtype=np.int64)
        self.assigned = np.zeros((v, k), dtype=np.bool_)
        self.out = np.zeros((cap, N, k), dtype=np.uint8)
        self.counters = np.zeros(5, dtype=np.int64)
        self.prune = prune
        self.early = early_prune and prune

    def run(self, sink, budget: Budget | None, chunk: int = 1 << 22) -> bool:
        """Advance until done (True) or the budget runs out (False)."""
        while True:
            before = int(self.counters[0])
            allowance = budget.allowance(chunk) if budget is not None else chunk
            status = _kernels.juxtapose_run(
                self.J, self.src, self.off, self.perms, self.t, self.v, self.sub_cols, self.sub_start,
                self.all_sub, self.prune, self.early, self.remaining, self.W, self.state, self.choice,
                self.assigned, self.base, self.bits, self.prank, self.out, self.counters, allowance)
            n = int(self.counters[3])
            for a in range(n):
                sink.add(with_constant_column(self.out[a].copy(), self.sizes))
            self.counters[3] = 0
            if budget is not None:
                budget.charge(int(self.counters[0]) - before)
            if status == _kernels.DONE:
                return True
            if getattr(sink, "full", False):
                return True
            if budget is not None and budget.exhausted():
                return False

    def stats(self) -> SearchStats:
        c = self.counters
        return SearchStats(tuples=1, nodes=int(c[0]), juxtapositions=int(c[1]), pruned=int(c[2]),
                           leaf_visits=int(c[4]))


def generate_juxtapositions(T: Sequence, sink, *, prune: bool = True, early_prune: bool = True,
                            engine: str = "compiled", budget: Budget | None = None) -> SearchStats:
    """Run every juxtaposition of the tuple ``T`` and send the CAs found to ``sink``.

    ``sink.add`` receives each completed N x (k+1) array (constant column
    last). ``early_prune`` additionally cuts a branch when the blocks still
    to be placed in the current column have too few rows to cover what is
    missing; it applies to the compiled engine only. Raises
    ``BudgetExhausted`` carrying the statistics so far.
    """
    if engine not in ENGINES:
        raise InvalidArgument(f"unknown engine {engine!r}; choose from {ENGINES}")
    if engine == "python":
        state = JuxtapositionState(T, prune=prune)
        state.stats.tuples = 1
        extend_column(state, 1, 0, sink)
        return state.stats
    run = _CompiledJuxtaposer(T, prune, early_prune)
    if not run.run(sink, budget):
        raise BudgetExhausted(f"juxtaposition search stopped ({budget.describe()})", stats=run.stats())
    return run.stats()


def _normalise_libraries(libraries) -> dict[int, CaLibrary]:
    if libraries is None:
        return {}
    if isinstance(libraries, Mapping):
        return {int(n): lib for n, lib in libraries.items()}
    return {lib.params.N: lib for lib in libraries}


def _tuples(ms: ValidMultiset, libs: dict[int, CaLibrary], reduce_equal_sizes: bool):
    members = [libs[n].members for n in ms.sizes]
    for idx in itertools.product(*(range(len(m)) for m in members)):
        if reduce_equal_sizes and any(ms.sizes[a] == ms.sizes[a + 1] and idx[a] > idx[a + 1]
                                      for a in range(len(idx) - 1)):
            continue
        yield tuple(members[a][idx[a]] for a in range(len(idx)))


def construct(N: int, t_prime: int, k_prime: int, v: int, libraries=None, *, workers: int = 1,
              budget: Budget | None = None, allow_partial: bool = False, prune: bool = True,
              early_prune: bool = True, reduce_equal_sizes: bool = True, engine: str = "compiled",
              limit: int | None = None, progress: float | None = None) -> SearchResultSet:
    """All CA(N;t',k',v) up to isomorphism, built from libraries of CA(N_i;t'-1,k'-1,v).

    ``libraries`` maps a row count to its complete :class:`CaLibrary` (a
    plain iterable of libraries also works). Sizes required by some valid
    multiset but missing raise ``MissingLibraryError`` unless
    ``allow_partial``, in which case those multisets are skipped and the
    result is marked incomplete. ``limit`` stops after that many distinct
    results, e.g. for a plain existence question. An empty ``members`` list
    with ``complete`` set proves nonexistence.
    """
    p = Params(N, t_prime, k_prime, v)
    if t_prime < 2:
        raise InvalidArgument("the juxtaposition search needs t' >= 2")
    if workers < 1:
        raise InvalidArgument(f"workers must be >= 1, got {workers}")
    t, k = t_prime - 1, k_prime - 1
    start = time.monotonic()
    stats = SearchStats()
    multisets = valid_multisets(N, t, k, v)
    stats.multisets = len(multisets)
    collector = ResultCollector(v, t_prime, limit)
    if not multisets:
        return SearchResultSet(p, [], stats, multisets)
    libs = _normalise_libraries(libraries)
    required = sorted({n for ms in multisets for n in ms.sizes})
    for n in required:
        lib = libs.get(n)
        if lib is not None and lib.params != Params(n, t, k, v):
            raise InvalidArgument(f"library for {n} rows holds {lib.params}, expected {Params(n, t, k, v)}")
    missing = [n for n in required if n not in libs or not libs[n].complete]
    if missing and not allow_partial:
        raise MissingLibraryError(missing)
    usable = [ms for ms in multisets if not set(ms.sizes) & set(missing)]
    work = []
    for ms in usable:
        tuples = list(_tuples(ms, libs, reduce_equal_sizes))
        stats.per_multiset[str(ms)] = len(tuples)
        work.extend(tuples)
    log.info("%s: %d valid multisets (%d usable), %d tuples", p, len(multisets), len(usable), len(work))

    lock = threading.Lock()
    done = [0]
    last = [start]

    def one(T):
        if collector.full:
            return SearchStats()
        if budget is not None and budget.exhausted():
            raise BudgetExhausted("budget exhausted before tuple started", stats=SearchStats())
        s = generate_juxtapositions(T, collector, prune=prune, early_prune=early_prune,
                                    engine=engine, budget=budget)
        with lock:
            done[0] += 1
            now = time.monotonic()
            if progress is not None and now - last[0] >= progress:
                last[0] = now
                log.info("%s: tuple %d/%d, %d results, %.0fs", p, done[0], len(work), len(collector), now - start)
        return s

    def finish(exc: BudgetExhausted | None = None):
        stats.wall_time = time.monotonic() - start
        result = SearchResultSet(p, collector.members(), stats, multisets,
                                 complete=not missing and exc is None and not collector.full)
        if exc is not None:
            if exc.stats is not None:
                stats.add(exc.stats)
            raise BudgetExhausted(f"search for {p} stopped after {done[0]} of {len(work)} tuples "
                                  f"({budget.describe()})", stats=stats, partial=result)
        return result

    try:
        if workers == 1:
            for T in work:
                stats.add(one(T))
        else:
            with ThreadPoolExecutor(workers) as pool:
                for s in pool.map(one, work):
                    stats.add(s)
    except BudgetExhausted as exc:
        return finish(exc)
    stats.raw_results = len(collector._seen)
    return finish()


def exists(N: int, t: int, k: int, v: int, *, workers: int = 1, budget: Budget | None = None,
           cache: dict | None = None) -> bool:
    """Whether some CA(N;t,k,v) exists, decided exhaustively.

    Strength 1 is settled directly; otherwise libraries of the block
    parameters are generated (and memoised in ``cache``) and the
    juxtaposition search stops at the first result.
    """
    Params(N, t, k, v)
    if N < v**t:
        return False
    if t == 1:
        return True
    cache = {} if cache is None else cache
    libs = {}
    for ms in valid_multisets(N, t - 1, k - 1, v):
        for n in ms.sizes:
            key = (n, t - 1, k - 1, v)
            if key not in cache:
                cache[key] = generate_distinct(Params(*key), workers=workers, budget=budget)
            libs[n] = cache[key]
    return bool(construct(N, t, k, v, libs, workers=workers, budget=budget, limit=1).members)


def cak(N: int, t: int, v: int, probe: Callable[[int], bool] | None = None, k_max: int = 64) -> int:
    """Largest ``k`` (at most ``k_max``) for which ``probe(k)`` reports a CA(N;t,k,v).

    Existence is monotone in ``k`` (deleting a column keeps the strength), so
    probing stops at the first failure. The default probe is :func:`exists`.
    Returns ``t - 1`` when not even ``k = t`` works.
    """
    if probe is None:
        cache: dict = {}
        probe = lambda k: exists(N, t, k, v, cache=cache)  # noqa: E731
    best = t - 1
    for k in range(t, k_max + 1):
        if not probe(k):
            break
        best = k
    return best
