from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from cajux.budget import Budget
from cajux.canonical import canonical_minimum
from cajux.core import CoveringArray, Params, split_by_last_column, verify_strength
from cajux.errors import BudgetExhausted, InvalidArgument, MissingLibraryError
from cajux.generator import CaLibrary, brute_force_distinct, generate_distinct
from cajux.search import (
    JuxtapositionState,
    ResultCollector,
    ValidMultiset,
    cak,
    construct,
    exists,
    extend_column,
    generate_juxtapositions,
    valid_multisets,
)


def libraries_for(N, tp, kp, v):
    t, k = tp - 1, kp - 1
    return {n: generate_distinct(Params(n, t, k, v)) for ms in valid_multisets(N, t, k, v) for n in ms.sizes}


def keys(members):
    return [m.key for m in members]


class TestValidMultisets:
    def test_examples(self):
        assert valid_multisets(27, 2, 4, 3) == [ValidMultiset((9, 9, 9))]
        assert [str(m) for m in valid_multisets(29, 2, 4, 3)] == ["9 9 11", "9 10 10"]
        assert [m.sizes for m in valid_multisets(33, 2, 5, 3)] == [(11, 11, 11)]
        assert valid_multisets(7, 2, 3, 2) == []

    @pytest.mark.parametrize("N,t,k,v", [(20, 1, 3, 2), (30, 2, 4, 3), (17, 2, 3, 4)])
    def test_properties(self, N, t, k, v):
        out = valid_multisets(N, t, k, v)
        assert out == sorted(out)
        low = v if t == 1 else None
        for m in out:
            assert m.N == N and m.v == v
            assert list(m.sizes) == sorted(m.sizes)
            if low is not None:
                assert min(m.sizes) >= low
        expected = {tuple(sorted(c)) for c in itertools.product(range(1, N + 1), repeat=v)
                    if sum(c) == N and min(c) >= out[0].sizes[0]} if out else set()
        assert {m.sizes for m in out} == expected


class TestExtendColumn:
    def test_leaf_count_without_pruning(self):
        A = generate_distinct(Params(2, 1, 2, 2))[0]
        for engine in ("python", "compiled"):
            sink = ResultCollector(2, 2)
            stats = generate_juxtapositions((A, A), sink, prune=False, early_prune=False, engine=engine)
            assert stats.leaf_visits == math.factorial(2) * math.factorial(2) ** 2
            assert len(sink) == 1

    def test_no_check_before_strength(self):
        """With t = 2 the first two columns are never pruned."""
        A = generate_distinct(Params(4, 2, 3, 2))[0]
        state = JuxtapositionState((A, A))
        found = []

        class Sink:
            def add(self, C):
                found.append(C)

        extend_column(state, 1, 0, Sink())
        # all 6 * 4 placements of columns 0 and 1 are explored, then 2 choices each for column 2
        assert state.stats.nodes == 6 + 6 * 4 + 6 * 4 * 2
        assert state.stats.pruned == 6 * 4 * 2 - state.stats.juxtapositions
        assert found and all(verify_strength(C, 3, 2) for C in found)

    def test_candidate_count(self):
        """Column r offers (k - r) * v! choices per block."""
        A = generate_distinct(Params(4, 1, 3, 2))[3]
        state = JuxtapositionState((A, A), prune=False)

        class Sink:
            def add(self, C):
                pass

        extend_column(state, 1, 0, Sink())
        k, f = 3, 2
        expected = sum(math.prod((k - i) * f for i in range(r + 1)) for r in range(k))
        assert state.stats.nodes == expected

    def test_completed_bound(self):
        A = generate_distinct(Params(6, 2, 4, 2))
        for T in itertools.product(A.members, repeat=2):
            stats = generate_juxtapositions(T, ResultCollector(2, 3))
            assert stats.juxtapositions <= math.factorial(4) * 2**4

    def test_engines_agree_on_nodes(self):
        lib = generate_distinct(Params(6, 2, 4, 2))
        for T in itertools.product(lib.members[:3], repeat=2):
            a = generate_juxtapositions(T, ResultCollector(2, 3), engine="python")
            b = generate_juxtapositions(T, ResultCollector(2, 3), early_prune=False)
            assert (a.nodes, a.pruned, a.juxtapositions) == (b.nodes, b.pruned, b.juxtapositions)

    def test_rejects_bad_tuple(self):
        A = generate_distinct(Params(4, 2, 3, 2))[0]
        B = generate_distinct(Params(9, 2, 3, 3))[0]
        with pytest.raises(InvalidArgument):
            generate_juxtapositions((A, B), ResultCollector(2, 3))
        with pytest.raises(InvalidArgument):
            generate_juxtapositions((A, A, A), ResultCollector(2, 3))
        with pytest.raises(InvalidArgument):
            generate_juxtapositions((A, A), ResultCollector(2, 3), engine="gpu")


class TestConstruct:
    @pytest.mark.parametrize("target", [(4, 2, 3, 2), (5, 2, 4, 2), (5, 2, 3, 2), (6, 2, 4, 2), (8, 3, 3, 2)])
    def test_matches_brute_force(self, target):
        N, tp, kp, v = target
        res = construct(N, tp, kp, v, libraries_for(*target))
        assert keys(res.members) == keys(brute_force_distinct(Params(*target)).members)

    @pytest.mark.parametrize("target", [(6, 2, 5, 2), (8, 3, 4, 2), (10, 3, 5, 2), (9, 2, 4, 3), (12, 3, 5, 2)])
    def test_matches_generator(self, target):
        res = construct(*target, libraries_for(*target))
        assert keys(res.members) == keys(generate_distinct(Params(*target)).members)

    @pytest.mark.parametrize("flags", [dict(prune=False), dict(reduce_equal_sizes=False),
                                       dict(early_prune=False), dict(engine="python")])
    def test_switches_do_not_change_results(self, flags):
        target = (6, 2, 4, 2)
        base = construct(*target, libraries_for(*target))
        other = construct(*target, libraries_for(*target), **flags)
        assert keys(base.members) == keys(other.members)

    def test_soundness(self):
        target = (6, 2, 5, 2)
        libs = libraries_for(*target)
        res = construct(*target, libs)
        for m in res.members:
            assert verify_strength(m.array, 2)
            split = split_by_last_column(m.array)
            for i in range(2):
                block = canonical_minimum(split.block(i, 1))
                assert block.key in {x.key for x in libs[split.sizes[i]]}

    def test_empty_multisets_skip_libraries(self):
        res = construct(7, 3, 4, 2, libraries=None)
        assert res.members == [] and res.verdict == "nonexistent" and res.multisets == []

    def test_missing_library(self):
        with pytest.raises(MissingLibraryError) as info:
            construct(8, 3, 4, 2, {})
        assert info.value.sizes == [4]
        partial = construct(6, 2, 4, 2, {3: generate_distinct(Params(3, 1, 3, 2))}, allow_partial=True)
        assert not partial.complete
        assert partial.verdict in ("exists", "not-found-partial")

    def test_wrong_library_params(self):
        with pytest.raises(InvalidArgument):
            construct(8, 3, 4, 2, {4: generate_distinct(Params(4, 1, 3, 2))})

    def test_incomplete_library_counts_as_missing(self):
        lib = generate_distinct(Params(4, 2, 3, 2))
        partial = CaLibrary(lib.params, lib.members, complete=False)
        with pytest.raises(MissingLibraryError):
            construct(8, 3, 4, 2, {4: partial})

    def test_existence(self):
        res = construct(8, 3, 4, 2, libraries_for(8, 3, 4, 2))
        assert res.verdict == "exists" and len(res) == 1

    def test_nonexistence(self):
        res = construct(9, 3, 5, 2, libraries_for(9, 3, 5, 2))
        assert res.members == [] and res.verdict == "nonexistent"

    def test_workers_deterministic(self):
        target = (6, 2, 5, 2)
        libs = libraries_for(*target)
        runs = [construct(*target, libs, workers=w) for w in (1, 2, 4)]
        assert all(keys(r.members) == keys(runs[0].members) for r in runs)
        assert all(r.stats.as_dict()["nodes"] == runs[0].stats.nodes for r in runs)

    def test_budget(self):
        target = (9, 2, 4, 3)
        with pytest.raises(BudgetExhausted) as info:
            construct(*target, libraries_for(*target), budget=Budget(nodes=100))
        exc = info.value
        assert exc.partial is not None and not exc.partial.complete
        assert exc.stats.nodes >= 100

    def test_limit(self):
        target = (6, 2, 4, 2)
        res = construct(*target, libraries_for(*target), limit=1)
        assert len(res) >= 1 and not res.complete


class TestCak:
    def test_small(self):
        assert cak(4, 2, 2) == 3
        assert cak(8, 3, 2) == 4
        assert cak(3, 1, 3) >= 1

    def test_full_factorial_lower_bound(self):
        for t, v in [(1, 2), (2, 2), (1, 3)]:
            assert cak(v**t, t, v, k_max=6) >= t

    def test_custom_probe(self):
        assert cak(6, 2, 2, probe=lambda k: k <= 10) == 10

    def test_exists(self):
        assert exists(5, 2, 4, 2)
        assert not exists(5, 2, 5, 2)
        assert not exists(3, 2, 2, 2)
