from __future__ import annotations

import itertools

import numpy as np
import pytest

from conftest import scramble
from cajux.budget import Budget
from cajux.canonical import are_isomorphic, canonical_minimum, is_minimum
from cajux.core import CoveringArray, Params, verify_strength
from cajux.errors import BudgetExhausted, InvalidArgument
from cajux.generator import CaLibrary, brute_force_distinct, generate_distinct, generate_with_stats


def keys(lib):
    return [m.key for m in lib.members]


@pytest.mark.parametrize(
    "args",
    [(4, 2, 3, 2), (2, 1, 2, 2), (5, 2, 4, 2), (4, 1, 3, 2), (3, 1, 3, 3), (5, 2, 3, 2), (6, 2, 4, 2),
     (4, 1, 2, 3), (8, 3, 3, 2)],
)
def test_matches_brute_force(args):
    p = Params(*args)
    assert keys(generate_distinct(p)) == keys(brute_force_distinct(p))


@pytest.mark.parametrize("args,count", [((3, 2, 3, 2), 0), ((4, 2, 3, 2), 1), ((4, 2, 4, 2), 0),
                                        ((11, 2, 5, 3), 3), ((6, 2, 5, 2), 7)])
def test_counts(args, count):
    assert len(generate_distinct(Params(*args))) == count


def test_members_are_valid_minima():
    lib = generate_distinct(Params(6, 2, 4, 2))
    assert keys(lib) == sorted(keys(lib))
    for m in lib:
        assert verify_strength(m.array, 2)
        assert is_minimum(m.array)
        assert canonical_minimum(m.array) == m
    for a, b in itertools.combinations(lib.members, 2):
        assert not are_isomorphic(a.array, b.array)


def test_every_random_ca_has_its_class(rng):
    """Random CA(6;2,4,2) found by rejection sampling land in the library."""
    p = Params(6, 2, 4, 2)
    lib = set(keys(generate_distinct(p)))
    hits = 0
    while hits < 20:
        cells = rng.integers(0, 2, size=(6, 4))
        if verify_strength(cells, 2, 2):
            hits += 1
            assert canonical_minimum(cells, 2, t=2).key in lib


def test_monotone_nonexistence():
    assert len(generate_distinct(Params(5, 2, 5, 2))) == 0
    assert len(generate_distinct(Params(5, 2, 6, 2))) == 0


def test_workers_do_not_change_output():
    p = Params(6, 2, 5, 2)
    assert keys(generate_distinct(p, workers=1)) == keys(generate_distinct(p, workers=3))


def test_stats():
    lib, stats = generate_with_stats(Params(11, 2, 5, 3))
    assert len(lib) == 3
    assert stats.per_level[-1] == 3 and len(stats.per_level) == 5
    assert stats.nodes > 0 and stats.as_dict()["per_level"].endswith(" 3")


def test_budget_is_an_error():
    with pytest.raises(BudgetExhausted) as info:
        generate_distinct(Params(11, 2, 5, 3), budget=Budget(nodes=50))
    assert info.value.stats.nodes >= 50
    assert info.value.partial is not None and not info.value.partial.complete


def test_brute_force_refuses_large():
    with pytest.raises(InvalidArgument):
        brute_force_distinct(Params(6, 2, 5, 2))


def test_library_invariants(rng):
    lib = generate_distinct(Params(6, 2, 4, 2))
    with pytest.raises(InvalidArgument):
        CaLibrary(lib.params, tuple(reversed(lib.members)))
    with pytest.raises(InvalidArgument):
        CaLibrary(lib.params, (lib[0], lib[0]))
    with pytest.raises(InvalidArgument):
        CaLibrary(Params(6, 2, 4, 3), lib.members)
    merged = CaLibrary.from_forms(lib.params, list(lib.members) * 2)
    assert keys(merged) == keys(lib)


def test_brute_force_small_case():
    lib = brute_force_distinct(Params(2, 1, 2, 2))
    assert [m.array.rows() for m in lib] == [[(0, 0), (1, 1)]]
