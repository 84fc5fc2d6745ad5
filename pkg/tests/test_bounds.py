from __future__ import annotations

import math

import pytest

from cajux.bounds import Bound, EXACT, LOWER, binary_strength2, can_bound, is_prime_power
from cajux.errors import InvalidArgument


@pytest.mark.parametrize(
    "args,kind,value",
    [
        ((1, 7, 4), EXACT, 4),
        ((3, 5, 2), EXACT, 10),
        ((2, 10, 2), EXACT, 6),
        ((2, 11, 2), EXACT, 7),
        ((2, 4, 3), EXACT, 9),
        ((2, 5, 3), EXACT, 11),
        ((2, 6, 3), EXACT, 12),
        ((3, 6, 3), EXACT, 33),
        ((3, 4, 3), EXACT, 27),
        ((3, 4, 2), EXACT, 8),
        ((6, 9, 2), LOWER, 107),
        ((4, 7, 3), LOWER, 100),
    ],
)
def test_known_values(args, kind, value):
    b = can_bound(*args)
    assert (b.kind, b.value) == (kind, value)


def test_str():
    assert str(Bound(EXACT, 10)) == "exact 10"
    assert str(can_bound(2, 7, 3)).startswith("lower ")


def test_trivial_families():
    for v in range(2, 6):
        for k in range(1, 8):
            assert can_bound(1, k, v) == Bound(EXACT, v)
        for t in range(1, 5):
            assert can_bound(t, t, v) == Bound(EXACT, v**t)


def test_binary_families():
    for t in range(1, 7):
        assert can_bound(t, t + 1, 2).value == 2**t
    for t in range(2, 7):
        assert can_bound(t, t + 2, 2).value == (4 * 2**t) // 3


def test_binary_strength_two_condition():
    for k in range(2, 16):
        N = can_bound(2, k, 2).value
        assert math.comb(N - 1, math.ceil(N / 2)) >= k
        assert math.comb(N - 2, math.ceil((N - 1) / 2)) < k
    assert binary_strength2(10) == 6


def test_lower_bounds_are_sane():
    for t in range(1, 4):
        for k in range(t, 9):
            for v in (2, 3, 4):
                b = can_bound(t, k, v)
                assert b.value >= v**t
                if k > t:
                    assert b.value >= can_bound(t, k - 1, v).value


def test_prime_power():
    assert [n for n in range(1, 17) if is_prime_power(n)] == [2, 3, 4, 5, 7, 8, 9, 11, 13, 16]


@pytest.mark.parametrize("args", [(3, 2, 2), (0, 2, 2), (2, 3, 1)])
def test_rejects(args):
    with pytest.raises(InvalidArgument):
        can_bound(*args)
