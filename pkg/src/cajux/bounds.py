"""Known covering array numbers and lower bounds.

``can_bound`` answers with an exact value when a closed formula or a
tabulated result applies and with a lower bound otherwise. The lower bound
combines ``v**t``, monotonicity in ``k`` and the block decomposition bound
``CAN(t, k, v) >= v * CAN(t-1, k-1, v)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import InvalidArgument

EXACT = "exact"
LOWER = "lower"

# (t, k, v) -> CAN, results obtained by exhaustive search
KNOWN_EXACT = {
    (2, 5, 3): 11,
    (2, 6, 3): 12,
    (2, 8, 3): 13,
    (3, 6, 3): 33,
    (3, 12, 2): 15,
    (3, 13, 2): 16,
    (4, 7, 2): 24,
    (4, 8, 2): 24,
    (4, 13, 2): 32,
    (5, 8, 2): 52,
    (5, 9, 2): 54,
    (5, 14, 2): 64,
    (6, 15, 2): 128,
    (7, 16, 2): 256,
}

# (t, k, v) -> lower bound established by nonexistence results
KNOWN_LOWER = {
    (6, 9, 2): 107,
    (3, 7, 3): 37,
    (3, 9, 3): 40,
    (4, 7, 3): 100,
}


@dataclass(frozen=True)
class Bound:
    kind: str
    value: int

    @property
    def exact(self) -> bool:
        return self.kind == EXACT

    def __str__(self):
        return f"{self.kind} {self.value}"


def is_prime_power(n: int) -> bool:
    if n < 2:
        return False
    p = next(d for d in range(2, n + 1) if n % d == 0)
    while n % p == 0:
        n //= p
    return n == 1


def binary_strength2(k: int) -> int:
    """Least N with ``comb(N-1, ceil(N/2)) >= k``."""
    N = 1
    while math.comb(N - 1, -(-N // 2)) < k:
        N += 1
    return N


def _formula(t: int, k: int, v: int) -> int | None:
    if t == 1:
        return v
    if t == k:
        return v**t
    if v == 2:
        if t == 2:
            return binary_strength2(k)
        if k == t + 1:
            return 2**t
        if k == t + 2:
            return (4 * 2**t) // 3
    if is_prime_power(v):
        # CAN(t, v+1, v) = v^t for v > t; smaller k is squeezed by v^t
        if v > t and k <= v + 1:
            return v**t
        if v <= t and k == t + 1:
            return v**t
        if t == 3 and v & (v - 1) == 0 and k <= v + 2:
            return v**3
    return KNOWN_EXACT.get((t, k, v))


@lru_cache(maxsize=None)
def _lower(t: int, k: int, v: int) -> int:
    exact = _formula(t, k, v)
    if exact is not None:
        return exact
    best = v**t
    if t >= 2:
        best = max(best, v * _lower(t - 1, k - 1, v))
    for table in (KNOWN_EXACT, KNOWN_LOWER):
        for (tt, kk, vv), value in table.items():
            if tt == t and vv == v and kk <= k:
                best = max(best, value)
    if k > t:
        best = max(best, _lower(t, k - 1, v))
    return best


def _upper(t: int, k: int, v: int) -> int | None:
    """Smallest tabulated CAN for the same t, v and at least k columns."""
    values = [value for (tt, kk, vv), value in KNOWN_EXACT.items() if tt == t and vv == v and kk >= k]
    return min(values) if values else None


def can_bound(t: int, k: int, v: int) -> Bound:
    """Exact CAN(t, k, v) when known, otherwise a lower bound."""
    if v < 2 or t < 1 or t > k:
        raise InvalidArgument(f"need 1 <= t <= k and v >= 2, got t={t} k={k} v={v}")
    exact = _formula(t, k, v)
    if exact is not None:
        return Bound(EXACT, exact)
    low = _lower(t, k, v)
    if _upper(t, k, v) == low:
        return Bound(EXACT, low)
    return Bound(LOWER, low)
