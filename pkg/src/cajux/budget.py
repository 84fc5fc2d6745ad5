"""Wall-clock and node-count budgets shared by the long-running searches."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from .errors import InvalidArgument


@dataclass
class Budget:
    """Limits for one run. ``None`` means unlimited.

    Workers call :meth:`charge` with the nodes they explored and poll
    :meth:`exhausted`; the caller that notices raises ``BudgetExhausted``
    with its own progress statistics.
    """

    seconds: float | None = None
    nodes: int | None = None
    _start: float = field(default_factory=time.monotonic, init=False, repr=False)
    _used: int = field(default=0, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        if self.seconds is not None and self.seconds <= 0:
            raise InvalidArgument(f"time budget must be positive, got {self.seconds}")
        if self.nodes is not None and self.nodes <= 0:
            raise InvalidArgument(f"node budget must be positive, got {self.nodes}")

    def restart(self) -> None:
        with self._lock:
            self._start = time.monotonic()
            self._used = 0

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self._start

    @property
    def used(self) -> int:
        return self._used

    def charge(self, n: int) -> None:
        with self._lock:
            self._used += int(n)

    def allowance(self, chunk: int) -> int:
        """How many nodes the next uninterrupted step may explore."""
        if self.nodes is None:
            return chunk
        return max(1, min(chunk, self.nodes - self._used))

    def exhausted(self) -> bool:
        if self.nodes is not None and self._used >= self.nodes:
            return True
        return self.seconds is not None and self.elapsed >= self.seconds

    def describe(self) -> str:
        parts = []
        if self.seconds is not None:
            parts.append(f"{self.elapsed:.1f}s of {self.seconds:g}s")
        if self.nodes is not None:
            parts.append(f"{self._used} of {self.nodes} nodes")
        return ", ".join(parts) or "unlimited"
