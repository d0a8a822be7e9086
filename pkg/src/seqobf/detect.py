"""Gap-constrained pattern detection and per-prefix pattern statistics.

A pattern q1..ql is present in a trace when there are indices
i1 < i2 < ... < il with trace[ij] = qj and i(j+1) - ij <= gap for all j.
Detection runs a dynamic program over pattern positions with a sliding
reachability window, O(m*l) time; the exhaustive reference scans used to
validate it live in the test suite.
"""
from __future__ import annotations

from collections import deque
from typing import Iterable

import numpy as np

from .core import Pattern, Trace


def _window_any(mask: np.ndarray, gap: int | None) -> np.ndarray:
    """out[t] = True iff mask is set anywhere in [t-gap, t-1] (or [0, t-1])."""
    m = mask.size
    cs = np.concatenate([[0], np.cumsum(mask, dtype=np.int64)])
    t = np.arange(m)
    if gap is None:
        return cs[t] > 0
    lo = np.maximum(t - gap, 0)
    return (cs[t] - cs[lo]) > 0


def has_pattern(trace: Trace, pattern: Pattern) -> bool:
    """True iff the pattern occurs in the trace under its gap constraint."""
    if max(pattern.symbols) >= trace.alphabet.size:
        raise ValueError(
            f"pattern symbols exceed alphabet 0..{trace.alphabet.size - 1}"
        )
    if pattern.order > trace.length:
        raise ValueError(
            f"pattern of length {pattern.order} cannot occur in a "
            f"trace of length {trace.length}"
        )
    z = trace.symbols
    reach = z == pattern.symbols[0]
    for q in pattern.symbols[1:]:
        if not reach.any():
            return False
        reach = (z == q) & _window_any(reach, pattern.gap)
    return bool(reach.any())


def _contiguous_matches(symbols: np.ndarray, pattern_symbols) -> np.ndarray:
    """Boolean array over start offsets: exact contiguous match at each."""
    q = np.asarray(pattern_symbols, dtype=np.int64)
    n = symbols.size - q.size + 1
    if n <= 0:
        return np.empty(0, dtype=bool)
    hit = np.ones(n, dtype=bool)
    for j, s in enumerate(q):
        hit &= symbols[j : j + n] == s
    return hit


def first_occurrence(trace: Trace, pattern: Pattern) -> int | None:
    """Smallest 1-based index where the pattern occurs contiguously, else None.

    Only defined for gap=1 (contiguous matching).
    """
    if pattern.gap != 1:
        raise ValueError("first_occurrence is defined for gap=1 patterns only")
    if max(pattern.symbols) >= trace.alphabet.size:
        raise ValueError(
            f"pattern symbols exceed alphabet 0..{trace.alphabet.size - 1}"
        )
    hit = _contiguous_matches(trace.symbols, pattern.symbols)
    idx = int(np.argmax(hit)) if hit.any() else None
    return None if idx is None else idx + 1


class PatternStats:
    """Occurrence counts of every length-l pattern over a growing prefix.

    counts[Q] is the number of index tuples realizing Q under the gap
    constraint within the prefix seen so far; multiplicity counts all
    realizing tuples, including overlapping ones.  Appending one symbol
    updates the counts incrementally and is equivalent to recomputation
    from scratch.

    A PatternStats instance is single-owner: update it from one place only.
    """

    def __init__(self, order: int, gap: int | None):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if gap is not None and gap < 1:
            raise ValueError(f"gap must be >= 1 or None, got {gap}")
        self.order = order
        self.gap = gap
        self.prefix_length = 0
        self._counts: dict[tuple[int, ...], int] = {}
        # Symbols that can still head a new tuple: the trailing (l-1)*gap
        # positions, or the whole prefix when the gap is unbounded.
        if gap is None:
            self._tail: deque[int] = deque()
        else:
            self._tail = deque(maxlen=gap * max(1, order - 1))

    @classmethod
    def from_symbols(
        cls, symbols: Iterable[int], order: int, gap: int | None
    ) -> "PatternStats":
        stats = cls(order, gap)
        for s in symbols:
            stats.update(int(s))
        return stats

    @property
    def counts(self) -> dict[tuple[int, ...], int]:
        """Snapshot of all patterns with a positive count."""
        return dict(self._counts)

    def count(self, pattern_symbols) -> int:
        return self._counts.get(tuple(int(s) for s in pattern_symbols), 0)

    @property
    def distinct_patterns(self) -> int:
        """Number of distinct patterns observed at least once."""
        return len(self._counts)

    def recent_symbols(self, width: int | None = None) -> tuple[int, ...]:
        """The trailing min(width, prefix) symbols, oldest first.

        width defaults to the gap; with an unbounded gap the whole retained
        prefix is returned.
        """
        if width is None:
            width = self.gap
        tail = tuple(self._tail)
        return tail if width is None else tail[max(0, len(tail) - width):]

    def update(self, symbol: int) -> "PatternStats":
        """Append one symbol; counts then reflect the extended prefix."""
        symbol = int(symbol)
        if self.order == 1:
            self._counts[(symbol,)] = self._counts.get((symbol,), 0) + 1
        else:
            self._extend_chains(symbol)
        self._tail.append(symbol)
        self.prefix_length += 1
        return self

    def _extend_chains(self, symbol: int) -> None:
        # Each chain of order-1 prior positions, consecutive gaps within
        # bound and reaching the new position, realizes one new tuple.
        tail = self._tail
        n = len(tail)
        # tail[i] sits at distance n - i from the new symbol's position.
        def walk(hi: int, depth: int, suffix: tuple[int, ...]) -> None:
            lo = 0 if self.gap is None else max(0, hi - self.gap)
            for i in range(lo, hi):
                key = (tail[i],) + suffix
                if depth == 1:
                    self._counts[key] = self._counts.get(key, 0) + 1
                else:
                    walk(i, depth - 1, key)

        walk(n, self.order - 1, (symbol,))


def update_stats(stats: PatternStats, symbol: int) -> PatternStats:
    """Append one symbol to the stats (mutating; returns the same object)."""
    return stats.update(symbol)
