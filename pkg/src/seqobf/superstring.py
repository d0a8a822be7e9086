"""Construction and verification of covering superstrings.

An (r, l)-superstring contains every length-l string over a size-r alphabet
as a contiguous (non-cyclic) substring.  Two constructions are provided:

* concatenation form: all r^l blocks laid end to end in random order,
  length l * r^l;
* shortest form: a rotated de Bruijn cycle of order l with its first l-1
  symbols repeated at the end, length r^l + l - 1, which is minimal.

Rotation offsets and block orders are drawn uniformly so that, over many
draws, any fixed block is equally likely to sit at any position.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import RandomSource

# Refuse to materialize cycles longer than this many symbols.
DEFAULT_SIZE_CAP = 2**24

KINDS = ("concatenation", "shortest")


def _check_params(alphabet_size: int, order: int, size_cap: int) -> None:
    if alphabet_size < 2:
        raise ValueError(f"alphabet size must be >= 2, got {alphabet_size}")
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    # Compare in log space so huge orders cannot overflow.
    if order * np.log(alphabet_size) > np.log(size_cap) + 1e-9:
        raise ValueError(
            f"{alphabet_size}^{order} exceeds the size cap of {size_cap} symbols"
        )


@dataclass(frozen=True, eq=False)
class Superstring:
    """A verified covering sequence plus its construction provenance."""

    symbols: np.ndarray
    alphabet_size: int
    order: int
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        arr = np.asarray(self.symbols, dtype=np.int64).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "symbols", arr)
        expected = (
            self.order * self.alphabet_size**self.order
            if self.kind == "concatenation"
            else self.alphabet_size**self.order + self.order - 1
        )
        if arr.size != expected:
            raise ValueError(
                f"{self.kind} superstring for r={self.alphabet_size}, "
                f"l={self.order} must have length {expected}, got {arr.size}"
            )

    def __len__(self) -> int:
        return int(self.symbols.size)


@lru_cache(maxsize=64)
def _canonical_cycle(alphabet_size: int, order: int) -> np.ndarray:
    """One fixed de Bruijn cycle per (r, l), via concatenated Lyndon words."""
    k, n = alphabet_size, order
    seq: list[int] = []
    a = [0] * (k * (n + 1))

    def extend(t: int, p: int) -> None:
        if t > n:
            if n % p == 0:
                seq.extend(a[1 : p + 1])
        else:
            a[t] = a[t - p]
            extend(t + 1, p)
            for j in range(a[t - p] + 1, k):
                a[t] = j
                extend(t + 1, t)

    extend(1, 1)
    out = np.array(seq, dtype=np.int64)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=32)
def _all_blocks(alphabet_size: int, order: int) -> np.ndarray:
    """All r^l length-l strings as rows, in lexicographic order."""
    r, l = alphabet_size, order
    idx = np.arange(r**l, dtype=np.int64)
    blocks = np.empty((r**l, l), dtype=np.int64)
    for pos in range(l):
        blocks[:, pos] = (idx // r ** (l - 1 - pos)) % r
    blocks.flags.writeable = False
    return blocks


def de_bruijn(
    alphabet_size: int, order: int, size_cap: int = DEFAULT_SIZE_CAP
) -> np.ndarray:
    """A de Bruijn cycle: length r^l, every length-l string once cyclically."""
    _check_params(alphabet_size, order, size_cap)
    return _canonical_cycle(alphabet_size, order).copy()


def _shortest_array(
    alphabet_size: int, order: int, gen: np.random.Generator
) -> np.ndarray:
    """Uniformly rotated de Bruijn cycle with the cyclic wrap made explicit."""
    cycle = _canonical_cycle(alphabet_size, order)
    offset = int(gen.integers(cycle.size))
    rotated = np.roll(cycle, -offset)
    if order == 1:
        return rotated
    return np.concatenate([rotated, rotated[: order - 1]])


def _concat_array(
    alphabet_size: int, order: int, gen: np.random.Generator
) -> np.ndarray:
    """All r^l blocks laid end to end in a uniformly random order."""
    blocks = _all_blocks(alphabet_size, order)
    return blocks[gen.permutation(blocks.shape[0])].ravel()


def shortest_superstring(
    alphabet_size: int,
    order: int,
    source: RandomSource,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> Superstring:
    """A minimum-length covering sequence, length r^l + l - 1.

    The underlying cycle is rotated by a uniform offset before the wrap
    symbols are appended, so the position of any fixed length-l string is
    uniform over 1..r^l across draws.
    """
    _check_params(alphabet_size, order, size_cap)
    symbols = _shortest_array(alphabet_size, order, source.generator)
    return Superstring(symbols, alphabet_size, order, "shortest")


def concat_superstring(
    alphabet_size: int,
    order: int,
    source: RandomSource,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> Superstring:
    """The concatenation-form covering sequence, length l * r^l.

    Block α occupies positions α*l+1 .. (α+1)*l for a uniformly random
    assignment of blocks to slots, so any fixed block is equally likely to
    sit in each of the r^l slots.
    """
    _check_params(alphabet_size, order, size_cap)
    symbols = _concat_array(alphabet_size, order, source.generator)
    return Superstring(symbols, alphabet_size, order, "concatenation")


def _window_codes(seq: np.ndarray, alphabet_size: int, order: int) -> np.ndarray:
    """Base-r codes of every in-range length-l window of seq."""
    n_windows = seq.size - order + 1
    if n_windows <= 0:
        return np.empty(0, dtype=np.int64)
    valid = (seq >= 0) & (seq < alphabet_size)
    codes = np.zeros(n_windows, dtype=np.int64)
    ok = np.ones(n_windows, dtype=bool)
    for j in range(order):
        codes = codes * alphabet_size + seq[j : j + n_windows]
        ok &= valid[j : j + n_windows]
    return codes[ok]


def verify_superstring(seq, alphabet_size: int, order: int,
                       size_cap: int = DEFAULT_SIZE_CAP) -> bool:
    """True iff every length-l string over the alphabet occurs as a
    contiguous linear substring of seq (no cyclic wrap allowed)."""
    _check_params(alphabet_size, order, size_cap)
    arr = np.asarray(seq, dtype=np.int64)
    codes = _window_codes(arr, alphabet_size, order)
    return int(np.unique(codes).size) == alphabet_size**order
