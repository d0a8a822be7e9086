"""Obfuscation engines: per-trace symbol replacement mechanisms.

Every engine follows the same frame: a Bernoulli(p_obf) mask decides which
positions are replaced, and the method decides the replacement symbols.
Positions outside the mask always carry the original symbol.

Data-independent methods draw replacements ahead of the data:

* iid      — fresh uniform symbols;
* sbu      — a concatenation-form covering superstring consumed in order;
* sl_sbu   — a shortest covering superstring consumed in order;
* two_stage — iid then sl_sbu composed, with independent sub-streams.

Data-dependent methods pick each replacement from the realized obfuscated
prefix:

* lov  — uniform over symbols not yet present in the prefix;
* plov — weighted toward less-frequent symbols via a tilted histogram;
* manp — the symbol completing the most previously-unseen length-2
  patterns with a predecessor in the trailing window.

For reproducibility each engine consumes its stream in a fixed order: the
whole replacement mask first (one uniform per position), then replacement
draws in stream order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sstats

from .core import RandomSource, Trace
from .detect import PatternStats
from .superstring import (
    DEFAULT_SIZE_CAP,
    _check_params,
    _concat_array,
    _shortest_array,
)

METHODS = ("iid", "sbu", "sl_sbu", "two_stage", "lov", "plov", "manp")


@dataclass(frozen=True)
class EngineConfig:
    """Method tag plus its parameters.

    p_obf applies to every method except two_stage, whose per-stage noise
    levels come from stage_noise.  order is the covering-superstring order
    for sbu/sl_sbu/two_stage; gamma is the plov tilt exponent; gap is the
    manp predecessor-window width.
    """

    method: str
    p_obf: float = 0.0
    order: int = 2
    gamma: float = 0.1
    gap: int | None = None
    stage_noise: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0.0 <= self.p_obf <= 1.0:
            raise ValueError(f"p_obf must be in [0, 1], got {self.p_obf}")
        if self.method in ("sbu", "sl_sbu", "two_stage") and self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if self.method == "plov" and self.gamma <= 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.method == "manp" and (self.gap is None or self.gap < 1):
            raise ValueError("manp requires a predecessor window gap >= 1")
        if self.method == "two_stage":
            a, b = self.stage_noise
            if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
                raise ValueError(f"stage noise levels must be in [0, 1], got {self.stage_noise}")


def _replacement_stream(
    gen: np.random.Generator, alphabet_size: int, order: int, kind: str, count: int
) -> np.ndarray:
    """The first `count` symbols of the covering-superstring noise stream.

    Superstrings are drawn independently and concatenated until the stream
    is long enough; a fresh one is drawn whenever the previous is used up.
    """
    parts: list[np.ndarray] = []
    have = 0
    while have < count:
        if kind == "concatenation":
            part = _concat_array(alphabet_size, order, gen)
        else:
            part = _shortest_array(alphabet_size, order, gen)
        parts.append(part)
        have += part.size
    if not parts:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(parts)[:count]


def lov_choose(observed: np.ndarray, source: RandomSource) -> int:
    """Uniform over symbols not yet observed; uniform over all once covered."""
    gen = source.generator
    missing = np.flatnonzero(~observed)
    if missing.size == 0:
        return int(gen.integers(observed.size))
    return int(missing[gen.integers(missing.size)])


def plov_distribution(counts: np.ndarray, gamma: float) -> np.ndarray:
    """Replacement distribution tilted toward less-observed symbols.

    From the prefix histogram, q_i ~ (counts_i / k)^gamma normalized; the
    output is (1+b)/r - b*q_i with b chosen just inside the largest value
    keeping every probability in [0, 1].  Empty or flat histograms yield
    the uniform distribution.
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    counts = np.asarray(counts, dtype=np.float64)
    r = counts.size
    k = counts.sum()
    if k <= 0:
        return np.full(r, 1.0 / r)
    tilted = (counts / k) ** gamma
    q = tilted / tilted.sum()
    q_max, q_min = float(q.max()), float(q.min())
    if q_max - q_min < 1e-15:
        return np.full(r, 1.0 / r)
    b = 0.99 * min(1.0 / (r * q_max - 1.0), (r - 1.0) / (1.0 - r * q_min))
    p = (1.0 + b) / r - b * q
    if p.min() < 0.0 or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"degenerate replacement distribution for counts {counts}")
    return p


def manp_choose(
    stats: PatternStats, alphabet_size: int, source: RandomSource
) -> int:
    """The symbol completing the most unseen length-2 patterns.

    A candidate i scores one point per distinct symbol a in the trailing
    window such that the pattern (a, i) has not been observed yet; ties are
    broken uniformly at random.  With an empty window every candidate
    scores zero and the choice is uniform.
    """
    scores = np.zeros(alphabet_size, dtype=np.int64)
    for a in set(stats.recent_symbols()):
        for i in range(alphabet_size):
            if stats.count((a, i)) == 0:
                scores[i] += 1
    best = np.flatnonzero(scores == scores.max())
    return int(best[source.generator.integers(best.size)])


def _obfuscate_independent(
    x: np.ndarray, alphabet_size: int, config: EngineConfig, gen: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    mask = gen.random(x.size) < config.p_obf
    k = int(mask.sum())
    if config.method == "iid":
        replacements = gen.integers(0, alphabet_size, size=k)
    else:
        kind = "concatenation" if config.method == "sbu" else "shortest"
        _check_params(alphabet_size, config.order, DEFAULT_SIZE_CAP)
        replacements = _replacement_stream(gen, alphabet_size, config.order, kind, k)
    z = x.copy()
    z[mask] = replacements
    return z, mask


def _obfuscate_lov(
    x: np.ndarray, alphabet_size: int, config: EngineConfig, source: RandomSource
) -> tuple[np.ndarray, np.ndarray]:
    gen = source.generator
    mask = gen.random(x.size) < config.p_obf
    z = x.copy()
    observed = np.zeros(alphabet_size, dtype=bool)
    for t in range(x.size):
        if mask[t]:
            z[t] = lov_choose(observed, source)
        observed[z[t]] = True
    return z, mask


def _obfuscate_plov(
    x: np.ndarray, alphabet_size: int, config: EngineConfig, source: RandomSource
) -> tuple[np.ndarray, np.ndarray]:
    gen = source.generator
    mask = gen.random(x.size) < config.p_obf
    z = x.copy()
    counts = np.zeros(alphabet_size, dtype=np.int64)
    for t in range(x.size):
        if mask[t]:
            p = plov_distribution(counts, config.gamma)
            z[t] = gen.choice(alphabet_size, p=p)
        counts[z[t]] += 1
    return z, mask


def _obfuscate_manp(
    x: np.ndarray, alphabet_size: int, config: EngineConfig, source: RandomSource
) -> tuple[np.ndarray, np.ndarray]:
    gen = source.generator
    mask = gen.random(x.size) < config.p_obf
    z = x.copy()
    stats = PatternStats(order=2, gap=config.gap)
    for t in range(x.size):
        if mask[t]:
            z[t] = manp_choose(stats, alphabet_size, source)
        stats.update(int(z[t]))
    return z, mask


def obfuscate(
    trace: Trace,
    config: EngineConfig,
    source: RandomSource,
    *,
    return_mask: bool = False,
):
    """Apply one obfuscation method to a trace.

    Returns the obfuscated Trace, or (Trace, mask) with return_mask=True,
    where mask marks the replaced positions (for two_stage, positions
    touched by either stage).
    """
    r = trace.alphabet.size
    x = trace.symbols
    if config.method == "two_stage":
        a, b = config.stage_noise
        return two_stage_obfuscate(
            trace, a, b, config.order, source, return_mask=return_mask
        )
    if config.method in ("iid", "sbu", "sl_sbu"):
        z, mask = _obfuscate_independent(x, r, config, source.generator)
    elif config.method == "lov":
        z, mask = _obfuscate_lov(x, r, config, source)
    elif config.method == "plov":
        z, mask = _obfuscate_plov(x, r, config, source)
    else:
        z, mask = _obfuscate_manp(x, r, config, source)
    out = Trace(z, trace.alphabet)
    return (out, mask) if return_mask else out


def two_stage_obfuscate(
    trace: Trace,
    first_noise: float,
    second_noise: float,
    order: int,
    source: RandomSource,
    *,
    return_mask: bool = False,
):
    """iid obfuscation at first_noise, then sl_sbu at second_noise.

    The stages consume the derived sub-streams source.derive(0) and
    source.derive(1), so setting either noise level to zero leaves the
    other stage's draws unchanged.  A position is touched when either
    stage's mask selects it, which happens with probability
    first_noise + second_noise - first_noise*second_noise.
    """
    first = EngineConfig(method="iid", p_obf=first_noise)
    second = EngineConfig(method="sl_sbu", p_obf=second_noise, order=order)
    mid, mask_a = obfuscate(trace, first, source.derive(0), return_mask=True)
    out, mask_b = obfuscate(mid, second, source.derive(1), return_mask=True)
    if return_mask:
        return out, mask_a | mask_b
    return out


def lov_bound(trace_length: int, alphabet_size: int, p_obf: float) -> float:
    """Lower bound on the single-symbol coverage probability under lov.

    With k replacements the prefix-unseen rule covers at least min(k, r)
    distinct symbols, so a target symbol is hit with probability at least
    k/r for k < r and surely for k >= r; averaging over the binomial
    replacement count gives the bound.
    """
    if trace_length < 1:
        raise ValueError("trace_length must be >= 1")
    if alphabet_size < 2:
        raise ValueError("alphabet_size must be >= 2")
    if not 0.0 <= p_obf <= 1.0:
        raise ValueError(f"p_obf must be in [0, 1], got {p_obf}")
    m, r = trace_length, alphabet_size
    ks = np.arange(min(r, m + 1))
    head = sstats.binom.pmf(ks, m, p_obf) * ks / r
    tail = sstats.binom.sf(r - 1, m, p_obf)
    return float(min(1.0, head.sum() + tail))
