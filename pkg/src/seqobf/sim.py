"""Monte Carlo experiment harness.

Scenarios:

* fraction — the unique-pattern protocol: non-target users' traces are
  drawn over a reduced alphabet of size r-l, the target carries the
  reserved pattern [r-l, ..., r-1], everyone is obfuscated, and the
  estimate is the fraction of non-target users whose obfuscated trace
  contains the pattern.
* first_occurrence — the race between a pure iid noise stream and a pure
  shortest-superstring noise stream to the first contiguous occurrence of
  a random pattern.
* crowd_count — binomial sanity counts for the number of users sharing a
  pattern at a given per-user match probability.
* bounds_table — deterministic evaluation of both closed-form bounds at
  the spec's parameters.

Streams are keyed by (master seed, iteration, user, purpose), so results
are identical for any worker count and adding iterations, users or methods
never perturbs existing draws.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .core import Alphabet, Pattern, RandomSource, Trace
from .detect import _contiguous_matches, has_pattern
from .engines import METHODS, EngineConfig, obfuscate
from .superstring import DEFAULT_SIZE_CAP, _check_params, _shortest_array
from . import bounds as bounds_mod
from . import ingest as ingest_mod

SCENARIOS = ("fraction", "first_occurrence", "bounds_table", "crowd_count")


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one experiment run."""

    scenario: str
    alphabet_size: int
    order: int
    gap: int | None
    trace_length: int
    p_obf: float
    methods: tuple[str, ...] = ("iid", "sl_sbu")
    n_users: int = 100
    iterations: int = 1000
    master_seed: int = 0
    trace_source: str = "synthetic_iid"
    trace_file: str | None = None
    gamma: float = 0.1
    match_probability: float | None = None
    beta: float | None = None

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.n_users < 2 and self.scenario == "fraction":
            raise ValueError("the fraction scenario needs at least 2 users")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.trace_source not in ("synthetic_iid", "ingested"):
            raise ValueError(f"unknown trace source {self.trace_source!r}")
        if self.trace_source == "ingested" and not self.trace_file:
            raise ValueError("ingested trace source requires trace_file")
        if self.scenario == "fraction" and self.alphabet_size - self.order < 1:
            raise ValueError(
                "unique-pattern protocol needs alphabet_size - order >= 1"
            )
        if not 0.0 <= self.p_obf <= 1.0:
            raise ValueError(f"p_obf must be in [0, 1], got {self.p_obf}")


@dataclass(frozen=True)
class ExperimentResult:
    """Per-cell records plus total wall-clock seconds."""

    records: tuple[dict, ...]
    wall_clock: float


def _engine_config(spec: ExperimentSpec, method: str) -> EngineConfig:
    return EngineConfig(
        method=method,
        p_obf=spec.p_obf,
        order=spec.order,
        gamma=spec.gamma,
        gap=spec.gap if method == "manp" else None,
    )


def insert_unique_pattern(
    base: Trace,
    alphabet_size: int,
    order: int,
    source: RandomSource,
    gap: int | None = 1,
) -> tuple[Trace, Pattern]:
    """Overwrite a random window of the base trace with the reserved pattern.

    The base trace must use only symbols below alphabet_size - order; the
    pattern [r-l, ..., r-1] then cannot occur anywhere else, making it
    unique to this trace by construction.
    """
    r, l = alphabet_size, order
    if base.length < l:
        raise ValueError("base trace shorter than the pattern")
    if base.symbols.max() >= r - l:
        raise ValueError(
            f"base trace must stay below symbol {r - l} to keep the pattern unique"
        )
    pattern = Pattern(tuple(range(r - l, r)), gap=gap)
    start = int(source.generator.integers(base.length - l + 1))
    symbols = base.symbols.copy()
    symbols[start : start + l] = pattern.symbols
    return Trace(symbols, Alphabet(r)), pattern


def _load_trace_pool(spec: ExperimentSpec) -> list[np.ndarray]:
    reduced = spec.alphabet_size - spec.order
    traces = ingest_mod.read_trace_file(spec.trace_file, reduced)
    pool = [t.symbols for t in traces if t.length >= spec.trace_length]
    if not pool:
        raise ValueError(
            f"no ingested trace is at least {spec.trace_length} symbols long"
        )
    return pool


def _base_symbols(
    spec: ExperimentSpec, gen: np.random.Generator, pool: list[np.ndarray] | None
) -> np.ndarray:
    if pool is None:
        return gen.integers(0, spec.alphabet_size - spec.order, size=spec.trace_length)
    symbols = pool[int(gen.integers(len(pool)))]
    start = int(gen.integers(symbols.size - spec.trace_length + 1))
    return symbols[start : start + spec.trace_length]


def _fraction_iterations(
    spec: ExperimentSpec, start: int, stop: int
) -> tuple[np.ndarray, int]:
    """Pattern-hit counts per method over iterations [start, stop)."""
    root = RandomSource(spec.master_seed)
    alphabet = Alphabet(spec.alphabet_size)
    pattern = Pattern(
        tuple(range(spec.alphabet_size - spec.order, spec.alphabet_size)),
        gap=spec.gap,
    )
    configs = [_engine_config(spec, m) for m in spec.methods]
    pool = _load_trace_pool(spec) if spec.trace_source == "ingested" else None
    hits = np.zeros(len(configs), dtype=np.int64)
    samples = 0
    for it in range(start, stop):
        # User 0 is the target; its trace pins down the pattern placement
        # but does not enter the estimate.
        target_gen = root.derive(it, 0, 0)
        base = Trace(
            _base_symbols(spec, target_gen.generator, pool), Alphabet(spec.alphabet_size)
        )
        insert_unique_pattern(
            base, spec.alphabet_size, spec.order, target_gen, gap=spec.gap
        )
        for u in range(1, spec.n_users):
            x = _base_symbols(spec, root.derive(it, u, 0).generator, pool)
            trace = Trace(x, alphabet)
            for j, config in enumerate(configs):
                z = obfuscate(trace, config, root.derive(it, u, 1 + j))
                if has_pattern(z, pattern):
                    hits[j] += 1
            samples += 1
    return hits, samples


def run_fraction(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """The unique-pattern fraction protocol; one record per method."""
    if spec.scenario != "fraction":
        raise ValueError(f"run_fraction got scenario {spec.scenario!r}")
    t0 = time.perf_counter()
    if workers > 1 and spec.iterations > 1:
        edges = np.linspace(0, spec.iterations, workers + 1, dtype=int)
        chunks = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if a < b]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_fraction_iterations, *zip(*[(spec, a, b) for a, b in chunks])))
        hits = np.sum([h for h, _ in parts], axis=0)
        samples = sum(s for _, s in parts)
    else:
        hits, samples = _fraction_iterations(spec, 0, spec.iterations)
    records = []
    for method, h in zip(spec.methods, hits):
        estimate = h / samples
        records.append(
            {
                "scenario": spec.scenario,
                "method": method,
                "m": spec.trace_length,
                "r": spec.alphabet_size,
                "l": spec.order,
                "h": spec.gap,
                "p_obf": spec.p_obf,
                "iterations": spec.iterations,
                "n_users": spec.n_users,
                "samples": samples,
                "estimate": float(estimate),
                "std_error": float(np.sqrt(max(estimate * (1 - estimate), 0.0) / samples)),
            }
        )
    return ExperimentResult(tuple(records), time.perf_counter() - t0)


def _first_hit(buffer: np.ndarray, pattern_symbols: np.ndarray) -> int | None:
    hit = _contiguous_matches(buffer, pattern_symbols)
    return int(np.argmax(hit)) if hit.any() else None


def _scan_iid_stream(
    gen: np.random.Generator, pattern: np.ndarray, alphabet_size: int, chunk: int
) -> int:
    """1-based index of the pattern's first occurrence in a fresh iid stream.

    The stream is materialized chunk by chunk, carrying the last l-1
    symbols across the boundary so occurrences spanning chunks are seen.
    """
    order = pattern.size
    consumed = 0
    carry = np.empty(0, dtype=np.int64)
    while True:
        buffer = np.concatenate([carry, gen.integers(0, alphabet_size, size=chunk)])
        hit = _first_hit(buffer, pattern)
        if hit is not None:
            return consumed + hit + 1
        n_starts = buffer.size - order + 1
        consumed += n_starts
        carry = buffer[n_starts:]


def run_first_occurrence_race(
    alphabet_size: int,
    order: int,
    iterations: int,
    master_seed: int = 0,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> ExperimentResult:
    """Race the two pure noise streams to a random pattern's first occurrence.

    Per iteration a pattern of the given order is drawn with iid uniform
    letters, and both streams are extended until each contains it
    contiguously.  Records the mean first-occurrence indices and the
    probability that the iid stream is strictly slower.
    """
    _check_params(alphabet_size, order, size_cap)
    t0 = time.perf_counter()
    root = RandomSource(master_seed)
    n = alphabet_size**order
    chunk = max(4 * n, 1024)
    first_iid = np.empty(iterations, dtype=np.float64)
    first_super = np.empty(iterations, dtype=np.float64)
    for it in range(iterations):
        gen = root.derive(it).generator
        q = gen.integers(0, alphabet_size, size=order)
        # The superstring stream contains any pattern exactly once per
        # drawn superstring, so the first draw always settles it.
        stream = _shortest_array(alphabet_size, order, gen)
        hit = _first_hit(stream, q)
        assert hit is not None
        first_super[it] = hit + 1
        first_iid[it] = _scan_iid_stream(gen, q, alphabet_size, chunk)
    record = {
        "scenario": "first_occurrence",
        "r": alphabet_size,
        "l": order,
        "iterations": iterations,
        "mean_first_iid": float(first_iid.mean()),
        "se_first_iid": float(first_iid.std(ddof=1) / np.sqrt(iterations)),
        "mean_first_superstring": float(first_super.mean()),
        "se_first_superstring": float(first_super.std(ddof=1) / np.sqrt(iterations)),
        "prob_iid_later": float((first_iid > first_super).mean()),
    }
    return ExperimentResult((record,), time.perf_counter() - t0)


def run_crowd_count(spec: ExperimentSpec) -> ExperimentResult:
    """Sample the count of pattern-sharing users and its tail frequency.

    Each of n_users users independently shares the pattern with the given
    match probability; the record holds the mean count and the frequency
    of counts at or above the n^beta / 2 threshold.
    """
    if spec.scenario != "crowd_count":
        raise ValueError(f"run_crowd_count got scenario {spec.scenario!r}")
    if spec.match_probability is None or spec.beta is None:
        raise ValueError("crowd_count requires match_probability and beta")
    if not 0.0 <= spec.match_probability <= 1.0:
        raise ValueError("match_probability must be in [0, 1]")
    t0 = time.perf_counter()
    gen = RandomSource(spec.master_seed).generator
    counts = gen.binomial(spec.n_users, spec.match_probability, size=spec.iterations)
    threshold = spec.n_users**spec.beta / 2.0
    freq = float((counts >= threshold).mean())
    record = {
        "scenario": spec.scenario,
        "n_users": spec.n_users,
        "match_probability": spec.match_probability,
        "beta": spec.beta,
        "iterations": spec.iterations,
        "mean_count": float(counts.mean()),
        "threshold": threshold,
        "frequency_above": freq,
        "std_error": float(np.sqrt(max(freq * (1 - freq), 0.0) / spec.iterations)),
    }
    return ExperimentResult((record,), time.perf_counter() - t0)


def run_bounds_table(spec: ExperimentSpec) -> ExperimentResult:
    """Deterministic evaluation of both closed-form bounds at the spec."""
    if spec.gap is None:
        raise ValueError("bounds require a finite gap")
    t0 = time.perf_counter()
    params = bounds_mod.BoundParams(
        trace_length=spec.trace_length,
        alphabet_size=spec.alphabet_size,
        order=spec.order,
        gap=spec.gap,
        p_obf=spec.p_obf,
    )
    record = {
        "scenario": "bounds_table",
        "m": spec.trace_length,
        "r": spec.alphabet_size,
        "l": spec.order,
        "h": spec.gap,
        "p_obf": spec.p_obf,
        "bound_sbu": bounds_mod.bound_sbu(params),
        "bound_slsbu": bounds_mod.bound_slsbu(params),
    }
    return ExperimentResult((record,), time.perf_counter() - t0)


def sweep(
    spec: ExperimentSpec, p_values: Sequence[float], workers: int = 1
) -> ExperimentResult:
    """Run the fraction protocol over a grid of noise levels.

    Every cell reuses the same master seed, so the replacement masks are
    coupled monotonically across the grid and ordering comparisons between
    noise levels carry less Monte Carlo noise.
    """
    t0 = time.perf_counter()
    records: list[dict] = []
    for p in p_values:
        cell = replace(spec, p_obf=float(p))
        records.extend(run_fraction(cell, workers=workers).records)
    return ExperimentResult(tuple(records), time.perf_counter() - t0)


def run(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Dispatch a spec to its scenario runner."""
    if spec.scenario == "fraction":
        return run_fraction(spec, workers=workers)
    if spec.scenario == "first_occurrence":
        return run_first_occurrence_race(
            spec.alphabet_size, spec.order, spec.iterations, spec.master_seed
        )
    if spec.scenario == "crowd_count":
        return run_crowd_count(spec)
    return run_bounds_table(spec)


def write_csv(records: Iterable[dict], path) -> None:
    """Write records as CSV with a header row (union of keys, first-seen order)."""
    import csv

    records = list(records)
    fields: list[str] = []
    for rec in records:
        for key in rec:
            if key not in fields:
                fields.append(key)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for rec in records:
            writer.writerow(rec)
