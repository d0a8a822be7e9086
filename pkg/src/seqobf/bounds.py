"""Closed-form privacy lower bounds and the asymptotic parameter schedule.

The bounds give, for each obfuscation construction, a guaranteed minimum
probability that an arbitrary identifying pattern of length l appears in
another user's obfuscated trace.  Both have the shape

    prefactor * sum over feasible pattern placements of a Chernoff term,

with prefactor (1 - (1-p)^gap)^(l-1) / r^l covering the inter-element
distance constraints and the placement uniformity of the noise stream.
The concatenation construction advances l stream symbols per placement,
the shortest construction one, which is where the two evaluations differ.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .superstring import DEFAULT_SIZE_CAP, _check_params


@dataclass(frozen=True)
class BoundParams:
    """Parameters of one bound evaluation.

    trace_length m, alphabet size r, pattern length l, gap h, and the
    per-position replacement probability.  The effective trial count
    g = m - h*(l-1) must be positive for the bound to be meaningful.
    """

    trace_length: int
    alphabet_size: int
    order: int
    gap: int
    p_obf: float

    def __post_init__(self) -> None:
        if self.trace_length < 1:
            raise ValueError("trace_length must be >= 1")
        if self.alphabet_size < 2:
            raise ValueError("alphabet_size must be >= 2")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.gap < 1:
            raise ValueError("gap must be >= 1")
        if not 0.0 <= self.p_obf <= 1.0:
            raise ValueError(f"p_obf must be in [0, 1], got {self.p_obf}")
        if self.effective_trials <= 0:
            raise ValueError(
                f"m - h*(l-1) = {self.effective_trials} <= 0: "
                "trace too short for this gap and pattern length"
            )

    @property
    def effective_trials(self) -> int:
        return self.trace_length - self.gap * (self.order - 1)


def _placement_sum(gp: float, k_max: int, stride: int) -> float:
    """Sum of 1 - exp(-(1 - alpha*stride/gp)^2 * gp / 2) for alpha=0..k_max."""
    if k_max < 0:
        return 0.0
    alphas = np.arange(k_max + 1, dtype=np.float64)
    delta = 1.0 - alphas * stride / gp
    terms = 1.0 - np.exp(-0.5 * delta * delta * gp)
    # Terms decay with alpha; accumulate smallest-first.
    return float(math.fsum(terms[::-1]))


def _bound(params: BoundParams, stride: int) -> float:
    p = params.p_obf
    if p == 0.0:
        return 0.0
    g = params.effective_trials
    gp = g * p
    r_pow_l = params.alphabet_size**params.order
    k_max = min(r_pow_l - 1, math.floor(gp / stride))
    prefactor = (1.0 - (1.0 - p) ** params.gap) ** (params.order - 1) / r_pow_l
    value = prefactor * _placement_sum(gp, k_max, stride)
    return min(max(value, 0.0), 1.0)


def bound_sbu(params: BoundParams) -> float:
    """Guarantee for the concatenation-superstring construction.

    Placements advance l stream symbols each, so at most floor(g*p/l) of
    them can be reached by g*p expected replacements.
    """
    return _bound(params, stride=params.order)


def bound_slsbu(params: BoundParams) -> float:
    """Guarantee for the shortest-superstring construction.

    Placements advance one stream symbol each; the bound dominates
    bound_sbu at equal parameters.
    """
    return _bound(params, stride=1)


@dataclass(frozen=True)
class ScheduleParams:
    """Inputs for the growing-population parameter schedule.

    With n users, pattern length l > 1, privacy exponent beta in (0, 1) and
    slack theta in (0, (1-beta)/(l-1)), the schedule prescribes a noise
    level decaying in n and an admissible alphabet-size range.
    """

    n_users: int
    order: int
    gap: int
    beta: float
    theta: float
    trace_length: int

    def __post_init__(self) -> None:
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        if self.order < 2:
            raise ValueError("the schedule requires order > 1")
        if self.gap < 1:
            raise ValueError("gap must be >= 1")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must be in (0, 1), got {self.beta}")
        limit = (1.0 - self.beta) / (self.order - 1)
        if not 0.0 < self.theta < limit:
            raise ValueError(
                f"theta must be in the open interval (0, {limit}), got {self.theta}"
            )
        if self.trace_length < 1:
            raise ValueError("trace_length must be >= 1")


@dataclass(frozen=True)
class Schedule:
    """Derived schedule quantities at one population size."""

    scale: float             # d = m * n^(-(1-beta)/(l-1))
    noise_level: float       # p_obf = n^(-(1-beta)/(l-1) + theta)
    alphabet_min: float      # [d * n^theta]^(1/l)
    alphabet_max: float      # [d * n^(theta*l)]^(1/l)
    noise_samples: float     # m * noise_level
    noise_samples_ok: bool   # noise_samples >= 9
    crowd_threshold: float   # n^beta / 2


def schedule(params: ScheduleParams) -> Schedule:
    """Evaluate the schedule arithmetic at the given n."""
    n = float(params.n_users)
    m = float(params.trace_length)
    decay = (1.0 - params.beta) / (params.order - 1)
    noise = n ** (-decay + params.theta)
    scale = m * n**-decay
    r_min = (scale * n**params.theta) ** (1.0 / params.order)
    r_max = (scale * n ** (params.theta * params.order)) ** (1.0 / params.order)
    samples = m * noise
    return Schedule(
        scale=scale,
        noise_level=noise,
        alphabet_min=r_min,
        alphabet_max=r_max,
        noise_samples=samples,
        noise_samples_ok=samples >= 9.0,
        crowd_threshold=n**params.beta / 2.0,
    )


@dataclass(frozen=True)
class FirstOccurrenceExpectation:
    """Expected index of a random pattern's first contiguous occurrence."""

    superstring_stream: float  # exactly (r^l + 1) / 2
    iid_stream_lower: float    # at least r^l


def expected_first_occurrence(
    alphabet_size: int, order: int, size_cap: int = DEFAULT_SIZE_CAP
) -> FirstOccurrenceExpectation:
    """Closed-form expectations for the two pure noise streams."""
    _check_params(alphabet_size, order, size_cap)
    n = alphabet_size**order
    return FirstOccurrenceExpectation(
        superstring_stream=(n + 1) / 2.0,
        iid_stream_lower=float(n),
    )
