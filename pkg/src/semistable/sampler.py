"""Stable / Semi-stable sampler state machine and top-N selection.

A :class:`SamplerState` holds a seed pair ``(s1, s2)`` and an exact
rational refresh accumulator.  Each query's effective uniform comes from
``s1`` unless its refresh hash under ``s1`` is at or below the
accumulator, in which case it comes from ``s2``.  Advancing a period adds
the desired refresh to the accumulator; when it reaches 1 the seeds roll.

Plain sampling is desired refresh 1 (a roll every period), Stable is
desired refresh 0 (never rolls).
"""
from __future__ import annotations

import dataclasses
import enum
import heapq
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .keys import UniformHasher, es_order_key, new_seed


class Mode(str, enum.Enum):
    SRS = "srs"
    WRS = "wrs"


class Variant(str, enum.Enum):
    PLAIN = "plain"
    STABLE = "stable"
    SEMISTABLE = "semistable"


@dataclass(frozen=True)
class PopulationSnapshot:
    """One period's queries and their weights (impressions)."""

    period_index: int
    entries: Mapping[str, int]

    def __post_init__(self):
        if self.period_index < 0:
            raise ValueError("period_index must be non-negative")
        if not self.entries:
            raise ValueError("population is empty")
        for query, weight in self.entries.items():
            if not isinstance(weight, int) or weight < 1:
                raise ValueError(f"weight of {query!r} must be an integer >= 1, got {weight!r}")

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class SamplingPolicy:
    mode: Mode
    variant: Variant
    desired_refresh: Fraction
    sample_size: int

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "desired_refresh", Fraction(self.desired_refresh))
        if not 0 <= self.desired_refresh <= 1:
            raise ValueError(f"desired_refresh must be in [0, 1], got {self.desired_refresh}")
        if self.variant is Variant.STABLE and self.desired_refresh != 0:
            raise ValueError("stable variant requires desired_refresh = 0")
        if self.variant is Variant.PLAIN and self.desired_refresh != 1:
            raise ValueError("plain variant requires desired_refresh = 1")
        if not isinstance(self.sample_size, int) or self.sample_size < 1:
            raise ValueError(f"sample_size must be a positive integer, got {self.sample_size!r}")

    @classmethod
    def plain(cls, mode, sample_size):
        return cls(mode, Variant.PLAIN, Fraction(1), sample_size)

    @classmethod
    def stable(cls, mode, sample_size):
        return cls(mode, Variant.STABLE, Fraction(0), sample_size)

    @classmethod
    def semistable(cls, mode, refresh, sample_size):
        return cls(mode, Variant.SEMISTABLE, Fraction(refresh), sample_size)

    def describe(self) -> str:
        """Canonical one-line text form, e.g. ``wrs:semistable:1/12:1000``."""
        r = self.desired_refresh
        return f"{self.mode.value}:{self.variant.value}:{r.numerator}/{r.denominator}:{self.sample_size}"


@dataclass(frozen=True)
class SamplerState:
    s1: str
    s2: str
    refresh_accumulator: Fraction
    period_index: int
    policy: SamplingPolicy
    namespace: str

    def __post_init__(self):
        if not self.s1 or not self.s2:
            raise ValueError("seeds must be non-empty")
        if self.s1 == self.s2:
            raise ValueError("s1 and s2 must differ")
        if not 0 <= self.refresh_accumulator < 1:
            raise ValueError(f"refresh_accumulator must be in [0, 1), got {self.refresh_accumulator}")
        if self.period_index < 0:
            raise ValueError("period_index must be non-negative")


@dataclass(frozen=True)
class KeyedItem:
    query: str
    weight: int
    effective_uniform: float
    key: float


@dataclass(frozen=True)
class Sample:
    period_index: int
    items: tuple

    @property
    def queries(self) -> list:
        return [item.query for item in self.items]

    def __len__(self):
        return len(self.items)


def init_state(policy: SamplingPolicy, namespace: str) -> SamplerState:
    return SamplerState(
        s1=new_seed(0, namespace),
        s2=new_seed(1, namespace),
        refresh_accumulator=Fraction(0),
        period_index=0,
        policy=policy,
        namespace=namespace,
    )


def advance_period(state: SamplerState) -> SamplerState:
    """Move to the next period, rolling the seed pair once the accumulator hits 1."""
    period = state.period_index + 1
    acc = state.refresh_accumulator + state.policy.desired_refresh
    s1, s2 = state.s1, state.s2
    if acc >= 1:
        # seed index period + 1 never collides: 0 and 1 are taken at init and
        # at most one roll happens per period
        s1, s2 = s2, new_seed(period + 1, state.namespace)
        acc = acc % 1
    return dataclasses.replace(state, s1=s1, s2=s2, refresh_accumulator=acc, period_index=period)


def effective_uniform(state: SamplerState, query: str) -> float:
    return _UniformSource(state)(query)


def uses_second_seed(state: SamplerState, query: str) -> bool:
    """True when ``query`` currently draws its uniform from ``s2``."""
    if state.refresh_accumulator == 0:
        return False
    return UniformHasher(state.s1).refresh(query) <= state.refresh_accumulator


class _UniformSource:
    """Callable query -> effective uniform for a fixed state."""

    def __init__(self, state: SamplerState):
        self._first = UniformHasher(state.s1)
        self._second = UniformHasher(state.s2)
        acc = state.refresh_accumulator
        # refresh hashes lie in (0, 1), so accumulator 0 never routes to s2
        self._always_first = acc == 0
        # exact "x > acc" for doubles x: no double lies strictly between acc
        # and its nearest double, so rounding up turns > into >=
        threshold = float(acc)
        self._threshold = threshold
        self._inclusive = threshold > acc

    def __call__(self, query: str) -> float:
        if self._always_first:
            return self._first.sample(query)
        r = self._first.refresh(query)
        above = r >= self._threshold if self._inclusive else r > self._threshold
        if above:
            return self._first.sample(query)
        return self._second.sample(query)


def _select(keyed: list, sample_size: int) -> tuple:
    keyed.sort(key=lambda item: (-item.key, item.query))
    return tuple(keyed[:sample_size])


def _top(scored, sample_size: int, weights: Mapping[str, int]) -> tuple:
    """Top items from ``(-key, query, u)`` triples; ties go to the smaller query."""
    best = heapq.nsmallest(sample_size, scored)
    return tuple(KeyedItem(query, weights[query], u, -neg_key) for neg_key, query, u in best)


def draw_sample(
    state: SamplerState,
    population: PopulationSnapshot,
    uniform_source: Optional[Mapping[str, float]] = None,
) -> Sample:
    """Top ``sample_size`` queries of ``population`` by order key.

    Equal keys are broken by ascending query string.  ``uniform_source``
    replaces the hashed uniforms; it exists so fixed illustrative numbers
    can be fed in by tests.
    """
    entries = population.entries
    if uniform_source is not None:
        missing = [q for q in entries if q not in uniform_source]
        if missing:
            raise KeyError(f"injected uniform source lacks {len(missing)} queries, e.g. {missing[0]!r}")
        uniform = uniform_source.__getitem__
    else:
        uniform = _UniformSource(state)

    log = math.log
    scored = []
    if state.policy.mode is Mode.SRS:
        for query in entries:
            u = uniform(query)
            scored.append((-log(u), query, u))
    else:
        for query, weight in entries.items():
            u = uniform(query)
            scored.append((-es_order_key(u, weight), query, u))
    return Sample(population.period_index, _top(scored, state.policy.sample_size, entries))


def _fresh_order(population: PopulationSnapshot, seed: str) -> list:
    hasher = UniformHasher(seed)
    keyed = []
    for query, weight in population.entries.items():
        u = hasher.sample(query)
        keyed.append(KeyedItem(query, weight, u, es_order_key(u, weight)))
    keyed.sort(key=lambda item: (-item.key, item.query))
    return keyed


def replace_random_subset_baseline(
    previous: Sample,
    population: PopulationSnapshot,
    fraction,
    trial_seed: str,
) -> Sample:
    """Naive refresh: drop a random subset and top up from a fresh WRS draw.

    ``ceil(fraction * N)`` items are removed uniformly at random.  The
    replacements are the highest-ranked queries of an independent WRS
    ordering of ``population`` (seeded by ``trial_seed``), skipping any
    query that is already kept.  The result is not a valid weighted
    sample; it exists as the comparison baseline.
    """
    fraction = Fraction(fraction)
    if not previous.items:
        raise ValueError("previous sample is empty")
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    size = len(previous.items)
    if len(population) < size:
        raise ValueError(f"population of {len(population)} is smaller than sample size {size}")

    n_replace = math.ceil(fraction * size)
    rng = random.Random(trial_seed)
    dropped = set(rng.sample(range(size), n_replace))
    kept = [item for i, item in enumerate(previous.items) if i not in dropped]
    kept_queries = {item.query for item in kept}

    added = []
    for item in _fresh_order(population, trial_seed):
        if len(added) == n_replace:
            break
        if item.query not in kept_queries:
            added.append(item)
    # kept items carry their old keys; rank the union by key for a stable layout
    return Sample(population.period_index, _select(kept + added, size))
