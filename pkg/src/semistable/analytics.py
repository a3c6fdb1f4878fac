"""Overlap, judgment load, CDF validity, the analytic churn model, and the
exact inclusion-probability oracle used to validate samplers."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sampler import (
    PopulationSnapshot,
    Sample,
    SamplingPolicy,
    advance_period,
    draw_sample,
    init_state,
)

MAX_ORACLE_POPULATION = 10


@dataclass(frozen=True)
class OverlapReport:
    period_pairs: list  # (period_a, period_b, overlap_fraction)


@dataclass(frozen=True)
class LoadReport:
    per_period: list  # (period_index, new_judgments)


@dataclass(frozen=True)
class ChurnModelRow:
    d: int
    nat_ret: float
    nat_churn: float
    refresh: float
    refresh_churn: float
    combined_churn: float
    final_overlap: float


@dataclass(frozen=True)
class CdfReport:
    thresholds: list
    population_volume_cdf: list
    sample_count_cdf: list
    max_deviation: float


def overlap(a: Sample, b: Sample) -> float:
    """Shared queries over the (common) sample size."""
    if len(a) != len(b):
        raise ValueError(f"sample sizes differ: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise ValueError("cannot measure overlap of empty samples")
    return len(set(a.queries) & set(b.queries)) / len(a)


def overlap_report(samples: Sequence[Sample], *, against_first: bool = False) -> OverlapReport:
    """Consecutive overlaps, or first-vs-each when ``against_first`` is set."""
    pairs = []
    for prev, cur in zip(samples, samples[1:]):
        ref = samples[0] if against_first else prev
        pairs.append((ref.period_index, cur.period_index, overlap(ref, cur)))
    return OverlapReport(pairs)


def judgment_load(run: Sequence[Sample]) -> LoadReport:
    """New judgments per period, reusing any judgment from any earlier period."""
    seen = set()
    rows = []
    for sample in run:
        queries = set(sample.queries)
        rows.append((sample.period_index, len(queries - seen)))
        seen |= queries
    return LoadReport(rows)


def steady_state_load(natural_churn: float, refresh: float) -> float:
    if not (0 <= natural_churn <= 1 and 0 <= refresh <= 1):
        raise ValueError("natural_churn and refresh must lie in [0, 1]")
    return natural_churn + refresh - natural_churn * refresh


def churn_row(d: int, nat_ret: float, refresh: float) -> ChurnModelRow:
    nat_churn = 1 - nat_ret
    refresh_churn = refresh * nat_ret
    combined = nat_churn + refresh_churn
    final = min(1.0, max(0.0, 1 - combined))
    return ChurnModelRow(d, nat_ret, nat_churn, refresh, refresh_churn, combined, final)


def churn_model_table(nat_ret_base: float, horizon: int) -> list:
    """Analytic overlap model: natural retention ``base**d`` plus a linear
    refresh schedule reaching 1 at ``horizon``."""
    if not 0 < nat_ret_base <= 1:
        raise ValueError(f"nat_ret_base must be in (0, 1], got {nat_ret_base}")
    if horizon < 1:
        raise ValueError("horizon must be positive")
    return [churn_row(d, nat_ret_base**d, min(d / horizon, 1.0)) for d in range(horizon + 1)]


def cdf_validity(population: PopulationSnapshot, sample: Sample) -> CdfReport:
    """Compare the population's impression-volume CDF with the sample's count CDF.

    For a valid weighted sample, the share of sampled queries with weight
    <= t should track the share of impressions carried by such queries.
    """
    if len(sample) == 0:
        raise ValueError("sample is empty")
    weights = np.fromiter(population.entries.values(), dtype=np.int64, count=len(population))
    thresholds, inverse = np.unique(weights, return_inverse=True)
    volume = np.bincount(inverse, weights=weights.astype(np.float64))
    population_cdf = np.cumsum(volume) / volume.sum()

    sampled_weights = np.array([item.weight for item in sample.items], dtype=np.int64)
    # count of sampled queries with weight <= t, for each threshold t
    sample_cdf = np.searchsorted(np.sort(sampled_weights), thresholds, side="right") / len(sample)
    population_cdf[-1] = 1.0  # cumsum rounding
    deviation = float(np.max(np.abs(population_cdf - sample_cdf)))
    return CdfReport(thresholds.tolist(), population_cdf.tolist(), sample_cdf.tolist(), deviation)


def inclusion_oracle(population: PopulationSnapshot, m: int) -> dict:
    """Exact inclusion probabilities of successive weighted sampling of ``m`` items.

    Each pick is made with probability proportional to weight among the
    items not yet picked.  Computed by dynamic programming over picked
    subsets, i.e. a full enumeration of all pick orders.
    """
    queries = sorted(population.entries)
    n = len(queries)
    if n > MAX_ORACLE_POPULATION:
        raise ValueError(f"oracle enumerates subsets; population of {n} exceeds {MAX_ORACLE_POPULATION}")
    if not 1 <= m <= n:
        raise ValueError(f"m must be in [1, {n}], got {m}")
    weights = [population.entries[q] for q in queries]
    total = sum(weights)

    # reach[mask] = probability that the first popcount(mask) picks are exactly mask
    reach = {0: 1.0}
    for _ in range(m):
        nxt = {}
        for mask, p in reach.items():
            remaining = total - sum(w for i, w in enumerate(weights) if mask >> i & 1)
            for i, w in enumerate(weights):
                if not mask >> i & 1:
                    key = mask | 1 << i
                    nxt[key] = nxt.get(key, 0.0) + p * w / remaining
        reach = nxt

    probs = [0.0] * n
    for mask, p in reach.items():
        for i in range(n):
            if mask >> i & 1:
                probs[i] += p
    return dict(zip(queries, probs))


def empirical_inclusion(
    policy: SamplingPolicy,
    population_sequence: Sequence[PopulationSnapshot],
    target_period: int,
    trials: int,
    trial_namespace_prefix: str,
) -> dict:
    """Monte Carlo inclusion frequencies at ``target_period``.

    Trial ``i`` runs a sampler in namespace ``prefix + str(i)`` through
    periods ``0..target_period``.  The sample is only drawn at the target
    period; the state evolution does not depend on earlier draws.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= target_period < len(population_sequence):
        raise ValueError("target_period outside the population sequence")
    population = population_sequence[target_period]
    counts = Counter()
    for i in range(trials):
        state = init_state(policy, f"{trial_namespace_prefix}{i}")
        for _ in range(target_period):
            state = advance_period(state)
        counts.update(draw_sample(state, population).queries)
    return {q: counts[q] / trials for q in population.entries}
