import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from semistable.analytics import (
    churn_model_table,
    cdf_validity,
    empirical_inclusion,
    inclusion_oracle,
    judgment_load,
    overlap,
    overlap_report,
    steady_state_load,
)
from semistable.sampler import KeyedItem, Mode, PopulationSnapshot, Sample, SamplingPolicy

from .fixtures_churn import CHURN_ROWS


def sample_of(queries, period=0, weights=None):
    weights = weights or {}
    return Sample(period, tuple(KeyedItem(q, weights.get(q, 1), 0.5, -1.0) for q in queries))


def pop(entries, period=0):
    return PopulationSnapshot(period, dict(entries))


def brute_force_inclusion(entries, m):
    """Sum over every ordered pick sequence, exact rational arithmetic."""
    total = sum(entries.values())
    probs = dict.fromkeys(entries, Fraction(0))
    for order in itertools.permutations(entries, m):
        p = Fraction(1)
        left = total
        for q in order:
            p *= Fraction(entries[q], left)
            left -= entries[q]
        for q in order:
            probs[q] += p
    return probs


def test_overlap_examples():
    assert overlap(sample_of("abcd"), sample_of("dcba")) == 1.0
    assert overlap(sample_of("abcd"), sample_of("efgh")) == 0.0
    assert overlap(sample_of("abcd"), sample_of("cdef")) == 0.5
    with pytest.raises(ValueError):
        overlap(sample_of("abc"), sample_of("ab"))


@given(st.lists(st.sampled_from("abcdefghij"), min_size=3, max_size=3, unique=True),
       st.lists(st.sampled_from("abcdefghij"), min_size=3, max_size=3, unique=True))
def test_overlap_symmetric(a, b):
    assert overlap(sample_of(a), sample_of(b)) == overlap(sample_of(b), sample_of(a))


def test_overlap_report_conventions():
    run = [sample_of("ab", 0), sample_of("bc", 1), sample_of("cd", 2)]
    assert overlap_report(run).period_pairs == [(0, 1, 0.5), (1, 2, 0.5)]
    assert overlap_report(run, against_first=True).period_pairs == [(0, 1, 0.5), (0, 2, 0.0)]


def test_judgment_load_examples():
    assert judgment_load([sample_of("abcde")]).per_period == [(0, 5)]
    assert judgment_load([sample_of("abc", 0), sample_of("abc", 1)]).per_period == [(0, 3), (1, 0)]
    run = [sample_of("ab", 0), sample_of("bc", 1), sample_of("ac", 2)]
    assert [n for _, n in judgment_load(run).per_period] == [2, 1, 0]


@given(st.lists(st.sets(st.sampled_from("abcdefgh"), min_size=4, max_size=4), min_size=2, max_size=6))
def test_load_bounds_overlap_on_first_pair(sets):
    run = [sample_of(sorted(s), i) for i, s in enumerate(sets)]
    loads = [n for _, n in judgment_load(run).per_period]
    assert loads[0] == 4
    assert all(n <= 4 for n in loads)
    # no history before period 0, so the bound is tight
    assert loads[1] == 4 * (1 - overlap(run[0], run[1]))


def test_steady_state_load():
    assert steady_state_load(0.07, 1 / 12) == pytest.approx(0.1475, abs=1e-12)
    assert round(steady_state_load(0.07, 1 / 12), 2) == 0.15
    assert steady_state_load(0.3, 0) == 0.3
    assert steady_state_load(0, 0) == 0


@pytest.mark.parametrize("row", CHURN_ROWS, ids=lambda r: f"d={r[0]}")
def test_churn_model_matches_printed_table(row):
    model = churn_model_table(0.93, 12)[row[0]]
    got = (model.nat_ret, model.nat_churn, model.refresh, model.refresh_churn, model.combined_churn, model.final_overlap)
    for printed, value in zip(row[1:], got):
        assert abs(printed - value) <= 0.005


@given(st.floats(min_value=0.01, max_value=1.0), st.integers(1, 36))
def test_churn_rows_satisfy_identities(base, horizon):
    rows = churn_model_table(base, horizon)
    assert len(rows) == horizon + 1
    for r in rows:
        assert r.nat_ret == base**r.d
        assert r.refresh == min(r.d / horizon, 1.0)
        assert r.nat_churn == 1 - r.nat_ret
        assert r.refresh_churn == r.refresh * r.nat_ret
        assert r.combined_churn == r.nat_churn + r.refresh_churn
        assert r.final_overlap == min(1.0, max(0.0, 1 - r.combined_churn))


def test_cdf_identical_when_sample_is_whole_equal_weight_population():
    p = pop({q: 4 for q in "abcdef"})
    report = cdf_validity(p, sample_of("abcdef", weights={q: 4 for q in "abcdef"}))
    assert report.max_deviation == 0
    assert report.population_volume_cdf == report.sample_count_cdf == [1.0]


def test_cdf_single_heavy_query():
    p = pop({"heavy": 30, "l1": 5, "l2": 5})
    report = cdf_validity(p, sample_of(["heavy"], weights={"heavy": 30}))
    assert report.thresholds == [5, 30]
    assert report.max_deviation == pytest.approx(10 / 40)


def test_cdf_rejects_empty_sample():
    with pytest.raises(ValueError):
        cdf_validity(pop({"a": 1}), Sample(0, ()))


@given(st.dictionaries(st.text(min_size=1, max_size=3), st.integers(1, 20), min_size=1, max_size=15), st.data())
def test_cdfs_monotone_and_end_at_one(entries, data):
    chosen = data.draw(st.lists(st.sampled_from(sorted(entries)), min_size=1, unique=True))
    report = cdf_validity(pop(entries), sample_of(chosen, weights=entries))
    for cdf in (report.population_volume_cdf, report.sample_count_cdf):
        assert all(a <= b for a, b in zip(cdf, cdf[1:]))
        assert cdf[-1] == 1.0


def test_oracle_hand_example():
    probs = inclusion_oracle(pop({"A": 2, "B": 1, "C": 1}), 2)
    assert probs["A"] == pytest.approx(5 / 6, abs=1e-12)
    assert probs["B"] == pytest.approx(7 / 12, abs=1e-12)
    assert probs["C"] == pytest.approx(7 / 12, abs=1e-12)


def test_oracle_edge_cases():
    assert inclusion_oracle(pop({"A": 1, "B": 1}), 1) == {"A": 0.5, "B": 0.5}
    assert all(p == pytest.approx(1.0) for p in inclusion_oracle(pop({"a": 3, "b": 1, "c": 9}), 3).values())
    with pytest.raises(ValueError):
        inclusion_oracle(pop({f"q{i}": 1 for i in range(11)}), 2)
    with pytest.raises(ValueError):
        inclusion_oracle(pop({"a": 1}), 2)


small_pops = st.dictionaries(st.sampled_from("ABCDEFG"), st.integers(1, 40), min_size=1, max_size=6)


@settings(max_examples=60)
@given(small_pops, st.data())
def test_oracle_matches_permutation_enumeration(entries, data):
    m = data.draw(st.integers(1, len(entries)))
    dp = inclusion_oracle(pop(entries), m)
    exact = brute_force_inclusion(entries, m)
    for q in entries:
        assert dp[q] == pytest.approx(float(exact[q]), abs=1e-12)


@given(st.dictionaries(st.text(min_size=1, max_size=3), st.integers(1, 10**6), min_size=1, max_size=9), st.data())
def test_oracle_sums_to_m_and_top1_closed_form(entries, data):
    m = data.draw(st.integers(1, len(entries)))
    probs = inclusion_oracle(pop(entries), m)
    assert math.fsum(probs.values()) == pytest.approx(m, abs=1e-12)
    top1 = inclusion_oracle(pop(entries), 1)
    total = sum(entries.values())
    for q, w in entries.items():
        assert top1[q] == pytest.approx(w / total, rel=1e-12)


def test_empirical_inclusion_stable_is_period_invariant():
    static = pop({"A": 3, "B": 1, "C": 2, "D": 1})
    policy = SamplingPolicy.stable(Mode.WRS, 2)
    seq = [PopulationSnapshot(t, static.entries) for t in range(4)]
    assert empirical_inclusion(policy, seq, 0, 2000, "st") == empirical_inclusion(policy, seq, 3, 2000, "st")


def test_empirical_inclusion_plain_close_to_oracle():
    p = pop({"A": 2, "B": 1, "C": 1})
    freq = empirical_inclusion(SamplingPolicy.plain(Mode.WRS, 2), [p], 0, 20_000, "plain-unit-")
    oracle = inclusion_oracle(p, 2)
    for q in p.entries:
        sigma = math.sqrt(oracle[q] * (1 - oracle[q]) / 20_000)
        assert abs(freq[q] - oracle[q]) <= 4 * sigma
