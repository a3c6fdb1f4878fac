"""Population TSV ingestion, sampler-state and sample persistence, CSV reports.

All files are UTF-8 with LF line endings.  Writes go to a temporary file in
the target directory and are renamed into place, so readers never see a
partial file.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from .analytics import CdfReport, LoadReport, OverlapReport
from .sampler import KeyedItem, PopulationSnapshot, Sample, SamplerState, SamplingPolicy

STATE_FORMAT = "semistable-state/1"


class PopulationFormatError(ValueError):
    """Base class for population-file problems."""


class MalformedLineError(PopulationFormatError):
    pass


class DuplicateQueryError(PopulationFormatError):
    pass


class NonPositiveWeightError(PopulationFormatError):
    pass


class StateFormatError(ValueError):
    pass


class SampleFormatError(ValueError):
    pass


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_fraction(text: str) -> Fraction:
    """Parse ``"p/q"`` (or a bare integer) into an exact Fraction."""
    text = text.strip()
    num, sep, den = text.partition("/")
    try:
        if sep:
            return Fraction(int(num), int(den))
        return Fraction(int(num))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"expected a rational 'p/q', got {text!r}") from exc


def format_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


# -- populations ------------------------------------------------------------

def parse_population(text: str, period_index: int = 0, source: str = "<string>") -> PopulationSnapshot:
    entries = {}
    first_seen = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line.endswith("\r"):
            line = line[:-1]
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0]:
            raise MalformedLineError(f"{source}:{lineno}: expected 'query<TAB>weight', got {line!r}")
        query, raw_weight = parts
        try:
            weight = int(raw_weight.strip())
        except ValueError:
            raise MalformedLineError(f"{source}:{lineno}: weight {raw_weight!r} is not an integer") from None
        if weight < 1:
            raise NonPositiveWeightError(
                f"{source}:{lineno}: weight of {query!r} is {weight}; queries with no impressions "
                "are not part of the population"
            )
        if query in entries:
            raise DuplicateQueryError(
                f"{source}:{lineno}: duplicate query {query!r} (first on line {first_seen[query]})"
            )
        entries[query] = weight
        first_seen[query] = lineno
    if not entries:
        raise MalformedLineError(f"{source}: population is empty")
    return PopulationSnapshot(period_index, entries)


def read_population(path, period_index: int = 0) -> PopulationSnapshot:
    return parse_population(Path(path).read_text(encoding="utf-8"), period_index, str(path))


def write_population(population: PopulationSnapshot, path) -> None:
    lines = []
    for query, weight in population.entries.items():
        if "\t" in query or "\n" in query:
            raise ValueError(f"query {query!r} contains a TAB or newline")
        lines.append(f"{query}\t{weight}\n")
    atomic_write_text(path, "".join(lines))


# -- sampler state ----------------------------------------------------------

def state_to_dict(state: SamplerState) -> dict:
    policy = state.policy
    return {
        "format": STATE_FORMAT,
        "namespace": state.namespace,
        "policy": {
            "mode": policy.mode.value,
            "variant": policy.variant.value,
            "desired_refresh": format_fraction(policy.desired_refresh),
            "sample_size": policy.sample_size,
        },
        "s1": state.s1,
        "s2": state.s2,
        "refresh_accumulator": format_fraction(state.refresh_accumulator),
        "period_index": state.period_index,
    }


def state_from_dict(data: dict) -> SamplerState:
    try:
        if data.get("format") != STATE_FORMAT:
            raise StateFormatError(f"unknown state format {data.get('format')!r}")
        p = data["policy"]
        policy = SamplingPolicy(p["mode"], p["variant"], parse_fraction(p["desired_refresh"]), p["sample_size"])
        return SamplerState(
            s1=data["s1"],
            s2=data["s2"],
            refresh_accumulator=parse_fraction(data["refresh_accumulator"]),
            period_index=data["period_index"],
            policy=policy,
            namespace=data["namespace"],
        )
    except StateFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise StateFormatError(f"invalid sampler state: {exc}") from exc


def dumps_state(state: SamplerState) -> str:
    return json.dumps(state_to_dict(state), indent=2, sort_keys=True) + "\n"


def write_state(state: SamplerState, path) -> None:
    atomic_write_text(path, dumps_state(state))


def read_state(path) -> SamplerState:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"{path}: not valid JSON: {exc}") from exc
    return state_from_dict(data)


# -- samples ----------------------------------------------------------------

def policy_digest(policy: SamplingPolicy) -> str:
    return hashlib.md5(policy.describe().encode("utf-8")).hexdigest()


SAMPLE_COLUMNS = ("rank", "query", "weight", "order_key", "effective_uniform")


def dumps_sample(sample: Sample, policy: SamplingPolicy | None = None) -> str:
    out = [f"# period_index\t{sample.period_index}\n"]
    if policy is not None:
        out.append(f"# policy\t{policy.describe()}\n")
        out.append(f"# policy_digest\t{policy_digest(policy)}\n")
    out.append("\t".join(SAMPLE_COLUMNS) + "\n")
    for rank, item in enumerate(sample.items, start=1):
        out.append(f"{rank}\t{item.query}\t{item.weight}\t{item.key!r}\t{item.effective_uniform!r}\n")
    return "".join(out)


def write_sample(sample: Sample, path, policy: SamplingPolicy | None = None) -> None:
    atomic_write_text(path, dumps_sample(sample, policy))


def parse_sample(text: str, source: str = "<string>") -> Sample:
    period_index = None
    items = []
    header_seen = False
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        if not header_seen and line.startswith("# "):
            name, _, value = line[2:].partition("\t")
            if name == "period_index":
                period_index = int(value)
            continue
        if not header_seen:
            if tuple(line.split("\t")) != SAMPLE_COLUMNS:
                raise SampleFormatError(f"{source}:{lineno}: unexpected column header {line!r}")
            header_seen = True
            continue
        parts = line.split("\t")
        if len(parts) != len(SAMPLE_COLUMNS):
            raise SampleFormatError(f"{source}:{lineno}: expected {len(SAMPLE_COLUMNS)} columns")
        rank, query, weight, key, u = parts
        if int(rank) != len(items) + 1:
            raise SampleFormatError(f"{source}:{lineno}: ranks must be contiguous from 1")
        item = KeyedItem(query, int(weight), float(u), float(key))
        if items and item.key > items[-1].key:
            raise SampleFormatError(f"{source}:{lineno}: order keys must be non-increasing")
        items.append(item)
    if period_index is None:
        raise SampleFormatError(f"{source}: missing '# period_index' header")
    return Sample(period_index, tuple(items))


def read_sample(path) -> Sample:
    return parse_sample(Path(path).read_text(encoding="utf-8"), str(path))


# -- CSV reports ------------------------------------------------------------

def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def overlap_csv(report: OverlapReport) -> str:
    return csv_text(("period_a", "period_b", "overlap"), report.period_pairs)


def load_csv(report: LoadReport) -> str:
    return csv_text(("period", "new_judgments"), report.per_period)


CHURN_COLUMNS = ("d", "nat_ret", "nat_churn", "refresh", "refresh_churn", "combined_churn", "final_overlap")


def churn_csv(rows) -> str:
    return csv_text(CHURN_COLUMNS, ([getattr(r, c) for c in CHURN_COLUMNS] for r in rows))


def cdf_csv(report: CdfReport) -> str:
    rows = zip(report.thresholds, report.population_volume_cdf, report.sample_count_cdf)
    return csv_text(("threshold", "population_volume_cdf", "sample_count_cdf"), rows)


def cdf_series_csv(reports) -> str:
    """Per-period CDF reports stacked into one table with a leading period column."""
    rows = []
    for period, report in reports:
        for row in zip(report.thresholds, report.population_volume_cdf, report.sample_count_cdf):
            rows.append((period, *row))
    return csv_text(("period", "threshold", "population_volume_cdf", "sample_count_cdf"), rows)


def read_overlap_csv(text: str) -> OverlapReport:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    return OverlapReport([(int(a), int(b), float(o)) for a, b, o in rows])


def read_load_csv(text: str) -> LoadReport:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    return LoadReport([(int(p), int(n)) for p, n in rows])


def read_cdf_csv(text: str) -> CdfReport:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    thresholds = [int(r[0]) for r in rows]
    pop = [float(r[1]) for r in rows]
    smp = [float(r[2]) for r in rows]
    return CdfReport(thresholds, pop, smp, max((abs(a - b) for a, b in zip(pop, smp)), default=0.0))


def write_timeline(run, out_dir) -> None:
    """One CSV per report, the samples, and a manifest of the run inputs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "namespace": run.namespace,
        "periods": run.periods,
        "policy": run.policy.describe(),
        "spec": run.spec.describe(),
    }
    atomic_write_text(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    atomic_write_text(out / "overlap_first.csv", overlap_csv(run.first_overlap))
    atomic_write_text(out / "overlap_consecutive.csv", overlap_csv(run.consecutive_overlap))
    atomic_write_text(out / "load.csv", load_csv(run.load))
    atomic_write_text(out / "cdf.csv", cdf_series_csv(zip(range(run.periods), run.cdf)))
    sample_rows = (
        (s.period_index, rank, item.query, item.weight, repr(item.key))
        for s in run.samples
        for rank, item in enumerate(s.items, start=1)
    )
    atomic_write_text(out / "samples.csv", csv_text(("period", "rank", "query", "weight", "order_key"), sample_rows))
