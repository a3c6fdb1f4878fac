"""Consecutive-period overlap for four refresh policies on the synthetic
query-log population.  Writes one timeline directory per policy plus a
summary CSV.

    python3 scripts/policy_overlap.py --out runs/policies
"""
import argparse
from fractions import Fraction
from pathlib import Path

from semistable import io
from semistable.sampler import Mode, SamplingPolicy
from semistable.simulate import IRP_LIKE, run_timeline


def policies(size):
    return {
        "stable": SamplingPolicy.stable(Mode.WRS, size),
        "semistable-10pct": SamplingPolicy.semistable(Mode.WRS, Fraction(1, 10), size),
        "semistable-20pct": SamplingPolicy.semistable(Mode.WRS, Fraction(1, 5), size),
        "plain": SamplingPolicy.plain(Mode.WRS, size),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1000)
    ap.add_argument("--periods", type=int, default=12)
    ap.add_argument("--out", type=Path, default=Path("runs/policies"))
    args = ap.parse_args(argv)

    rows = []
    for name, policy in policies(args.size).items():
        run = run_timeline(policy, IRP_LIKE, args.periods, f"policies-{name}")
        io.write_timeline(run, args.out / name)
        loads = [n for _, n in run.load.per_period[1:]]
        rows.append((
            name,
            f"{run.mean_consecutive_overlap():.4f}",
            f"{sum(loads) / len(loads):.1f}",
            f"{max(r.max_deviation for r in run.cdf):.4f}",
        ))
        print(*rows[-1], sep="\t")
    header = ("policy", "mean_consecutive_overlap", "mean_load_after_first", "max_cdf_deviation")
    io.atomic_write_text(args.out / "summary.csv", io.csv_text(header, rows))


if __name__ == "__main__":
    main()
