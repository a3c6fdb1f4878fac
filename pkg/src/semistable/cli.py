"""Command-line entry point: ``semistable <command> [flags]``."""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import analytics, io, simulate
from .sampler import Mode, SamplingPolicy, Variant, advance_period, draw_sample, init_state


def _fraction(text: str) -> Fraction:
    try:
        return io.parse_fraction(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit(text: str, out) -> None:
    if out:
        io.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _policy(args) -> SamplingPolicy:
    variant = Variant(args.variant)
    refresh = args.refresh
    if refresh is None:
        refresh = {Variant.PLAIN: Fraction(1), Variant.STABLE: Fraction(0)}.get(variant)
        if refresh is None:
            raise ValueError("--refresh is required for the semistable variant")
    return SamplingPolicy(Mode(args.mode), variant, refresh, args.size)


def _population_spec(args) -> simulate.PopulationSpec:
    if args.uniform_max is not None:
        dist = simulate.UniformWeights(args.uniform_max)
    else:
        dist = simulate.PowerLaw(args.alpha)
    return simulate.PopulationSpec(args.universe, dist, args.churn, args.jitter, args.generator_seed)


def cmd_init(args):
    state = init_state(_policy(args), args.namespace)
    io.write_state(state, args.state)


def cmd_sample(args):
    state = io.read_state(args.state)
    population = io.read_population(args.population, period_index=state.period_index)
    if len(population) < state.policy.sample_size:
        print(
            f"warning: population has {len(population)} queries, fewer than sample size "
            f"{state.policy.sample_size}; sampling all of them",
            file=sys.stderr,
        )
    sample = draw_sample(state, population)
    text = io.dumps_sample(sample, state.policy)
    _emit(text, args.out)


def cmd_roll(args):
    state = io.read_state(args.state)
    io.write_state(advance_period(state), args.state)


def cmd_overlap(args):
    a, b = io.read_sample(args.a), io.read_sample(args.b)
    report = analytics.OverlapReport([(a.period_index, b.period_index, analytics.overlap(a, b))])
    _emit(io.overlap_csv(report), args.out)


def cmd_load(args):
    samples = sorted((io.read_sample(p) for p in args.samples), key=lambda s: s.period_index)
    _emit(io.load_csv(analytics.judgment_load(samples)), args.out)


def cmd_churn_model(args):
    _emit(io.churn_csv(analytics.churn_model_table(args.base, args.horizon)), args.out)


def cmd_validate_cdf(args):
    population = io.read_population(args.population)
    report = analytics.cdf_validity(population, io.read_sample(args.sample))
    _emit(io.cdf_csv(report), args.out)
    print(f"max_deviation\t{report.max_deviation!r}", file=sys.stderr)


def cmd_simulate(args):
    run = simulate.run_timeline(_policy(args), _population_spec(args), args.periods, args.namespace)
    io.write_timeline(run, args.out)


def cmd_compare(args):
    rows = simulate.compare_approaches(
        _population_spec(args),
        args.periods,
        sample_size=args.size,
        refresh=args.refresh,
        resample_every=args.resample_every,
        baseline_fraction=args.baseline_fraction,
        namespace=args.namespace,
    )
    header = ("approach", "name", "mean_consecutive_overlap", "mean_judgment_load")
    _emit(io.csv_text(header, ([r[h] for h in header] for r in rows)), args.out)


def cmd_oracle(args):
    probs = analytics.inclusion_oracle(io.read_population(args.population), args.m)
    _emit(io.csv_text(("query", "inclusion_probability"), sorted(probs.items())), args.out)


def _add_policy_flags(p, *, size_default=None):
    p.add_argument("--mode", choices=[m.value for m in Mode], default="wrs")
    p.add_argument("--variant", choices=[v.value for v in Variant], default="semistable")
    p.add_argument("--refresh", type=_fraction, default=None, help="desired refresh per period as p/q")
    p.add_argument("--size", type=int, required=size_default is None, default=size_default, help="sample size N")


def _add_population_flags(p):
    d = simulate.IRP_LIKE
    p.add_argument("--universe", type=int, default=d.universe_size)
    p.add_argument("--alpha", type=float, default=d.weight_distribution.alpha, help="power-law exponent")
    p.add_argument("--uniform-max", type=int, default=None, help="use uniform weights in 1..MAX instead")
    p.add_argument("--churn", type=float, default=d.monthly_churn, help="share of queries replaced per period")
    p.add_argument("--jitter", type=float, default=d.weight_jitter, help="multiplicative weight noise bound")
    p.add_argument("--generator-seed", default=d.generator_seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semistable", description="Stable and semi-stable query sampling.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="write an initial sampler state")
    p.add_argument("--namespace", required=True)
    _add_policy_flags(p)
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("sample", help="draw the current period's sample (state is not modified)")
    p.add_argument("--state", required=True)
    p.add_argument("--population", required=True, help="TSV: query<TAB>weight")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("roll", help="advance the state by one period, in place")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_roll)

    p = sub.add_parser("overlap", help="overlap of two sample files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("load", help="judgment load over a series of sample files")
    p.add_argument("samples", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_load)

    p = sub.add_parser("churn-model", help="analytic refresh / retention / overlap table")
    p.add_argument("--base", type=float, default=0.93, help="natural retention per period")
    p.add_argument("--horizon", type=int, default=12, help="periods for a full refresh")
    p.add_argument("--out")
    p.set_defaults(func=cmd_churn_model)

    p = sub.add_parser("validate-cdf", help="population volume CDF vs sample count CDF")
    p.add_argument("--population", required=True)
    p.add_argument("--sample", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate_cdf)

    p = sub.add_parser("simulate", help="run a synthetic multi-period timeline")
    _add_policy_flags(p, size_default=1000)
    _add_population_flags(p)
    p.add_argument("--periods", type=int, default=12)
    p.add_argument("--namespace", default="simulate")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="compare the six refresh approaches")
    _add_population_flags(p)
    p.add_argument("--size", type=int, default=1000)
    p.add_argument("--refresh", type=_fraction, default=Fraction(1, 10))
    p.add_argument("--resample-every", type=int, default=12)
    p.add_argument("--baseline-fraction", type=_fraction, default=Fraction(1, 10))
    p.add_argument("--periods", type=int, default=12)
    p.add_argument("--namespace", default="compare")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="exact inclusion probabilities for a tiny population")
    p.add_argument("--population", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"semistable {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
