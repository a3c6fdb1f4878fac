"""Print the analytic churn table next to a simulated first-period overlap.

    python3 scripts/churn_model.py --refresh 1/12
"""
import argparse

from semistable import io
from semistable.analytics import churn_model_table
from semistable.sampler import Mode, SamplingPolicy
from semistable.simulate import IRP_LIKE, run_timeline


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--refresh", type=io.parse_fraction, default=io.parse_fraction("1/12"))
    ap.add_argument("--size", type=int, default=1000)
    ap.add_argument("--no-sim", action="store_true", help="analytic table only")
    args = ap.parse_args(argv)

    horizon = round(1 / args.refresh)
    model = churn_model_table(1 - IRP_LIKE.monthly_churn, horizon)
    simulated = {}
    if not args.no_sim:
        policy = SamplingPolicy.semistable(Mode.WRS, args.refresh, args.size)
        run = run_timeline(policy, IRP_LIKE, horizon + 1, "churn-model")
        simulated = {t: v for _, t, v in run.first_overlap.period_pairs}

    print("d\tmodel_overlap\tsimulated_overlap")
    for row in model:
        sim = simulated.get(row.d)
        print(f"{row.d}\t{row.final_overlap:.3f}\t{'' if sim is None else f'{sim:.3f}'}")


if __name__ == "__main__":
    main()
