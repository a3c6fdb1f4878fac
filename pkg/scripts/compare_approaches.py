"""Overlap and judgment load for the six ways of keeping a sample fresh."""
import argparse

from semistable import io
from semistable.simulate import IRP_LIKE, compare_approaches


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=1000)
    ap.add_argument("--periods", type=int, default=12)
    ap.add_argument("--resample-every", type=int, default=6)
    args = ap.parse_args(argv)

    rows = compare_approaches(IRP_LIKE, args.periods, sample_size=args.size, resample_every=args.resample_every)
    header = ("approach", "name", "mean_consecutive_overlap", "mean_judgment_load")
    print(io.csv_text(header, ([r[h] for h in header] for r in rows)), end="")


if __name__ == "__main__":
    main()
