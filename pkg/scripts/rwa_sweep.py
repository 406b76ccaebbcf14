"""Full-space vs truncated dynamics for a range of Kerr strengths.

    python scripts/rwa_sweep.py [--cutoff 4] [--horizon 10] [--ratios 20,50,100,200,500,1000]
"""

import argparse

from kerrtrunc.cli import REFERENCE_COUPLING
from kerrtrunc.dynamics import AnalyticModel
from kerrtrunc.fileio import rwa_csv
from kerrtrunc.analysis import rwa_validation


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--cutoff", type=int, default=4)
    p.add_argument("--horizon", type=float, default=10.0, help="microseconds")
    p.add_argument("--ratios", default="20,50,100,200,500,1000")
    p.add_argument("--model", choices=["two-pump", "three-mode"], default="two-pump")
    args = p.parse_args()

    if args.model == "two-pump":
        spec = AnalyticModel.two_pump(REFERENCE_COUPLING, REFERENCE_COUPLING).to_spec()
    else:
        spec = AnalyticModel.three_mode_symmetric(REFERENCE_COUPLING).to_spec()
    ratios = [float(x) for x in args.ratios.split(",")]
    print(rwa_csv(rwa_validation(spec, args.cutoff, args.horizon, ratios)), end="")


if __name__ == "__main__":
    main()
