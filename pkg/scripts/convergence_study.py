"""Strong-order study of both integrators against the exact uncoupled solution.

Runs the Milstein and order-1.5 Taylor schemes on shared Brownian paths
across a ladder of step sizes and reports the fitted log-log slopes.

    python scripts/convergence_study.py --paths 1000 --out results/
"""

import argparse
import json
import os

from bmnet.engine import SCHEMES, strong_convergence_study


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--levels", type=int, default=6,
                        help="number of dt levels, starting at 2^-4")
    parser.add_argument("--out", default=".")
    args = parser.parse_args()

    dts = [2.0 ** -k for k in range(4, 4 + args.levels)]
    os.makedirs(args.out, exist_ok=True)
    for scheme in SCHEMES:
        result = strong_convergence_study(scheme, dts, args.paths, args.seed)
        path = os.path.join(args.out, f"convergence_{scheme}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
        errs = ", ".join(f"{e:.3e}" for e in result["strong_errors"])
        print(f"{scheme:10s} slope {result['fitted_slope']:+.3f}   errors [{errs}]")


if __name__ == "__main__":
    main()
