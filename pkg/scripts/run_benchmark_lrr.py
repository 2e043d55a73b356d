"""Monte Carlo stability exponent for the two recursive-utility
benchmarks (two-state and four-state long-run-risk calibrations).

Solves the wealth-consumption fixed point on the family's production
grid, then estimates L over replicated path simulations and prints the
point estimate, the replication sd, and the verdict.
"""

import argparse
import sys
import time

import sdf_stability as sd
from sdf_stability import McConfig, WcGridSpec

GRIDS = {
    "by": WcGridSpec(sizes=(151, 41), span=4.0, gh_nodes=7),
    "ssy": WcGridSpec(sizes=(25, 15, 15, 3), span=2.25, gh_nodes=7),
}
MODELS = {"by": sd.ez_by_benchmark, "ssy": sd.ez_ssy_benchmark}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", choices=("by", "ssy"), default="by")
    ap.add_argument("--n", type=int, default=1000, help="path length")
    ap.add_argument("--m", type=int, default=10000, help="paths per estimate")
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--threads", type=int, default=8)
    ap.add_argument("--wc", help="reuse a saved wealth-consumption .npz")
    ap.add_argument("--save-wc", help="save the solved ratio for reuse")
    args = ap.parse_args(argv)

    model = MODELS[args.family]()
    if args.wc:
        wc = sd.WcSolution.load(args.wc)
    else:
        t0 = time.time()
        wc = sd.solve_wealth_consumption(model, grid=GRIDS[args.family])
        print(f"wealth-consumption solve: {wc.iterations} iterations, "
              f"residual {wc.residual:.3e}, {time.time() - t0:.0f}s",
              file=sys.stderr)
    if args.save_wc:
        wc.save(args.save_wc)

    cfg = McConfig(n=args.n, m=args.m, seed=args.seed,
                   replications=args.reps)
    t0 = time.time()
    est = sd.estimate_lphi(model, cfg, wc=wc, threads=args.threads)
    verdict = "STABLE" if est.value < 0 else "UNSTABLE"
    print(f"{args.family}: L = {est.value:.7g}  sd = {est.std_dev:.3g}  "
          f"({args.reps} reps, {time.time() - t0:.0f}s)  {verdict}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
