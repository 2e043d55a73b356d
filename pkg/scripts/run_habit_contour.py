"""Stability map of the habit family over (beta, sigma), holding the
remaining parameters at the map calibration (rho = -0.14, gamma = 2.5,
alpha = 1, x0 = 0.05). The zero contour of the exponent separates the
parameterizations with a unique equilibrium from those without; the
closed form makes the frontier exact.
"""

import argparse

import sdf_stability as sd


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=40,
                    help="points per axis (default 40)")
    ap.add_argument("--beta-lo", type=float, default=0.90)
    ap.add_argument("--beta-hi", type=float, default=0.999)
    ap.add_argument("--sigma-lo", type=float, default=0.0)
    ap.add_argument("--sigma-hi", type=float, default=0.35)
    ap.add_argument("--out", default="habit_contour.csv")
    args = ap.parse_args(argv)

    spec = sd.SweepSpec(
        model=sd.habit_base(),
        axis1=sd.SweepAxis(name="beta", lo=args.beta_lo, hi=args.beta_hi,
                           count=args.grid),
        axis2=sd.SweepAxis(name="sigma", lo=args.sigma_lo, hi=args.sigma_hi,
                           count=args.grid),
        method="analytic")
    result = sd.run_sweep(spec)
    result.to_csv(args.out)

    stable = (result.lphi < 0).mean()
    print(f"{args.grid}x{args.grid} cells, {stable:.0%} stable")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
