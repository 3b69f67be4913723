"""Compare exact cascade-class probabilities with forward simulation."""
import argparse
from fractions import Fraction as F

from cascade_pbe import GameParams, myopic_profile
from cascade_pbe.cascade import exact_cascade_dp, simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=11)
    ap.add_argument("--p", default="1/10")
    ap.add_argument("--delta", default="1/2")
    ap.add_argument("--runs", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    par = GameParams(args.n, F(args.p), F(args.delta))
    prof = myopic_profile(par)
    sim = simulate(prof, par, seed=args.seed, n_runs=args.runs)
    print("v,class,empirical,exact,stderr,within_3se")
    for v, c, f, p, se, ok in sim.agreement(exact_cascade_dp(prof, par)):
        print(f"{v},{c},{f:.6g},{p:.6g},{se:.3g},{ok}")
    print(f"# mean discounted utility {sim.utility.mean():.5f}")


if __name__ == "__main__":
    main()
