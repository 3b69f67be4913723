"""Cascade probability and revelations before onset for the myopic profile as N grows."""
import argparse
import math
from fractions import Fraction as F

from cascade_pbe import GameParams, myopic_profile
from cascade_pbe.cascade import exact_cascade_dp


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[5, 11, 21, 41, 81])
    ap.add_argument("--p", default="1/10")
    ap.add_argument("--delta", default="9/10")
    args = ap.parse_args()
    print("N,cascade_prob,bad_v-1,bad_v+1,mean_revelations,2log2N")
    for N in args.n:
        par = GameParams(N, F(args.p), F(args.delta))
        dp = exact_cascade_dp(myopic_profile(par), par)
        print(f"{N},{float(dp.cascade_probability()):.10f},{float(dp.bad_probability(-1)):.6g},"
              f"{float(dp.bad_probability(1)):.6g},{float(dp.mean_revelations()):.4f},{2 * math.log2(N):.3f}")


if __name__ == "__main__":
    main()
