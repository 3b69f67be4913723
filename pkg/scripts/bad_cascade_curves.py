"""Cumulative bad-cascade probability by onset w for solved profiles, one CSV per p."""
import argparse
import warnings
from fractions import Fraction as F
from pathlib import Path

from cascade_pbe import GameParams, check_profile, solve
from cascade_pbe.cascade import NonClosedBuyRegion, exact_cascade_dp
from cascade_pbe.game import as_fraction


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=21)
    ap.add_argument("--delta", default="999999/1000000")
    ap.add_argument("--p", nargs="+", default=["1/10", "1/5", "3/10", "2/5"])
    ap.add_argument("--out", default="results/bad_cascades")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    delta = as_fraction(args.delta)
    print("p,verified,bad_v-1,bad_v+1")
    for p in map(as_fraction, args.p):
        par = GameParams(args.n, p, delta)
        res = solve(par)
        ok = check_profile(res.profile, par).passed
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonClosedBuyRegion)
            dp = exact_cascade_dp(res.profile, par)
        name = f"N{args.n}_p{p.numerator}-{p.denominator}.csv"
        (out / name).write_text(dp.cumulative_csv(), encoding="utf-8")
        print(f"{p},{ok},{float(dp.bad_probability(-1)):.6g},{float(dp.bad_probability(1)):.6g}")


if __name__ == "__main__":
    main()
