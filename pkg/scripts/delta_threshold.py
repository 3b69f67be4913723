"""Dyadic search for the smallest delta at which the patient closed-form profile verifies."""
import argparse
import time
from fractions import Fraction as F

from cascade_pbe import GameParams, large_delta_profile
from cascade_pbe.verifier import bisect_delta


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[3, 5, 7, 9, 11])
    ap.add_argument("--p", default="1/10")
    args = ap.parse_args()
    print("N,delta_star,one_minus_delta_star,checks,seconds")
    for N in args.n:
        t0 = time.perf_counter()
        s = bisect_delta(large_delta_profile, GameParams(N, F(args.p), F(1, 2)))
        dt = time.perf_counter() - t0
        gap = "" if s.delta_star is None else f"{float(1 - s.delta_star):.4g}"
        print(f"{N},{s.delta_star},{gap},{len(s.evaluations)},{dt:.2f}")


if __name__ == "__main__":
    main()
