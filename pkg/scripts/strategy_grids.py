"""Print solved strategy grids (r=0 and r=1 panels) for the N=11 reference cases."""
import argparse
from fractions import Fraction as F

from cascade_pbe import GameParams, check_profile, solve
from cascade_pbe.io import render_ascii

CASES = [
    (F(1, 10), F(0)),
    (F(1, 10), F(999, 1000)),
    (F(1, 10), F(1)),
    (F(2, 5), F(999, 1000)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=11)
    args = ap.parse_args()
    for p, delta in CASES:
        par = GameParams(args.n, p, delta)
        res = solve(par)
        ok = check_profile(res.profile, par).passed
        print(f"# N={args.n} p={p} delta={delta} passes={res.iterations} verified={ok}")
        print(render_ascii(res.profile))


if __name__ == "__main__":
    main()
