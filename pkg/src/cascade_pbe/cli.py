"""Command line: solve, verify, cascade, simulate and profile.

Exit codes: 0 success, 1 verification failed, 2 solver did not converge,
64 bad command line (including unparsable rationals), 65 malformed profile file.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import cascade, io
from .game import Gamma, GameParams, as_fraction
from .profiles import delta1_profile, large_delta_profile, myopic_profile, resolve_myopic_row, structural_check
from .solver import SolveConfig, solve, soft_structure_report
from .verifier import bisect_delta, check_profile

EXIT_OK, EXIT_FAIL, EXIT_NOT_CONVERGED, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65

log = logging.getLogger("cascade_pbe")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def rational(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from None


TIE_NAMES = {"reveal": Gamma.REVEAL, "buy": Gamma.BUY, "wait": Gamma.WAIT}


def tie_break(text: str):
    names = [t.strip().lower() for t in text.split(",")]
    try:
        order = tuple(TIE_NAMES[n] for n in names)
    except KeyError:
        raise argparse.ArgumentTypeError(f"tie-break must order reveal,buy,wait: {text!r}") from None
    if sorted(order) != sorted(Gamma):
        raise argparse.ArgumentTypeError("tie-break must list each of reveal, buy, wait once")
    return order


def _params(n, p, delta) -> GameParams:
    try:
        return GameParams(n, p, delta)
    except (ValueError, TypeError) as err:
        raise UsageError(str(err)) from None


def _write(path, text):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_profile(path, args):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise DataError(str(err)) from None
    try:
        prof, params = io.loads_profile(text)
    except io.ProfileFormatError as err:
        raise DataError(str(err)) from None
    p = getattr(args, "p", None) or (params.p if params else None)
    delta = getattr(args, "delta", None)
    if delta is None and params is not None:
        delta = params.delta
    if p is None or delta is None:
        raise UsageError("p and delta must be given in the profile file or with --p/--delta")
    return prof, _params(prof.N, p, delta)


def _render(profile, params, fmt):
    if fmt == "json":
        return io.dumps_profile(profile, params)
    if fmt == "csv":
        return io.profile_csv(profile)
    return io.render_ascii(profile)


# ------------------------------------------------------------- commands

def cmd_solve(args) -> int:
    params = _params(args.n, args.p, args.delta)
    config = SolveConfig(tie_break=args.tie_break, tol=args.tol, max_iters=args.max_iters)
    res = solve(params, config)
    meta = {
        "n": params.N, "p": str(params.p), "delta": str(params.delta),
        "converged": res.converged, "iterations": res.iterations, "residual": res.residual,
        "flags": res.flags, "structure_notes": soft_structure_report(res.profile),
    }
    if args.verify:
        rep = check_profile(res.profile, params)
        meta["verified"] = rep.passed
        meta["verification"] = rep.to_dict()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "profile.json").write_text(io.dumps_profile(res.profile, params), encoding="utf-8")
        (out / "values.csv").write_text(io.values_csv(res.values), encoding="utf-8")
        (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    _write(None, _render(res.profile, params, args.format))
    if args.diff:
        other, _ = _load_profile(args.diff, argparse.Namespace(p=params.p, delta=params.delta))
        changes = res.profile.diff(other)
        counts = {g.code: 0 for g in Gamma}
        for _, mine, _theirs in changes:
            counts[mine.code] += 1
        print(f"# {len(changes)} cells differ from {args.diff}; this run has " +
              ", ".join(f"{k}:{v}" for k, v in counts.items()) + " there")
    print(f"# converged={res.converged} iterations={res.iterations} residual={res.residual:.3g}"
          + (f" verified={meta['verified']}" if args.verify else ""), file=sys.stderr)
    if not res.converged:
        return EXIT_NOT_CONVERGED
    if args.verify and not meta["verified"]:
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    prof, params = _load_profile(args.profile, args)
    if args.bisect_delta:
        search = bisect_delta(lambda _p: prof, params, max_bits=args.max_bits, refine_bits=args.refine_bits)
        doc = {
            "n": params.N, "p": str(params.p),
            "delta_star": None if search.delta_star is None else str(search.delta_star),
            "last_fail": None if search.last_fail is None else str(search.last_fail),
            "evaluations": [[str(d), ok] for d, ok in search.evaluations],
        }
        _write(args.out, json.dumps(doc, indent=2) + "\n")
        return EXIT_OK if search.delta_star is not None else EXIT_FAIL
    rep = check_profile(prof, params)
    doc = rep.to_dict()
    doc["structure"] = {r.name: r.passed for r in structural_check(prof, params)}
    _write(args.out, json.dumps(doc, indent=2) + "\n")
    for v in rep.violations[:20]:
        print(f"violation at (r={v.state[0]}, y={v.state[1]}, w={v.state[2]}) x={v.x:+d}: "
              f"{v.prescribed.code} margin {float(v.margin):.6g}", file=sys.stderr)
    if rep.error:
        print(rep.error, file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _vs(choice):
    return (-1, 1) if choice == "both" else (int(choice),)


def cmd_cascade(args) -> int:
    prof, params = _load_profile(args.profile, args)
    dist = cascade.exact_cascade_dp(prof, params, vs=_vs(args.v))
    _write(args.out, dist.to_csv())
    if args.cumulative:
        _write(args.cumulative, dist.cumulative_csv())
    for v in sorted(dist.revelations):
        print(f"# v={v:+d} expected revelations before onset {float(dist.revelations[v]):.6g}", file=sys.stderr)
    for f in dist.flags:
        print(f"# flag: {f}", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    prof, params = _load_profile(args.profile, args)
    vs = _vs(args.v)
    v = None if len(vs) == 2 else vs[0]
    sim = cascade.simulate(prof, params, seed=args.seed, n_runs=args.runs, max_turns=args.max_turns, v=v)
    if args.out:
        _write(args.out, sim.distribution.to_csv())
    exact = cascade.exact_cascade_dp(prof, params, vs=tuple(sorted(sim.distribution.probs)))
    print("v,class,empirical,exact,stderr,within_3se")
    ok_all = True
    for vv, c, f, p, se, ok in sim.agreement(exact):
        ok_all &= ok
        print(f"{vv},{c},{f:.6g},{p:.6g},{se:.3g},{ok}")
    print(f"# mean revelations before onset {sim.revelations.mean():.4g}; "
          f"mean discounted utility {sim.utility.mean():.4g}; agreement={'ok' if ok_all else 'FAIL'}",
          file=sys.stderr)
    return EXIT_OK


def cmd_profile(args) -> int:
    params = _params(args.n, args.p, args.delta)
    if args.kind == "myopic":
        if args.y1_row == "auto":
            row = resolve_myopic_row(params)
            if row is None:
                print("no per-w choice of the (r=1, y=1) row verifies", file=sys.stderr)
                return EXIT_FAIL
        else:
            row = TIE_NAMES[args.y1_row]
        prof = myopic_profile(params, row)
    elif args.kind == "delta1":
        prof = delta1_profile(params)
    else:
        prof = large_delta_profile(params)
    _write(args.out, _render(prof, params, args.format))
    return EXIT_OK


# --------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cascade-pbe", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def game_flags(sp, required=True):
        sp.add_argument("--p", type=rational, required=required)
        sp.add_argument("--delta", type=rational, required=required)

    sp = sub.add_parser("solve", help="compute an equilibrium profile")
    sp.add_argument("--n", type=int, required=True)
    game_flags(sp)
    sp.add_argument("--tie-break", type=tie_break, default="reveal,buy,wait")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--max-iters", type=int, default=50)
    sp.add_argument("--out", help="directory for profile.json, values.csv and meta.json")
    sp.add_argument("--format", choices=("ascii", "json", "csv"), default="ascii")
    sp.add_argument("--verify", action="store_true", help="certify the result with exact arithmetic")
    sp.add_argument("--diff", help="profile JSON to compare against")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="exact sequential-rationality check of a profile file")
    sp.add_argument("profile")
    game_flags(sp, required=False)
    sp.add_argument("--out", help="report JSON (default stdout)")
    sp.add_argument("--bisect-delta", action="store_true", help="search a dyadic delta grid for a passing delta")
    sp.add_argument("--max-bits", type=int, default=64)
    sp.add_argument("--refine-bits", type=int, default=8)
    sp.set_defaults(func=cmd_verify)

    for name, func, text in (("cascade", cmd_cascade, "exact cascade-onset distribution"),
                             ("simulate", cmd_simulate, "Monte Carlo cascade statistics")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("profile")
        game_flags(sp, required=False)
        sp.add_argument("--v", choices=("-1", "1", "both"), default="both")
        sp.add_argument("--out", help="class CSV (default stdout for cascade)")
        if name == "cascade":
            sp.add_argument("--cumulative", help="cumulative bad-cascade CSV by onset w")
        else:
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--runs", type=int, default=10_000)
            sp.add_argument("--max-turns", type=int, default=None)
        sp.set_defaults(func=func)

    sp = sub.add_parser("profile", help="emit a closed-form profile")
    sp.add_argument("kind", choices=("myopic", "delta1", "large-delta"))
    sp.add_argument("--n", type=int, required=True)
    game_flags(sp)
    sp.add_argument("--y1-row", choices=("auto", "buy", "reveal"), default="auto")
    sp.add_argument("--format", choices=("ascii", "json", "csv"), default="json")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_profile)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
