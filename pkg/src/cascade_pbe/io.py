"""Profile JSON, ASCII grids and CSV writers.

Profile JSON::

    {"n": 11, "p": "1/10", "delta": "999/1000",
     "phi": {"r0": [[code, ...], ...], "r1": [...]}}

Row i of each grid is y = n - i, column j is w = j, and cells hold "00" (WAIT),
"01" (REVEAL), "11" (BUY) or "--" for infeasible states.
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

from .game import Gamma, GameParams, is_feasible_acting
from .model import StrategyProfile

INFEASIBLE = "--"


class ProfileFormatError(ValueError):
    pass


def profile_grid(profile: StrategyProfile, r: int) -> list[list[str]]:
    N = profile.N
    grid = []
    for y in range(N, -N - 1, -1):
        row = []
        for w in range(N + 1):
            g = profile[r, y, w]
            row.append(INFEASIBLE if g is None else g.code)
        grid.append(row)
    return grid


def profile_to_dict(profile: StrategyProfile, params: GameParams | None = None) -> dict:
    doc = {"n": profile.N}
    if params is not None:
        doc["p"] = str(params.p)
        doc["delta"] = str(params.delta)
    doc["phi"] = {"r0": profile_grid(profile, 0), "r1": profile_grid(profile, 1)}
    return doc


def profile_from_dict(doc: dict) -> tuple[StrategyProfile, GameParams | None]:
    try:
        N = doc["n"]
        phi = doc["phi"]
        grids = {0: phi["r0"], 1: phi["r1"]}
    except (KeyError, TypeError) as err:
        raise ProfileFormatError(f"missing field: {err}") from None
    if not isinstance(N, int) or N < 1:
        raise ProfileFormatError("n must be a positive integer")
    prof = StrategyProfile(N)
    for r, grid in grids.items():
        if len(grid) != 2 * N + 1 or any(len(row) != N + 1 for row in grid):
            raise ProfileFormatError(f"grid r{r} must be {2 * N + 1} x {N + 1}")
        for i, row in enumerate(grid):
            y = N - i
            for w, code in enumerate(row):
                feasible = is_feasible_acting(r, y, w, N)
                if code == INFEASIBLE:
                    if feasible:
                        raise ProfileFormatError(f"missing strategy at r={r}, y={y}, w={w}")
                    continue
                if not feasible:
                    raise ProfileFormatError(f"strategy given at infeasible r={r}, y={y}, w={w}")
                try:
                    prof[r, y, w] = Gamma.from_code(code)
                except ValueError as err:
                    raise ProfileFormatError(str(err)) from None
    params = None
    if "p" in doc and "delta" in doc:
        try:
            params = GameParams(N, Fraction(doc["p"]), Fraction(doc["delta"]))
        except (ValueError, ZeroDivisionError) as err:
            raise ProfileFormatError(f"bad parameters: {err}") from None
    return prof, params


def dumps_profile(profile, params=None) -> str:
    doc = profile_to_dict(profile, params)
    # one grid row per line keeps diffs readable
    lines = ["{", f'  "n": {doc["n"]},']
    if params is not None:
        lines.append(f'  "p": "{doc["p"]}",')
        lines.append(f'  "delta": "{doc["delta"]}",')
    lines.append('  "phi": {')
    for r in (0, 1):
        rows = ",\n".join("      " + json.dumps(row) for row in doc["phi"][f"r{r}"])
        lines.append(f'    "r{r}": [\n{rows}\n    ]' + ("," if r == 0 else ""))
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def loads_profile(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ProfileFormatError(f"invalid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ProfileFormatError("profile document must be a JSON object")
    return profile_from_dict(doc)


def render_ascii(profile: StrategyProfile) -> str:
    """Figure-style grids, one per r; rows are y descending, columns w ascending."""
    N = profile.N
    out = []
    for r in (0, 1):
        out.append(f"r={r}")
        out.append("  y\\w " + " ".join(f"{w:>2}" for w in range(N + 1)))
        for i, row in enumerate(profile_grid(profile, r)):
            out.append(f"{N - i:>5} " + " ".join(row))
        out.append("")
    return "\n".join(out)


def profile_csv(profile: StrategyProfile) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["r", "y", "w", "code"])
    for (r, y, w), g in profile.items():
        wr.writerow([r, y, w, g.code])
    return buf.getvalue()


def values_csv(values) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["kind", "x", "r", "z", "y", "w", "value"])
    for k in values.keys():
        v = values[k]
        if k[0] == "a":
            _, x, r, y, w = k
            wr.writerow(["a", x, r, "", y, w, repr(float(v))])
        else:
            _, x, rt, z, y, w = k
            wr.writerow(["na", x, rt, z, y, w, repr(float(v))])
    return buf.getvalue()
