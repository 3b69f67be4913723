"""Closed-form equilibrium profiles and structural property checks."""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .game import SIGNALS, Gamma, GameParams
from .model import StrategyProfile


def myopic_profile(params: GameParams, y1_r1_choice: Gamma | Mapping[int, Gamma] = Gamma.BUY) -> StrategyProfile:
    """Myopic profile; the (r=1, y=1) row is a single Gamma or a per-w mapping."""
    N = params.N
    if isinstance(y1_r1_choice, Mapping):
        row = dict(y1_r1_choice)
    else:
        row = {w: y1_r1_choice for w in range(N + 1)}
    if any(g not in (Gamma.BUY, Gamma.REVEAL) for g in row.values()):
        raise ValueError("the (r=1, y=1) row must be BUY or REVEAL")

    def rule(r, y, w):
        if y >= 2:
            return Gamma.BUY
        if y <= -2:
            return Gamma.WAIT
        if r == 1 and y == 1:
            return row.get(w, Gamma.BUY)
        return Gamma.REVEAL

    return StrategyProfile.from_rule(N, rule)


def resolve_myopic_row(params: GameParams, order=(Gamma.BUY, Gamma.REVEAL)) -> dict[int, Gamma] | None:
    """Per-w choice of the (r=1, y=1) row making the myopic profile sequentially rational.

    Layers are fixed in decreasing w, so each choice only has to be checked
    against values that are already final. Returns None if some layer admits
    neither choice.
    """
    from .verifier import SingularBlock, acting_payoffs, solve_cell
    from .model import ValueTables

    N = params.N
    row = {w: order[0] for w in range(N + 1)}
    prof = myopic_profile(params, row)
    values = ValueTables(N, exact=True)
    for w in range(N, -1, -1):
        cells = range(-w, w + 1)
        for y in cells:
            if y != 1:
                solve_cell(y, w, prof, params, values)
        if prof[1, 1, w] is None:
            if w >= 1:
                solve_cell(1, w, prof, params, values)
            continue
        for g in order:
            prof[1, 1, w] = g
            try:
                solve_cell(1, w, prof, params, values)
            except SingularBlock:
                continue
            if _cell_ok(prof, params, values, 1, w, acting_payoffs):
                row[w] = g
                break
        else:
            return None
    return row


def _cell_ok(prof, params, values, y, w, acting_payoffs):
    for r in (0, 1):
        g = prof[r, y, w]
        if g is None:
            continue
        for x in SIGNALS:
            buy, wait = acting_payoffs((r, y, w), x, g, params, values)
            if buy != wait and (buy > wait) != (g.action(x) == 1):
                return False
    return True


def delta1_profile(params: GameParams) -> StrategyProfile:
    """Full-revelation profile for infinitely patient players."""
    N = params.N

    def rule(r, y, w):
        if y <= -2:
            return Gamma.WAIT
        if w < N:
            return Gamma.REVEAL
        # w == N forces r == 1
        return Gamma.BUY if y >= 1 else Gamma.REVEAL

    return StrategyProfile.from_rule(N, rule)


def large_delta_profile(params: GameParams) -> StrategyProfile:
    """Profile that reveals until y + w reaches N (patient but discounting players)."""
    N = params.N

    def rule(r, y, w):
        if y <= -2:
            return Gamma.WAIT
        if y >= 2:
            return Gamma.REVEAL if y + w < N else Gamma.BUY
        if y == 1:
            if r == 1 and w >= N - 1:
                return Gamma.BUY
            return Gamma.REVEAL
        return Gamma.REVEAL

    return StrategyProfile.from_rule(N, rule)


@dataclass
class PropertyResult:
    name: str
    passed: bool
    witnesses: list = field(default_factory=list)

    def __str__(self):
        head = f"{self.name}: {'pass' if self.passed else 'FAIL'}"
        return head if self.passed else f"{head} {self.witnesses[:5]}"


def _rows(profile: StrategyProfile, r: int, y: int):
    return [(w, profile[r, y, w]) for w in range(profile.N + 1) if profile[r, y, w] is not None]


def structural_check(profile: StrategyProfile, params: GameParams | None = None) -> list[PropertyResult]:
    """Evaluate properties (a)-(f); each result lists offending (r, y, w[, x]) witnesses."""
    N = profile.N
    items = list(profile.items())
    res = []

    bad = [s for s, g in items if g is not Gamma.WAIT and (s[1] <= -3 or (s[1] == -2 and s[0] == 0))]
    res.append(PropertyResult("a_wait_below", not bad, bad))

    bad = [s for s, g in items if s[0] == 0 and s[1] >= 0 and g is Gamma.WAIT]
    res.append(PropertyResult("b_no_wait_nonnegative_y", not bad, bad))

    bad = [s for s, g in items if s[0] == 0 and s[1] == 0 and g is not Gamma.REVEAL]
    res.append(PropertyResult("c_reveal_at_zero", not bad, bad))

    bad = []
    for y in range(-N, N + 1):
        if y == -1:
            continue
        row = {g for _, g in _rows(profile, 0, y)}
        if Gamma.WAIT in row and len(row) > 1:
            bad.append((0, y))
    res.append(PropertyResult("d_rows_wait_or_active", not bad, bad))

    bad = []
    for r in (0, 1):
        for y in range(-N, N + 1):
            row = _rows(profile, r, y)
            for x in SIGNALS:
                acts = [g.action(x) for _, g in row]
                if any(a > b for a, b in zip(acts, acts[1:])):
                    bad.append((r, y, x))
    res.append(PropertyResult("e_threshold_in_w", not bad, bad))

    bad = []
    for w in range(N + 1):
        col = [(y, profile[0, y, w]) for y in range(-N, N + 1) if profile[0, y, w] is not None]
        for x in SIGNALS:
            acts = [g.action(x) for _, g in col]
            if any(a > b for a, b in zip(acts, acts[1:])):
                bad.append((0, w, x))
    res.append(PropertyResult("f_threshold_in_y", not bad, bad))
    return res


def count_buy_r0(profile: StrategyProfile) -> int:
    return sum(1 for (r, _, _), g in profile.items() if r == 0 and g is Gamma.BUY)
