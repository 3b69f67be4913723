"""Exact certification of a fixed strategy profile.

Values are obtained by a layered solve: transitions never decrease w and every
w-preserving transition stays inside its (y, w) cell, so cells are solved in
decreasing-w order, each a linear system over at most 12 unknowns.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .game import SIGNALS, Gamma, GameParams, instant_reward, likelihood_exponent
from .linalg import SingularMatrix, gauss_solve
from .model import (
    StrategyProfile,
    ValueTables,
    all_keys,
    cell_keys,
    continuation_terms,
    equation,
    evaluate,
)


class SingularBlock(ArithmeticError):
    def __init__(self, y: int, w: int, detail: str = ""):
        super().__init__(f"singular value block at (y={y}, w={w}) {detail}".strip())
        self.y, self.w = y, w


@dataclass
class Block:
    y: int
    w: int
    unknowns: list
    matrix: list  # rows of (I - C) restricted to the cell
    rhs: list
    leaks: list  # True if the unknown's equation reaches outside the cell or carries a reward

    def groups(self):
        """Independent sub-systems, one per (signal, own revealed flag)."""
        out: dict[tuple, list[int]] = {}
        for i, k in enumerate(self.unknowns):
            out.setdefault((k[1], k[2]), []).append(i)
        return list(out.values())


def assemble_block(y: int, w: int, profile: StrategyProfile, params: GameParams,
                   values: ValueTables, exact: bool = True) -> Block:
    """Linear system for cell (y, w); cells with larger w must already be final in ``values``."""
    N = params.N
    unknowns = cell_keys(y, w, N)
    index = {k: i for i, k in enumerate(unknowns)}
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    matrix, rhs, leaks = [], [], []
    for i, k in enumerate(unknowns):
        const, terms = equation(k, profile, params, exact)
        row = [zero] * len(unknowns)
        row[i] = one
        b = const
        leak = bool(const)
        for coef, tgt in terms:
            j = index.get(tgt)
            if j is None:
                if tgt[-1] <= w:
                    raise AssertionError(f"transition {k} -> {tgt} does not increase w")
                b = b + coef * values[tgt]
                leak = True
            else:
                row[j] = row[j] - coef
        matrix.append(row)
        rhs.append(b)
        leaks.append(leak)
    return Block(y, w, unknowns, matrix, rhs, leaks)


def solve_block(block: Block, exact: bool = True) -> dict:
    """Solve a cell; closed reward-free groups (everyone waits forever) get the zero solution."""
    sol = {}
    zero = Fraction(0) if exact else 0.0
    for idx in block.groups():
        if not any(block.leaks[i] for i in idx):
            for i in idx:
                sol[block.unknowns[i]] = zero
            continue
        A = [[block.matrix[i][j] for j in idx] for i in idx]
        b = [block.rhs[i] for i in idx]
        if exact:
            try:
                x = gauss_solve(A, b)
            except SingularMatrix as err:
                raise SingularBlock(block.y, block.w, str(err)) from None
        else:
            try:
                x = np.linalg.solve(np.array(A, dtype=float), np.array(b, dtype=float)).tolist()
            except np.linalg.LinAlgError as err:
                raise SingularBlock(block.y, block.w, str(err)) from None
        for i, v in zip(idx, x):
            sol[block.unknowns[i]] = v
    return sol


def solve_cell(y, w, profile, params, values, exact=True):
    sol = solve_block(assemble_block(y, w, profile, params, values, exact), exact)
    for k, v in sol.items():
        values[k] = v
    return sol


def solve_exact_values(profile: StrategyProfile, params: GameParams) -> ValueTables:
    """Exact rational values of ``profile``; raises SingularBlock if some cell is not solvable."""
    N = params.N
    values = ValueTables(N, exact=True)
    for w in range(N, -1, -1):
        for y in range(-w, w + 1):
            solve_cell(y, w, profile, params, values, exact=True)
    return values


def value_residual(profile: StrategyProfile, params: GameParams, values: ValueTables):
    """Largest |lhs - rhs| over all value equations (exactly 0 for an exact solve)."""
    worst = Fraction(0) if values.exact else 0.0
    for k in all_keys(params.N):
        const, terms = equation(k, profile, params, values.exact)
        worst = max(worst, abs(values[k] - evaluate(const, terms, values)))
    return worst


@dataclass
class Violation:
    state: tuple[int, int, int]
    x: int
    buy_payoff: Fraction
    wait_payoff: Fraction
    prescribed: Gamma

    @property
    def margin(self):
        """Payoff of the prescribed action minus the alternative (negative for a violation)."""
        d = self.buy_payoff - self.wait_payoff
        return d if self.prescribed.action(self.x) == 1 else -d

    def to_dict(self):
        return {
            "r": self.state[0], "y": self.state[1], "w": self.state[2], "x": self.x,
            "buy": str(self.buy_payoff), "wait": str(self.wait_payoff),
            "prescribed": self.prescribed.code, "margin": float(self.margin),
        }


@dataclass
class VerificationReport:
    params: GameParams
    violations: list = field(default_factory=list)
    ties: list = field(default_factory=list)
    values: ValueTables | None = None
    error: str | None = None
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.error is None and not self.violations

    def to_dict(self):
        p = self.params
        return {
            "n": p.N, "p": str(p.p), "delta": str(p.delta),
            "passed": self.passed,
            "error": self.error,
            "violations": [v.to_dict() for v in self.violations],
            "ties": [{"r": s[0], "y": s[1], "w": s[2], "x": x} for s, x in self.ties],
            "seconds": round(self.seconds, 4),
        }


def acting_payoffs(state, x, gamma, params, values):
    r, y, w = state
    buy = instant_reward(likelihood_exponent(y, r, x), params, values.exact)
    wait = evaluate(0, continuation_terms(r, y, w, x, gamma, params, values.exact), values)
    return buy, wait


def check_profile(profile: StrategyProfile, params: GameParams,
                  values: ValueTables | None = None) -> VerificationReport:
    """Check every prescribed action against buy/wait payoffs with exact weak inequalities."""
    t0 = time.perf_counter()
    report = VerificationReport(params)
    if not profile.is_total():
        report.error = "profile is not defined on every feasible acting state"
        return report
    if values is None:
        try:
            values = solve_exact_values(profile, params)
        except SingularBlock as err:
            report.error = f"not certifiable: {err}"
            report.seconds = time.perf_counter() - t0
            return report
    report.values = values
    for state, gamma in profile.items():
        for x in SIGNALS:
            buy, wait = acting_payoffs(state, x, gamma, params, values)
            if buy == wait:
                report.ties.append((state, x))
                continue
            ok = buy > wait if gamma.action(x) == 1 else wait > buy
            if not ok:
                report.violations.append(Violation(state, x, buy, wait, gamma))
    report.seconds = time.perf_counter() - t0
    return report


@dataclass
class DeltaSearch:
    delta_star: Fraction | None  # smallest passing grid point found
    last_fail: Fraction | None  # largest failing grid point below delta_star
    evaluations: list = field(default_factory=list)  # (delta, passed)


def bisect_delta(build, params: GameParams, max_bits: int = 64, refine_bits: int = 8) -> DeltaSearch:
    """Search the dyadic grid in (0, 1) for a delta at which ``build(params)`` verifies.

    Probes 1 - 2**-k for k = 1, 2, ... until one passes, then bisects between it
    and the last failure using dyadic midpoints. Assumes verification outcomes
    are monotone in delta between the bracketing points.
    """
    search = DeltaSearch(None, None)

    def passes(d):
        p = params.with_delta(d)
        ok = check_profile(build(p), p).passed
        search.evaluations.append((d, ok))
        return ok

    lo = None
    for k in range(1, max_bits + 1):
        d = 1 - Fraction(1, 2 ** k)
        if passes(d):
            hi = d
            break
        lo = d
    else:
        search.last_fail = lo
        return search
    if lo is None:
        lo = Fraction(0)
        if passes(lo):
            search.delta_star = lo
            return search
    for _ in range(refine_bits):
        mid = (lo + hi) / 2
        if passes(mid):
            hi = mid
        else:
            lo = mid
    search.delta_star, search.last_fail = hi, lo
    return search
