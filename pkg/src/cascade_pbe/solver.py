"""Float solver for the quadratic fixed-point equations.

Each Gauss-Seidel pass walks the (y, w) cells in decreasing w. Inside a cell the
partial functions of the free (r=0) and revealed (r=1) acting players are chosen
jointly: every candidate pair is evaluated by a local linear solve and kept only
if each prescribed action attains the argmax (within ``indifference_eps``)
against the values it induces. The first consistent pair in tie-break order wins.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .game import SIGNALS, Gamma, GameParams, instant_reward, is_feasible_acting, likelihood_exponent
from .model import StrategyProfile, ValueTables, all_keys, continuation_terms, equation, evaluate
from .verifier import solve_cell

log = logging.getLogger(__name__)

DEFAULT_TIE_BREAK = (Gamma.REVEAL, Gamma.BUY, Gamma.WAIT)


class NotConverged(RuntimeError):
    def __init__(self, result: "SolveResult"):
        super().__init__(f"solver stopped after {result.iterations} passes, residual {result.residual:.3g}")
        self.result = result


@dataclass
class SolveConfig:
    tie_break: tuple = DEFAULT_TIE_BREAK
    tol: float = 1e-12
    max_iters: int = 50
    indifference_eps: float = 1e-9
    delta_one_eps: Fraction = Fraction(1, 10**9)

    def __post_init__(self):
        self.tie_break = tuple(Gamma(g) for g in self.tie_break)
        if sorted(self.tie_break) != sorted(Gamma):
            raise ValueError("tie_break must order all three partial functions")
        if self.tol <= 0 or self.indifference_eps < 0:
            raise ValueError("tol must be > 0 and indifference_eps >= 0")


@dataclass
class SolveResult:
    params: GameParams
    profile: StrategyProfile
    values: ValueTables
    iterations: int
    residual: float
    converged: bool
    flags: list = field(default_factory=list)


@dataclass
class BestResponse:
    gamma: Gamma
    margins: dict  # x -> buy payoff minus wait payoff under ``gamma``
    consistent: bool


def continuation_value(state, x: int, gamma: Gamma, values: ValueTables, params: GameParams):
    """Waiting payoff A of acting state (r, y, w) with the candidate gamma driving the update."""
    r, y, w = state
    if w - r < 0 or params.N - w - 1 + r < 0:
        raise ValueError(f"infeasible acting state {state}")
    return evaluate(0, continuation_terms(r, y, w, x, gamma, params, values.exact), values)


def _margins(state, gamma, values, params):
    r, y, _ = state
    out = {}
    for x in SIGNALS:
        buy = instant_reward(likelihood_exponent(y, r, x), params, values.exact)
        out[x] = buy - continuation_value(state, x, gamma, values, params)
    return out


def violation(state, gamma: Gamma, values: ValueTables, params: GameParams) -> float:
    """How far the prescribed actions of ``gamma`` are from the argmax (0 when consistent)."""
    worst = 0.0
    for x, m in _margins(state, gamma, values, params).items():
        worst = max(worst, float(-m) if gamma.action(x) == 1 else float(m))
    return worst


def best_response(state, values: ValueTables, config: SolveConfig, params: GameParams) -> BestResponse:
    """Most preferred self-consistent candidate at ``state`` given the current values."""
    scored = []
    for g in config.tie_break:
        v = violation(state, g, values, params)
        if v <= config.indifference_eps:
            return BestResponse(g, _margins(state, g, values, params), True)
        scored.append((v, g))
    _, g = min(scored, key=lambda t: t[0])
    return BestResponse(g, _margins(state, g, values, params), False)


def sweep(values: ValueTables, profile: StrategyProfile, params: GameParams):
    """One Gauss-Seidel pass of the value equations under a fixed profile."""
    new = values.copy()
    residual = 0.0
    for k in all_keys(params.N):
        const, terms = equation(k, profile, params, new.exact)
        v = evaluate(const, terms, new)
        residual = max(residual, abs(float(v) - float(values[k])))
        new[k] = v
    return new, residual


def _cell_states(y, w, N):
    return [(r, y, w) for r in (0, 1) if is_feasible_acting(r, y, w, N)]


def _solve_cell_game(y, w, profile, values, params, config, seed):
    states = _cell_states(y, w, params.N)
    if not states:
        solve_cell(y, w, profile, params, values, exact=False)
        return (), None
    orders = []
    for s in states:
        order = list(config.tie_break)
        if seed is not None and seed[s] is not None:
            order.remove(seed[s])
            order.insert(0, seed[s])
        orders.append(order)
    best = None
    # candidates all write the same cell keys, so values are updated in place
    for combo in itertools.product(*orders):
        for s, g in zip(states, combo):
            profile[s] = g
        solve_cell(y, w, profile, params, values, exact=False)
        worst = max(violation(s, g, values, params) for s, g in zip(states, combo))
        if worst <= config.indifference_eps:
            return combo, None
        if best is None or worst < best[0]:
            best = (worst, combo)
    worst, combo = best
    for s, g in zip(states, combo):
        profile[s] = g
    solve_cell(y, w, profile, params, values, exact=False)
    return combo, f"no consistent candidate at (y={y}, w={w}), violation {worst:.3g}"


def solve(params: GameParams, config: SolveConfig | None = None,
          initial_profile: StrategyProfile | None = None, strict: bool = False) -> SolveResult:
    """Compute an equilibrium profile and float values; certify the result with the verifier."""
    config = config or SolveConfig()
    N = params.N
    it_params = params
    if params.delta == 1:
        it_params = params.with_delta(1 - config.delta_one_eps)
    values = ValueTables(N, exact=False)
    profile = StrategyProfile(N)
    flags: list[str] = []
    residual = float("inf")
    converged = False
    it = 0
    for it in range(1, config.max_iters + 1):
        old_profile, old_values = profile.copy(), values
        values = values.copy()
        seed = initial_profile if it == 1 else old_profile
        pass_flags = []
        for w in range(N, -1, -1):
            for y in range(-w, w + 1):
                _, flag = _solve_cell_game(y, w, profile, values, it_params, config, seed)
                if flag:
                    pass_flags.append(flag)
        residual = values.max_abs_diff(old_values)
        log.debug("pass %d residual %.3g", it, residual)
        if profile == old_profile and residual < config.tol:
            converged = True
            flags = pass_flags
            break
        flags = pass_flags
    result = SolveResult(params, profile, values, it, residual, converged, flags)
    if strict and not converged:
        raise NotConverged(result)
    return result


def soft_structure_report(profile: StrategyProfile) -> list[str]:
    """Non-fatal structural remarks: BUY followed by WAIT when y increases at r=0."""
    notes = []
    for w in range(profile.N + 1):
        prev = None
        for y in range(-profile.N, profile.N + 1):
            g = profile[0, y, w]
            if g is None:
                continue
            if prev is Gamma.BUY and g is Gamma.WAIT:
                notes.append(f"BUY at y={y - 1} but WAIT at y={y} (w={w})")
            prev = g
    return notes
