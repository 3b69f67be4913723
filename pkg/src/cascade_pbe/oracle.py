"""Brute-force ground truth for tiny N.

Full joint beliefs over (V, X), the finite (x_tilde, b) fixed-point equations
checked against mapped (r, y, w) values, and a Monte Carlo deviation test.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .game import SIGNALS, Gamma, GameParams, instant_reward, is_feasible_acting, is_feasible_nonacting, signal_posterior
from .model import StrategyProfile, ValueTables


class MappingDomainError(ValueError):
    pass


# ---------------------------------------------------------------- beliefs

@dataclass
class JointBelief:
    """Probability table over (v, x) with x a tuple of N signals."""

    N: int
    table: dict

    def marginal_v(self, v):
        return sum(pr for (vv, _), pr in self.table.items() if vv == v)

    def conditional_signal(self, m, xm, v):
        pv = self.marginal_v(v)
        return sum(pr for (vv, x), pr in self.table.items() if vv == v and x[m] == xm) / pv

    def max_abs_diff(self, other: "JointBelief"):
        return max(abs(self.table[k] - other.table[k]) for k in self.table)


def _support(N):
    return [(v, x) for v in SIGNALS for x in itertools.product(SIGNALS, repeat=N)]


def prior_belief(params: GameParams, exact: bool = True) -> JointBelief:
    return closed_form_belief((0,) * params.N, params, exact)


def bayes_update(pi: JointBelief, gamma: Gamma, a: int, actor: int) -> JointBelief:
    """Condition on the acting player's action; off-path (zero mass) leaves the belief frozen."""
    num = {k: (pr if gamma.action(k[1][actor]) == a else 0 * pr) for k, pr in pi.table.items()}
    den = sum(num.values())
    if den == 0:
        return pi
    return JointBelief(pi.N, {k: pr / den for k, pr in num.items()})


def closed_form_belief(x_tilde, params: GameParams, exact: bool = True) -> JointBelief:
    """Product form: V-marginal from q**sum(x_tilde), point masses for revealed signals."""
    N = len(x_tilde)
    t = params.q ** sum(x_tilde)
    one = Fraction(1)
    if not exact:
        t, one = float(t), 1.0
    pv = {1: t / (1 + t), -1: one / (1 + t)}
    table = {}
    for v, x in _support(N):
        pr = pv[v]
        for xm, xt in zip(x, x_tilde):
            if xt != 0:
                pr = pr * (one if xm == xt else 0 * one)
            else:
                q = params.signal_prob(xm, v)
                pr = pr * (q if exact else float(q))
        table[(v, x)] = pr
    return JointBelief(N, table)


def factorization_residual(pi: JointBelief):
    """Largest deviation from pi(v) * prod_m pi(x^m | v)."""
    worst = 0 * next(iter(pi.table.values()))
    for (v, x), pr in pi.table.items():
        pv = pi.marginal_v(v)
        prod = pv
        if pv != 0:
            for m, xm in enumerate(x):
                prod = prod * pi.conditional_signal(m, xm, v)
        worst = max(worst, abs(pr - prod))
    return worst


def private_posterior(x: int, x_tilde_self: int, y: int, params: GameParams, exact: bool = True):
    """P(V=1) for a player with signal x whose own revealed information is x_tilde_self."""
    t = params.q ** (y - x_tilde_self + x)
    if not exact:
        t = float(t)
    return t / (1 + t)


def update_x_tilde(x_tilde: tuple, gamma: Gamma, a: int, actor: int) -> tuple:
    if gamma is Gamma.REVEAL and x_tilde[actor] == 0:
        return x_tilde[:actor] + (2 * a - 1,) + x_tilde[actor + 1:]
    return x_tilde


def belief_history_check(profile: StrategyProfile, params: GameParams, n_histories: int,
                         seed: int = 0, turns: int | None = None, exact: bool = True):
    """Fold bayes_update along simulated on-path histories and compare with the closed form.

    Returns the largest entrywise discrepancy seen at any turn of any history.
    """
    rng = np.random.default_rng(seed)
    N = params.N
    turns = turns or 3 * N
    p = float(params.p)
    prior = prior_belief(params, exact)
    worst = 0 * next(iter(prior.table.values()))
    closed = {}
    for _ in range(n_histories):
        v = 1 if rng.random() < 0.5 else -1
        x = tuple(int(v if rng.random() >= p else -v) for _ in range(N))
        pi = prior
        xt = (0,) * N
        b = [0] * N
        for _ in range(turns):
            n = int(rng.integers(N))
            if b[n]:
                gamma, a = Gamma.WAIT, 0
            else:
                y = sum(xt)
                w = sum(max(abs(t), bb) for t, bb in zip(xt, b))
                gamma = profile[abs(xt[n]), y, w]
                a = gamma.action(x[n])
            pi = bayes_update(pi, gamma, a, n)
            xt = update_x_tilde(xt, gamma, a, n)
            b[n] = max(b[n], a)
            if xt not in closed:
                closed[xt] = closed_form_belief(xt, params, exact)
            worst = max(worst, pi.max_abs_diff(closed[xt]))
    return worst


# ------------------------------------------------- finite fixed-point check

def _finite_states(N):
    for xt in itertools.product((-1, 0, 1), repeat=N):
        for b in itertools.product((0, 1), repeat=N):
            if any(t == 1 and bb == 0 for t, bb in zip(xt, b)):
                continue
            yield xt, b


def _yw(xt, b):
    return sum(xt), sum(max(abs(t), bb) for t, bb in zip(xt, b))


class _FiniteModel:
    def __init__(self, profile, values, params):
        self.profile, self.values, self.params = profile, values, params
        self.N = params.N

    def gamma(self, n, xt, b):
        if b[n]:
            return Gamma.WAIT
        y, w = _yw(xt, b)
        r = abs(xt[n])
        if not is_feasible_acting(r, y, w, self.N):
            raise MappingDomainError(f"acting state (r={r}, y={y}, w={w}) from x_tilde={xt}, b={b}")
        return self.profile[r, y, w]

    def V(self, m, xm, n, xt, b):
        """Mapped finite value of player m with signal xm while n acts."""
        if b[m]:
            return Fraction(0)
        y, w = _yw(xt, b)
        if m == n:
            r = abs(xt[n])
            if not is_feasible_acting(r, y, w, self.N):
                raise MappingDomainError(f"acting state (r={r}, y={y}, w={w})")
            return self.values[("a", xm, r, y, w)]
        rt, z = abs(xt[m]), max(abs(xt[n]), b[n])
        if not is_feasible_nonacting(rt, z, y, w, self.N):
            raise MappingDomainError(f"non-acting state (rt={rt}, z={z}, y={y}, w={w})")
        return self.values[("na", xm, rt, z, y, w)]

    def exponent(self, m, xm, xt):
        return sum(xt) - xt[m] + xm

    def wait_value(self, m, xm, xt, b):
        """(delta/N) sum_n' V^m(x^m, n', F(x_tilde, gamma*, 0, m), b)."""
        p = self.params
        g = self.gamma(m, xt, b)
        xt2 = update_x_tilde(xt, g, 0, m)
        return p.delta / self.N * sum(self.V(m, xm, k, xt2, b) for k in range(self.N))

    def rhs(self, m, xm, n, xt, b):
        p = self.params
        if b[m]:
            return Fraction(0)
        if n == m:
            g = self.gamma(m, xt, b)
            if g.action(xm) == 1:
                return instant_reward(self.exponent(m, xm, xt), p)
            return self.wait_value(m, xm, xt, b)
        g = self.gamma(n, xt, b)
        total = Fraction(0)
        for xn in SIGNALS:
            if xt[n] != 0:
                pr = Fraction(int(xn == xt[n]))
            else:
                pr = signal_posterior(xn, self.exponent(m, xm, xt), p)
            if pr == 0:
                continue
            a = g.action(xn)
            xt2 = update_x_tilde(xt, g, a, n)
            b2 = b[:n] + (max(b[n], a),) + b[n + 1:]
            total += pr * sum(self.V(m, xm, k, xt2, b2) for k in range(self.N))
        return p.delta / self.N * total


def fpe2_residual(profile: StrategyProfile, quad_values: ValueTables, params: GameParams) -> Fraction:
    """Largest exact discrepancy of the finite (x_tilde, b) equations under the mapped values.

    Covers both the value equations and sequential rationality of every acting
    player (a violated argmax contributes its payoff gap).
    """
    N = params.N
    if N > 4:
        raise ValueError("finite enumeration is limited to N <= 4")
    if not quad_values.exact:
        raise ValueError("exact values are required")
    fm = _FiniteModel(profile, quad_values, params)
    worst = Fraction(0)
    for xt, b in _finite_states(N):
        for n in range(N):
            for m in range(N):
                for xm in SIGNALS:
                    lhs = fm.V(m, xm, n, xt, b)
                    worst = max(worst, abs(lhs - fm.rhs(m, xm, n, xt, b)))
            if b[n]:
                continue
            g = fm.gamma(n, xt, b)
            for xn in SIGNALS:
                buy = instant_reward(fm.exponent(n, xn, xt), params)
                wait = fm.wait_value(n, xn, xt, b)
                gap = wait - buy if g.action(xn) == 1 else buy - wait
                worst = max(worst, gap)
    return worst


class _TabulatedModel(_FiniteModel):
    """Finite model whose values come from its own table instead of the mapping."""

    def __init__(self, profile, params):
        super().__init__(profile, None, params)
        self.table = {}

    def V(self, m, xm, n, xt, b):
        if b[m]:
            return 0.0
        return self.table.get((m, xm, n, xt, b), 0.0)


def finite_values(profile: StrategyProfile, params: GameParams, tol: float = 1e-14, max_iters: int = 10_000):
    """Float value iteration of the finite (x_tilde, b) equations, independent of the (y, w) reduction.

    Returns a function (m, x^m, actor, x_tilde, b) -> value.
    """
    N = params.N
    if N > 4:
        raise ValueError("finite enumeration is limited to N <= 4")
    fm = _TabulatedModel(profile, params)
    keys = [(m, xm, n, xt, b) for xt, b in _finite_states(N) for n in range(N) for m in range(N)
            if not b[m] for xm in SIGNALS]
    for _ in range(max_iters):
        change = 0.0
        for k in keys:
            new = float(fm.rhs(*k))
            change = max(change, abs(new - fm.table.get(k, 0.0)))
            fm.table[k] = new
        if change < tol:
            break
    else:
        raise RuntimeError("finite value iteration did not converge")
    return lambda m, xm, n, xt, b: fm.V(m, xm, n, xt, b)


def mapped_value(values: ValueTables, params: GameParams, m, xm, n, xt, b):
    """Quadratic value of finite state (m, x^m, actor, x_tilde, b) under the state mapping."""
    return _FiniteModel(None, values, params).V(m, xm, n, xt, b)


# ------------------------------------------------------ deviation testing

@dataclass
class DeviationResult:
    states: tuple  # ((r, y, w), Gamma) pairs defining the deviation
    improvement: float
    stderr: float

    @property
    def z(self):
        return self.improvement / self.stderr if self.stderr > 0 else (math.inf if self.improvement > 0 else 0.0)


@dataclass
class DeviationReport:
    baseline: float
    results: list = field(default_factory=list)
    n_samples: int = 0
    horizon: int = 0
    exact: bool = False

    @property
    def best(self) -> DeviationResult | None:
        return max(self.results, key=lambda d: d.improvement - 3 * d.stderr, default=None)

    @property
    def passed(self) -> bool:
        return all(d.improvement <= 3 * d.stderr for d in self.results)


def truncation_horizon(delta, tol: float) -> int:
    delta = float(delta)
    if delta == 0:
        return 1
    if delta >= 1:
        raise ValueError("delta = 1 needs an explicit horizon")
    return max(1, math.ceil(math.log(tol) / math.log(delta)))


def _phi_table(profile):
    return profile.phi.astype(np.int8)


def _play(phi_eq, phi_dev, params, v, x, actors):
    """Player 0's discounted payoff per path and visit counts of player 0's acting states."""
    N = params.N
    S, T = actors.shape
    delta = float(params.delta)
    xt = np.zeros((S, N), dtype=np.int8)
    b = np.zeros((S, N), dtype=bool)
    payoff = np.zeros(S)
    rows = np.arange(S)
    visits = np.zeros(phi_eq.shape, dtype=np.int64)
    disc = 1.0
    for t in range(T):
        n = actors[:, t]
        y = xt.sum(axis=1).astype(np.int64)
        w = np.maximum(np.abs(xt), b).sum(axis=1)
        r = np.abs(xt[rows, n]).astype(np.int64)
        free = ~b[rows, n]
        g_eq = phi_eq[r, y + N, w]
        own = free & (n == 0)
        g_act = np.where(own, phi_dev[r, y + N, w], g_eq)
        xn = x[rows, n]
        a = free & ((g_act == Gamma.BUY) | ((g_act == Gamma.REVEAL) & (xn == 1)))
        np.add.at(visits, (r[own], y[own] + N, w[own]), 1)
        hit = own & a
        payoff[hit] += disc * v[hit]
        reveal = free & (g_eq == Gamma.REVEAL) & (xt[rows, n] == 0)
        xt[rows[reveal], n[reveal]] = np.where(a[reveal], 1, -1)
        b[rows, n] |= a
        disc *= delta
    return payoff, visits


def _sample_paths(params, n_samples, horizon, seed):
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    N = params.N
    v = np.where(rng.random(n_samples) < 0.5, 1, -1).astype(np.int8)
    flip = rng.random((n_samples, N)) < float(params.p)
    x = np.where(flip, -v[:, None], v[:, None]).astype(np.int8)
    actors = rng.integers(0, N, size=(n_samples, horizon))
    return v, x, actors


def _exact_myopic(profile, params, dev_phi=None):
    """Player 0's exact payoff at delta = 0: only the first turn counts."""
    N = params.N
    g = profile[0, 0, 0] if dev_phi is None else Gamma(int(dev_phi[0, N, 0]))
    total = Fraction(0)
    for xn in SIGNALS:
        if g.action(xn) == 1:
            pr_x = Fraction(1, 2)  # prior signal marginal
            total += pr_x * instant_reward(xn, params)
    return total / N


def deviation_test(profile: StrategyProfile, params: GameParams, seed: int = 0, n_samples: int = 100_000,
                   horizon: int | None = None, tol: float = 1e-6, k: int = 2) -> DeviationReport:
    """Compare player 0's payoff under the profile with unilateral structured deviations.

    Deviations flip the prescribed partial function at one acting state, plus
    all joint alternatives on the k states player 0 visits most often. The
    public keeps interpreting player 0's actions through the equilibrium
    profile. Paths are paired across deviations (common random numbers).
    """
    N = params.N
    if N > 4:
        raise ValueError("deviation tests are limited to N <= 4")
    phi = _phi_table(profile)
    if params.delta == 0:
        base = _exact_myopic(profile, params)
        report = DeviationReport(float(base), exact=True, horizon=1)
        for g in Gamma:
            if g is profile[0, 0, 0]:
                continue
            dev = phi.copy()
            dev[0, N, 0] = g
            gain = _exact_myopic(profile, params, dev) - base
            report.results.append(DeviationResult((((0, 0, 0), g),), float(gain), 0.0))
        return report

    if horizon is None:
        horizon = truncation_horizon(params.delta, tol)
    v, x, actors = _sample_paths(params, n_samples, horizon, seed)
    base, visits = _play(phi, phi, params, v, x, actors)
    report = DeviationReport(float(base.mean()), n_samples=n_samples, horizon=horizon)

    def run(changes):
        dev = phi.copy()
        for (r, y, w), g in changes:
            dev[r, y + N, w] = g
        pay, _ = _play(phi, dev, params, v, x, actors)
        d = pay - base
        se = float(d.std(ddof=1) / math.sqrt(n_samples))
        report.results.append(DeviationResult(tuple(changes), float(d.mean()), se))

    # deviations at states player 0 never reaches leave every path unchanged
    visited = sorted(((int(visits[i]), (int(i[0]), int(i[1]) - N, int(i[2])))
                      for i in zip(*np.nonzero(visits))), reverse=True)
    states = [s for _, s in visited]
    for s in states:
        for g in Gamma:
            if g is not profile[s]:
                run([(s, g)])
    top = states[:k]
    if len(top) >= 2:
        for combo in itertools.product(list(Gamma), repeat=len(top)):
            changes = [(s, g) for s, g in zip(top, combo) if g is not profile[s]]
            if len(changes) >= 2:
                run(changes)
    return report
