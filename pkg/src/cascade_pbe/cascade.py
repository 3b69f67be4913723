"""Cascade analysis: revelation-epoch chain, exact onset DP and forward simulation.

Only free players (neither revealed nor bought) move the public state (y, w),
and given V their signals stay i.i.d. on the equilibrium path, so the public
process conditional on V is a Markov chain on (y, w).
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .game import SIGNALS, Gamma, GameParams, is_feasible_acting
from .linalg import SingularMatrix, gauss_solve
from .model import StrategyProfile

BUY_CASCADE = "buy-cascade"
WAIT_CASCADE = "wait-cascade"
EXHAUSTION = "exhaustion"
NONE = "none"
CLASSES = (BUY_CASCADE, WAIT_CASCADE, EXHAUSTION, NONE)


class WDependentProfile(UserWarning):
    pass


class NonClosedBuyRegion(UserWarning):
    pass


class NotAbsorbing(ValueError):
    pass


class DeltaOne(ValueError):
    pass


# ----------------------------------------------------- revelation chain

def up_probability(y: int, params: GameParams):
    """Posterior-mixed probability that the next revealed signal is +1."""
    t = params.q ** y
    return (params.p + (1 - params.p) * t) / (t + 1)


@dataclass
class RevelationChain:
    states: list
    up: dict
    down: dict
    absorbing: set
    w_dependent: list = field(default_factory=list)

    @property
    def transient(self):
        return [y for y in self.states if y not in self.absorbing]


def _reveal_row(profile: StrategyProfile, y: int):
    return [(w, profile[0, y, w]) for w in range(profile.N + 1) if profile[0, y, w] is not None]


def revelation_chain(profile: StrategyProfile, params: GameParams) -> RevelationChain:
    """Chain on y at revelation epochs, grown outward from y=0 until a non-REVEAL row.

    A row that mixes REVEAL with other prescriptions across w is classified by
    its lowest feasible w and reported in ``w_dependent`` with a warning.
    """
    N = params.N
    flagged = []

    def is_reveal(y):
        row = _reveal_row(profile, y)
        if not row:
            return False
        kinds = {g is Gamma.REVEAL for _, g in row}
        if len(kinds) > 1:
            flagged.append(y)
        return row[0][1] is Gamma.REVEAL

    lo = hi = 0
    if is_reveal(0):
        while lo - 1 >= -N and is_reveal(lo - 1):
            lo -= 1
        lo -= 1
        while hi + 1 <= N and is_reveal(hi + 1):
            hi += 1
        hi += 1
        lo, hi = max(lo, -N), min(hi, N)
    states = list(range(lo, hi + 1))
    absorbing = {y for y in states if y in (lo, hi)} if lo < hi else {0}
    up, down = {}, {}
    for y in states:
        if y in absorbing:
            up[y], down[y] = Fraction(0), Fraction(0)
        else:
            up[y] = up_probability(y, params)
            down[y] = 1 - up[y]
    if flagged:
        warnings.warn(f"REVEAL region depends on w at y={sorted(set(flagged))}", WDependentProfile, stacklevel=2)
    return RevelationChain(states, up, down, absorbing, sorted(set(flagged)))


def absorption(chain: RevelationChain, start_y: int):
    """Exact hit probabilities of each absorbing state and expected steps from ``start_y``."""
    if start_y not in chain.states:
        raise ValueError(f"y={start_y} is not a chain state")
    if start_y in chain.absorbing:
        return {a: Fraction(int(a == start_y)) for a in chain.absorbing}, Fraction(0)
    trans = chain.transient
    idx = {y: i for i, y in enumerate(trans)}
    n = len(trans)
    A = [[Fraction(0)] * n for _ in range(n)]
    for y in trans:
        i = idx[y]
        A[i][i] += 1
        for nxt, pr in ((y + 1, chain.up[y]), (y - 1, chain.down[y])):
            if nxt in idx:
                A[i][idx[nxt]] -= pr
    try:
        steps = gauss_solve(A, [Fraction(1)] * n)
        hits = {}
        for a in sorted(chain.absorbing):
            b = [sum((pr for nxt, pr in ((y + 1, chain.up[y]), (y - 1, chain.down[y])) if nxt == a), Fraction(0))
                 for y in trans]
            hits[a] = gauss_solve(A, b)[idx[start_y]]
    except SingularMatrix:
        raise NotAbsorbing("some transient state cannot reach the absorbing set") from None
    return hits, steps[idx[start_y]]


def y_max_bound(params: GameParams) -> int:
    """ceil(1 + log_q((1+delta)/(1-delta))) by exact power comparison."""
    d = params.delta
    if d == 1:
        raise DeltaOne("the bound diverges at delta = 1")
    ratio = (1 + d) / (1 - d)
    k, power = 0, Fraction(1)
    while power < ratio:
        k += 1
        power *= params.q
    return 1 + k


# ------------------------------------------------------- distributions

@dataclass
class CascadeDistribution:
    """Per-v class probabilities, onset-w histograms and mean revelations before onset."""

    N: int
    probs: dict  # v -> {class: probability}
    onset_w: dict  # v -> {class: {w: probability}}
    revelations: dict  # v -> expected revelations before onset
    exact: bool = True
    runs: dict = field(default_factory=dict)  # v -> sample size (empirical only)
    flags: list = field(default_factory=list)

    def bad_probability(self, v: int):
        """Probability of the cascade whose pooled action contradicts v."""
        return self.probs[v][BUY_CASCADE if v == -1 else WAIT_CASCADE]

    def bad_onset(self, v: int) -> dict:
        return self.onset_w[v][BUY_CASCADE if v == -1 else WAIT_CASCADE]

    def cascade_probability(self, v: int | None = None):
        vs = SIGNALS if v is None else (v,)
        total = sum(self.probs[u][BUY_CASCADE] + self.probs[u][WAIT_CASCADE] for u in vs)
        return total / len(vs)

    def mean_revelations(self):
        return sum(self.revelations[v] for v in SIGNALS) / 2

    def cumulative_bad(self, v: int) -> list:
        """P(bad cascade with onset W <= w) for w = 0..N."""
        hist = self.bad_onset(v)
        out, acc = [], 0
        for w in range(self.N + 1):
            acc = acc + hist.get(w, 0)
            out.append(acc)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["v", "class", "probability"])
        for v in sorted(self.probs):
            for c in CLASSES:
                wr.writerow([v, c, _fmt(self.probs[v][c])])
        return buf.getvalue()

    def cumulative_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        vs = sorted(self.probs)
        wr.writerow(["w"] + [f"bad_v{v:+d}" for v in vs])
        cols = [self.cumulative_bad(v) for v in vs]
        for w in range(self.N + 1):
            wr.writerow([w] + [_fmt(c[w]) for c in cols])
        return buf.getvalue()


def _fmt(x):
    return repr(float(x)) if isinstance(x, Fraction) else repr(x)


# --------------------------------------------------------------- exact DP

def buy_closed(profile: StrategyProfile, y: int, w: int) -> bool:
    return all(profile[0, y, k] is Gamma.BUY for k in range(w, profile.N + 1) if profile[0, y, k] is not None)


def exact_cascade_dp(profile: StrategyProfile, params: GameParams, vs=SIGNALS) -> CascadeDistribution:
    """Exact onset distribution over the embedded free-player chain on (y, w)."""
    N = params.N
    probs, onset, revs = {}, {}, {}
    flags = []
    for v in vs:
        p_up = params.signal_prob(1, v)
        cls = {c: Fraction(0) for c in CLASSES}
        hist = {c: {} for c in CLASSES}
        expected_reveals = Fraction(0)
        mass = {(0, 0): Fraction(1)}
        for w in range(N + 1):
            layer = sorted((y, m) for (y, ww), m in mass.items() if ww == w)
            for y, m in layer:
                if m == 0:
                    continue
                if not is_feasible_acting(0, y, w, N):
                    # no free player left
                    cls[EXHAUSTION] += m
                    hist[EXHAUSTION][w] = hist[EXHAUSTION].get(w, 0) + m
                    continue
                g = profile[0, y, w]
                if g is Gamma.WAIT:
                    cls[WAIT_CASCADE] += m
                    hist[WAIT_CASCADE][w] = hist[WAIT_CASCADE].get(w, 0) + m
                    continue
                if g is Gamma.BUY:
                    if buy_closed(profile, y, w):
                        cls[BUY_CASCADE] += m
                        hist[BUY_CASCADE][w] = hist[BUY_CASCADE].get(w, 0) + m
                        continue
                    flag = f"BUY at (y={y}, w={w}) is not closed in w"
                    if flag not in flags:
                        flags.append(flag)
                        warnings.warn(flag, NonClosedBuyRegion, stacklevel=2)
                    mass[(y, w + 1)] = mass.get((y, w + 1), 0) + m
                    continue
                expected_reveals += m
                mass[(y + 1, w + 1)] = mass.get((y + 1, w + 1), 0) + m * p_up
                mass[(y - 1, w + 1)] = mass.get((y - 1, w + 1), 0) + m * (1 - p_up)
        probs[v], onset[v], revs[v] = cls, hist, expected_reveals
    return CascadeDistribution(N, probs, onset, revs, exact=True, flags=flags)


# ------------------------------------------------------------ simulation

@dataclass
class SimulationResult:
    distribution: CascadeDistribution
    v: np.ndarray
    cls: np.ndarray  # index into CLASSES
    onset_w: np.ndarray  # -1 when no onset
    onset_turn: np.ndarray
    revelations: np.ndarray
    utility: np.ndarray  # mean realized discounted payoff per player

    def agreement(self, exact: CascadeDistribution, k: float = 3.0) -> list:
        """(v, class, empirical, exact, stderr, ok) rows for a DP/MC comparison."""
        rows = []
        emp = self.distribution
        for v in sorted(emp.probs):
            n = emp.runs[v]
            for c in CLASSES:
                p = float(exact.probs[v][c])
                f = emp.probs[v][c]
                se = math.sqrt(p * (1 - p) / n) if n else 0.0
                ok = abs(f - p) <= k * se + 1e-12
                rows.append((v, c, f, p, se, ok))
        return rows


def simulate(profile: StrategyProfile, params: GameParams, seed: int = 0, n_runs: int = 10_000,
             max_turns: int | None = None, v: int | None = None) -> SimulationResult:
    """Player-level forward simulation of the profile; deterministic given ``seed``.

    Cascade classes use the same onset rule as the exact DP. Runs that reach
    neither an onset nor exhaustion within ``max_turns`` are counted as "none".
    """
    N = params.N
    max_turns = 100 * N if max_turns is None else max_turns
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    S = n_runs
    if v is None:
        vv = np.where(rng.random(S) < 0.5, 1, -1).astype(np.int8)
    else:
        vv = np.full(S, v, dtype=np.int8)
    flip = rng.random((S, N)) < float(params.p)
    x = np.where(flip, -vv[:, None], vv[:, None]).astype(np.int8)

    phi = profile.phi
    # onset lookup on r=0 cells: 0 none, 1 wait, 2 closed buy
    onset_kind = np.zeros((2 * N + 1, N + 1), dtype=np.int8)
    for (r, y, w), g in profile.items():
        if r == 0:
            if g is Gamma.WAIT:
                onset_kind[y + N, w] = 1
            elif g is Gamma.BUY and buy_closed(profile, y, w):
                onset_kind[y + N, w] = 2

    xt = np.zeros((S, N), dtype=np.int8)
    b = np.zeros((S, N), dtype=bool)
    rows = np.arange(S)
    y = np.zeros(S, dtype=np.int64)
    w = np.zeros(S, dtype=np.int64)
    cls = np.full(S, CLASSES.index(NONE), dtype=np.int8)
    onset_w = np.full(S, -1, dtype=np.int64)
    onset_turn = np.full(S, -1, dtype=np.int64)
    reveals = np.zeros(S, dtype=np.int64)
    utility = np.zeros(S)
    settled = np.zeros(S, dtype=bool)
    delta = float(params.delta)
    disc = 1.0

    def classify(t):
        nonlocal settled
        open_ = ~settled
        kind = np.where(w < N, onset_kind[y + N, np.minimum(w, N)], 0)
        exhausted = open_ & (w >= N)
        wait = open_ & ~exhausted & (kind == 1)
        buy = open_ & ~exhausted & (kind == 2)
        for mask, c in ((exhausted, EXHAUSTION), (wait, WAIT_CASCADE), (buy, BUY_CASCADE)):
            cls[mask] = CLASSES.index(c)
            onset_w[mask] = w[mask]
            onset_turn[mask] = t
        settled = settled | exhausted | wait | buy

    classify(0)
    for t in range(max_turns):
        n = rng.integers(0, N, size=S)
        free = ~b[rows, n]
        r = np.abs(xt[rows, n]).astype(np.int64)
        g = np.where(free, phi[r, y + N, w], Gamma.WAIT)
        xn = x[rows, n]
        a = free & ((g == Gamma.BUY) | ((g == Gamma.REVEAL) & (xn == 1)))
        rev = free & (g == Gamma.REVEAL) & (xt[rows, n] == 0)
        reveals += rev & ~settled
        utility += np.where(a, disc * vv, 0.0)
        newly = (a | rev) & ~((xt[rows, n] != 0) | b[rows, n])
        xt[rows[rev], n[rev]] = np.where(a[rev], 1, -1)
        y += np.where(rev, np.where(a, 1, -1), 0)
        w += newly
        b[rows, n] |= a
        disc *= delta
        classify(t + 1)
        if settled.all() and not _can_move(phi, xt, b, x, y, w, N).any():
            break
    utility /= N

    probs, onset, revs, runs = {}, {}, {}, {}
    for u in sorted(set(vv.tolist())):
        m = vv == u
        n_u = int(m.sum())
        runs[u] = n_u
        probs[u] = {c: float((cls[m] == i).sum()) / n_u for i, c in enumerate(CLASSES)}
        onset[u] = {}
        for i, c in enumerate(CLASSES):
            ws = onset_w[m & (cls == i)]
            onset[u][c] = {int(k): float(cnt) / n_u for k, cnt in zip(*np.unique(ws, return_counts=True))}
        revs[u] = float(reveals[m].mean())
    dist = CascadeDistribution(N, probs, onset, revs, exact=False, runs=runs)
    return SimulationResult(dist, vv, cls, onset_w, onset_turn, reveals, utility)


def _can_move(phi, xt, b, x, y, w, N):
    """True for runs in which some player would still change the state by acting."""
    out = np.zeros(len(y), dtype=bool)
    for n in range(N):
        free = ~b[:, n]
        r = np.abs(xt[:, n]).astype(np.int64)
        g = np.where(free, phi[r, y + N, w], Gamma.WAIT)
        buys = (g == Gamma.BUY) | ((g == Gamma.REVEAL) & (x[:, n] == 1))
        out |= free & (buys | ((g == Gamma.REVEAL) & (xt[:, n] == 0)))
    return out
