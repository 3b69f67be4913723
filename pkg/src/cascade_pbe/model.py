"""Strategy profiles, value tables and the quadratic fixed-point value equations.

Value keys are tuples:
    ("a", x, r, y, w)        acting player's value U_a
    ("na", x, rt, z, y, w)   non-acting player's value U_na^rt
The equation for each key is ``value = const + sum(coef * value[target])``;
both the float solver and the exact verifier are built on :func:`equation`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .game import (
    SIGNALS,
    Gamma,
    GameParams,
    apply_update,
    instant_reward,
    is_feasible_acting,
    is_feasible_nonacting,
    likelihood_exponent,
    signal_posterior,
)

UNSET = -1


class StrategyProfile:
    """The map (r, y, w) -> Gamma on feasible acting states; infeasible cells hold a sentinel."""

    def __init__(self, N: int, phi: np.ndarray | None = None):
        self.N = N
        shape = (2, 2 * N + 1, N + 1)
        if phi is None:
            phi = np.full(shape, UNSET, dtype=np.int8)
        elif phi.shape != shape:
            raise ValueError(f"phi has shape {phi.shape}, expected {shape}")
        self.phi = phi

    @classmethod
    def from_rule(cls, N: int, rule) -> "StrategyProfile":
        prof = cls(N)
        for r in (0, 1):
            for w in range(N + 1):
                for y in range(-w, w + 1):
                    if is_feasible_acting(r, y, w, N):
                        prof[r, y, w] = rule(r, y, w)
        return prof

    def __getitem__(self, key) -> Gamma | None:
        r, y, w = key
        if not is_feasible_acting(r, y, w, self.N):
            return None
        code = int(self.phi[r, y + self.N, w])
        return None if code == UNSET else Gamma(code)

    def __setitem__(self, key, gamma: Gamma):
        r, y, w = key
        if not is_feasible_acting(r, y, w, self.N):
            raise KeyError(f"infeasible acting state {key} for N={self.N}")
        self.phi[r, y + self.N, w] = int(gamma)

    def copy(self) -> "StrategyProfile":
        return StrategyProfile(self.N, self.phi.copy())

    def __eq__(self, other):
        return isinstance(other, StrategyProfile) and self.N == other.N and np.array_equal(self.phi, other.phi)

    def items(self):
        for r in (0, 1):
            for w in range(self.N + 1):
                for y in range(-w, w + 1):
                    g = self[r, y, w]
                    if g is not None:
                        yield (r, y, w), g

    def is_total(self) -> bool:
        return all(
            self[r, y, w] is not None
            for r in (0, 1)
            for w in range(self.N + 1)
            for y in range(-w, w + 1)
            if is_feasible_acting(r, y, w, self.N)
        )

    def diff(self, other: "StrategyProfile") -> list[tuple[tuple[int, int, int], Gamma, Gamma]]:
        out = []
        for key, g in self.items():
            h = other[key]
            if g != h:
                out.append((key, g, h))
        return out

    def __repr__(self):
        return f"StrategyProfile(N={self.N})"


def key_feasible(key, N: int) -> bool:
    if key[0] == "a":
        _, _, r, y, w = key
        return is_feasible_acting(r, y, w, N)
    _, _, rt, z, y, w = key
    return is_feasible_nonacting(rt, z, y, w, N)


def cell_keys(y: int, w: int, N: int) -> list[tuple]:
    """Feasible value keys of cell (y, w); at most 12."""
    keys = []
    for x in SIGNALS:
        for r in (0, 1):
            k = ("a", x, r, y, w)
            if key_feasible(k, N):
                keys.append(k)
            for z in (0, 1):
                k = ("na", x, r, z, y, w)
                if key_feasible(k, N):
                    keys.append(k)
    return keys


def all_keys(N: int):
    for w in range(N, -1, -1):
        for y in range(-w, w + 1):
            yield from cell_keys(y, w, N)


class ValueTables:
    """U_a and U_na over the feasible state space, float or exact."""

    def __init__(self, N: int, exact: bool):
        self.N = N
        self.exact = exact
        self.data: dict[tuple, object] = {}
        zero = Fraction(0) if exact else 0.0
        for k in all_keys(N):
            self.data[k] = zero

    def __getitem__(self, key):
        return self.data[key]

    def __setitem__(self, key, value):
        if key not in self.data:
            raise KeyError(f"infeasible value key {key}")
        self.data[key] = value

    def ua(self, x, r, y, w):
        return self.data[("a", x, r, y, w)]

    def una(self, x, rt, z, y, w):
        return self.data[("na", x, rt, z, y, w)]

    def copy(self) -> "ValueTables":
        new = ValueTables.__new__(ValueTables)
        new.N, new.exact, new.data = self.N, self.exact, dict(self.data)
        return new

    def to_float(self) -> "ValueTables":
        new = self.copy()
        new.exact = False
        new.data = {k: float(v) for k, v in self.data.items()}
        return new

    def max_abs_diff(self, other: "ValueTables") -> float:
        return max((abs(float(self.data[k]) - float(other.data[k])) for k in self.data), default=0.0)

    def keys(self):
        return self.data.keys()


def _num(value, exact: bool):
    return value if exact else float(value)


def continuation_terms(r: int, y: int, w: int, x: int, gamma: Gamma, params: GameParams, exact: bool = True):
    """Terms of the waiting payoff A for acting player (r, y, w) with signal x using candidate gamma."""
    N = params.N
    d = _num(params.delta, exact) / N
    _, r2, y2, w2 = apply_update(r, r, y, w, gamma, 0)
    terms = []
    for coef, key in (
        (d, ("a", x, r2, y2, w2)),
        (d * (N - w - 1 + r), ("na", x, r2, 0, y2, w2)),
        (d * (w - r), ("na", x, r2, 1, y2, w2)),
    ):
        if coef:
            terms.append((coef, key))
    return terms


def _nonacting_terms(x, rt, z, y, w, gamma0: Gamma | None, params: GameParams, exact: bool):
    N = params.N
    d = _num(params.delta, exact) / N
    acc: dict[tuple, object] = {}

    def add(coef, key):
        if coef:
            acc[key] = acc.get(key, 0) + coef

    if z == 1:
        add(d, ("a", x, rt, y, w))
        add(d * (w - rt), ("na", x, rt, 1, y, w))
        add(d * (N - w - 1 + rt), ("na", x, rt, 0, y, w))
    else:
        if gamma0 is None:
            raise ValueError(f"profile undefined at free-player state (0, {y}, {w})")
        e = likelihood_exponent(y, rt, x)
        for xn in SIGNALS:
            prob = signal_posterior(xn, e, params, exact)
            a = gamma0.action(xn)
            z2, _, y2, w2 = apply_update(0, 0, y, w, gamma0, a)
            add(prob * d, ("a", x, rt, y2, w2))
            add(prob * d, ("na", x, rt, z2, y2, w2))
            add(prob * d * (w - rt), ("na", x, rt, 1, y2, w2))
            add(prob * d * (N - w - 2 + rt), ("na", x, rt, 0, y2, w2))
    return [(c, k) for k, c in acc.items() if c]


def equation(key, profile: StrategyProfile, params: GameParams, exact: bool = True):
    """Return (const, terms) with value[key] = const + sum(coef * value[target])."""
    zero = Fraction(0) if exact else 0.0
    if key[0] == "a":
        _, x, r, y, w = key
        gamma = profile[r, y, w]
        if gamma is None:
            raise ValueError(f"profile undefined at acting state {(r, y, w)}")
        if gamma.action(x) == 1:
            return instant_reward(likelihood_exponent(y, r, x), params, exact), []
        return zero, continuation_terms(r, y, w, x, gamma, params, exact)
    _, x, rt, z, y, w = key
    gamma0 = profile[0, y, w] if z == 0 else None
    return zero, _nonacting_terms(x, rt, z, y, w, gamma0, params, exact)


def evaluate(const, terms, values: ValueTables):
    total = const
    for coef, k in terms:
        total = total + coef * values[k]
    return total
