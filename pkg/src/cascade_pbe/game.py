"""Model primitives: parameters, partial functions, rewards, posteriors and state updates.

Exact values are ``fractions.Fraction``; the float path is only used by the
value-iteration solver and the Monte Carlo code.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

Scalar = Fraction | float


class Gamma(enum.IntEnum):
    """Partial function of the acting player: signal -> action."""

    WAIT = 0
    REVEAL = 1
    BUY = 2

    def action(self, x: int) -> int:
        if self is Gamma.BUY:
            return 1
        if self is Gamma.REVEAL:
            return 1 if x == 1 else 0
        return 0

    @property
    def code(self) -> str:
        return GAMMA_CODES[self]

    @classmethod
    def from_code(cls, code: str) -> "Gamma":
        try:
            return _CODE_TO_GAMMA[code]
        except KeyError:
            raise ValueError(f"unknown strategy code {code!r}") from None


GAMMA_CODES = {Gamma.WAIT: "00", Gamma.REVEAL: "01", Gamma.BUY: "11"}
_CODE_TO_GAMMA = {v: k for k, v in GAMMA_CODES.items()}
SIGNALS = (-1, 1)


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions, ``"a/b"`` and decimal strings exactly (floats are rejected)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class GameParams:
    n_players: int
    p: Fraction
    delta: Fraction
    q: Fraction = field(init=False)

    def __post_init__(self):
        p = as_fraction(self.p)
        delta = as_fraction(self.delta)
        if not isinstance(self.n_players, int) or self.n_players < 1:
            raise ValueError("n_players must be a positive integer")
        if not 0 < p < Fraction(1, 2):
            raise ValueError("p must lie in (0, 1/2)")
        if not 0 <= delta <= 1:
            raise ValueError("delta must lie in [0, 1]")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "q", (1 - p) / p)

    @property
    def N(self) -> int:
        return self.n_players

    def with_delta(self, delta) -> "GameParams":
        return GameParams(self.n_players, self.p, delta)

    def signal_prob(self, x: int, v: int) -> Fraction:
        """Q(x | v)."""
        return 1 - self.p if x == v else self.p


def _qpow(e: int, params: GameParams, exact: bool):
    if exact:
        return params.q ** e
    return float(params.q) ** e


def likelihood_exponent(y: int, r_self: int, x: int) -> int:
    """Private log-likelihood index (base q) of a player who has not bought yet."""
    return y + r_self + x


def instant_reward(e: int, params: GameParams, exact: bool = True) -> Scalar:
    """Expected value of V under likelihood ratio q**e, i.e. the payoff of buying now."""
    t = _qpow(e, params, exact)
    return (t - 1) / (t + 1)


def signal_posterior(x_next: int, e: int, params: GameParams, exact: bool = True) -> Scalar:
    """Probability that another free player's signal is ``x_next`` given exponent ``e``."""
    t = _qpow(e, params, exact)
    lo = params.signal_prob(x_next, -1)
    hi = params.signal_prob(x_next, 1)
    if not exact:
        lo, hi = float(lo), float(hi)
    return (lo + hi * t) / (1 + t)


def public_belief_v(y: int, params: GameParams, exact: bool = True) -> Scalar:
    """Public probability that V = 1 after aggregated revealed information ``y``."""
    t = _qpow(y, params, exact)
    return t / (1 + t)


def apply_update(z: int, r: int, y: int, w: int, gamma: Gamma, a: int) -> tuple[int, int, int, int]:
    """Joint state update (z', r', y', w') after the acting player uses ``gamma`` and plays ``a``."""
    r_new = 1 if (r == 0 and gamma is Gamma.REVEAL) else r
    z_new = 1 if (z == 0 and (a == 1 or gamma is Gamma.REVEAL)) else z
    y_new = y + (2 * a - 1) if (z == 0 and gamma is Gamma.REVEAL) else y
    w_new = w + z_new - z
    return z_new, r_new, y_new, w_new


def _y_range_ok(own_r: int, y: int, w: int) -> bool:
    # a revealed player who has not bought contributed -1 to y
    return -w <= y <= w - 2 * own_r


def is_feasible_acting(r: int, y: int, w: int, N: int) -> bool:
    if not (0 <= w <= N and _y_range_ok(r, y, w)):
        return False
    if r == 0:
        return w <= N - 1
    return w >= 1


def is_feasible_nonacting(rt: int, z: int, y: int, w: int, N: int) -> bool:
    """Evaluating player with revealed flag ``rt`` while a distinct player with flag ``z`` acts."""
    if N < 2 or not (0 <= w <= N and _y_range_ok(rt, y, w)):
        return False
    # both players count in w when flagged; the N-2 others fill the rest
    return rt + z <= w <= N - 2 + rt + z


def acting_states(N: int):
    """All feasible acting states (r, y, w) in solve order: decreasing w, then y."""
    for w in range(N, -1, -1):
        for y in range(-w, w + 1):
            for r in (0, 1):
                if is_feasible_acting(r, y, w, N):
                    yield r, y, w
