"""Liquidity event game: data model, exact payouts and the Nash predicate.

A strategy profile is identified with its cashout set ``K``: the ids of the
players who take their principal back. Everyone else converts. Profiles are
plain ``frozenset`` objects of player ids.
"""

from __future__ import annotations

import enum
from functools import cached_property
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .rationals import RationalLike, to_rational

PlayerId = Hashable
Profile = frozenset
PayoutVector = dict  # player id -> Fraction, in game player order


class InputError(ValueError):
    """Malformed game, profile or contract data."""


@dataclass(frozen=True)
class Player:
    id: PlayerId
    p: Fraction
    alpha: Fraction
    gamma: Fraction

    def __post_init__(self):
        for name in ("p", "alpha", "gamma"):
            object.__setattr__(self, name, to_rational(getattr(self, name)))


@dataclass(frozen=True)
class LiquidityGame:
    """Game parameters ``(V, beta, players)``.

    Construction only normalizes numbers and checks structure. Sign and
    well-definedness conditions are reported by :func:`validate_game`.
    """

    V: Fraction
    beta: Fraction
    players: tuple[Player, ...]
    _index: Mapping[PlayerId, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "V", to_rational(self.V))
        object.__setattr__(self, "beta", to_rational(self.beta))
        players = tuple(self.players)
        if not players:
            raise InputError("a game needs at least one player")
        index = {}
        for pos, pl in enumerate(players):
            if not isinstance(pl, Player):
                raise InputError(f"expected Player, got {type(pl).__name__}")
            if pl.id in index:
                raise InputError(f"duplicate player id {pl.id!r}")
            index[pl.id] = pos
        object.__setattr__(self, "players", players)
        object.__setattr__(self, "_index", index)

    @classmethod
    def build(
        cls,
        V: RationalLike,
        beta: RationalLike,
        p: Sequence[RationalLike],
        alpha: Sequence[RationalLike],
        gamma: Sequence[RationalLike],
        ids: Sequence[PlayerId] | None = None,
    ) -> "LiquidityGame":
        """Column-wise constructor; ids default to 0..n-1."""
        if not (len(p) == len(alpha) == len(gamma)):
            raise InputError("p, alpha and gamma must have equal length")
        if ids is None:
            ids = range(len(p))
        ids = list(ids)
        if len(ids) != len(p):
            raise InputError("ids must match the number of players")
        players = tuple(Player(i, a, b, c) for i, a, b, c in zip(ids, p, alpha, gamma))
        return cls(V, beta, players)

    @property
    def n(self) -> int:
        return len(self.players)

    @property
    def ids(self) -> tuple[PlayerId, ...]:
        return tuple(pl.id for pl in self.players)

    def player(self, pid: PlayerId) -> Player:
        try:
            return self.players[self._index[pid]]
        except KeyError:
            raise InputError(f"unknown player id {pid!r}") from None

    def position(self, pid: PlayerId) -> int:
        try:
            return self._index[pid]
        except KeyError:
            raise InputError(f"unknown player id {pid!r}") from None

    def profile(self, ids: Iterable[PlayerId]) -> Profile:
        """Normalize an iterable of ids to a cashout set, rejecting unknown ids."""
        K = frozenset(ids)
        for pid in K:
            self.position(pid)
        return K

    def complement(self, K: Iterable[PlayerId]) -> Profile:
        K = self.profile(K)
        return frozenset(pl.id for pl in self.players if pl.id not in K)

    @cached_property
    def _principal_total(self) -> Fraction:
        return sum((pl.p for pl in self.players), Fraction(0))

    def total_principal(self, X: Iterable[PlayerId] | None = None) -> Fraction:
        """``p(X)``; the whole player set when X is None."""
        if X is None:
            return self._principal_total
        X = self.profile(X)
        return sum((pl.p for pl in self.players if pl.id in X), Fraction(0))

    def scaled(self, factor: RationalLike) -> "LiquidityGame":
        """Same game with V, every p and every gamma multiplied by ``factor``."""
        c = to_rational(factor)
        return LiquidityGame(
            self.V * c,
            self.beta,
            tuple(Player(pl.id, pl.p * c, pl.alpha, pl.gamma * c) for pl in self.players),
        )


# -- profile <-> bitmask ------------------------------------------------------

def profile_from_mask(game: LiquidityGame, mask: int) -> Profile:
    """Bit ``k`` set means the k-th player (in game order) cashes out."""
    return frozenset(pl.id for k, pl in enumerate(game.players) if mask >> k & 1)


def mask_of(game: LiquidityGame, K: Iterable[PlayerId]) -> int:
    mask = 0
    for pid in game.profile(K):
        mask |= 1 << game.position(pid)
    return mask


def canonical_order(game: LiquidityGame, profiles: Iterable[Profile]) -> list[Profile]:
    return sorted(profiles, key=lambda K: mask_of(game, K))


# -- payouts --------------------------------------------------------------------

def f_linear(game: LiquidityGame, X: Iterable[PlayerId]) -> Fraction:
    """Dilution divisor ``beta + sum of alpha_i over X``."""
    X = game.profile(X)
    return game.beta + sum((pl.alpha for pl in game.players if pl.id in X), Fraction(0))


def cashout_value(game: LiquidityGame, K: Iterable[PlayerId]) -> Fraction:
    """Total paid to the cashout set: ``min(p(K), V)``."""
    return min(game.total_principal(K), game.V)


def payouts(game: LiquidityGame, K: Iterable[PlayerId]) -> PayoutVector:
    K = game.profile(K)
    pK = game.total_principal(K)
    shortfall = pK > game.V
    residual = game.V - min(pK, game.V)
    converting = game.complement(K)
    divisor = f_linear(game, converting) if converting else None
    out: PayoutVector = {}
    for pl in game.players:
        if pl.id in K:
            out[pl.id] = pl.p / pK * game.V if shortfall else pl.p
        else:
            out[pl.id] = pl.p / (pl.gamma * divisor) * residual
    return out


def g_value(game: LiquidityGame, K: Iterable[PlayerId]) -> Fraction:
    """Residual per unit of divisor, ``(V - p(K)) / f(complement of K)``.

    A converting player receives ``p_i * g / gamma_i`` when ``p(K) <= V``.
    Negative when the cashout claims exceed V.
    """
    K = game.profile(K)
    return (game.V - game.total_principal(K)) / f_linear(game, game.complement(K))


# -- validation -----------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    condition: str  # "Eq1", "Eq2", "Eq3" or "positivity"
    witness: object  # a player id, or a frozenset of ids for Eq1
    explanation: str


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    solvable: bool
    violations: tuple[Violation, ...]
    eq1_method: str = "exact"

    @property
    def unsolvable_players(self) -> tuple[PlayerId, ...]:
        return tuple(v.witness for v in self.violations if v.condition == "Eq3")


def max_conversion_excess(game: LiquidityGame) -> tuple[Fraction, Profile]:
    """Largest ``sum_{i in C} (p_i/gamma_i - alpha_i)`` over nonempty C, and a maximizer.

    The distribution over a converting set C is well defined iff
    ``sum_C p_i/(gamma_i f(C)) < 1``, which (f(C) > 0) is the same as the
    sum above being below beta. The maximum over nonempty C is the sum of
    the positive terms, or the single largest term when none is positive.
    """
    terms = [(pl.p / pl.gamma - pl.alpha, pl.id) for pl in game.players]
    positive = [(t, pid) for t, pid in terms if t > 0]
    if positive:
        return sum((t for t, _ in positive), Fraction(0)), frozenset(pid for _, pid in positive)
    t, pid = max(terms, key=lambda tp: tp[0])
    return t, frozenset([pid])


def validate_game(game: LiquidityGame) -> ValidationReport:
    violations: list[Violation] = []
    if game.V <= 0:
        violations.append(Violation("positivity", "V", f"V must be positive, got {game.V}"))
    if game.beta <= 0:
        violations.append(Violation("positivity", "beta", f"beta must be positive, got {game.beta}"))
    signs_ok = game.beta > 0
    for pl in game.players:
        if pl.p <= 0:
            violations.append(Violation("positivity", pl.id, f"p must be positive, got {pl.p}"))
            signs_ok = False
        if pl.gamma <= 0:
            violations.append(Violation("positivity", pl.id, f"gamma must be positive, got {pl.gamma}"))
            signs_ok = False
        if pl.alpha < 0:
            violations.append(Violation("positivity", pl.id, f"alpha must be nonnegative, got {pl.alpha}"))
            signs_ok = False

    if signs_ok:
        for pl in game.players:
            bound = pl.gamma * (game.beta + pl.alpha)
            if not pl.p < bound:
                violations.append(Violation(
                    "Eq2", pl.id,
                    f"p = {pl.p} is not below gamma*(beta+alpha) = {bound}",
                ))
        excess, witness = max_conversion_excess(game)
        if not excess < game.beta:
            violations.append(Violation(
                "Eq1", witness,
                f"converting set {sorted(map(str, witness))} claims at least the whole residual",
            ))

    for pl in game.players:
        if pl.gamma * pl.alpha > pl.p:
            violations.append(Violation(
                "Eq3", pl.id,
                f"gamma*alpha = {pl.gamma * pl.alpha} exceeds p = {pl.p}",
            ))

    valid = not any(v.condition in ("Eq1", "Eq2", "positivity") for v in violations)
    solvable = not any(v.condition == "Eq3" for v in violations)
    return ValidationReport(valid, solvable, tuple(violations))


# -- equilibrium predicate -------------------------------------------------------

def stable_under_deviation(
    ids: Iterable[PlayerId],
    payout_fn: Callable[[Profile], Mapping[PlayerId, Fraction]],
    K: Profile,
) -> bool:
    """True iff no single player strictly gains by flipping their move."""
    current = payout_fn(K)
    for pid in ids:
        if payout_fn(K ^ {pid})[pid] > current[pid]:
            return False
    return True


def is_nash_direct(game: LiquidityGame, K: Iterable[PlayerId]) -> bool:
    K = game.profile(K)
    return stable_under_deviation(game.ids, lambda X: payouts(game, X), K)


def satisfies_nash_conditions(game: LiquidityGame, K: Iterable[PlayerId]) -> bool:
    """Closed-form test, valid only when ``V >= p(S)``.

    Cashers must not gain by converting:
    ``p(K) - p_i + gamma_i f(Kbar) + gamma_i alpha_i >= V``; converters must
    not gain by cashing: ``V >= p(K) + gamma_i f(Kbar)``.
    """
    if game.V < game.total_principal():
        raise ValueError("closed-form conditions need V >= p(S)")
    K = game.profile(K)
    pK = game.total_principal(K)
    fbar = f_linear(game, game.complement(K))
    for pl in game.players:
        if pl.id in K:
            if pK - pl.p + pl.gamma * fbar + pl.gamma * pl.alpha < game.V:
                return False
        elif game.V < pK + pl.gamma * fbar:
            return False
    return True


def is_nash(game: LiquidityGame, K: Iterable[PlayerId]) -> bool:
    """Pure-strategy Nash test; ties count as stable."""
    if game.V >= game.total_principal():
        return satisfies_nash_conditions(game, K)
    return is_nash_direct(game, K)


# -- payout dominance -------------------------------------------------------------

class Ordering(enum.Enum):
    BELOW = "below"  # first profile strictly dominated by the second
    ABOVE = "above"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"


def compare_payouts(u: Mapping[PlayerId, Fraction], v: Mapping[PlayerId, Fraction]) -> Ordering:
    le = all(u[k] <= v[k] for k in u)
    ge = all(u[k] >= v[k] for k in u)
    if le and ge:
        return Ordering.EQUIVALENT
    if le:
        return Ordering.BELOW
    if ge:
        return Ordering.ABOVE
    return Ordering.INCOMPARABLE


def compare_profiles(game: LiquidityGame, K1: Iterable[PlayerId], K2: Iterable[PlayerId]) -> Ordering:
    return compare_payouts(payouts(game, K1), payouts(game, K2))
