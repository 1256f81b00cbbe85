"""SAFE portfolios: mapping onto liquidity games, and the mixed-variant engine.

Conversion share counts come in two kinds:

* fixed count -- Pre-Money variants and the Post-Money Discount SAFE. The
  count ``p*s/Cap`` or ``p/(pi*d)`` does not depend on who else converts.
* fixed fraction -- the Post-Money Cap SAFE, which always ends up with
  ``p/Cap`` of the post-conversion total.

A portfolio with only one kind is an ordinary :class:`LiquidityGame`. Mixing
the kinds breaks the linear-divisor payout form, so such portfolios are
solved by the brute-force engine here.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .model import InputError, LiquidityGame, Player, PlayerId, Profile
from .rationals import to_rational
from .solver import (
    DEFAULT_BRUTE_LIMIT,
    EquilibriumReport,
    SizeLimitError,
    best_response_cycle,
    dedupe_by_payouts,
    dominant_profile,
    format_cycle,
    stable_masks,
)


class Variant(enum.Enum):
    PRE_MONEY_CAP = "PreMoneyCap"
    PRE_MONEY_DISCOUNT = "PreMoneyDiscount"
    PRE_MONEY_CAP_AND_DISCOUNT = "PreMoneyCapAndDiscount"
    POST_MONEY_CAP = "PostMoneyCap"
    POST_MONEY_DISCOUNT = "PostMoneyDiscount"
    MFN = "MFN"


_NEEDS_CAP = {Variant.PRE_MONEY_CAP, Variant.PRE_MONEY_CAP_AND_DISCOUNT, Variant.POST_MONEY_CAP}
_NEEDS_DISCOUNT = {Variant.PRE_MONEY_DISCOUNT, Variant.PRE_MONEY_CAP_AND_DISCOUNT, Variant.POST_MONEY_DISCOUNT}
# conversion priced off the valuation cap over a fixed capitalization
_CAP_PRICED = {Variant.PRE_MONEY_CAP, Variant.PRE_MONEY_CAP_AND_DISCOUNT}
# conversion priced off the discounted share price
_PRICE_PRICED = {Variant.PRE_MONEY_DISCOUNT, Variant.POST_MONEY_DISCOUNT}

MFN_MESSAGE = (
    "MFN SAFEs have no cap or discount and can only cash out at a liquidity event; "
    "model the holder as a plain cash claim (reduce V by its principal) instead"
)


@dataclass(frozen=True)
class SafeContract:
    id: PlayerId
    variant: Variant
    principal: Fraction
    cap: Fraction | None = None
    discount_rate: Fraction | None = None

    def __post_init__(self):
        variant = self.variant if isinstance(self.variant, Variant) else Variant(self.variant)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "principal", to_rational(self.principal))
        if self.principal <= 0:
            raise InputError(f"SAFE {self.id!r}: principal must be positive")
        if self.cap is not None:
            object.__setattr__(self, "cap", to_rational(self.cap))
        if self.discount_rate is not None:
            object.__setattr__(self, "discount_rate", to_rational(self.discount_rate))

        if variant in _NEEDS_CAP:
            if self.cap is None:
                raise InputError(f"SAFE {self.id!r}: {variant.value} needs a cap")
            if self.cap <= 0:
                raise InputError(f"SAFE {self.id!r}: cap must be positive")
        elif self.cap is not None:
            raise InputError(f"SAFE {self.id!r}: {variant.value} takes no cap")
        if variant in _NEEDS_DISCOUNT:
            if self.discount_rate is None:
                raise InputError(f"SAFE {self.id!r}: {variant.value} needs a discount_rate")
            if not 0 < self.discount_rate <= 1:
                raise InputError(f"SAFE {self.id!r}: discount_rate must lie in (0, 1]")
        elif self.discount_rate is not None:
            raise InputError(f"SAFE {self.id!r}: {variant.value} takes no discount_rate")
        if variant is Variant.POST_MONEY_CAP and not self.principal < self.cap:
            raise InputError(f"SAFE {self.id!r}: post-money principal must be below the cap")

    @property
    def fixed_fraction(self) -> bool:
        return self.variant is Variant.POST_MONEY_CAP


@dataclass(frozen=True)
class CompanyContext:
    common_shares: Fraction
    V: Fraction
    share_price: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "common_shares", to_rational(self.common_shares))
        object.__setattr__(self, "V", to_rational(self.V))
        if self.share_price is not None:
            object.__setattr__(self, "share_price", to_rational(self.share_price))
            if self.share_price <= 0:
                raise InputError("share_price must be positive")
        if self.common_shares <= 0:
            raise InputError("common_shares must be positive")
        if self.V <= 0:
            raise InputError("V must be positive")


@dataclass(frozen=True)
class MixedGame:
    contracts: tuple[SafeContract, ...]
    context: CompanyContext

    def __post_init__(self):
        contracts = tuple(self.contracts)
        object.__setattr__(self, "contracts", contracts)
        if not contracts:
            raise InputError("portfolio has no SAFEs")
        ids = [c.id for c in contracts]
        if len(set(ids)) != len(ids):
            raise InputError("duplicate SAFE ids")
        for c in contracts:
            if c.variant is Variant.MFN:
                raise InputError(f"SAFE {c.id!r}: {MFN_MESSAGE}")
            if c.variant in _PRICE_PRICED and self.context.share_price is None:
                raise InputError(f"SAFE {c.id!r}: {c.variant.value} needs the company share_price")
        if not post_money_fraction(contracts) < 1:
            raise InputError("post-money cap SAFEs would own 100% or more of the company")

    @property
    def ids(self) -> tuple[PlayerId, ...]:
        return tuple(c.id for c in self.contracts)

    @property
    def pre_contracts(self) -> tuple[SafeContract, ...]:
        return tuple(c for c in self.contracts if not c.fixed_fraction)

    @property
    def post_contracts(self) -> tuple[SafeContract, ...]:
        return tuple(c for c in self.contracts if c.fixed_fraction)

    @property
    def is_uniform(self) -> bool:
        """True when the portfolio maps onto a plain liquidity game."""
        return not (self.pre_contracts and self.post_contracts)

    def profile(self, ids: Iterable[PlayerId]) -> Profile:
        K = frozenset(ids)
        unknown = K - set(self.ids)
        if unknown:
            raise InputError(f"unknown SAFE ids {sorted(map(str, unknown))}")
        return K


def post_money_fraction(contracts: Iterable[SafeContract]) -> Fraction:
    return sum((c.principal / c.cap for c in contracts if c.fixed_fraction), Fraction(0))


def _warn_ignored_discount(contracts: Iterable[SafeContract]) -> None:
    for c in contracts:
        if c.variant is Variant.PRE_MONEY_CAP_AND_DISCOUNT:
            warnings.warn(
                f"SAFE {c.id!r}: discount is not used at a liquidity event; applying cap terms",
                stacklevel=3,
            )


def compile_game(contracts: Sequence[SafeContract], context: CompanyContext) -> LiquidityGame:
    """Liquidity game parameters for a portfolio of one conversion kind.

    Cap-priced contracts map to ``beta = 1, gamma = Cap, alpha = p/Cap``;
    price-priced ones to ``beta = s, gamma = pi*d, alpha = p/(pi*d)``;
    Post-Money Cap contracts to ``beta = 1, gamma = Cap, alpha = 0``.
    When cap- and price-priced contracts share a portfolio, the price-priced
    ones are rescaled by s so that beta = 1 serves both.
    """
    mixed = MixedGame(tuple(contracts), context)
    if not mixed.is_uniform:
        raise InputError(
            "portfolio mixes post-money cap SAFEs with fixed-count SAFEs; "
            "its payouts do not fit a liquidity game, use mixed_payouts / mixed_equilibria"
        )
    _warn_ignored_discount(mixed.contracts)
    s, pi = context.common_shares, context.share_price
    variants = {c.variant for c in mixed.contracts}
    beta = s if variants <= _PRICE_PRICED else Fraction(1)

    players = []
    for c in mixed.contracts:
        if c.variant is Variant.POST_MONEY_CAP:
            players.append(Player(c.id, c.principal, Fraction(0), c.cap))
        elif c.variant in _CAP_PRICED:
            players.append(Player(c.id, c.principal, c.principal / c.cap, c.cap))
        else:
            gamma = pi * c.discount_rate * (s / beta)
            players.append(Player(c.id, c.principal, c.principal / gamma, gamma))
    return LiquidityGame(context.V, beta, tuple(players))


def fixed_share_count(contract: SafeContract, context: CompanyContext) -> Fraction:
    if contract.variant in _CAP_PRICED:
        return contract.principal * context.common_shares / contract.cap
    if contract.variant in _PRICE_PRICED:
        return contract.principal / (context.share_price * contract.discount_rate)
    raise ValueError(f"{contract.variant.value} has no fixed share count")


def conversion_shares(mixed: MixedGame, converting: Iterable[PlayerId]) -> tuple[dict, Fraction]:
    """Shares issued to each SAFE when ``converting`` convert, and the total after conversion.

    Fixed-count SAFEs get their count outright; post-money cap SAFEs get
    ``p/Cap`` of the total T, which solves
    ``T = s + sum(fixed counts) + sum(p/Cap) * T``.
    """
    C = mixed.profile(converting)
    ctx = mixed.context
    counts: dict[PlayerId, Fraction] = {}
    base = ctx.common_shares
    for c in mixed.contracts:
        if c.id in C and not c.fixed_fraction:
            counts[c.id] = fixed_share_count(c, ctx)
            base += counts[c.id]
    fraction = post_money_fraction(c for c in mixed.contracts if c.id in C)
    if not fraction < 1:
        raise InputError("post-money cap SAFEs would own 100% or more of the company")
    total = base / (1 - fraction)
    for c in mixed.contracts:
        if c.id in C and c.fixed_fraction:
            counts[c.id] = c.principal / c.cap * total
    return {c.id: counts.get(c.id, Fraction(0)) for c in mixed.contracts}, total


def mixed_payouts(mixed: MixedGame, K: Iterable[PlayerId]) -> dict:
    """Payouts when the SAFEs in ``K`` cash out and the rest convert.

    Cashouts are senior and pro-rata under shortfall; the residual is split
    by post-conversion shareholding, common holders keeping ``s/T`` of it.
    """
    K = mixed.profile(K)
    V = mixed.context.V
    pK = sum((c.principal for c in mixed.contracts if c.id in K), Fraction(0))
    residual = V - min(pK, V)
    shares, total = conversion_shares(mixed, (c.id for c in mixed.contracts if c.id not in K))
    out = {}
    for c in mixed.contracts:
        if c.id in K:
            out[c.id] = c.principal / pK * V if pK > V else c.principal
        else:
            out[c.id] = shares[c.id] / total * residual
    return out


def common_holder_payout(mixed: MixedGame, K: Iterable[PlayerId]) -> Fraction:
    K = mixed.profile(K)
    V = mixed.context.V
    pK = sum((c.principal for c in mixed.contracts if c.id in K), Fraction(0))
    _, total = conversion_shares(mixed, (c.id for c in mixed.contracts if c.id not in K))
    return mixed.context.common_shares / total * (V - min(pK, V))


def _mask_profile(ids: Sequence[PlayerId], mask: int) -> Profile:
    return frozenset(pid for k, pid in enumerate(ids) if mask >> k & 1)


def mixed_equilibria(mixed: MixedGame, max_players: int = DEFAULT_BRUTE_LIMIT) -> EquilibriumReport:
    """Exhaustive deviation check over every profile of the portfolio."""
    ids = mixed.ids
    n = len(ids)
    if n > max_players:
        raise SizeLimitError(
            f"{n} SAFEs means {2 ** n} profiles; brute force is limited to {max_players} players"
        )
    rows = [[mixed_payouts(mixed, _mask_profile(ids, m))[i] for i in ids] for m in range(1 << n)]
    eqs = [_mask_profile(ids, m) for m in stable_masks(n, rows)]
    payout_of = lambda X: mixed_payouts(mixed, X)  # noqa: E731
    optimum = dominant_profile(eqs, payout_of)
    diagnostics = []
    if not mixed.is_uniform:
        diagnostics.append("mixed pre/post-money portfolio: solved by exhaustive search")
    if not eqs:
        cycle = best_response_cycle(ids, lambda m: rows[m])
        if cycle:
            diagnostics.append("best-response cycle: " + format_cycle(cycle))
    elif optimum is None:
        diagnostics.append("no equilibrium dominates all others")
    return EquilibriumReport(
        exists=bool(eqs),
        method="brute-force",
        equilibria=tuple(eqs),
        representatives=tuple(dedupe_by_payouts(eqs, payout_of)),
        optimum=optimum,
        optimum_guaranteed=optimum is not None,
        maximizers=(optimum,) if optimum is not None else (),
        complete=True,
        diagnostics=tuple(diagnostics),
    )
