"""Equilibrium computation for liquidity event games.

Every analytic path scans the threshold sets ``K_c = {k : gamma_k >= c}``,
one per distinct gamma plus the empty set, so it is linear in the number
of players. Brute force over all ``2**n`` profiles is kept as the oracle
and as the fallback for games where the threshold reduction is unsound.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Mapping, Sequence

from .model import (
    InputError,
    LiquidityGame,
    Ordering,
    PlayerId,
    Profile,
    compare_payouts,
    f_linear,
    g_value,
    mask_of,
    payouts,
    profile_from_mask,
    satisfies_nash_conditions,
    validate_game,
)

DEFAULT_BRUTE_LIMIT = 20
DEFAULT_EXPANSION_CAP = 4096


class SizeLimitError(ValueError):
    """Refusal to enumerate a profile space above the configured limit."""


class GameClass(enum.Enum):
    ALL_CASHOUT = "AllCashout"
    PRE_MONEY = "PreMoney"
    POST_MONEY = "PostMoney"
    GENERAL_SOLVABLE = "GeneralSolvable"
    GENERAL = "General"


@dataclass(frozen=True)
class EquilibriumFamily:
    """Equilibria ``base | Y`` for every subset Y of ``free_players``, all payout-identical."""

    base: Profile
    free_players: frozenset

    @property
    def size(self) -> int:
        return 2 ** len(self.free_players)


@dataclass(frozen=True)
class CandidateCheck:
    profile: Profile
    is_equilibrium: bool
    g: Fraction
    # Interval of V values for which the candidate is stable; None is unbounded.
    lower: Fraction | None = None
    upper: Fraction | None = None


@dataclass(frozen=True)
class EquilibriumReport:
    exists: bool | None  # None: undecided (general game too large to brute force)
    method: str
    game_class: GameClass | None = None
    equilibria: tuple[Profile, ...] = ()
    representatives: tuple[Profile, ...] = ()
    families: tuple[EquilibriumFamily, ...] = ()
    optimum: Profile | None = None
    optimum_guaranteed: bool = False
    maximizers: tuple[Profile, ...] = ()
    candidates: tuple[CandidateCheck, ...] = ()
    complete: bool = False  # equilibria plus family members are all the equilibria
    diagnostics: tuple[str, ...] = ()


# -- classification -------------------------------------------------------------

def classify(game: LiquidityGame) -> GameClass:
    if game.V < game.total_principal():
        return GameClass.ALL_CASHOUT
    if all(pl.p == pl.gamma * pl.alpha for pl in game.players):
        return GameClass.PRE_MONEY
    if all(pl.alpha == 0 for pl in game.players):
        return GameClass.POST_MONEY
    if all(pl.gamma * pl.alpha <= pl.p for pl in game.players):
        return GameClass.GENERAL_SOLVABLE
    return GameClass.GENERAL


def _require_valid(game: LiquidityGame) -> None:
    report = validate_game(game)
    if not report.valid:
        problems = "; ".join(v.explanation for v in report.violations if v.condition != "Eq3")
        raise InputError(f"game is not well defined: {problems}")


# -- brute force ------------------------------------------------------------------

def stable_masks(n: int, rows: Sequence[Sequence[Fraction]]) -> list[int]:
    """Masks whose payout row no single player can improve by switching; rows indexed by mask."""
    return [
        mask for mask in range(1 << n)
        if all(rows[mask ^ (1 << k)][k] <= rows[mask][k] for k in range(n))
    ]


def _check_size(n: int, max_players: int) -> None:
    if n > max_players:
        raise SizeLimitError(
            f"{n} players means {2 ** n} profiles; brute force is limited to {max_players} players"
        )


def _integer_scaled(game: LiquidityGame) -> tuple[int, list[int], int, list[int], list[int], int, int]:
    """Integer copies of the parameters plus the factors that undo the scaling.

    V and p share one denominator, beta and alpha another, gamma a third, so
    every per-unit payout below is an exact ratio of integers.
    """
    money = [game.V, *(pl.p for pl in game.players)]
    weights = [game.beta, *(pl.alpha for pl in game.players)]
    gammas = [pl.gamma for pl in game.players]
    d_money, d_weight, d_gamma = (lcm(*(x.denominator for x in xs)) for xs in (money, weights, gammas))
    V, *p = (int(x * d_money) for x in money)
    beta, *alpha = (int(x * d_weight) for x in weights)
    gamma = [int(x * d_gamma) for x in gammas]
    return V, p, beta, alpha, gamma, d_weight * d_gamma, d_money


def _stable_masks_exact(game: LiquidityGame) -> list[int]:
    """Stable profiles by direct deviation, using integer cross-multiplication.

    Each player's payout divided by its own principal is compared across the
    two profiles that differ only in that player's move; the common positive
    factor p_k cancels.
    """
    n = game.n
    V, p, beta, alpha, gamma, scale, d_money = _integer_scaled(game)
    size = 1 << n
    pK = [0] * size
    fConv = [beta + sum(alpha)] * size  # divisor of the converting set
    for mask in range(1, size):
        low = mask & -mask
        k = low.bit_length() - 1
        pK[mask] = pK[mask ^ low] + p[k]
        fConv[mask] = fConv[mask ^ low] - alpha[k]

    def unit(mask: int, k: int) -> tuple[int, int]:
        total = pK[mask]
        if mask >> k & 1:
            return (1, 1) if total <= V else (V, total)
        if total >= V:
            return (0, 1)
        return ((V - total) * scale, gamma[k] * fConv[mask] * d_money)

    stable = []
    for mask in range(size):
        for k in range(n):
            a, b = unit(mask, k)
            c, d = unit(mask ^ (1 << k), k)
            if c * b > a * d:
                break
        else:
            stable.append(mask)
    return stable


def brute_force_equilibria(game: LiquidityGame, max_players: int = DEFAULT_BRUTE_LIMIT) -> list[Profile]:
    """Every profile where no player gains by a unilateral switch, in bitmask order."""
    _check_size(game.n, max_players)
    return [profile_from_mask(game, m) for m in _stable_masks_exact(game)]


def best_response_cycle(
    ids: Sequence[PlayerId],
    payout_at: Callable[[int], Sequence[Fraction]],
    max_steps: int = 100_000,
) -> list[tuple[PlayerId, str]] | None:
    """Round-robin best-response dynamics from the all-cashout profile.

    Returns the recurring sequence of switches as ``(player, move)`` pairs,
    or None when the dynamics settle on an equilibrium.
    """
    n = len(ids)
    cache: dict[int, Sequence[Fraction]] = {}

    def row(mask: int) -> Sequence[Fraction]:
        if mask not in cache:
            cache[mask] = payout_at(mask)
        return cache[mask]

    mask, turn, quiet = (1 << n) - 1, 0, 0
    seen: dict[tuple[int, int], int] = {}
    moves: list[tuple[PlayerId, str]] = []
    for _ in range(max_steps):
        state = (mask, turn)
        if state in seen:
            return moves[seen[state]:]
        seen[state] = len(moves)
        flipped = mask ^ (1 << turn)
        if row(flipped)[turn] > row(mask)[turn]:
            mask = flipped
            moves.append((ids[turn], "Cash" if mask >> turn & 1 else "Convert"))
            quiet = 0
        else:
            quiet += 1
            if quiet == n:
                return None
        turn = (turn + 1) % n
    return None


def format_cycle(cycle: Sequence[tuple[PlayerId, str]]) -> str:
    """``2:Cash -> 1:Convert -> ...`` closing back on the first move's trigger."""
    steps = [f"{pid}:{move}" for pid, move in cycle]
    return " → ".join([steps[-1]] + steps)


def _game_cycle_diagnostic(game: LiquidityGame) -> str | None:
    ids = game.ids
    cycle = best_response_cycle(ids, lambda m: [payouts(game, profile_from_mask(game, m))[i] for i in ids])
    if not cycle:
        return None
    return "best-response cycle: " + format_cycle(cycle)


# -- helpers shared by the analytic paths ---------------------------------------

def dedupe_by_payouts(
    profiles: Iterable[Profile], payout_of: Callable[[Profile], Mapping[PlayerId, Fraction]]
) -> list[Profile]:
    """Keep the first profile of each payout-equivalence class."""
    seen: set[tuple] = set()
    out = []
    for K in profiles:
        key = tuple(payout_of(K).items())
        if key not in seen:
            seen.add(key)
            out.append(K)
    return out


def _g_optimum(game: LiquidityGame, equilibria: Sequence[Profile]) -> tuple[Profile | None, tuple[Profile, ...]]:
    if not equilibria:
        return None, ()
    gs = {K: g_value(game, K) for K in equilibria}
    best = max(gs.values())
    maximizers = sorted((K for K in equilibria if gs[K] == best), key=lambda K: (len(K), mask_of(game, K)))
    return maximizers[0], tuple(maximizers)


def dominant_profile(
    profiles: Sequence[Profile], payout_of: Callable[[Profile], Mapping[PlayerId, Fraction]]
) -> Profile | None:
    """First profile that weakly dominates every other, if any."""
    vectors = {K: payout_of(K) for K in profiles}
    for K in profiles:
        if all(compare_payouts(vectors[J], vectors[K]) in (Ordering.BELOW, Ordering.EQUIVALENT)
               for J in profiles):
            return K
    return None


# -- threshold sets ----------------------------------------------------------------

def _gamma_groups(game: LiquidityGame) -> list[tuple[Fraction, list[PlayerId]]]:
    groups: dict[Fraction, list[PlayerId]] = {}
    for pl in game.players:
        groups.setdefault(pl.gamma, []).append(pl.id)
    return sorted(groups.items(), key=lambda kv: kv[0], reverse=True)


def threshold_candidates(game: LiquidityGame) -> list[Profile]:
    """``[{}, K_c1, K_c2, ...]`` for the distinct gammas ``c1 > c2 > ...``."""
    out = [frozenset()]
    acc: set = set()
    for _, members in _gamma_groups(game):
        acc.update(members)
        out.append(frozenset(acc))
    return out


def representative_equilibria(game: LiquidityGame) -> EquilibriumReport:
    """Test each threshold set against the closed-form Nash conditions.

    With ``gamma_i alpha_i <= p_i`` for every player, every equilibrium has
    the same payouts as some passing threshold set, and the passing set with
    the largest g dominates all equilibria. Without that condition the
    passing sets are still equilibria but others may exist.
    """
    _require_valid(game)
    if game.V < game.total_principal():
        return solve_all_cashout(game)
    solvable = all(pl.gamma * pl.alpha <= pl.p for pl in game.players)
    checks = tuple(
        CandidateCheck(K, satisfies_nash_conditions(game, K), g_value(game, K))
        for K in threshold_candidates(game)
    )
    passing = [c.profile for c in checks if c.is_equilibrium]
    reps = dedupe_by_payouts(passing, lambda K: payouts(game, K))
    if solvable:
        optimum, maximizers = _g_optimum(game, passing)
        return EquilibriumReport(
            exists=bool(passing),
            method="threshold",
            game_class=classify(game),
            equilibria=tuple(passing),
            representatives=tuple(reps),
            optimum=optimum,
            optimum_guaranteed=True,
            maximizers=maximizers,
            candidates=checks,
        )
    return EquilibriumReport(
        exists=True if passing else None,
        method="threshold",
        game_class=classify(game),
        equilibria=tuple(passing),
        representatives=tuple(reps),
        candidates=checks,
        diagnostics=("gamma*alpha exceeds p for some player: equilibria outside the threshold sets may exist",),
    )


def solve_all_cashout(game: LiquidityGame) -> EquilibriumReport:
    """``V < p(S)``: everyone cashing out is the unique equilibrium."""
    _require_valid(game)
    if not game.V < game.total_principal():
        raise ValueError("all-cashout solution needs V < p(S)")
    S = frozenset(game.ids)
    return EquilibriumReport(
        exists=True,
        method="all-cashout",
        game_class=GameClass.ALL_CASHOUT,
        equilibria=(S,),
        representatives=(S,),
        optimum=S,
        optimum_guaranteed=True,
        maximizers=(S,),
        complete=True,
    )


def premoney_solve(game: LiquidityGame) -> EquilibriumReport:
    """Interval scan for games with ``p_i = gamma_i alpha_i`` and ``V >= p(S)``.

    Threshold set K is an equilibrium iff
    ``p(K) + max{gamma : Kbar} f(Kbar) <= V <= p(K) + min{gamma : K} f(Kbar)``.
    Walking the distinct gammas from the top, p(K) and f(Kbar) change by
    one group at a time, and consecutive intervals share an endpoint.
    """
    _require_valid(game)
    if game.V < game.total_principal():
        raise ValueError("pre-money scan needs V >= p(S)")
    if any(pl.p != pl.gamma * pl.alpha for pl in game.players):
        raise ValueError("pre-money scan needs p_i = gamma_i * alpha_i for every player")

    V = game.V
    groups = _gamma_groups(game)
    p_of = {pl.id: pl.p for pl in game.players}
    a_of = {pl.id: pl.alpha for pl in game.players}

    K: frozenset = frozenset()
    pK = Fraction(0)
    fbar = f_linear(game, game.ids)
    checks: list[CandidateCheck] = []
    # candidate 0 is the empty set; candidate j+1 adds gamma group j
    for j in range(len(groups) + 1):
        if j > 0:
            gamma_j, members = groups[j - 1]
            K = K | frozenset(members)
            pK += sum((p_of[m] for m in members), Fraction(0))
            fbar -= sum((a_of[m] for m in members), Fraction(0))
            upper = pK + gamma_j * fbar
            prev_lower = checks[-1].lower
            if prev_lower != upper:
                raise AssertionError(f"interval endpoints do not abut: {prev_lower} != {upper}")
        else:
            upper = None
        lower = pK + groups[j][0] * fbar if j < len(groups) else None
        ok = (lower is None or lower <= V) and (upper is None or V <= upper)
        checks.append(CandidateCheck(K, ok, (V - pK) / fbar, lower, upper))

    passing = [c.profile for c in checks if c.is_equilibrium]
    if not passing:
        raise AssertionError("pre-money intervals cover every V, yet none contained it")

    families = []
    for j, c in enumerate(checks[:-1]):
        gamma_next, members = groups[j]
        if c.is_equilibrium and c.g == gamma_next:
            families.append(EquilibriumFamily(c.profile, frozenset(members)))

    optimum, maximizers = _g_optimum(game, passing)
    return EquilibriumReport(
        exists=True,
        method="interval-scan",
        game_class=GameClass.PRE_MONEY,
        equilibria=tuple(passing),
        representatives=tuple(dedupe_by_payouts(passing, lambda X: payouts(game, X))),
        families=tuple(families),
        optimum=optimum,
        optimum_guaranteed=True,
        maximizers=maximizers,
        candidates=tuple(checks),
        complete=True,
    )


def postmoney_solve(game: LiquidityGame) -> EquilibriumReport:
    """All equilibria when every ``alpha_i = 0``.

    Cashers need ``p(K) + min{gamma_k beta - p_k : K} >= V`` and converters
    ``V >= p(K) + max{gamma_k beta : Kbar}``. No equilibrium can split a gamma
    value between the two sides here, so the passing threshold sets are
    every equilibrium, not just representatives.
    """
    _require_valid(game)
    if any(pl.alpha != 0 for pl in game.players):
        raise ValueError("post-money solver needs alpha_i = 0 for every player")
    V, beta = game.V, game.beta
    checks = []
    for K in threshold_candidates(game):
        pK = game.total_principal(K)
        cashers = [pl for pl in game.players if pl.id in K]
        converters = [pl for pl in game.players if pl.id not in K]
        ok = True
        if cashers and pK + min(pl.gamma * beta - pl.p for pl in cashers) < V:
            ok = False
        if converters and V < pK + max(pl.gamma * beta for pl in converters):
            ok = False
        checks.append(CandidateCheck(K, ok, g_value(game, K)))
    passing = [c.profile for c in checks if c.is_equilibrium]
    if not passing:
        raise AssertionError("post-money games always have an equilibrium")
    equilibria = sorted(passing, key=lambda X: mask_of(game, X))
    optimum, maximizers = _g_optimum(game, passing)
    return EquilibriumReport(
        exists=True,
        method="post-money",
        game_class=classify(game),
        equilibria=tuple(equilibria),
        representatives=tuple(dedupe_by_payouts(equilibria, lambda X: payouts(game, X))),
        optimum=optimum,
        optimum_guaranteed=True,
        maximizers=maximizers,
        candidates=tuple(checks),
        complete=True,
    )


def brute_force_report(
    game: LiquidityGame,
    max_players: int = DEFAULT_BRUTE_LIMIT,
    game_class: GameClass | None = None,
) -> EquilibriumReport:
    _check_size(game.n, max_players)
    eqs = brute_force_equilibria(game, max_players)
    payout_of = lambda X: payouts(game, X)  # noqa: E731
    optimum = dominant_profile(eqs, payout_of)
    diagnostics = []
    if not eqs:
        cycle = _game_cycle_diagnostic(game)
        if cycle:
            diagnostics.append(cycle)
    elif optimum is None:
        diagnostics.append("no equilibrium dominates all others")
    return EquilibriumReport(
        exists=bool(eqs),
        method="brute-force",
        game_class=game_class or classify(game),
        equilibria=tuple(eqs),
        representatives=tuple(dedupe_by_payouts(eqs, payout_of)),
        optimum=optimum,
        optimum_guaranteed=optimum is not None,
        maximizers=(optimum,) if optimum is not None else (),
        complete=True,
        diagnostics=tuple(diagnostics),
    )


def classify_and_solve(
    game: LiquidityGame,
    brute_limit: int = DEFAULT_BRUTE_LIMIT,
    force_brute: bool = False,
) -> EquilibriumReport:
    _require_valid(game)
    cls = classify(game)
    if force_brute:
        return brute_force_report(game, brute_limit, cls)
    if cls is GameClass.ALL_CASHOUT:
        return solve_all_cashout(game)
    if cls is GameClass.PRE_MONEY:
        return premoney_solve(game)
    if cls is GameClass.POST_MONEY:
        return postmoney_solve(game)
    if cls is GameClass.GENERAL_SOLVABLE:
        report = representative_equilibria(game)
        if not report.exists and game.n <= brute_limit:
            cycle = _game_cycle_diagnostic(game)
            if cycle:
                report = _with(report, diagnostics=report.diagnostics + (cycle,))
        return report
    # gamma*alpha > p somewhere: threshold sets are not enough
    if game.n <= brute_limit:
        report = brute_force_report(game, brute_limit, cls)
        return _with(report, diagnostics=report.diagnostics + (
            "gamma*alpha exceeds p for some player; solved by exhaustive search",
        ))
    report = representative_equilibria(game)
    return _with(report, diagnostics=report.diagnostics + (
        f"undecided beyond threshold candidates: {game.n} players exceeds brute-force limit {brute_limit}",
    ))


def _with(report: EquilibriumReport, **changes) -> EquilibriumReport:
    return replace(report, **changes)


# -- families --------------------------------------------------------------------

def expand_family(family: EquilibriumFamily, cap: int = DEFAULT_EXPANSION_CAP) -> list[Profile]:
    if family.size > cap:
        raise SizeLimitError(f"family has {family.size} members; expansion cap is {cap}")
    free = sorted(family.free_players, key=repr)
    return [
        family.base | frozenset(Y)
        for r in range(len(free) + 1)
        for Y in itertools.combinations(free, r)
    ]


def all_equilibria(
    game: LiquidityGame, report: EquilibriumReport, cap: int = DEFAULT_EXPANSION_CAP
) -> list[Profile]:
    """Explicit equilibria plus expanded family members, in bitmask order."""
    found = set(report.equilibria)
    total = 0
    for fam in report.families:
        total += fam.size
        if total > cap:
            raise SizeLimitError(f"expanding families exceeds cap {cap}")
        found.update(expand_family(fam, cap))
    return sorted(found, key=lambda K: mask_of(game, K))
