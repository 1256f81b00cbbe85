import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from gamegen import random_game
from safegame import (
    InputError,
    LiquidityGame,
    Ordering,
    compare_profiles,
    f_linear,
    g_value,
    is_nash,
    is_nash_direct,
    payouts,
    satisfies_nash_conditions,
    validate_game,
)
from safegame.model import cashout_value, mask_of, max_conversion_excess, profile_from_mask


def all_profiles(game):
    return [profile_from_mask(game, m) for m in range(1 << game.n)]


def well_defined_exhaustive(game):
    """Well-definedness straight from the definition: every nonempty converting set."""
    ids = game.ids
    for r in range(1, len(ids) + 1):
        for C in itertools.combinations(ids, r):
            fC = f_linear(game, C)
            if not sum(game.player(i).p / (game.player(i).gamma * fC) for i in C) < 1:
                return False
    return True


# -- f and payouts --------------------------------------------------------------

def test_f_linear_examples(rivals, three_player):
    assert f_linear(rivals, {1, 2}) == 3
    assert f_linear(rivals, set()) == rivals.beta
    assert f_linear(three_player, {1, 2}) == 4


def test_f_linear_rejects_unknown_id(rivals):
    with pytest.raises(InputError):
        f_linear(rivals, {7})


def test_rivals_payouts(rivals):
    assert payouts(rivals, {1}) == {1: 1, 2: F(7, 6)}
    assert payouts(rivals, {2}) == {1: F(7, 6), 2: 1}
    assert payouts(rivals, set()) == {1: F(8, 9), 2: F(8, 9)}
    assert payouts(rivals, {1, 2}) == {1: 1, 2: 1}


def test_cycling_payouts(cycling):
    assert payouts(cycling, set()) == {1: F(29, 3), 2: F(464, 25)}
    assert payouts(cycling, {1}) == {1: 10, 2: F(76, 5)}
    assert payouts(cycling, {2}) == {1: F(65, 6), 2: 16}
    assert payouts(cycling, {1, 2}) == {1: 10, 2: 16}


def test_postmoney_pair_payouts(postmoney_pair):
    assert payouts(postmoney_pair, set()) == {1: F(12, 5), 2: F(12, 5)}
    assert payouts(postmoney_pair, {1}) == {1: 2, 2: F(8, 5)}


def test_converters_get_nothing_when_cashouts_absorb_v():
    game = LiquidityGame.build(3, 1, [2, 2, 1], [1, 1, 1], [5, 5, 5])
    out = payouts(game, {0, 1})
    assert out[2] == 0
    assert out[0] == out[1] == F(3, 2)


def test_boundary_p_of_k_equals_v():
    game = LiquidityGame.build(4, 1, [2, 2, 1], [1, 1, 1], [5, 5, 5])
    assert payouts(game, {0, 1}) == {0: 2, 1: 2, 2: 0}


def test_single_player_shortfall():
    game = LiquidityGame.build(1, 1, [2], [1], [3])
    assert payouts(game, {0}) == {0: 1}


# -- validation -------------------------------------------------------------------

def test_rivals_valid_but_not_solvable(rivals):
    rep = validate_game(rivals)
    assert rep.valid and not rep.solvable
    assert set(rep.unsolvable_players) == {1, 2}


def test_eq2_boundary_is_invalid():
    game = LiquidityGame.build(10, 1, [6, 1], [2, 1], [2, 5])  # p_0 = gamma_0 (beta + alpha_0)
    rep = validate_game(game)
    assert not rep.valid
    assert any(v.condition == "Eq2" and v.witness == 0 for v in rep.violations)


def test_cycling_valid_and_solvable(cycling):
    rep = validate_game(cycling)
    assert rep.valid and rep.solvable
    assert well_defined_exhaustive(cycling)


def test_swapped_alpha_gamma_is_not_well_defined():
    swapped = LiquidityGame.build(29, 1, [10, 16], [6, 5], [1, 3], ids=[1, 2])
    rep = validate_game(swapped)
    assert not rep.valid
    assert {v.condition for v in rep.violations} >= {"Eq1", "Eq2"}


def test_positivity_reported():
    game = LiquidityGame.build(-1, 1, [1], ["-1/2"], [0])
    conds = [v.condition for v in validate_game(game).violations]
    assert conds.count("positivity") == 3


@pytest.mark.parametrize("seed", range(300))
def test_eq1_exact_test_matches_exhaustive(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 7)
    nums = lambda lo, hi: [F(rng.randint(lo, hi), rng.randint(1, 4)) for _ in range(n)]  # noqa: E731
    game = LiquidityGame.build(rng.randint(1, 20), F(rng.randint(1, 6), rng.randint(1, 3)),
                               nums(1, 12), nums(0, 4), nums(1, 8))
    rep = validate_game(game)
    assert rep.valid == well_defined_exhaustive(game)


def test_max_conversion_excess_witness():
    game = LiquidityGame.build(10, 1, [3, 1, 3], [1, 1, 0], [2, 2, 4])
    excess, witness = max_conversion_excess(game)
    assert witness == {0, 2}
    assert excess == F(1, 2) + F(3, 4)


# -- g and the Nash predicate ---------------------------------------------------------

def test_g_values(three_player, postmoney_pair):
    assert g_value(three_player, {0}) == 2
    assert g_value(postmoney_pair, set()) == 6
    S = set(three_player.ids)
    assert g_value(three_player, S) == (three_player.V - three_player.total_principal()) / three_player.beta


def test_rivals_nash(rivals):
    assert is_nash(rivals, {1}) and is_nash(rivals, {2})
    assert not is_nash(rivals, set()) and not is_nash(rivals, {1, 2})


def test_three_player_nash(three_player):
    assert is_nash(three_player, {0})
    assert is_nash(three_player, {0, 2})
    assert not is_nash(three_player, {0, 1})
    assert is_nash_direct(three_player, {0, 2}) and not is_nash_direct(three_player, {0, 1})


def test_fast_path_refuses_below_principal(rivals):
    low = LiquidityGame.build("19/10", 1, [1, 1], [1, 1], [3, 3])
    with pytest.raises(ValueError):
        satisfies_nash_conditions(low, set())


def test_ties_count_as_equilibrium():
    # exponential example: every player indifferent everywhere
    game = LiquidityGame.build(4, 1, [1] * 3, [1] * 3, [1] * 3)
    assert all(is_nash_direct(game, K) for K in all_profiles(game))


# -- dominance -----------------------------------------------------------------------------

def test_compare_profiles(rivals, postmoney_pair):
    assert compare_profiles(postmoney_pair, {1, 2}, set()) is Ordering.BELOW
    assert compare_profiles(postmoney_pair, set(), {1, 2}) is Ordering.ABOVE
    assert compare_profiles(rivals, {1}, {1}) is Ordering.EQUIVALENT
    assert compare_profiles(rivals, {1}, {2}) is Ordering.INCOMPARABLE


def test_profile_helpers(rivals):
    assert mask_of(rivals, {2}) == 2
    assert profile_from_mask(rivals, 3) == {1, 2}
    with pytest.raises(InputError):
        rivals.profile({3})


def test_duplicate_ids_rejected():
    with pytest.raises(InputError):
        LiquidityGame.build(1, 1, [1, 1], [0, 0], [2, 2], ids=["a", "a"])


def test_float_inputs_rejected():
    with pytest.raises(TypeError):
        LiquidityGame.build(8.2, 1, [1], [0], [2])


# -- invariants ----------------------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)
kinds = st.sampled_from(["premoney", "postmoney", "solvable", "general"])


@settings(max_examples=150, deadline=None)
@given(seed=seeds, kind=kinds)
def test_conservation_and_seniority(seed, kind):
    rng = random.Random(seed)
    game = random_game(rng, kind, max_n=6, regime="any")
    for K in all_profiles(game):
        u = payouts(game, K)
        assert all(x >= 0 for x in u.values())
        assert sum(u.values()) <= game.V
        assert sum(u[i] for i in K) == cashout_value(game, K)
        pK = game.total_principal(K)
        converters = [i for i in game.ids if i not in K]
        if pK >= game.V:
            assert all(u[i] == 0 for i in converters)
        if pK > game.V:
            for i, j in itertools.combinations(K, 2):
                assert u[i] * game.player(j).p == u[j] * game.player(i).p
        if converters and pK < game.V:
            assert sum(u[i] for i in converters) < game.V - cashout_value(game, K)


@settings(max_examples=100, deadline=None)
@given(seed=seeds, kind=kinds, num=st.integers(1, 50), den=st.integers(1, 50))
def test_homogeneity(seed, kind, num, den):
    rng = random.Random(seed)
    game = random_game(rng, kind, max_n=5, regime="any")
    c = F(num, den)
    scaled = game.scaled(c)
    for K in all_profiles(game):
        u, v = payouts(game, K), payouts(scaled, K)
        assert all(v[i] == c * u[i] for i in game.ids)
        assert is_nash_direct(game, K) == is_nash_direct(scaled, K)


@settings(max_examples=150, deadline=None)
@given(seed=seeds, kind=kinds)
def test_fast_path_agrees_with_direct(seed, kind):
    rng = random.Random(seed)
    game = random_game(rng, kind, max_n=7, regime="above")
    for K in all_profiles(game):
        assert satisfies_nash_conditions(game, K) == is_nash_direct(game, K)
