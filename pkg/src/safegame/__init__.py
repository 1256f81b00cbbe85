"""Exact solver for the liquidity event game played by SAFE holders."""

from .contracts import (
    CompanyContext,
    MixedGame,
    SafeContract,
    Variant,
    compile_game,
    conversion_shares,
    mixed_equilibria,
    mixed_payouts,
)
from .model import (
    InputError,
    LiquidityGame,
    Ordering,
    Player,
    ValidationReport,
    Violation,
    compare_profiles,
    f_linear,
    g_value,
    is_nash,
    is_nash_direct,
    payouts,
    satisfies_nash_conditions,
    validate_game,
)
from .rationals import to_rational
from .solver import (
    EquilibriumFamily,
    EquilibriumReport,
    GameClass,
    SizeLimitError,
    all_equilibria,
    brute_force_equilibria,
    classify,
    classify_and_solve,
    expand_family,
    postmoney_solve,
    premoney_solve,
    representative_equilibria,
    solve_all_cashout,
    threshold_candidates,
)

__version__ = "0.1.0"

__all__ = [
    "CompanyContext",
    "EquilibriumFamily",
    "EquilibriumReport",
    "GameClass",
    "InputError",
    "LiquidityGame",
    "MixedGame",
    "Ordering",
    "Player",
    "SafeContract",
    "SizeLimitError",
    "ValidationReport",
    "Variant",
    "Violation",
    "all_equilibria",
    "brute_force_equilibria",
    "classify",
    "classify_and_solve",
    "compare_profiles",
    "compile_game",
    "conversion_shares",
    "expand_family",
    "f_linear",
    "g_value",
    "is_nash",
    "is_nash_direct",
    "mixed_equilibria",
    "mixed_payouts",
    "payouts",
    "postmoney_solve",
    "premoney_solve",
    "representative_equilibria",
    "satisfies_nash_conditions",
    "solve_all_cashout",
    "threshold_candidates",
    "to_rational",
    "validate_game",
]
