import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from safegame import LiquidityGame  # noqa: E402


@pytest.fixture
def rivals():
    """Symmetric two-player game with conflicting equilibria."""
    return LiquidityGame.build(8, 1, [1, 1], [1, 1], [3, 3], ids=[1, 2])


@pytest.fixture
def cycling():
    """Two-player game without equilibria."""
    return LiquidityGame.build(29, 1, [10, 16], [1, 3], [6, 5], ids=[1, 2])


@pytest.fixture
def three_player():
    return LiquidityGame.build("27/2", 1, ["11/2", 4, 2], [1, 2, 1], [3, 2, 2])


@pytest.fixture
def postmoney_pair():
    return LiquidityGame.build(6, 1, [2, 2], [0, 0], [5, 5], ids=[1, 2])


def exponential_game(n):
    return LiquidityGame.build(n + 1, 1, [1] * n, [1] * n, [1] * n, ids=range(1, n + 1))
