import numpy as np
import pytest

from softeq import data_path


@pytest.fixture()
def pd_game():
    import softeq

    return softeq.load_game(data_path("prisoners_dilemma.json"))


@pytest.fixture()
def five_game():
    import softeq

    return softeq.load_game(data_path("five_by_five.json"))


def random_positive_game(rng, player_count=None, max_actions=3):
    """Small random game with strictly positive payoffs."""
    import softeq

    if player_count is None:
        player_count = int(rng.integers(2, 4))
    counts = [int(rng.integers(2, max_actions + 1)) for _ in range(player_count)]
    payoffs = [rng.uniform(0.1, 5.0, size=tuple(counts)) for _ in range(player_count)]
    return softeq.build_normal_form(counts, payoffs)
