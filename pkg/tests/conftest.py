import random
from pathlib import Path

import pytest

from robusteq.game import make_game
from robusteq.io import load_game

DATA = Path(__file__).parent / "data"


@pytest.fixture
def server_game():
    return load_game(DATA / "server_fragment.json")


@pytest.fixture
def rng():
    return random.Random(20240611)


def one_state_game(weights=(0,), actions=("x", "y")):
    """Single self-looping state; one weight per player."""
    players = [f"A{i + 1}" for i in range(len(weights))]
    return make_game(players, actions, ["s"], "s", {"s": list(weights)}, lambda s, m: "s")


def pennies_game():
    """Two players pick h/t once; a match sends A1 to its reward sink, a mismatch A2."""
    def tr(s, m):
        if s == "s0":
            return "w1" if m[0] == m[1] else "w2"
        return s
    return make_game(["A1", "A2"], ["h", "t"], ["s0", "w1", "w2"], "s0",
                     {"s0": [0, 0], "w1": [1, 0], "w2": [0, 1]}, tr)


def choice_game():
    """One player choosing between a 0-weight state and a 1-weight state."""
    return make_game(["A"], ["x", "y"], ["a", "b"], "a", {"a": [0], "b": [1]},
                     lambda s, m: "a" if m[0] == "x" else "b")
