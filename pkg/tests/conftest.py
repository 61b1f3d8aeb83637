import pathlib

import pytest

from petrigame import parse

ROOT = pathlib.Path(__file__).resolve().parent.parent
GAMES = ROOT / "games"
GOLDEN = pathlib.Path(__file__).resolve().parent / "golden"


def load_game(name: str):
    return parse((GAMES / f"{name}.game").read_text())


@pytest.fixture
def pd():
    return load_game("prisoners_dilemma")


@pytest.fixture
def mp():
    return load_game("matching_pennies")


@pytest.fixture
def hidden():
    return load_game("hidden_signal")


@pytest.fixture
def nim():
    return load_game("nim_3_4_5")
