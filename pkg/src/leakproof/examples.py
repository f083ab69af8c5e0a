"""Small bespoke games used by the fixture catalog and the tests."""
from __future__ import annotations

from fractions import Fraction

from .game import SocialChoiceFunction, UtilityTable, ValueTypeSpace, build_game
from .leakage import LeakageOrder, common_knowledge_space
from .strategies import default_profile, leaky_profile

HALF = Fraction(1, 2)


def matching_pennies():
    """Static matching pennies; player 0 wants to match, player 1 to mismatch."""
    vals = ValueTypeSpace(((0,), (0,)), ((Fraction(1),), (Fraction(1),)))
    acts = ("H", "T")

    def pay(a, b):
        return (Fraction(1), Fraction(-1)) if a == b else (Fraction(-1), Fraction(1))

    util = UtilityTable({(a, b): {(0, 0): pay(a, b)} for a in acts for b in acts})
    tree = {"movers": {0: acts, 1: acts},
            "children": {(a, b): {"outcome": (a, b)} for a in acts for b in acts}}
    return build_game(2, vals, util, tree, meta={"name": "matching_pennies"})


def uniform_mixing():
    return default_profile(lambda i, v, h: {"H": HALF, "T": HALF}, name="uniform")


# Precaution game: precautionary actions that only pay off under leakage.
A1 = ("a1H", "a1L", "a1H*", "a1L*")
A2 = ("a*", "a2H*", "a2L*", "a2H'", "a2L'")
_CELLS = {
    "a1H": ("x", "z", "z", "m", "z"),
    "a1L": ("y", "z", "z", "z", "m"),
    "a1H*": ("z", "x", "z", "n", "z"),
    "a1L*": ("z", "z", "y", "z", "n"),
}
_PAYOFFS = {
    "x": {"H": (2, 1), "L": (0, 1)},
    "y": {"H": (0, 1), "L": (2, 1)},
    "z": {"H": (-2, -2), "L": (-2, -2)},
    "m": {"H": (-2, 2), "L": (-2, 2)},
    "n": {"H": (2, -2), "L": (2, -2)},
}


def precaution_game():
    """Player 0 has values H/L (equally likely), player 1 a single value."""
    vals = ValueTypeSpace((("H", "L"), ("-",)), ((HALF, HALF), (Fraction(1),)))
    util = UtilityTable({x: {(v, "-"): tuple(Fraction(u) for u in row[v]) for v in ("H", "L")}
                         for x, row in _PAYOFFS.items()})
    tree = {"movers": {0: A1, 1: A2},
            "children": {(a, b): {"outcome": _CELLS[a][k]} for a in A1 for k, b in enumerate(A2)}}
    return build_game(2, vals, util, tree, meta={"name": "precaution"})


def precaution_scf(game) -> SocialChoiceFunction:
    return SocialChoiceFunction({("H", "-"): "x", ("L", "-"): "y"})


def precaution_default():
    """Simultaneous-move equilibrium: truthful announcement against a*."""
    return default_profile(lambda i, v, h: ("a1H" if v == "H" else "a1L") if i == 0 else "a*",
                           name="simultaneous")


def precaution_orders():
    """Equal speed, player 0 faster, player 1 faster."""
    return {"equal": LeakageOrder((0, 0)), "first_fast": LeakageOrder((1, 0)),
            "second_fast": LeakageOrder((0, 1))}


def _first_fast(i, v, t, ph):
    if i == 1:
        return "a*"
    seen = dict(ph.leaked).get(1)
    if seen == "a*":
        return "a1H" if v == "H" else "a1L"
    return "a1H*" if seen in ("a2H*", "a2H'") else "a1L*"


_REACT = {"a1H": "a2H'", "a1L": "a2L'", "a1H*": "a2H*", "a1L*": "a2L*"}


def _second_fast(i, v, t, ph):
    if i == 0:
        return "a1H*" if v == "H" else "a1L*"
    return _REACT[dict(ph.leaked)[0]]


def precaution_profiles() -> dict:
    """Listed equilibrium for each common-knowledge order."""
    return {"equal": precaution_default(),
            "first_fast": leaky_profile(_first_fast, name="player 0 fast"),
            "second_fast": leaky_profile(_second_fast, name="player 1 fast")}


def precaution_spaces() -> dict:
    return {key: common_knowledge_space(order, name=f"ck:{key}")
            for key, order in precaution_orders().items()}
