"""Canonical two-player fixtures used across tests and documentation.

`g1` is the smallest game exhibiting coordination and punishment: matching
actions reach the winning absorbing state, mismatching ones the losing
absorbing state, and both players want to see `p` infinitely often.

`g2` is its mean-payoff sibling: matching actions move to an absorbing
state worth 2 to player 1; player 2 is indifferent everywhere.
"""

from __future__ import annotations

from .formula import parse_gr1
from .model import Arena, Game, Weights


def _pair_arena(states, transition, labels, atoms):
    players = ("p1", "p2")
    actions = {"p1": ("a", "b"), "p2": ("a", "b")}
    return Arena(
        players=players,
        actions=actions,
        states=tuple(states),
        initial="s0",
        transition=transition,
        labels={s: frozenset(labels.get(s, ())) for s in states},
        atoms=frozenset(atoms),
    )


def g1_arena() -> Arena:
    states = ("s0", "sW", "sL")
    transition = {}
    for x in ("a", "b"):
        for y in ("a", "b"):
            transition[("s0", (x, y))] = "sW" if x == y else "sL"
            transition[("sW", (x, y))] = "sW"
            transition[("sL", (x, y))] = "sL"
    return _pair_arena(states, transition, {"sW": ("p",)}, ("p",))


def g1() -> Game:
    goal = parse_gr1("GF p")
    return Game(arena=g1_arena(), gr1_goals={"p1": goal, "p2": goal})


def g2_arena() -> Arena:
    states = ("s0", "s1")
    transition = {}
    for x in ("a", "b"):
        for y in ("a", "b"):
            transition[("s0", (x, y))] = "s1" if x == y else "s0"
            transition[("s1", (x, y))] = "s1"
    return _pair_arena(states, transition, {}, ())


def g2() -> Game:
    weights = Weights({
        "p1": {"s0": 0, "s1": 2},
        "p2": {"s0": 0, "s1": 0},
    })
    return Game(arena=g2_arena(), weights=weights)
