"""Shared random-instance generators for the test suite.

Every generator takes an explicit `random.Random` so each test pins its own
seed; sizes default to the scales the acceptance suite prescribes (two
players, up to three states, up to two actions, weights in [-2, 2], goals
with at most one term per side).
"""

import itertools
import random

import pytest

from eqcheck.formula import Atom, Gr1Formula, Not
from eqcheck.model import Arena, Game, Weights

ATOMS = ("p", "q")


def random_arena(rng, max_states=3, n_players=2, max_actions=2, atoms=ATOMS,
                 min_states=1):
    states = tuple(f"s{k}" for k in range(rng.randint(min_states, max_states)))
    players = tuple(f"p{k + 1}" for k in range(n_players))
    actions = {p: tuple("abcd"[:rng.randint(1, max_actions)]) for p in players}
    labels = {s: frozenset(a for a in atoms if rng.random() < 0.4) for s in states}
    transition = {}
    for s in states:
        for prof in itertools.product(*(actions[p] for p in players)):
            transition[(s, prof)] = rng.choice(states)
    return Arena(players=players, actions=actions, states=states,
                 initial=states[0], transition=transition, labels=labels,
                 atoms=frozenset(atoms))


def random_bool_term(rng, atoms=ATOMS):
    atom = Atom(rng.choice(atoms))
    return atom if rng.random() < 0.7 else Not(atom)


def random_gr1(rng, atoms=ATOMS, max_side=1):
    antecedents = tuple(random_bool_term(rng, atoms)
                        for _ in range(rng.randint(0, max_side)))
    consequents = tuple(random_bool_term(rng, atoms)
                        for _ in range(rng.randint(0, max_side)))
    return Gr1Formula(antecedents, consequents)


def random_gr1_game(rng, **kwargs):
    arena = random_arena(rng, **kwargs)
    goals = {p: random_gr1(rng) for p in arena.players}
    return Game(arena=arena, gr1_goals=goals)


def random_mp_game(rng, weight_range=(-2, 2), **kwargs):
    arena = random_arena(rng, **kwargs)
    lo, hi = weight_range
    table = {p: {s: rng.randint(lo, hi) for s in arena.states}
             for p in arena.players}
    return Game(arena=arena, weights=Weights(table))


@pytest.fixture
def rng():
    return random.Random(20240817)
