"""Punishment values for mean-payoff goals.

Each player's worst-case guarantee is the value of a turn-based zero-sum
mean-payoff game: at every state the coalition commits its joint action,
then the player answers -- the same quantifier order as the security check.
Response nodes repeat their source state's weight, so each original step
contributes its weight twice and cycle averages are preserved exactly.

Values come from plain k-step value iteration with integer arithmetic; after
`4 * nodes^3 * W` rounds the scaled iterate is within half the minimal gap
of the unique game value with denominator at most the node count, so exact
rational values can be recovered by rounding.  Optimal memoryless strategies
are then extracted per value class by solving the induced credit
(energy) games with a least-progress-measure lifting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .model import Arena, Game

MAX, MIN = "max", "min"


@dataclass(frozen=True)
class MpZeroSumGame:
    player: str
    nodes: tuple
    owner: Mapping[object, str]
    weight: Mapping[object, int]
    # edge label: the partial profile chosen (coalition) or the action (player)
    succ: Mapping[object, tuple]


@dataclass(frozen=True)
class PunishValues:
    player: str
    values: Mapping[str, Fraction]               # per original state
    coalition_strategy: Mapping[str, tuple]      # state -> joint action of the others
    maximizer_strategy: Mapping[tuple, str]      # (state, partial) -> own action
    node_values: Mapping[object, Fraction]       # full turn-based solution


def build_mp_punish_game(game: Game, i: str) -> MpZeroSumGame:
    if not game.is_mp:
        raise ValueError("punishment values need a mean-payoff game")
    arena = game.arena
    weights = game.weights
    partials = sorted(arena.partial_profiles(i))
    owner = {}
    weight = {}
    succ = {}
    for s in arena.states:
        cnode = ("c", s)
        owner[cnode] = MIN
        weight[cnode] = weights.of(i, s)
        succ[cnode] = tuple((pa, ("r", s, pa)) for pa in partials)
        for pa in partials:
            rnode = ("r", s, pa)
            owner[rnode] = MAX
            weight[rnode] = weights.of(i, s)
            succ[rnode] = tuple(
                (a, ("c", arena.transition[(s, arena.combine(pa, i, a))]))
                for a in arena.actions[i])
    nodes = tuple(sorted(succ))
    return MpZeroSumGame(
        player=i, nodes=nodes, owner=owner, weight=weight, succ=succ)


def _round_to_value(total: int, rounds: int, n: int) -> Fraction:
    """Unique rational with denominator <= n within 1/(2 n^2) of total/rounds."""
    x = Fraction(total, rounds)
    tol = Fraction(1, 2 * n * n)
    for q in range(1, n + 1):
        p = math.floor(x * q + Fraction(1, 2))
        cand = Fraction(p, q)
        if abs(cand - x) <= tol:
            return cand
    raise ArithmeticError("value iteration did not isolate a rational value")


def _exact_values(g: MpZeroSumGame) -> dict:
    n = len(g.nodes)
    w_max = max((abs(g.weight[u]) for u in g.nodes), default=0)
    if w_max == 0:
        return {u: Fraction(0) for u in g.nodes}
    rounds = 4 * n ** 3 * w_max
    # integer k-step totals; successor index lists flattened for speed
    idx = {u: k for k, u in enumerate(g.nodes)}
    succ_idx = [[idx[v] for _, v in g.succ[u]] for u in g.nodes]
    weight = [g.weight[u] for u in g.nodes]
    is_max = [g.owner[u] == MAX for u in g.nodes]
    v = [0] * n
    for _ in range(rounds):
        v = [
            weight[k] + (max if is_max[k] else min)(v[t] for t in succ_idx[k])
            for k in range(n)
        ]
    return {u: _round_to_value(v[idx[u]], rounds, n) for u in g.nodes}


def _energy_choices(nodes, succ, eve, weight):
    """Least progress measure of the credit game on `nodes`; returns the
    measure and, for Eve's nodes, the successor attaining it.

    Eve keeps all partial weight sums bounded below, which at value-class
    level is exactly an optimal mean-payoff strategy.
    """
    cap = sum(max(0, -weight[u]) for u in nodes) + max(
        (abs(weight[u]) for u in nodes), default=0) + 1
    f = {u: 0 for u in nodes}

    def need(u, v):
        return max(0, f[v] - weight[u])

    changed = True
    while changed:
        changed = False
        for u in sorted(nodes):
            requirements = [need(u, v) for _, v in succ[u]]
            new = min(requirements) if eve(u) else max(requirements)
            if new > f[u]:
                if new > cap:
                    raise ArithmeticError("credit game lifting diverged")
                f[u] = new
                changed = True
    choice = {}
    for u in sorted(nodes):
        if eve(u):
            choice[u] = min((need(u, v), lbl, v) for lbl, v in succ[u])[1:]
    return f, choice


def solve_mp_values(g: MpZeroSumGame) -> PunishValues:
    """Exact optimal values plus optimal memoryless strategies for both sides."""
    values = _exact_values(g)

    # optimal play never leaves a value class: solve one credit game per
    # class and side, on weights shifted by the class value and scaled to
    # integers
    classes: dict = {}
    for u in g.nodes:
        classes.setdefault(values[u], []).append(u)

    max_choice = {}
    min_choice = {}
    for value, members in sorted(classes.items()):
        member_set = set(members)
        inner = {
            u: tuple((lbl, v) for lbl, v in g.succ[u] if v in member_set)
            for u in members
        }
        for u in members:
            if not inner[u]:
                raise ArithmeticError("value class lost all successors")
        q = value.denominator
        shifted = {u: q * g.weight[u] - value.numerator for u in members}
        _, eve_pick = _energy_choices(
            members, inner, lambda u: g.owner[u] == MAX, shifted)
        max_choice.update(eve_pick)
        negated = {u: -shifted[u] for u in members}
        _, adv_pick = _energy_choices(
            members, inner, lambda u: g.owner[u] == MIN, negated)
        min_choice.update(adv_pick)

    coalition = {}
    maximizer = {}
    for u, (lbl, v) in min_choice.items():
        if u[0] == "c":
            coalition[u[1]] = lbl
    for u, (lbl, v) in max_choice.items():
        if u[0] == "r":
            maximizer[(u[1], u[2])] = lbl
    return PunishValues(
        player=g.player,
        values={s: values[("c", s)] for _, s in (u for u in g.nodes if u[0] == "c")},
        coalition_strategy=coalition,
        maximizer_strategy=maximizer,
        node_values=values,
    )


def punish_values(game: Game, i: str) -> PunishValues:
    return solve_mp_values(build_mp_punish_game(game, i))


def z_secure(arena: Arena, s: str, profile, i: str, z: Fraction,
             values: PunishValues) -> bool:
    """True when every unilateral deviation of i from (s, profile) lands in
    states where i is held to at most z."""
    partial = arena.drop_player(profile, i)
    return all(
        values.values[arena.transition[(s, arena.combine(partial, i, a))]] <= z
        for a in arena.actions[i])
