"""Punishment regions for GR(1) goals.

To decide from which states the coalition of all-but-one players can force
player j's goal to fail, the arena is augmented with two round-robin
counters walking through the goal's GF antecedents and consequents; a
counter passes zero infinitely often exactly when its side's conditions all
hold infinitely often.  On that product the goal becomes a single
finite/infinite pair over the zero sets, solved as a three-priority parity
game on a turn-based expansion where the coalition commits its joint action
first and player j answers -- the same quantifier order as the security
check on transitions.

Note on the pair orientation: satisfaction of the goal is "antecedent resets
occur finitely often, or consequent resets occur infinitely often"; the
priorities below encode exactly that (consequent-reset 2, antecedent-reset
1, else 0) with player j as the even player.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping

from .formula import Gr1Formula, eval_bool
from .model import Arena, Game

Config = tuple[str, int, int]  # (state, antecedent counter, consequent counter)


def advance_counters(goal: Gr1Formula, label_set, i1: int, i2: int) -> tuple[int, int]:
    """One modular counter step driven by the current state's labels."""
    m = len(goal.antecedents)
    n = len(goal.consequents)
    if i1 == 0 or eval_bool(goal.antecedents[i1 - 1], label_set):
        i1 = (i1 + 1) % (m + 1)
    if i2 == 0 or eval_bool(goal.consequents[i2 - 1], label_set):
        i2 = (i2 + 1) % (n + 1)
    return i1, i2


@dataclass(frozen=True)
class CounterArena:
    arena: Arena
    goal: Gr1Formula
    configs: tuple[Config, ...]
    transition: Mapping[tuple[Config, tuple], Config]
    reset1: frozenset[Config]  # antecedent counter at zero
    reset2: frozenset[Config]  # consequent counter at zero


def build_counter_arena(arena: Arena, goal: Gr1Formula) -> CounterArena:
    m = len(goal.antecedents)
    n = len(goal.consequents)
    configs = tuple(
        (s, i1, i2)
        for s in arena.states for i1 in range(m + 1) for i2 in range(n + 1))
    transition = {}
    for cfg in configs:
        s, i1, i2 = cfg
        stepped = advance_counters(goal, arena.label(s), i1, i2)
        for prof in arena.profiles():
            transition[(cfg, prof)] = (arena.transition[(s, prof)],) + stepped
    return CounterArena(
        arena=arena,
        goal=goal,
        configs=configs,
        transition=transition,
        reset1=frozenset(c for c in configs if c[1] == 0),
        reset2=frozenset(c for c in configs if c[2] == 0),
    )


# ---------------------------------------------------------------------------
# Turn-based parity game
# ---------------------------------------------------------------------------

EVEN, ODD = 0, 1  # even: the punished player j; odd: the coalition


@dataclass
class TurnBasedGame:
    nodes: tuple
    owner: Mapping[object, int]
    priority: Mapping[object, int]
    succ: Mapping[object, tuple]
    pred: Mapping[object, tuple]


def build_turn_based(ca: CounterArena, j: str) -> TurnBasedGame:
    """Coalition nodes commit a joint action of everyone but j; response
    nodes let j pick, landing on the counter-product successor."""
    arena = ca.arena
    partials = sorted(arena.partial_profiles(j))
    owner = {}
    priority = {}
    succ = {}
    for cfg in ca.configs:
        cnode = ("c", cfg)
        owner[cnode] = ODD
        priority[cnode] = 2 if cfg in ca.reset2 else (1 if cfg in ca.reset1 else 0)
        succ[cnode] = tuple(("r", cfg, pa) for pa in partials)
        for pa in partials:
            rnode = ("r", cfg, pa)
            owner[rnode] = EVEN
            priority[rnode] = 0
            targets = []
            for a in arena.actions[j]:
                nxt = ca.transition[(cfg, arena.combine(pa, j, a))]
                targets.append(("c", nxt))
            succ[rnode] = tuple(dict.fromkeys(targets))
    nodes = tuple(sorted(succ))
    pred: dict = {u: [] for u in nodes}
    for u in nodes:
        for v in succ[u]:
            pred[v].append(u)
    return TurnBasedGame(
        nodes=nodes,
        owner=owner,
        priority=priority,
        succ=succ,
        pred={u: tuple(sorted(pred[u])) for u in nodes},
    )


def _attractor(game: TurnBasedGame, active, target, player):
    """Player-`player` attractor of `target` within `active`, with the
    attracting one-step strategy for that player's nodes."""
    attr = set(target)
    strat = {}
    escapes = {}
    queue = deque(sorted(target))
    while queue:
        v = queue.popleft()
        for u in game.pred[v]:
            if u not in active or u in attr:
                continue
            if game.owner[u] == player:
                attr.add(u)
                strat[u] = v
                queue.append(u)
            else:
                if u not in escapes:
                    escapes[u] = sum(1 for w in game.succ[u] if w in active)
                escapes[u] -= 1
                if escapes[u] == 0:
                    attr.add(u)
                    queue.append(u)
    return attr, strat


def solve_parity(game: TurnBasedGame):
    """Zielonka's recursion: winning regions and memoryless strategies.

    Returns (win_even, win_odd, strategy_even, strategy_odd); each strategy
    maps the winner's nodes inside its region to the chosen successor.
    """
    win = {EVEN: set(), ODD: set()}
    strat = {EVEN: {}, ODD: {}}
    _zielonka(game, frozenset(game.nodes), win, strat)
    return win[EVEN], win[ODD], strat[EVEN], strat[ODD]


def _zielonka(game, active, win, strat):
    if not active:
        return
    top = max(game.priority[u] for u in active)
    player = top % 2
    opponent = 1 - player
    bait = sorted(u for u in active if game.priority[u] == top)
    attr, attr_strat = _attractor(game, active, bait, player)

    sub_win = {EVEN: set(), ODD: set()}
    sub_strat = {EVEN: {}, ODD: {}}
    _zielonka(game, active - frozenset(attr), sub_win, sub_strat)

    if not sub_win[opponent]:
        win[player] |= active
        strat[player].update(sub_strat[player])
        strat[player].update(attr_strat)
        for u in bait:
            if game.owner[u] == player and u not in strat[player]:
                choice = next(v for v in game.succ[u] if v in active)
                strat[player][u] = choice
        return

    counter, counter_strat = _attractor(game, active, sorted(sub_win[opponent]), opponent)
    rest_win = {EVEN: set(), ODD: set()}
    rest_strat = {EVEN: {}, ODD: {}}
    _zielonka(game, active - frozenset(counter), rest_win, rest_strat)

    win[player] |= rest_win[player]
    strat[player].update(rest_strat[player])
    win[opponent] |= rest_win[opponent] | counter
    strat[opponent].update(sub_strat[opponent])
    strat[opponent].update(counter_strat)
    strat[opponent].update(rest_strat[opponent])


# ---------------------------------------------------------------------------
# Punishment regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PunishResult:
    player: str
    goal: Gr1Formula
    region: frozenset[str]
    # memoryless on counter configurations: config -> coalition joint action
    coalition_strategy: Mapping[Config, tuple]


def punish_region(game: Game, j: str) -> PunishResult:
    """States from which the coalition can force j's goal to fail,
    with the coalition's memoryless strategy on the counter product."""
    if not game.is_gr1:
        raise ValueError("punishment regions need a GR(1) game")
    ca = build_counter_arena(game.arena, game.gr1_goals[j])
    tb = build_turn_based(ca, j)
    _, win_odd, _, strat_odd = solve_parity(tb)
    region = frozenset(
        s for s in game.arena.states if ("c", (s, 0, 0)) in win_odd)
    coalition = {}
    for node, choice in strat_odd.items():
        if node[0] == "c":
            coalition[node[1]] = choice[2]  # the response node's partial profile
    return PunishResult(
        player=j, goal=game.gr1_goals[j], region=region, coalition_strategy=coalition)


def punishing_secure(arena: Arena, s: str, profile, j: str, region) -> bool:
    """True when every unilateral deviation of j from (s, profile) lands in
    the punishment region."""
    partial = arena.drop_player(profile, j)
    return all(
        arena.transition[(s, arena.combine(partial, j, a))] in region
        for a in arena.actions[j])
