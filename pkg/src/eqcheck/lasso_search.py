"""Restricted arenas and multi-pair Streett emptiness with witness lassos.

Restriction keeps the start state unconditionally: the equilibrium
characterizations constrain the transitions taken along a path (every
deviation must land in punishing / low-value territory) but never the start
itself; any later state is forced into the surviving set by the security of
the step that reaches it.  A start with no surviving outgoing transition
simply yields an empty search, which the drivers treat as "no path for this
candidate".

Emptiness uses the standard refinement: inside a strongly connected
component, a pair whose infinitely-often set is missing forces deletion of
its finitely-often set, and the search recurses; a surviving component
yields a witness cycle threaded through one infinitely-often state per
remaining pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from . import punish_gr1 as pg
from . import punish_mp as pm
from .buchi import BuchiAutomaton
from .formula import Gr1Formula, eval_bool
from .graphs import bfs_cycle, bfs_path, tarjan_sccs
from .model import Arena, Game, Lasso


@dataclass(frozen=True)
class RestrictedArena:
    arena: Arena
    start: str
    states: frozenset[str]       # surviving states; the start may sit outside
    transitions: Mapping[tuple[str, tuple], str]

    def successors(self, s):
        out = []
        for prof in self.arena.profiles():
            target = self.transitions.get((s, prof))
            if target is not None:
                out.append((prof, target))
        return out

    def graph_states(self) -> frozenset[str]:
        return self.states | {self.start}


def restrict_gr1(game: Game, losers, punish: Mapping[str, pg.PunishResult]) -> RestrictedArena:
    """Keep states punishing for every loser and transitions secure for every
    loser; the start state is kept unconditionally."""
    arena = game.arena
    losers = sorted(losers)
    surviving = set(arena.states)
    for j in losers:
        surviving &= punish[j].region
    kept = {}
    for s in sorted(surviving | {arena.initial}):
        for prof in arena.profiles():
            if all(pg.punishing_secure(arena, s, prof, j, punish[j].region)
                   for j in losers):
                kept[(s, prof)] = arena.transition[(s, prof)]
    return RestrictedArena(
        arena=arena, start=arena.initial,
        states=frozenset(surviving), transitions=kept)


def restrict_mp(game: Game, z: Mapping[str, object],
                punish: Mapping[str, pm.PunishValues]) -> RestrictedArena:
    """Keep states where every player's punishment value is at most its
    threshold and transitions secure for every player at its threshold."""
    arena = game.arena
    surviving = {
        s for s in arena.states
        if all(punish[i].values[s] <= z[i] for i in arena.players)
    }
    kept = {}
    for s in sorted(surviving | {arena.initial}):
        for prof in arena.profiles():
            if all(pm.z_secure(arena, s, prof, i, z[i], punish[i])
                   for i in arena.players):
                kept[(s, prof)] = arena.transition[(s, prof)]
    return RestrictedArena(
        arena=arena, start=arena.initial,
        states=frozenset(surviving), transitions=kept)


# ---------------------------------------------------------------------------
# Streett products
# ---------------------------------------------------------------------------

# product node: (state, counter vector, automaton state or -1)
ProductNode = tuple[str, tuple, int]


@dataclass(frozen=True)
class StreettProduct:
    ra: RestrictedArena
    objectives: tuple[Gr1Formula, ...]
    start: ProductNode
    nodes: tuple[ProductNode, ...]
    succ: Mapping[ProductNode, tuple]
    pairs: tuple[tuple[frozenset, frozenset], ...]  # (finitely-often, infinitely-often)


def build_streett_product(ra: RestrictedArena, objectives,
                          aut: Optional[BuchiAutomaton]) -> StreettProduct:
    """Product of the restricted arena with one counter pair per objective
    and, optionally, a Buechi component contributing the pair (empty set,
    accepting set)."""
    objectives = tuple(objectives)
    arena = ra.arena
    zeros = tuple((0, 0) for _ in objectives)
    if aut is not None:
        start = (ra.start, zeros, aut.initial[0])
    else:
        start = (ra.start, zeros, -1)

    order: dict[ProductNode, int] = {start: 0}
    queue = [start]
    succ: dict[ProductNode, list] = {}
    i = 0
    while i < len(queue):
        node = queue[i]
        i += 1
        s, counters, q = node
        label = arena.label(s)
        stepped = tuple(
            pg.advance_counters(goal, label, c1, c2)
            for goal, (c1, c2) in zip(objectives, counters))
        arena_steps = ra.successors(s)
        out = []
        if aut is None:
            for prof, s2 in arena_steps:
                out.append((prof, (s2, stepped, -1)))
        else:
            for guard, q2 in aut.edges[q]:
                if eval_bool(guard, label):
                    for prof, s2 in arena_steps:
                        out.append((prof, (s2, stepped, q2)))
        succ[node] = tuple(out)
        for _, nxt in out:
            if nxt not in order:
                order[nxt] = len(order)
                queue.append(nxt)

    nodes = tuple(queue)
    pairs = []
    for k in range(len(objectives)):
        fin = frozenset(n for n in nodes if n[1][k][0] == 0)
        inf = frozenset(n for n in nodes if n[1][k][1] == 0)
        pairs.append((fin, inf))
    if aut is not None:
        # Buechi obligation: the accepting set must recur.  As a
        # finite/infinite pair that needs the finitely-often side to hold
        # everywhere (every infinite run visits the node set infinitely), so
        # the infinitely-often side becomes mandatory.
        pairs.append((frozenset(nodes),
                      frozenset(n for n in nodes if n[2] in aut.accepting)))
    return StreettProduct(
        ra=ra, objectives=objectives, start=start,
        nodes=nodes, succ=succ, pairs=tuple(pairs))


def _accepting_component(product: StreettProduct):
    """Recursive refinement; returns a reachable sub-SCC satisfying every
    pair, or None."""
    reachable = set()
    frontier = [product.start]
    while frontier:
        node = frontier.pop()
        if node in reachable:
            continue
        reachable.add(node)
        frontier.extend(t for _, t in product.succ[node])

    def refine(node_set):
        members = sorted(node_set)
        sccs = tarjan_sccs(
            members,
            lambda n: (s for _, s in product.succ[n] if s in node_set))
        for scc in sorted(sccs, key=min):
            internal_edge = any(
                t in scc for n in scc for _, t in product.succ[n])
            if not internal_edge:
                continue
            doomed = set()
            for fin, inf in product.pairs:
                if scc & fin and not (scc & inf):
                    doomed |= scc & fin
            if not doomed:
                return scc
            remainder = scc - doomed
            if remainder:
                found = refine(remainder)
                if found is not None:
                    return found
        return None

    return refine(reachable)


def streett_nonempty(product: StreettProduct):
    """Witness lasso through the product, or None when the language is empty.

    The cycle is threaded through one infinitely-often state for every pair
    whose finitely-often set meets the component, via shortest paths inside
    the component.
    """
    scc = _accepting_component(product)
    if scc is None:
        return None

    def inside(n):
        return ((e, t) for e, t in product.succ[n] if t in scc)

    found = bfs_path([product.start],
                     lambda n: product.succ[n], lambda n: n in scc)
    assert found is not None, "accepting component must be reachable"
    prefix, entry = found

    targets = []
    for fin, inf in product.pairs:
        if scc & fin:
            targets.append(inf & scc)
    cycle_steps = []
    cur = entry
    visited_targets = set()
    for k, tset in enumerate(targets):
        if cur in tset or tset & visited_targets:
            continue
        leg = bfs_path([cur], inside, lambda n: n in tset)
        assert leg is not None, "pair witness must exist inside the component"
        steps, cur = leg
        cycle_steps.extend(steps)
        visited_targets.update(n for n, _ in steps)
        visited_targets.add(cur)
    if cur == entry and not cycle_steps:
        loop = bfs_cycle(entry, inside)
        assert loop is not None
        cycle_steps = loop
    else:
        back = bfs_path([cur], inside, lambda n: n == entry)
        assert back is not None
        cycle_steps.extend(back[0])
    return prefix, cycle_steps


def project_lasso(prefix, cycle) -> Lasso:
    """Drop counters and automaton state, keeping (state, decision) steps."""
    return Lasso(
        tuple((n[0], prof) for n, prof in prefix),
        tuple((n[0], prof) for n, prof in cycle),
    )
