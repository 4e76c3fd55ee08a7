"""Tableau translation of temporal formulas to nondeterministic Buechi
automata, plus graph-product emptiness.

The construction is the classic declarative tableau: nodes carry processed /
pending / next-time obligation sets, disjunctions and untils split nodes,
and one acceptance set per U/F subformula is tracked, then degeneralized
with a round-robin counter.  Guards stay symbolic Boolean expressions over
the atoms instead of expanding the exponential letter alphabet.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import formula as fm
from .formula import (
    TOP, Always, And, Atom, Bottom, Eventually, Formula, Next, Not, Or, Top, Until,
)
from .graphs import bfs_cycle, bfs_path, tarjan_sccs


@dataclass(frozen=True)
class BuchiAutomaton:
    """Edge-guarded automaton; acceptance is visiting `accepting` infinitely."""

    states: tuple[int, ...]
    initial: tuple[int, ...]
    edges: dict[int, tuple[tuple[Formula, int], ...]]
    accepting: frozenset[int]


def _sort_key(f):
    return repr(f)


def _collect_eventualities(f: Formula):
    found = set()

    def walk(g):
        if isinstance(g, (Until, Eventually)):
            found.add(g)
        for child in (getattr(g, "sub", None), getattr(g, "left", None),
                      getattr(g, "right", None)):
            if child is not None:
                walk(child)

    walk(f)
    return sorted(found, key=_sort_key)


_INIT = "init"


def _tableau(f: Formula):
    """Expand `f` (already in negation normal form) into tableau nodes.

    Returns {node id: (incoming ids, old frozenset, next frozenset)}.
    """
    nodes: dict[int, dict] = {}
    next_id = [1]

    def close(old, nxt, incoming):
        for nid, nd in nodes.items():
            if nd["old"] == old and nd["next"] == nxt:
                nd["incoming"] |= incoming
                return
        nid = next_id[0]
        next_id[0] += 1
        nodes[nid] = {"incoming": set(incoming), "old": old, "next": nxt}
        expand(set(nxt), frozenset(), frozenset(), {nid})

    def expand(new, old, nxt, incoming):
        if not new:
            close(old, nxt, incoming)
            return
        eta = min(new, key=_sort_key)
        new = new - {eta}
        if isinstance(eta, Bottom):
            return  # contradictory node
        if isinstance(eta, Top):
            expand(new, old | {eta}, nxt, incoming)
            return
        if isinstance(eta, (Atom, Not)):
            negation = eta.sub if isinstance(eta, Not) else Not(eta)
            if negation in old:
                return
            expand(new, old | {eta}, nxt, incoming)
            return
        if isinstance(eta, And):
            extra = {eta.left, eta.right} - old
            expand(new | extra, old | {eta}, nxt, incoming)
            return
        if isinstance(eta, Or):
            expand(new | ({eta.left} - old), old | {eta}, nxt, incoming)
            expand(new | ({eta.right} - old), old | {eta}, nxt, incoming)
            return
        if isinstance(eta, Until):
            expand(new | ({eta.left} - old), old | {eta}, nxt | {eta}, incoming)
            expand(new | ({eta.right} - old), old | {eta}, nxt, incoming)
            return
        if isinstance(eta, Eventually):
            expand(new, old | {eta}, nxt | {eta}, incoming)
            expand(new | ({eta.sub} - old), old | {eta}, nxt, incoming)
            return
        if isinstance(eta, Always):
            expand(new | ({eta.sub} - old), old | {eta}, nxt | {eta}, incoming)
            return
        if isinstance(eta, Next):
            expand(new, old | {eta}, nxt | {eta.sub}, incoming)
            return
        raise TypeError(f"unexpected formula in tableau: {eta!r}")

    expand({f}, frozenset(), frozenset(), {_INIT})
    return nodes


def _guard(old) -> Formula:
    literals = sorted(
        (g for g in old if isinstance(g, Atom) or
         (isinstance(g, Not) and isinstance(g.sub, Atom))),
        key=_sort_key)
    guard = TOP
    for lit in literals:
        guard = lit if isinstance(guard, Top) else And(guard, lit)
    return guard


def translate(f: Formula) -> BuchiAutomaton:
    """Automaton accepting exactly the models of `f`."""
    f = fm.nnf(f)
    nodes = _tableau(f)
    eventualities = _collect_eventualities(f)
    k = len(eventualities)

    def fulfils(nd, ev):
        if ev not in nd["old"]:
            return True
        target = ev.right if isinstance(ev, Until) else ev.sub
        return target in nd["old"]

    layers = range(max(k, 1))
    encode = {}

    def state_of(nid, layer):
        key = (nid, layer)
        if key not in encode:
            encode[key] = len(encode)
        return encode[key]

    init_state = state_of(_INIT, 0)
    edges: dict[int, list] = {init_state: []}
    accepting = set()
    for layer in layers:
        for nid, nd in sorted(nodes.items()):
            src = state_of(nid, layer)
            edges.setdefault(src, [])
            if k:
                advance = layer + 1 if fulfils(nd, eventualities[layer]) else layer
                next_layer = advance % k
                if layer == k - 1 and advance == k:
                    accepting.add(src)
            else:
                next_layer = 0
                accepting.add(src)
            for rid, rd in sorted(nodes.items()):
                if nid in rd["incoming"]:
                    edges[src].append((_guard(rd["old"]), state_of(rid, next_layer)))
    for rid, rd in sorted(nodes.items()):
        if _INIT in rd["incoming"]:
            edges[init_state].append((_guard(rd["old"]), state_of(rid, 0)))

    states = tuple(sorted(encode.values()))
    for s in states:
        edges.setdefault(s, [])
    return BuchiAutomaton(
        states=states,
        initial=(init_state,),
        edges={s: tuple(dict.fromkeys(edges[s])) for s in states},
        accepting=frozenset(accepting),
    )


def is_empty_product(start, successors, label_of, aut: BuchiAutomaton):
    """Search graph x automaton for a lasso whose cycle hits an accepting state.

    `successors(node)` yields (edge_data, next_node); `label_of(node)` is the
    letter consumed when stepping off the node.  Returns (prefix, cycle) of
    ((node, automaton state), edge_data) steps, or None when the product has
    no accepting lasso.
    """
    def prod_succ(pnode):
        node, q = pnode
        letter = label_of(node)
        out = []
        for guard, q2 in aut.edges[q]:
            if fm.eval_bool(guard, letter):
                for edata, n2 in successors(node):
                    out.append((edata, (n2, q2)))
        return out

    # reachable product nodes, in BFS discovery order
    order = {}
    queue = [(start, q) for q in aut.initial]
    for p in queue:
        order.setdefault(p, len(order))
    i = 0
    while i < len(queue):
        pnode = queue[i]
        i += 1
        for _, succ in prod_succ(pnode):
            if succ not in order:
                order[succ] = len(order)
                queue.append(succ)

    reachable = list(order)
    adj = {p: tuple(prod_succ(p)) for p in reachable}
    sccs = tarjan_sccs(reachable, lambda p: (s for _, s in adj[p]))

    for scc in sorted(sccs, key=lambda c: min(order[p] for p in c)):
        has_edge = any(s in scc for p in scc for _, s in adj[p])
        if not has_edge:
            continue
        hits = sorted((p for p in scc if p[1] in aut.accepting), key=order.get)
        if not hits:
            continue
        target = hits[0]
        found = bfs_path(
            [(start, q) for q in aut.initial],
            lambda p: adj[p], lambda p: p == target)
        assert found is not None
        prefix, _ = found
        cycle = bfs_cycle(target, lambda p: ((e, s) for e, s in adj[p] if s in scc))
        assert cycle is not None
        return prefix, cycle
    return None
