"""Independent brute-force references for the solver modules.

Everything here re-derives its answers from first principles: forced-run
simulation, exhaustive enumeration of memoryless strategies and of cycle
edge sets, and Fourier-Motzkin elimination for circulation feasibility.
Only the core model and formula types are shared with the engine -- no
solver code paths -- so agreement between the two is meaningful evidence.

Specification handling is deliberately restricted to shapes whose lasso
satisfaction is determined by the visited sets of the prefix and cycle
(true, Boolean starts, G / F / GF / FG over Boolean expressions, the
GF-implication fragment, and conjunctions of these).  Anything else raises
`UnsupportedSpecError`; the exact evaluator `eval_ltl_on_lasso` still
handles arbitrary formulas on concrete lassos.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .formula import (
    Always, And, Atom, Bottom, Eventually, Formula, Gr1Formula, Implies, Next,
    Not, Or, Top, Until, eval_bool, is_bool_expr, to_str,
)
from .model import Arena, Game, Lasso


class SizeLimitError(RuntimeError):
    """The instance exceeds the oracle's enumeration budget."""


class UnsupportedSpecError(ValueError):
    """The specification is outside the oracle's visited-set fragment."""


@dataclass(frozen=True)
class OracleConfig:
    max_arena_edges: int = 16          # cycle edge-subset enumeration bound
    strategy_tree_limit: int = 1 << 15  # coalition assignment search budget
    fm_row_limit: int = 50000          # Fourier-Motzkin blowup guard


DEFAULT_CONFIG = OracleConfig()


# ---------------------------------------------------------------------------
# Direct temporal evaluation on lassos
# ---------------------------------------------------------------------------

def eval_ltl_on_lasso(f: Formula, lasso: Lasso, labels) -> bool:
    """Positional fixpoint evaluation of an arbitrary formula on the
    ultimately periodic word of a lasso; independent of any automaton
    machinery."""
    steps = lasso.steps()
    total = len(steps)
    wrap = len(lasso.prefix)
    nxt = [i + 1 if i + 1 < total else wrap for i in range(total)]
    letters = [labels[s] for s, _ in steps]
    cache: dict = {}

    def vals(g) -> tuple:
        if g in cache:
            return cache[g]
        if isinstance(g, Top):
            out = (True,) * total
        elif isinstance(g, Bottom):
            out = (False,) * total
        elif isinstance(g, Atom):
            out = tuple(g.name in letters[i] for i in range(total))
        elif isinstance(g, Not):
            out = tuple(not v for v in vals(g.sub))
        elif isinstance(g, And):
            left, right = vals(g.left), vals(g.right)
            out = tuple(a and b for a, b in zip(left, right))
        elif isinstance(g, Or):
            left, right = vals(g.left), vals(g.right)
            out = tuple(a or b for a, b in zip(left, right))
        elif isinstance(g, Implies):
            left, right = vals(g.left), vals(g.right)
            out = tuple((not a) or b for a, b in zip(left, right))
        elif isinstance(g, Next):
            sub = vals(g.sub)
            out = tuple(sub[nxt[i]] for i in range(total))
        elif isinstance(g, Until):
            left, right = vals(g.left), vals(g.right)
            cur = list(right)
            for _ in range(total):
                new = [right[i] or (left[i] and cur[nxt[i]]) or cur[i]
                       for i in range(total)]
                if new == cur:
                    break
                cur = new
            out = tuple(cur)
        elif isinstance(g, Eventually):
            sub = vals(g.sub)
            cur = list(sub)
            for _ in range(total):
                new = [cur[i] or cur[nxt[i]] for i in range(total)]
                if new == cur:
                    break
                cur = new
            out = tuple(cur)
        elif isinstance(g, Always):
            sub = vals(g.sub)
            cur = list(sub)
            for _ in range(total):
                new = [cur[i] and cur[nxt[i]] for i in range(total)]
                if new == cur:
                    break
                cur = new
            out = tuple(cur)
        else:
            raise TypeError(f"not a formula: {g!r}")
        cache[g] = out
        return out

    return vals(f)[0]


# ---------------------------------------------------------------------------
# Visited-set specification shapes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Disjunct:
    """One way to satisfy a specification, in visited-set terms: the cycle
    avoids `delete` entirely, keeps one departure per `rows` set, and the
    prefix avoids / visits what its fields say (visits may also be covered
    by the cycle)."""

    delete: frozenset = frozenset()
    rows: tuple = ()
    prefix_avoid: frozenset = frozenset()
    prefix_visit: tuple = ()
    start_in: tuple = ()


def _states_where(arena: Arena, b: Formula) -> frozenset:
    return frozenset(s for s in arena.states if eval_bool(b, arena.label(s)))


def _conjunct_alternatives(arena: Arena, g) -> list[Disjunct]:
    if isinstance(g, Gr1Formula):
        alts = []
        for psi in g.antecedents:
            alts.append(Disjunct(delete=_states_where(arena, psi)))
        rows = tuple(_states_where(arena, theta) for theta in g.consequents)
        alts.append(Disjunct(rows=rows))
        return alts
    if isinstance(g, Top):
        return [Disjunct()]
    if is_bool_expr(g):
        return [Disjunct(start_in=(_states_where(arena, g),))]
    if isinstance(g, Always) and isinstance(g.sub, Eventually) \
            and is_bool_expr(g.sub.sub):
        return [Disjunct(rows=(_states_where(arena, g.sub.sub),))]
    if isinstance(g, Always) and is_bool_expr(g.sub):
        bad = frozenset(arena.states) - _states_where(arena, g.sub)
        return [Disjunct(delete=bad, prefix_avoid=bad)]
    if isinstance(g, Eventually) and isinstance(g.sub, Always) \
            and is_bool_expr(g.sub.sub):
        bad = frozenset(arena.states) - _states_where(arena, g.sub.sub)
        return [Disjunct(delete=bad)]
    if isinstance(g, Eventually) and is_bool_expr(g.sub):
        good = _states_where(arena, g.sub)
        return [Disjunct(rows=(good,)), Disjunct(prefix_visit=(good,))]
    raise UnsupportedSpecError(f"shape outside the oracle fragment: {to_str(g)}")


def _flatten_conjuncts(f):
    if isinstance(f, And):
        yield from _flatten_conjuncts(f.left)
        yield from _flatten_conjuncts(f.right)
    else:
        yield f


def compile_spec(arena: Arena, spec) -> list[Disjunct]:
    """All ways to satisfy the specification, as visited-set disjuncts."""
    if isinstance(spec, Gr1Formula):
        conjuncts = [spec]
    else:
        conjuncts = list(_flatten_conjuncts(spec))
    per_conjunct = [_conjunct_alternatives(arena, g) for g in conjuncts]
    out = []
    for combo in itertools.product(*per_conjunct):
        out.append(Disjunct(
            delete=frozenset().union(*(d.delete for d in combo)) if combo else frozenset(),
            rows=tuple(r for d in combo for r in d.rows),
            prefix_avoid=frozenset().union(*(d.prefix_avoid for d in combo)) if combo else frozenset(),
            prefix_visit=tuple(v for d in combo for v in d.prefix_visit),
            start_in=tuple(v for d in combo for v in d.start_in),
        ))
    return out or [Disjunct()]


def _prefix_search(arena, allowed_edges, start, targets, avoid, visit_sets):
    """Is there a path on allowed edges from start into `targets`, avoiding
    `avoid` and passing each visit set?  Visit order is tried exhaustively."""
    if start in avoid:
        return False
    succ: dict = {}
    for s, prof, t in allowed_edges:
        if s in avoid or t in avoid:
            continue
        succ.setdefault(s, []).append(t)

    def reach(sources, goal_set):
        seen = set(sources)
        frontier = list(sources)
        while frontier:
            v = frontier.pop()
            for w in succ.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return seen & goal_set

    pending = [v for v in visit_sets]
    if len(pending) > 3:
        raise SizeLimitError("too many prefix visit obligations")
    for order in itertools.permutations(range(len(pending))):
        positions = {start}
        ok = True
        for k in order:
            positions = reach(positions, pending[k] - avoid)
            if not positions:
                ok = False
                break
        if ok and reach(positions, targets):
            return True
    return False


# ---------------------------------------------------------------------------
# Fourier-Motzkin feasibility
# ---------------------------------------------------------------------------

def fm_feasible(num_vars: int, rows, row_limit=DEFAULT_CONFIG.fm_row_limit) -> bool:
    """Rational feasibility of a system of >= / == rows by eliminating the
    variables one at a time."""
    work = []
    for coeffs, relation, rhs in rows:
        coeffs = {v: Fraction(c) for v, c in coeffs.items() if c}
        rhs = Fraction(rhs)
        work.append((coeffs, rhs))
        if relation == "==":
            work.append(({v: -c for v, c in coeffs.items()}, -rhs))
        elif relation != ">=":
            raise ValueError(f"unsupported relation {relation!r}")

    def normalize(batch):
        best: dict = {}
        for coeffs, rhs in batch:
            if not coeffs:
                if rhs > 0:
                    return None  # 0 >= rhs > 0: contradiction
                continue
            scale = max(abs(c) for c in coeffs.values())
            key = tuple(sorted((v, c / scale) for v, c in coeffs.items()))
            val = rhs / scale
            if key not in best or best[key][1] < val:
                best[key] = ({v: c / scale for v, c in coeffs.items()}, val)
        return list(best.values())

    work = normalize(work)
    if work is None:
        return False
    remaining = set(range(num_vars))
    while remaining:
        def weight(v):
            pos = sum(1 for c, _ in work if c.get(v, 0) > 0)
            neg = sum(1 for c, _ in work if c.get(v, 0) < 0)
            return pos * neg - pos - neg

        var = min(remaining, key=lambda v: (weight(v), v))
        remaining.discard(var)
        pos, neg, rest = [], [], []
        for coeffs, rhs in work:
            c = coeffs.get(var, Fraction(0))
            if c > 0:
                pos.append((coeffs, rhs))
            elif c < 0:
                neg.append((coeffs, rhs))
            else:
                rest.append((coeffs, rhs))
        new = rest
        for pc, prhs in pos:
            a = pc[var]
            for nc, nrhs in neg:
                b = -nc[var]
                combined = {}
                for v, c in pc.items():
                    if v != var:
                        combined[v] = combined.get(v, Fraction(0)) + b * c
                for v, c in nc.items():
                    if v != var:
                        combined[v] = combined.get(v, Fraction(0)) + a * c
                combined = {v: c for v, c in combined.items() if c}
                new.append((combined, b * prhs + a * nrhs))
        if len(new) > row_limit:
            raise SizeLimitError("Fourier-Motzkin row blowup")
        work = normalize(new)
        if work is None:
            return False
    return all(rhs <= 0 for _, rhs in work)


# ---------------------------------------------------------------------------
# Brute-force punishment
# ---------------------------------------------------------------------------

def brute_pun_gr1(game: Game, j: str, cfg: OracleConfig = DEFAULT_CONFIG) -> frozenset:
    """States from which some memoryless coalition assignment on the counter
    product defeats every response of j.

    Coalition choices are assigned lazily along the configurations reachable
    from the start; a branch is pruned as soon as j can already reach a
    goal-satisfying cycle through assigned configurations, since further
    assignments only add options for j.
    """
    if not game.is_gr1:
        raise ValueError("GR(1) punishment oracle needs a GR(1) game")
    arena = game.arena
    goal = game.gr1_goals[j]
    m, n = len(goal.antecedents), len(goal.consequents)
    partials = sorted(arena.partial_profiles(j))
    actions = arena.actions[j]

    def advance(cfg_state):
        s, i1, i2 = cfg_state
        lab = arena.label(s)
        if i1 == 0 or eval_bool(goal.antecedents[i1 - 1], lab):
            i1 = (i1 + 1) % (m + 1)
        if i2 == 0 or eval_bool(goal.consequents[i2 - 1], lab):
            i2 = (i2 + 1) % (n + 1)
        return i1, i2

    step = {}
    configs = [(s, i1, i2) for s in arena.states
               for i1 in range(m + 1) for i2 in range(n + 1)]
    for c in configs:
        s = c[0]
        counters = advance(c)
        for pa in partials:
            for a in actions:
                target = arena.transition[(s, arena.combine(pa, j, a))]
                step[(c, pa, a)] = (target,) + counters

    in_fin = {c: c[1] == 0 for c in configs}   # antecedent-reset configurations
    in_inf = {c: c[2] == 0 for c in configs}   # consequent-reset configurations

    def _reach_set(succ, c0):
        seen = {c0}
        frontier = [c0]
        while frontier:
            v = frontier.pop()
            for w in succ.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return seen

    def j_wins(assignment, c0):
        """Can j reach a cycle satisfying the goal using assigned configs?"""
        succ = {}
        for c, pa in assignment.items():
            succ[c] = [step[(c, pa, a)] for a in actions]

        def reaches_self(source, allowed):
            seen = set()
            frontier = [w for w in succ.get(source, ()) if allowed(w)]
            while frontier:
                v = frontier.pop()
                if v == source:
                    return True
                if v in seen:
                    continue
                seen.add(v)
                frontier.extend(w for w in succ.get(v, ()) if allowed(w))
            return False

        goods = set()
        for c in succ:
            if not in_fin[c] and reaches_self(c, lambda v: v in succ and not in_fin[v]):
                goods.add(c)
            elif in_inf[c] and reaches_self(c, lambda v: v in succ):
                goods.add(c)
        if not goods:
            return False
        return bool(_reach_set(succ, c0) & goods)

    budget = [cfg.strategy_tree_limit]

    def defeats(start):
        c0 = (start, 0, 0)

        def rec(assignment):
            budget[0] -= 1
            if budget[0] < 0:
                raise SizeLimitError("coalition assignment search budget exhausted")
            if j_wins(assignment, c0):
                return False
            reach = _reach_set(
                {c: [step[(c, assignment[c], a)] for a in actions]
                 for c in assignment}, c0)
            open_cfgs = sorted(c for c in reach if c not in assignment)
            if not open_cfgs:
                return True  # closed and j never wins
            u = open_cfgs[0]
            for pa in partials:
                assignment[u] = pa
                if rec(assignment):
                    del assignment[u]
                    return True
                del assignment[u]
            return False

        return rec({})

    return frozenset(s for s in arena.states if defeats(s))


def brute_pun_mp(game: Game, i: str,
                 cfg: OracleConfig = DEFAULT_CONFIG) -> dict[str, Fraction]:
    """Exhaustive max-min over memoryless strategies: the best forced-cycle
    average the player can secure against every coalition assignment."""
    if not game.is_mp:
        raise ValueError("mean-payoff punishment oracle needs a weight game")
    arena = game.arena
    partials = sorted(arena.partial_profiles(i))
    states = arena.states
    actions = arena.actions[i]

    coalition_maps = list(itertools.product(partials, repeat=len(states)))
    response_domain = [(s, pa) for s in states for pa in partials]
    response_maps = list(itertools.product(actions, repeat=len(response_domain)))
    if len(coalition_maps) * len(response_maps) > cfg.strategy_tree_limit:
        raise SizeLimitError("memoryless strategy spaces too large")
    rindex = {key: k for k, key in enumerate(response_domain)}

    def run(sigma_c, sigma_i, start):
        s = start
        order = {}
        seq = []
        while s not in order:
            order[s] = len(seq)
            pa = sigma_c[states.index(s)]
            a = sigma_i[rindex[(s, pa)]]
            seq.append(s)
            s = arena.transition[(s, arena.combine(pa, i, a))]
        cyc = seq[order[s]:]
        return Fraction(sum(game.weights.of(i, t) for t in cyc), len(cyc))

    out = {}
    for start in states:
        best = None
        for sigma_i in response_maps:
            worst = None
            for sigma_c in coalition_maps:
                value = run(sigma_c, sigma_i, start)
                if worst is None or value < worst:
                    worst = value
            if best is None or worst > best:
                best = worst
        out[start] = best
    return out


# ---------------------------------------------------------------------------
# Brute-force existential equilibrium checking
# ---------------------------------------------------------------------------

def _strongly_connected(edge_list) -> bool:
    vertices = {e[0] for e in edge_list} | {e[2] for e in edge_list}
    succ: dict = {v: [] for v in vertices}
    pred: dict = {v: [] for v in vertices}
    for s, _, t in edge_list:
        succ[s].append(t)
        pred[t].append(s)
    root = next(iter(vertices))

    def closure(adj):
        seen = {root}
        frontier = [root]
        while frontier:
            v = frontier.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return seen

    return closure(succ) == vertices and closure(pred) == vertices


def brute_e_nash(game: Game, spec, cfg: OracleConfig = DEFAULT_CONFIG) -> bool:
    """Reference verdict for the existential query; `spec` is a
    GF-implication formula or a temporal formula in the oracle fragment."""
    if game.is_gr1:
        return _brute_e_nash_gr1(game, spec, cfg)
    return _brute_e_nash_mp(game, spec, cfg)


def _brute_e_nash_gr1(game, spec, cfg) -> bool:
    arena = game.arena
    regions = {j: brute_pun_gr1(game, j, cfg) for j in arena.players}
    edges = [(s, prof, arena.transition[(s, prof)])
             for s in arena.states for prof in arena.profiles()]
    if len(edges) > cfg.max_arena_edges:
        raise SizeLimitError("too many transitions for cycle enumeration")
    disjuncts = compile_spec(arena, spec)

    secure = {}
    for k, (s, prof, _) in enumerate(edges):
        for j in arena.players:
            partial = arena.drop_player(prof, j)
            secure[(k, j)] = all(
                arena.transition[(s, arena.combine(partial, j, a))] in regions[j]
                for a in arena.actions[j])

    goal_sets = {
        p: (tuple(_states_where(arena, t) for t in game.gr1_goals[p].antecedents),
            tuple(_states_where(arena, t) for t in game.gr1_goals[p].consequents))
        for p in arena.players
    }

    for mask in range(1, 1 << len(edges)):
        chosen = [k for k in range(len(edges)) if mask >> k & 1]
        subset = [edges[k] for k in chosen]
        if not _strongly_connected(subset):
            continue
        visited = frozenset(e[0] for e in subset) | frozenset(e[2] for e in subset)
        losers = []
        for p in arena.players:
            antecedents, consequents = goal_sets[p]
            holds = (not all(visited & a for a in antecedents)
                     or all(visited & c for c in consequents))
            if not holds:
                losers.append(p)
        if not all(secure[(k, j)] for k in chosen for j in losers):
            continue
        allowed = [e for k, e in enumerate(edges)
                   if all(secure[(k, j)] for j in losers)]
        for d in disjuncts:
            if visited & d.delete:
                continue
            if any(not (visited & row) for row in d.rows):
                continue
            if any(arena.initial not in sset for sset in d.start_in):
                continue
            visits = tuple(v for v in d.prefix_visit if not (v & visited))
            if _prefix_search(arena, allowed, arena.initial, visited,
                              d.prefix_avoid, visits):
                return True
    return False


def _brute_e_nash_mp(game, spec, cfg) -> bool:
    feasible, _ = _mp_oracle_verdict(game, spec, cfg, need_lasso=False)
    return feasible


def mp_lasso_exists(game: Game, spec, cfg: OracleConfig = DEFAULT_CONFIG) -> bool:
    """Does a single cycle (connected support) realize the existential
    verdict?  Used to account for engine witness gaps."""
    _, lasso_ok = _mp_oracle_verdict(game, spec, cfg, need_lasso=True)
    return lasso_ok


def _mp_oracle_verdict(game, spec, cfg, need_lasso):
    arena = game.arena
    values = {i: brute_pun_mp(game, i, cfg) for i in arena.players}
    per_player = [sorted(set(values[i].values()), reverse=True)
                  for i in arena.players]
    edges = [(s, prof, arena.transition[(s, prof)])
             for s in arena.states for prof in arena.profiles()]
    if len(edges) > cfg.max_arena_edges:
        raise SizeLimitError("too many transitions for circulation search")
    disjuncts = compile_spec(arena, spec)

    answer = False
    lasso_answer = False
    for combo in itertools.product(*per_player):
        z = dict(zip(arena.players, combo))
        secure_edges = []
        for s, prof, t in edges:
            ok = True
            for i in arena.players:
                partial = arena.drop_player(prof, i)
                if any(values[i][arena.transition[(s, arena.combine(partial, i, a))]]
                       > z[i] for a in arena.actions[i]):
                    ok = False
                    break
            if ok:
                secure_edges.append((s, prof, t))
        for d in disjuncts:
            if any(arena.initial not in sset for sset in d.start_in):
                continue
            tail_edges = [e for e in secure_edges
                          if e[0] not in d.delete and e[2] not in d.delete]
            for scc in _kosaraju([e for e in tail_edges]):
                internal = [e for e in tail_edges if e[0] in scc and e[2] in scc]
                if not internal:
                    continue
                if any(not (row & scc) for row in d.rows):
                    continue
                relaxed = _circulation_feasible(game, internal, z, d.rows, cfg)
                if not relaxed:
                    continue
                visited_candidates = scc
                visits = tuple(v for v in d.prefix_visit
                               if not (v & visited_candidates))
                if not _prefix_search(arena, secure_edges, arena.initial,
                                      scc, d.prefix_avoid, visits):
                    continue
                answer = True
                if not need_lasso:
                    return True, False
                if _connected_circulation(game, internal, z, d, arena, secure_edges, cfg):
                    lasso_answer = True
                    return answer, lasso_answer
    return answer, lasso_answer


def _kosaraju(edge_list):
    """Strongly connected components of the edge list's vertex set, by the
    two-pass method (a different route than the engine's Tarjan)."""
    vertices = sorted({e[0] for e in edge_list} | {e[2] for e in edge_list})
    succ: dict = {v: [] for v in vertices}
    pred: dict = {v: [] for v in vertices}
    for s, _, t in edge_list:
        succ[s].append(t)
        pred[t].append(s)
    order = []
    seen = set()
    for root in vertices:
        if root in seen:
            continue
        stack = [(root, iter(succ[root]))]
        seen.add(root)
        while stack:
            v, it = stack[-1]
            pushed = False
            for w in it:
                if w not in seen:
                    seen.add(w)
                    stack.append((w, iter(succ[w])))
                    pushed = True
                    break
            if not pushed:
                order.append(v)
                stack.pop()
    assigned = {}
    for root in reversed(order):
        if root in assigned:
            continue
        component = {root}
        assigned[root] = root
        frontier = [root]
        while frontier:
            v = frontier.pop()
            for w in pred[v]:
                if w not in assigned:
                    assigned[w] = root
                    component.add(w)
                    frontier.append(w)
        yield frozenset(component)


def _circulation_rows(game, internal, z, rows):
    arena = game.arena
    var_of = {e: k for k, e in enumerate(internal)}
    out_rows = []
    for e in internal:
        out_rows.append(({var_of[e]: 1}, ">=", 0))
    out_rows.append(({var_of[e]: 1 for e in internal}, ">=", 1))
    for i in arena.players:
        coeffs = {var_of[e]: Fraction(game.weights.of(i, e[0])) - z[i]
                  for e in internal}
        out_rows.append((coeffs, ">=", 0))
    vertices = {e[0] for e in internal} | {e[2] for e in internal}
    for v in sorted(vertices):
        coeffs: dict = {}
        for e in internal:
            if e[0] == v:
                coeffs[var_of[e]] = coeffs.get(var_of[e], 0) + 1
            if e[2] == v:
                coeffs[var_of[e]] = coeffs.get(var_of[e], 0) - 1
        out_rows.append((coeffs, "==", 0))
    for row in rows:
        coeffs = {var_of[e]: 1 for e in internal if e[0] in row}
        out_rows.append((coeffs, ">=", 1))
    return len(internal), out_rows


def _circulation_feasible(game, internal, z, rows, cfg) -> bool:
    num_vars, fm_rows = _circulation_rows(game, internal, z, rows)
    return fm_feasible(num_vars, fm_rows, cfg.fm_row_limit)


def _connected_circulation(game, internal, z, d, arena, secure_edges, cfg) -> bool:
    """Exact single-cycle achievability: some strongly connected edge subset
    carries a circulation using each chosen edge at least once."""
    if len(internal) > cfg.max_arena_edges:
        raise SizeLimitError("too many edges for connected-support search")
    for mask in range(1, 1 << len(internal)):
        subset = [internal[k] for k in range(len(internal)) if mask >> k & 1]
        if not _strongly_connected(subset):
            continue
        visited = frozenset(e[0] for e in subset)
        if any(not (row & visited) for row in d.rows):
            continue
        if visited & d.delete:
            continue
        num_vars, fm_rows = _circulation_rows(game, subset, z, d.rows)
        for k in range(len(subset)):
            fm_rows.append(({k: 1}, ">=", 1))
        if not fm_feasible(num_vars, fm_rows, cfg.fm_row_limit):
            continue
        visits = tuple(v for v in d.prefix_visit if not (v & visited))
        if _prefix_search(arena, secure_edges, arena.initial, visited,
                          d.prefix_avoid, visits):
            return True
    return False
