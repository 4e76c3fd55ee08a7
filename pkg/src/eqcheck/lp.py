"""Exact-rational linear programs over edge-usage variables.

The cycle-feasibility encodings introduce one variable per edge of a
weighted graph: nonnegativity, at least one edge used, nonnegative total
shifted weight per dimension, per-vertex flow conservation, and either a
lower bound of one on edges leaving each required vertex set or a zero
total on edges leaving a forbidden vertex set.

Feasibility is decided by a phase-one simplex on exact rationals with
Bland's rule, so it terminates and every reported solution re-substitutes
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .graphs import bfs_path, tarjan_sccs
from .model import Lasso


class WitnessGapError(Exception):
    """A feasible program whose every available support is disconnected: the
    verdict stands, but no single cycle realizes it exactly."""


@dataclass(frozen=True)
class WeightedEdgeGraph:
    vertices: tuple
    edges: tuple            # (src, edge_data, trg) triples; index = LP variable
    weights: tuple          # per dimension: mapping vertex -> Fraction (already shifted)
    theta_sets: tuple       # vertex sets that a cycle must keep visiting
    psi_sets: tuple = ()    # vertex sets that a cycle must eventually avoid


@dataclass
class LinearProgram:
    num_vars: int
    constraints: list = field(default_factory=list)  # (coeffs, relation, rhs, tag)
    nonnegative: bool = False  # all variables known >= 0: skip sign splitting

    def add(self, coeffs: Mapping[int, Fraction], relation: str, rhs, tag=""):
        assert relation in ("<=", ">=", "==")
        for var in coeffs:
            assert 0 <= var < self.num_vars
        self.constraints.append(
            ({v: Fraction(c) for v, c in coeffs.items() if c}, relation,
             Fraction(rhs), tag))


def build_lp_theta(g: WeightedEdgeGraph) -> LinearProgram:
    """Feasible iff some nonnegative circulation uses an edge, has
    nonnegative total weight in every dimension, and keeps one edge leaving
    each required vertex set."""
    lp = _base_lp(g)
    for r, required in enumerate(g.theta_sets):
        rows = {e: Fraction(1) for e, (src, _, _) in enumerate(g.edges)
                if src in required}
        lp.add(rows, ">=", 1, tag=f"visit-set-{r}")
    return lp


def build_lp_psi(g: WeightedEdgeGraph, l: int) -> LinearProgram:
    """Like the visiting program, but edges leaving the l-th forbidden set
    must not be used at all."""
    lp = _base_lp(g)
    forbidden = g.psi_sets[l]
    rows = {e: Fraction(1) for e, (src, _, _) in enumerate(g.edges)
            if src in forbidden}
    lp.add(rows, "==", 0, tag=f"avoid-set-{l}")
    return lp


def _base_lp(g: WeightedEdgeGraph) -> LinearProgram:
    lp = LinearProgram(num_vars=len(g.edges), nonnegative=True)
    for e in range(len(g.edges)):
        lp.add({e: Fraction(1)}, ">=", 0, tag="nonneg")
    lp.add({e: Fraction(1) for e in range(len(g.edges))}, ">=", 1, tag="some-edge")
    for d, wmap in enumerate(g.weights):
        rows = {}
        for e, (src, _, _) in enumerate(g.edges):
            coeff = Fraction(wmap[src])
            if coeff:
                rows[e] = coeff
        lp.add(rows, ">=", 0, tag=f"dimension-{d}")
    for v in g.vertices:
        rows: dict[int, Fraction] = {}
        for e, (src, _, trg) in enumerate(g.edges):
            if src == v:
                rows[e] = rows.get(e, Fraction(0)) + 1
            if trg == v:
                rows[e] = rows.get(e, Fraction(0)) - 1
        rows = {e: c for e, c in rows.items() if c}
        lp.add(rows, "==", 0, tag=f"balance-{v}")
    return lp


# ---------------------------------------------------------------------------
# Phase-one simplex
# ---------------------------------------------------------------------------

def feasible(lp: LinearProgram) -> Optional[dict[int, Fraction]]:
    """A rational assignment satisfying every constraint, or None.

    Variables are treated as free (split into positive parts); rows gain
    slack variables, then artificials, and the artificial total is minimized
    with Bland's rule.
    """
    n = lp.num_vars
    split = 1 if lp.nonnegative else 2
    rows = []
    for coeffs, relation, rhs, _ in lp.constraints:
        row = {}
        for v, c in coeffs.items():
            row[split * v] = row.get(split * v, Fraction(0)) + c
            if split == 2:
                row[split * v + 1] = row.get(split * v + 1, Fraction(0)) - c
        rows.append((row, relation, rhs))

    num_structural = split * n
    col = num_structural
    tableau = []
    for row, relation, rhs in rows:
        row = dict(row)
        if relation == ">=":
            row[col] = Fraction(-1)
            col += 1
        elif relation == "<=":
            row[col] = Fraction(1)
            col += 1
        tableau.append((row, rhs))

    total_cols = col
    matrix = []
    rhs_col = []
    for row, rhs in tableau:
        if rhs < 0:
            row = {c: -v for c, v in row.items()}
            rhs = -rhs
        matrix.append(row)
        rhs_col.append(rhs)

    m = len(matrix)
    art0 = total_cols
    basis = []
    dense = []
    for r in range(m):
        full = [Fraction(0)] * (total_cols + m)
        for c, v in matrix[r].items():
            full[c] = v
        full[art0 + r] = Fraction(1)
        dense.append(full)
        basis.append(art0 + r)
    width = total_cols + m

    # objective: minimize the sum of artificials; keep reduced costs for all
    # columns, updated by pivoting
    cost = [Fraction(0)] * width
    for c in range(art0, width):
        cost[c] = Fraction(1)
    # reduced objective row z = cost - sum over basic rows
    obj = [Fraction(0)] * width
    obj_rhs = Fraction(0)
    for c in range(width):
        obj[c] = cost[c]
    for r in range(m):
        for c in range(width):
            obj[c] -= dense[r][c]
        obj_rhs -= rhs_col[r]

    while True:
        enter = next((c for c in range(width) if obj[c] < 0), None)
        if enter is None:
            break
        best = None
        for r in range(m):
            a = dense[r][enter]
            if a > 0:
                ratio = rhs_col[r] / a
                key = (ratio, basis[r])
                if best is None or key < best[0]:
                    best = (key, r)
        if best is None:
            raise ArithmeticError("phase-one objective unbounded")
        _, r = best
        pivot = dense[r][enter]
        dense[r] = [v / pivot for v in dense[r]]
        rhs_col[r] = rhs_col[r] / pivot
        for rr in range(m):
            if rr != r and dense[rr][enter]:
                factor = dense[rr][enter]
                dense[rr] = [v - factor * dense[r][c] for c, v in enumerate(dense[rr])]
                rhs_col[rr] -= factor * rhs_col[r]
        if obj[enter]:
            factor = obj[enter]
            obj = [v - factor * dense[r][c] for c, v in enumerate(obj)]
            obj_rhs -= factor * rhs_col[r]
        basis[r] = enter

    if -obj_rhs != 0:
        return None
    values = [Fraction(0)] * width
    for r in range(m):
        values[basis[r]] = rhs_col[r]
    if split == 1:
        return {v: values[v] for v in range(n)}
    return {v: values[2 * v] - values[2 * v + 1] for v in range(n)}


# ---------------------------------------------------------------------------
# Cycle search over restricted arenas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MpSearchResult:
    feasible: bool
    lasso: Optional[Lasso]
    witness_gap: bool


_FALLBACK_EDGE_LIMIT = 14
_FALLBACK_LP_BUDGET = 512
_CIRCUIT_STEP_LIMIT = 20000


def mp_lasso_search(ra, weights, shifts, spec, extra_dims=()) -> MpSearchResult:
    """Search the restricted arena for a cycle achieving every dimension.

    `shifts` maps players to thresholds (cycle average of the player's
    weights must reach its shift); `extra_dims` appends (state weight map,
    threshold) dimensions.  `spec` is either a GF-implication formula,
    checked via required / forbidden vertex sets, or a Buechi automaton,
    checked by producting it in and requiring an accepting vertex on the
    cycle.

    The decision runs one feasibility program per strongly connected
    component.  A feasible program whose support cannot be connected yields
    a yes verdict without a lasso (`witness_gap`).
    """
    from .buchi import BuchiAutomaton
    from .formula import Gr1Formula

    arena = ra.arena
    if isinstance(spec, Gr1Formula):
        base_of = lambda v: v
        vertices, edges = _reachable_graph(
            ra.start, lambda v: ra.successors(v))
        theta_sets = tuple(
            frozenset(v for v in vertices if eval_bool_on(arena, t, v))
            for t in spec.consequents)
        psi_sets = tuple(
            frozenset(v for v in vertices if eval_bool_on(arena, t, v))
            for t in spec.antecedents)
    elif isinstance(spec, BuchiAutomaton):
        base_of = lambda v: v[0]

        def product_succ(v):
            s, q = v
            label = arena.label(s)
            out = []
            for guard, q2 in spec.edges[q]:
                if _eval_guard(guard, label):
                    for prof, s2 in ra.successors(s):
                        out.append((prof, (s2, q2)))
            return out

        start = (ra.start, spec.initial[0])
        vertices, edges = _reachable_graph(start, product_succ)
        theta_sets = (frozenset(v for v in vertices if v[1] in spec.accepting),)
        psi_sets = ()
    else:
        raise TypeError(f"unsupported specification payload: {spec!r}")

    dims = []
    for player in sorted(shifts):
        dims.append({
            v: Fraction(weights.of(player, base_of(v))) - shifts[player]
            for v in vertices})
    for wmap, threshold in extra_dims:
        dims.append({v: Fraction(wmap[base_of(v)]) - threshold for v in vertices})
    dims = tuple(dims)

    start_vertex = vertices[0]
    feasible_somewhere = False
    programs = [("theta", None)] + [("psi", l) for l in range(len(psi_sets))]
    for kind, l in programs:
        if kind == "theta":
            graph_edges = edges
        else:
            graph_edges = [e for e in edges
                           if e[0] not in psi_sets[l] and e[2] not in psi_sets[l]]
        sccs = _edge_sccs(graph_edges)
        for scc in sccs:
            internal = [e for e in graph_edges if e[0] in scc and e[2] in scc]
            if not internal:
                continue
            if kind == "theta" and any(not (t & scc) for t in theta_sets):
                continue
            sub = WeightedEdgeGraph(
                vertices=tuple(sorted(scc)),
                edges=tuple(internal),
                weights=tuple({v: d[v] for v in scc} for d in dims),
                theta_sets=theta_sets if kind == "theta" else (),
                psi_sets=psi_sets,
            )
            lp = build_lp_theta(sub) if kind == "theta" else build_lp_psi(sub, l)
            solution = feasible(lp)
            if solution is None:
                continue
            feasible_somewhere = True
            lasso = _extract_lasso(sub, solution, start_vertex, edges, base_of)
            if lasso is not None:
                return MpSearchResult(True, lasso, False)
    if feasible_somewhere:
        return MpSearchResult(True, None, True)
    return MpSearchResult(False, None, False)


def eval_bool_on(arena, term, state):
    from .formula import eval_bool
    return eval_bool(term, arena.label(state))


def _eval_guard(guard, label):
    from .formula import eval_bool
    return eval_bool(guard, label)


def _reachable_graph(start, successors):
    order = {start: 0}
    queue = [start]
    edges = []
    i = 0
    while i < len(queue):
        v = queue[i]
        i += 1
        for edata, w in successors(v):
            edges.append((v, edata, w))
            if w not in order:
                order[w] = len(order)
                queue.append(w)
    return tuple(queue), edges


def _edge_sccs(edges):
    vertices = sorted({e[0] for e in edges} | {e[2] for e in edges})
    succ: dict = {v: [] for v in vertices}
    for src, _, trg in edges:
        succ[src].append(trg)
    return tarjan_sccs(vertices, lambda v: succ[v])


def _extract_lasso(sub: WeightedEdgeGraph, solution, start_vertex, all_edges, base_of):
    """Scale the circulation to integers and walk it as one cycle; try small
    connected supports when the returned basic solution is disconnected."""
    support = [e for e in range(len(sub.edges)) if solution[e] > 0]
    if _connected(sub, support):
        counts = _integer_counts(solution, support)
        circuit = _euler_circuit(sub, support, counts)
        if circuit is not None:
            return _attach_prefix(circuit, start_vertex, all_edges, base_of)
    # fall back to exact search over small connected supports
    if len(sub.edges) <= _FALLBACK_EDGE_LIMIT:
        found = _connected_support(sub)
        if found is not None:
            support, counts = found
            circuit = _euler_circuit(sub, support, counts)
            if circuit is not None:
                return _attach_prefix(circuit, start_vertex, all_edges, base_of)
    return None


def _connected(sub, support):
    if not support:
        return False
    touched = sorted({sub.edges[e][0] for e in support} |
                     {sub.edges[e][2] for e in support})
    parent = {v: v for v in touched}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in support:
        a, b = find(sub.edges[e][0]), find(sub.edges[e][2])
        if a != b:
            parent[a] = b
    return len({find(v) for v in touched}) == 1


def _integer_counts(solution, support):
    from math import lcm

    scale = lcm(*(solution[e].denominator for e in support))
    return {e: int(solution[e] * scale) for e in support}


def _euler_circuit(sub, support, counts):
    """Directed Eulerian circuit over the support multigraph (balanced by
    flow conservation, strongly connected once weakly connected)."""
    total = sum(counts.values())
    if total > _CIRCUIT_STEP_LIMIT:
        return None
    remaining = dict(counts)
    adjacency: dict = {}
    for e in support:
        src, edata, trg = sub.edges[e]
        adjacency.setdefault(src, []).append(e)
    for v in adjacency:
        adjacency[v].sort()
    start = min(adjacency)
    stack = [start]
    stack_edges = []
    circuit = []
    while stack:
        v = stack[-1]
        edge = None
        for e in adjacency.get(v, ()):
            if remaining[e] > 0:
                edge = e
                break
        if edge is None:
            stack.pop()
            if stack_edges:
                circuit.append(stack_edges.pop())
        else:
            remaining[edge] -= 1
            stack_edges.append(edge)
            stack.append(sub.edges[edge][2])
    circuit.reverse()
    if len(circuit) != total:
        return None  # support not connected after all
    return [(sub.edges[e][0], sub.edges[e][1]) for e in circuit]


def _connected_support(sub):
    """Smallest connected edge subset carrying a feasible circulation with
    every support edge used at least once; None when the budget runs out."""
    import itertools

    edge_count = len(sub.edges)
    budget = _FALLBACK_LP_BUDGET
    for size in range(1, edge_count + 1):
        for combo in itertools.combinations(range(edge_count), size):
            if budget <= 0:
                return None
            if not _connected(sub, list(combo)):
                continue
            sources = {sub.edges[e][0] for e in combo}
            if any(not (t & sources) for t in sub.theta_sets):
                continue
            if not _balanced_possible(sub, combo):
                continue
            lp = _restricted_lp(sub, combo)
            budget -= 1
            solution = feasible(lp)
            if solution is not None:
                counts = _integer_counts(solution, list(combo))
                return list(combo), counts
    return None


def _restricted_lp(sub, combo):
    lp = build_lp_theta(sub)
    chosen = set(combo)
    for e in range(len(sub.edges)):
        if e in chosen:
            lp.add({e: Fraction(1)}, ">=", 1, tag="support-lower")
        else:
            lp.add({e: Fraction(1)}, "==", 0, tag="support-zero")
    return lp


def _balanced_possible(sub, combo):
    # a circulation with every chosen edge used needs in and out flow at
    # every touched vertex
    outs = {sub.edges[e][0] for e in combo}
    ins = {sub.edges[e][2] for e in combo}
    return outs == ins


def _attach_prefix(circuit, start_vertex, all_edges, base_of):
    succ: dict = {}
    for src, edata, trg in all_edges:
        succ.setdefault(src, []).append((edata, trg))
    cycle_entry = circuit[0][0]
    found = bfs_path([start_vertex], lambda v: succ.get(v, ()),
                     lambda v: v == cycle_entry)
    if found is None:
        return None
    prefix_steps, _ = found
    return Lasso(
        tuple((base_of(v), prof) for v, prof in prefix_steps),
        tuple((base_of(v), prof) for v, prof in circuit),
    )
