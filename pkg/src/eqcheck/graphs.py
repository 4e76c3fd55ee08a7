"""Small graph helpers shared by the product and search modules."""

from __future__ import annotations


def tarjan_sccs(nodes, successors):
    """Strongly connected components, iteratively, in deterministic order.

    `nodes` fixes the iteration order; `successors(n)` yields neighbour
    nodes.  Components come back in reverse topological order of discovery.
    """
    index = {}
    lowlink = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = [0]

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = lowlink[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(successors(succ))))
                    advanced = True
                    break
                if succ in on_stack:
                    lowlink[node] = min(lowlink[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                sccs.append(frozenset(component))
    return sccs


def bfs_path(start_set, successors, goal):
    """Shortest edge path from any node of `start_set` to a goal node.

    `successors(n)` yields (edge_data, next_node) pairs; `goal(n)` tests
    arrival.  Returns (steps, end_node) where steps are (node, edge_data)
    pairs, or None when unreachable.  Starting nodes already satisfying the
    goal yield an empty path.
    """
    from collections import deque

    parent = {}
    queue = deque()
    for s in start_set:
        if s in parent:
            continue
        parent[s] = None
        if goal(s):
            return [], s
        queue.append(s)
    while queue:
        node = queue.popleft()
        for edata, succ in successors(node):
            if succ in parent:
                continue
            parent[succ] = (node, edata)
            if goal(succ):
                steps = []
                cur = succ
                while parent[cur] is not None:
                    prev, via = parent[cur]
                    steps.append((prev, via))
                    cur = prev
                steps.reverse()
                return steps, succ
            queue.append(succ)
    return None


def bfs_cycle(node, successors):
    """Shortest nonempty cycle from `node` back to itself, or None."""
    first_steps = []
    for edata, succ in successors(node):
        if succ == node:
            return [(node, edata)]
        first_steps.append((edata, succ))
    for edata, succ in first_steps:
        found = bfs_path([succ], successors, lambda n: n == node)
        if found is not None:
            return [(node, edata)] + found[0]
    return None
