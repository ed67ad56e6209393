"""Brute-force reference computations kept independent of the library.

Everything here works on plain index edge sets with O(n^3) closure passes, so
results are easy to audit and slow on purpose.
"""


def reachability(n, edges):
    """Boolean closure: reach[i][j] iff a path of length >= 1 goes i -> j."""
    reach = [[False] * n for _ in range(n)]
    for i, j in edges:
        reach[i][j] = True
    for m in range(n):
        row_m = reach[m]
        for i in range(n):
            if reach[i][m]:
                row_i = reach[i]
                for j in range(n):
                    if row_m[j]:
                        row_i[j] = True
    return reach


def prune_starved(n, edges):
    """Delete zero-outdegree vertices until stable; returns surviving indices."""
    alive = set(range(n))
    live_edges = set(edges)
    while True:
        sources = {i for i, _ in live_edges}
        dead = {i for i in alive if i not in sources}
        if not dead:
            return sorted(alive), sorted(live_edges)
        alive -= dead
        live_edges = {(i, j) for i, j in live_edges
                      if i in alive and j in alive}


def closure_decomposition(n, edges):
    """Cyclic SCCs, terminal flags, transient set, and reachability order.

    Returns (classes, flags, transient, order) with classes sorted by their
    smallest member, matching the library's presentation.
    """
    reach = reachability(n, edges)
    assigned = set()
    classes = []
    for i in range(n):
        if i in assigned or not reach[i][i]:
            continue
        cls = tuple(sorted(
            j for j in range(n)
            if reach[i][j] and reach[j][i] and reach[j][j]))
        classes.append(cls)
        assigned.update(cls)
    classes.sort(key=min)

    flags = []
    for cls in classes:
        members = set(cls)
        flags.append(all(j in members for i, j in edges if i in members))

    terminal_members = set()
    for cls, flag in zip(classes, flags):
        if flag:
            terminal_members.update(cls)
    transient = tuple(i for i in range(n) if i not in terminal_members)

    order = set()
    for a, ca in enumerate(classes):
        for b, cb in enumerate(classes):
            if a != b and any(reach[i][j] for i in ca for j in cb):
                order.add((a, b))
    return tuple(classes), tuple(flags), transient, frozenset(order)
