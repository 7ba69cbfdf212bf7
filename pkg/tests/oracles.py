"""Brute-force reference computations, independent of the library's paths.

Everything here enumerates exhaustively or differentiates numerically;
nothing calls the code under test. Exponential pieces are gated to small
graphs by their callers.
"""

import numpy as np


def enum_paths(num_vertices, weighted_edges, src, dst):
    """All directed paths src -> dst as vertex tuples, by raw DFS."""
    adj = {}
    for (i, j) in weighted_edges:
        adj.setdefault(i, []).append(j)
    out = []

    def walk(path):
        if path[-1] == dst:
            out.append(tuple(path))
            return
        for nxt in adj.get(path[-1], []):
            if nxt not in path:
                walk(path + [nxt])

    if src != dst:
        walk([src])
    return out


def path_sum_effect(num_vertices, weighted_edges, src, dst):
    """Sum over all paths of the product of edge weights; 1 for src == dst."""
    if src == dst:
        return 1.0
    total = 0.0
    for path in enum_paths(num_vertices, weighted_edges, src, dst):
        prod = 1.0
        for i, j in zip(path, path[1:]):
            prod *= weighted_edges[(i, j)]
        total += prod
    return total


def brute_reachable(num_vertices, weighted_edges, src, dst):
    return bool(enum_paths(num_vertices, weighted_edges, src, dst))


def brute_total_effect_matrix(num_vertices, weighted_edges):
    b = np.zeros((num_vertices, num_vertices))
    for i in range(num_vertices):
        for j in range(num_vertices):
            b[j, i] = path_sum_effect(num_vertices, weighted_edges, i, j)
    return b


def central_difference_gradient(fun, x, step=1e-5):
    """Gradient of a scalar function of a flat array by central differences."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for idx in range(x.size):
        up = x.copy()
        dn = x.copy()
        up[idx] += step
        dn[idx] -= step
        grad[idx] = (fun(up) - fun(dn)) / (2.0 * step)
    return grad


def injective_assignment_count(column_patterns, variable_patterns):
    """Number of injective column-to-variable assignments matching patterns.

    Tries every permutation of column subsets of the right size; the
    callers keep the sizes tiny.
    """
    from itertools import permutations

    k = len(column_patterns)
    m = len(variable_patterns)
    count = 0
    for combo in permutations(range(k), m):
        if all(column_patterns[c] == variable_patterns[v] for v, c in enumerate(combo)):
            count += 1
    return count
