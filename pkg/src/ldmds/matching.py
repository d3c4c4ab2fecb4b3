"""Maximum bipartite matching by repeated augmenting paths (Kuhn's algorithm)."""

from __future__ import annotations

from typing import Sequence


def max_bipartite_matching(adj: Sequence[Sequence[int]], n_right: int) -> list[int]:
    """Return ``match_left`` where ``match_left[u]`` is the right vertex matched
    to left vertex ``u`` or -1. ``adj[u]`` lists the right neighbours of ``u``.
    """
    match_right = [-1] * n_right
    match_left = [-1] * len(adj)

    def augment(u: int, seen: list[bool]) -> bool:
        for v in adj[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] == -1 or augment(match_right[v], seen):
                match_right[v] = u
                match_left[u] = v
                return True
        return False

    for u in range(len(adj)):
        augment(u, [False] * n_right)
    return match_left


def has_perfect_matching(pattern) -> bool:
    """True iff the square 0/1 pattern admits a permutation inside its support."""
    rows = [[j for j, x in enumerate(row) if x] for row in pattern]
    n_right = len(pattern[0]) if len(pattern) else 0
    if len(rows) != n_right:
        return False
    return all(v != -1 for v in max_bipartite_matching(rows, n_right))
