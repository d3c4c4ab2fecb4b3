"""Codes for incomplete networks.

A link between nodes ``i`` and ``j`` is needed whenever block ``A[i, j]`` (or
``A[j, i]``) is nonzero, so a code fits a topology when its *support graph*
is a subgraph of it after relabelling the code's node indices. Everything
here works in two index spaces: code indices ``0..n-1`` and topology nodes;
``GraphCodePlan.relabeling[c]`` is the topology node playing code index ``c``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .construct import GeneratorA, code_to_dict, design_code, derive_params
from .errors import BudgetExceeded, InvalidParams, NotApplicable
from .field import Matrix
from .verify import check_mds_exhaustive, colex_combinations, structurally_singular

DEFAULT_SEARCH_BUDGET = 2_000_000


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes ``0..n-1``; edges stored as ``(u, v)``, ``u < v``."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a graph needs at least one node")
        norm = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> Graph:
        return cls(n, frozenset(tuple(e) for e in edges))

    @classmethod
    def complete(cls, n: int) -> Graph:
        return cls(n, frozenset(combinations(range(n), 2)))

    @classmethod
    def cycle(cls, n: int) -> Graph:
        return cls(n, frozenset((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def from_adjacency(cls, adj) -> Graph:
        adj = np.asarray(adj, dtype=bool)
        n = adj.shape[0]
        return cls(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n) if adj[i, j] or adj[j, i]))

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges:
            adj[u, v] = adj[v, u] = True
        return adj

    def neighbors(self, v: int) -> list[int]:
        return [int(u) for u in np.nonzero(self.adjacency()[v])[0]]

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def min_degree(self) -> int:
        return min(self.degrees())

    def is_regular(self) -> bool:
        return len(set(self.degrees())) == 1

    def complement(self) -> Graph:
        return Graph(self.n, frozenset(combinations(range(self.n), 2)) - self.edges)

    def without(self, edges: Iterable[Sequence[int]]) -> Graph:
        drop = {(min(u, v), max(u, v)) for u, v in edges}
        return Graph(self.n, self.edges - drop)

    def is_subgraph_of(self, other: Graph) -> bool:
        return self.n == other.n and self.edges <= other.edges

    def relabel(self, mapping: Sequence[int]) -> Graph:
        """Image of this graph when node ``u`` is renamed ``mapping[u]``."""
        if sorted(mapping) != list(range(self.n)):
            raise ValueError("relabeling must be a permutation of the nodes")
        return Graph(self.n, frozenset((mapping[u], mapping[v]) for u, v in self.edges))

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in sorted(self.edges)]}

    @classmethod
    def from_dict(cls, doc: Mapping) -> Graph:
        try:
            n = int(doc["n"])
            raw = [(int(u), int(v)) for u, v in doc["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed graph document: {exc}") from exc
        keys = [(min(u, v), max(u, v)) for u, v in raw]
        if len(set(keys)) != len(keys):
            raise ValueError("graph has repeated edges; only simple graphs are supported")
        return cls(n, frozenset(keys))


def bipartite_4_regular_graph() -> Graph:
    """4-regular graph on 8 nodes that carries the canonical [8, 4] code: K_{4,4}."""
    return Graph(8, frozenset((i, j) for i in range(0, 8, 2) for j in range(1, 8, 2)))


def blocked_4_regular_graph() -> Graph:
    """4-regular graph on 8 nodes on which no lowest-density [8, 4] MDS code exists.

    Nodes 0 and 1 each reach only node 4 among {4, 5, 6, 7}.
    """
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (0, 4), (1, 4), (2, 5), (2, 6),
             (3, 5), (3, 7), (4, 6), (4, 7), (5, 6), (5, 7), (6, 7)]
    return Graph.from_edges(8, edges)


@dataclass(frozen=True)
class GraphCodePlan:
    relabeling: tuple[int, ...]
    removed_edges: tuple[tuple[int, int], ...]
    code: GeneratorA

    def embedded_support(self) -> Graph:
        """Links the code needs, expressed in topology node names."""
        return support_graph(self.code).relabel(self.relabeling)

    def fits(self, g: Graph) -> bool:
        return self.embedded_support().is_subgraph_of(g)

    def to_dict(self) -> dict:
        return {
            "status": "plan",
            "relabeling": list(self.relabeling),
            "removed_edges": [list(e) for e in self.removed_edges],
            "code": code_to_dict(self.code),
        }


def min_degree_ok(g: Graph, k: int, r: int) -> bool:
    """Necessary condition: every node has degree at least ``max(k, r)``."""
    return g.min_degree() >= max(k, r)


def support_graph(gen: GeneratorA, allow_asymmetric: bool = False) -> Graph:
    """Edge ``{i, j}`` iff block ``A[i, j]`` is nonzero.

    The constructed codes have block-symmetric support; for other codes pass
    ``allow_asymmetric=True`` to take the union of both directions.
    """
    nz = gen.block_nonzero()
    np.fill_diagonal(nz, False)
    if not allow_asymmetric and not np.array_equal(nz, nz.T):
        raise ValueError("block support of A is not symmetric; no undirected support graph")
    return Graph.from_adjacency(nz)


def reduce_to_regular(g: Graph) -> tuple[Graph, list[tuple[int, int]]]:
    """Drop edges between full-degree nodes until the graph is ``(n-2)``-regular.

    Nodes of degree ``n-1`` form a clique and there is an even number of them,
    so pairing them lowest index first and deleting each pair's edge works.
    """
    n = g.n
    if n % 2:
        raise NotApplicable(f"reduction needs an even node count, got {n}")
    deg = g.degrees()
    if min(deg) < n - 2:
        raise NotApplicable(f"minimum degree {min(deg)} < n - 2 = {n - 2}")
    full = [v for v in range(n) if deg[v] == n - 1]
    removed = [(full[t], full[t + 1]) for t in range(0, len(full), 2)]
    return g.without(removed), removed


def _pick_a_tilde(k: int, r: int, a_tilde: Matrix | None, q: int | None):
    if a_tilde is not None and a_tilde.shape != (k, r):
        raise InvalidParams(f"a_tilde must be {k}x{r} for this graph, got {a_tilde.shape}")
    return a_tilde, q


def plan_r2_code(g: Graph, a_tilde: Matrix | None = None, q: int | None = None) -> GraphCodePlan:
    """Place the canonical ``[n, n-2]`` code on an even-``n`` graph of minimum degree ``n-2``.

    The canonical code leaves out exactly the links ``(t, t + n/2)``. After
    reducing ``g`` to an ``(n-2)``-regular graph its missing links form a
    perfect matching; matched pair ``t`` is mapped onto code indices
    ``t`` and ``t + n/2``.
    """
    n = g.n
    if n < 4 or n % 2:
        raise NotApplicable(f"r = 2 construction needs even n >= 4, got n={n}")
    reduced, removed = reduce_to_regular(g)
    pairs = sorted(reduced.complement().edges)
    half = n // 2
    if len(pairs) != half:
        raise NotApplicable("complement of the reduced graph is not a perfect matching")
    relabeling = [0] * n
    for t, (a, b) in enumerate(pairs):
        relabeling[t], relabeling[t + half] = a, b
    a_tilde, q = _pick_a_tilde(n - 2, 2, a_tilde, q)
    code = design_code(n, 2, q, a_tilde)
    plan = GraphCodePlan(tuple(relabeling), tuple(removed), code)
    if not plan.fits(reduced):
        raise AssertionError("relabelled r = 2 code does not fit the reduced graph")
    return plan


def embed_graph(pattern: Graph, target: Graph, budget: int = DEFAULT_SEARCH_BUDGET) -> tuple[int, ...] | None:
    """Backtracking search for an injective map sending every pattern edge onto a target edge.

    Returns ``phi`` with ``phi[u]`` the target node for pattern node ``u``, or
    None when no such map exists. Raises BudgetExceeded after ``budget``
    candidate placements.
    """
    n = pattern.n
    if target.n != n:
        raise ValueError("pattern and target must have the same node count")
    if pattern.is_subgraph_of(target):
        return tuple(range(n))
    padj, tadj = pattern.adjacency(), target.adjacency()
    pdeg, tdeg = padj.sum(axis=1), tadj.sum(axis=1)

    # Place the most constrained pattern nodes first: each next node has the
    # most already-placed neighbours, ties broken by degree then index.
    order: list[int] = []
    placed = np.zeros(n, dtype=bool)
    while len(order) < n:
        score = [(-(padj[u] & placed).sum(), -pdeg[u], u) for u in range(n) if not placed[u]]
        u = min(score)[2]
        order.append(u)
        placed[u] = True
    back = [[w for w in order[:pos] if padj[u, w]] for pos, u in enumerate(order)]

    phi = [-1] * n
    used = [False] * n
    steps = 0

    def place(pos: int) -> bool:
        nonlocal steps
        if pos == n:
            return True
        u = order[pos]
        for v in range(n):
            if used[v] or tdeg[v] < pdeg[u]:
                continue
            if any(not tadj[phi[w], v] for w in back[pos]):
                continue
            steps += 1
            if steps > budget:
                raise BudgetExceeded(f"subgraph search exceeded {budget} placements")
            phi[u], used[v] = v, True
            if place(pos + 1):
                return True
            phi[u], used[v] = -1, False
        return False

    return tuple(phi) if place(0) else None


def embed_code(g: Graph, code: GeneratorA, budget: int = DEFAULT_SEARCH_BUDGET) -> GraphCodePlan | None:
    """Plan for an existing code on topology ``g``, or None when its support does not embed."""
    phi = embed_graph(support_graph(code), g, budget)
    return None if phi is None else GraphCodePlan(phi, (), code)


def plan_divisible_code(g: Graph, r: int, a_tilde: Matrix | None = None, q: int | None = None,
                        budget: int = DEFAULT_SEARCH_BUDGET) -> GraphCodePlan | None:
    """Try to place the canonical code when ``r`` divides ``n``.

    None means the canonical support graph does not embed in ``g``; that
    alone does not prove that no lowest-density MDS code exists for ``g``.
    """
    n = g.n
    if not 1 <= r < n or n % r:
        raise NotApplicable(f"r = {r} must divide n = {n}")
    k = n - r
    if not min_degree_ok(g, k, r):
        raise NotApplicable(f"minimum degree {g.min_degree()} < max(k, r) = {max(k, r)}")
    a_tilde, q = _pick_a_tilde(k, r, a_tilde, q)
    return embed_code(g, design_code(n, r, q, a_tilde), budget)


def _ld_supports(adj: np.ndarray, k: int, r: int, budget: int):
    """Every 0/1 ``n x n`` pattern inside ``adj`` with row sums ``r`` and column sums ``k``."""
    n = adj.shape[0]
    nbrs = [list(np.nonzero(adj[i])[0]) for i in range(n)]
    cap = [k] * n
    rows: list[tuple[int, ...]] = [()] * n
    steps = 0

    def rec(i: int):
        nonlocal steps
        if i == n:
            yield list(rows)
            return
        # Every column must still be reachable by enough of the remaining rows.
        for c in range(n):
            if cap[c] > sum(1 for t in range(i, n) if adj[t, c]):
                return
        for choice in combinations([c for c in nbrs[i] if cap[c] > 0], r):
            steps += 1
            if steps > budget:
                raise BudgetExceeded(f"support enumeration exceeded {budget} steps")
            for c in choice:
                cap[c] -= 1
            rows[i] = choice
            yield from rec(i + 1)
            for c in choice:
                cap[c] += 1

    yield from rec(0)


def graph_admits_no_ld_mds(g: Graph, k: int, r: int,
                           budget: int = DEFAULT_SEARCH_BUDGET) -> tuple[int, ...] | None:
    """Look for a failure set that defeats every lowest-density code on ``g``.

    Only the one-symbol-per-node case (``k == r``) is handled: there every
    lowest-density support is a 0/1 pattern inside the adjacency matrix with
    ``r`` ones per row and ``k`` per column. A returned ``F`` makes ``A_f``
    structurally singular for all such patterns, proving no lowest-density
    MDS code exists. None is inconclusive, or means a code was found.
    """
    n = g.n
    if k != r or k + r != n:
        raise NotApplicable(f"nonexistence search needs n = 2k = 2r, got n={n}, k={k}, r={r}")
    if plan_divisible_code(g, r, budget=budget) is not None:
        return None
    candidates = list(colex_combinations(n, r))
    adj = g.adjacency()
    for support in _ld_supports(adj, k, r, budget):
        pattern = np.zeros((n, n), dtype=bool)
        for i, cols in enumerate(support):
            pattern[i, list(cols)] = True
        keep = []
        for f in candidates:
            s = [j for j in range(n) if j not in f]
            if structurally_singular(pattern[np.ix_(f, s)]):
                keep.append(f)
        candidates = keep
        if not candidates:
            return None
    return candidates[0] if candidates else None


def find_plan(g: Graph, r: int, a_tilde: Matrix | None = None, q: int | None = None,
              budget: int = DEFAULT_SEARCH_BUDGET) -> GraphCodePlan | None:
    """Dense r=2 topologies get the reduction plan; everything else an embedding search."""
    n = g.n
    if r == 2 and n % 2 == 0 and n >= 4 and g.min_degree() >= n - 2:
        return plan_r2_code(g, a_tilde, q)
    return embed_code(g, design_code(n, r, q, a_tilde), budget)


def analyze_graph(g: Graph, r: int, a_tilde: Matrix | None = None, q: int | None = None,
                  budget: int = DEFAULT_SEARCH_BUDGET) -> dict:
    """Three-valued answer for a topology: a plan, a proof of impossibility, or inconclusive."""
    n = g.n
    params = derive_params(n, r, q)
    k = params.k
    if not min_degree_ok(g, k, r):
        return {"status": "impossible", "reason": "min_degree",
                "min_degree": g.min_degree(), "required": max(k, r)}
    plan = find_plan(g, r, a_tilde, q, budget)
    if plan is not None:
        out = plan.to_dict()
        out["checked"] = check_mds_exhaustive(plan.code).is_mds and plan.fits(g)
        return out
    if k == r:
        witness = graph_admits_no_ld_mds(g, k, r, budget)
        if witness is not None:
            return {"status": "impossible", "reason": "structurally_singular", "witness": list(witness)}
    return {"status": "inconclusive",
            "reason": "canonical code support does not embed; nonexistence not established"}


def load_graph(path) -> Graph:
    with open(path) as fh:
        return Graph.from_dict(json.load(fh))
