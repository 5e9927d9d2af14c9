"""Heavy-hexagon coupling graphs and selection of a 1-D qubit chain on them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import networkx as nx


class InfeasibleChainError(RuntimeError):
    """No simple path of the requested length exists."""


@dataclass(frozen=True)
class HeavyHexGraph:
    nodes: FrozenSet[int]
    edges: FrozenSet[FrozenSet[int]]

    @classmethod
    def from_edges(cls, edges: Iterable[Tuple[int, int]], nodes: Iterable[int] = ()) -> "HeavyHexGraph":
        es = frozenset(frozenset((int(a), int(b))) for a, b in edges)
        ns = set(int(n) for n in nodes)
        for e in es:
            ns |= e
        return cls(frozenset(ns), es)

    def adjacency(self) -> Dict[int, List[int]]:
        adj: Dict[int, List[int]] = {n: [] for n in self.nodes}
        for e in self.edges:
            a, b = tuple(e)
            adj[a].append(b)
            adj[b].append(a)
        for v in adj.values():
            v.sort()
        return adj

    @property
    def max_degree(self) -> int:
        return max((len(v) for v in self.adjacency().values()), default=0)

    def is_connected(self) -> bool:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(tuple(e) for e in self.edges)
        return len(self.nodes) > 0 and nx.is_connected(g)


def heavy_hex_eagle() -> HeavyHexGraph:
    """Coupling map of the 127-qubit Eagle heavy-hexagon lattice."""
    rows = [(0, 13), (18, 32), (37, 51), (56, 70), (75, 89), (94, 108), (113, 126)]
    edges = []
    for lo, hi in rows:
        edges += [(q, q + 1) for q in range(lo, hi)]
    # bridge qubit -> (upper row qubit, lower row qubit)
    bridges = {
        14: (0, 18), 15: (4, 22), 16: (8, 26), 17: (12, 30),
        33: (20, 39), 34: (24, 43), 35: (28, 47), 36: (32, 51),
        52: (37, 56), 53: (41, 60), 54: (45, 64), 55: (49, 68),
        71: (58, 77), 72: (62, 81), 73: (66, 85), 74: (70, 89),
        90: (75, 94), 91: (79, 98), 92: (83, 102), 93: (87, 106),
        109: (96, 114), 110: (100, 118), 111: (104, 122), 112: (108, 126),
    }
    for b, (u, v) in bridges.items():
        edges += [(u, b), (b, v)]
    return HeavyHexGraph.from_edges(edges)


def select_chain(graph: HeavyHexGraph, length: int,
                 edge_costs: Optional[Mapping[FrozenSet[int], float]] = None,
                 max_expansions: int = 2_000_000) -> Dict[int, int]:
    """Pick a simple path of ``length`` nodes with minimum summed edge cost.

    Depth-first best-first search from every start node (ascending id), always
    extending along the cheapest neighbour first, with branch-and-bound pruning
    on ``partial + remaining * min_edge_cost``. Exact unless ``max_expansions``
    is exhausted, in which case the best path found so far is returned.
    Among equal-cost paths the first one reached in this search order wins,
    so the result is deterministic.

    Returns a map chain index -> physical qubit id.
    """
    if length < 1:
        raise ValueError("chain length must be positive")
    if length > len(graph.nodes):
        raise InfeasibleChainError(f"need {length} qubits, graph has {len(graph.nodes)}")
    adj = graph.adjacency()
    costs = {e: float((edge_costs or {}).get(e, 0.0)) for e in graph.edges}
    if edge_costs:
        for k, v in edge_costs.items():
            costs[frozenset(k)] = float(v)
    min_cost = min(costs.values(), default=0.0)

    best_cost = float("inf")
    best_path: Optional[List[int]] = None
    expansions = 0

    def order(node, visited):
        return sorted((costs[frozenset((node, nb))], nb) for nb in adj[node] if nb not in visited)

    for start in sorted(graph.nodes):
        if length == 1:
            return {0: start}
        path = [start]
        visited = {start}
        stack = [(0.0, iter(order(start, visited)))]
        while stack:
            if expansions > max_expansions:
                break
            cost, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                visited.discard(path.pop())
                continue
            c, nb = nxt
            new_cost = cost + c
            remaining = length - len(path) - 1
            expansions += 1
            if new_cost + remaining * min_cost > best_cost or (
                    new_cost + remaining * min_cost == best_cost and best_path is not None):
                continue
            path.append(nb)
            visited.add(nb)
            if len(path) == length:
                if new_cost < best_cost:
                    best_cost, best_path = new_cost, list(path)
                visited.discard(path.pop())
                continue
            stack.append((new_cost, iter(order(nb, visited))))
        if expansions > max_expansions:
            break
    if best_path is None:
        raise InfeasibleChainError(f"no simple path of {length} qubits in the coupling graph")
    return dict(enumerate(best_path))
