"""Minimum-weight perfect matching decoder on a :class:`MatchingGraph`."""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .circuit import logical_value, normalize_state
from .graph import MatchingGraph
from .syndrome import flat_defects

NON_DETECTED = "non-detected"
CORRECTED = "corrected"
NON_CORRECTED = "non-corrected"
CATEGORIES = (NON_DETECTED, CORRECTED, NON_CORRECTED)


class DecodingError(RuntimeError):
    pass


@dataclass(frozen=True)
class DecodeResult:
    corrected_data: Tuple[int, ...]
    logical_failure: bool
    category: str
    defect_count: int


@dataclass
class DefectGraph:
    """Defects ``0..k-1`` plus their virtual partners ``k..2k-1``."""
    defects: Tuple[int, ...]
    weights: Dict[Tuple[int, int], float]

    @property
    def size(self) -> int:
        return 2 * len(self.defects)


class ShortestPaths:
    """Lazy single-source Dijkstra over a matching graph.

    The boundary node is a sink: paths may end there but never pass through.
    Equal-distance ties resolve towards the lower node index.
    """

    def __init__(self, graph: MatchingGraph):
        self.graph = graph
        n = graph.num_nodes + 1
        self.adj: List[List[Tuple[int, float, int]]] = [[] for _ in range(n)]
        for k, e in enumerate(graph.edges):
            if e.w < 0:
                raise ValueError("negative edge weight")
            self.adj[e.u].append((e.v, e.w, k))
            self.adj[e.v].append((e.u, e.w, k))
        for lst in self.adj:
            lst.sort()
        self._runs: Dict[int, Tuple[List[float], List[int], List[int]]] = {}
        self._corr: Dict[Tuple[int, int], FrozenSet[int]] = {}

    def run(self, source: int):
        if source in self._runs:
            return self._runs[source]
        n = len(self.adj)
        boundary = self.graph.boundary
        dist = [math.inf] * n
        pred = [-1] * n
        pred_edge = [-1] * n
        dist[source] = 0.0
        heap = [(0.0, source)]
        done = [False] * n
        while heap:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            if u == boundary and u != source:
                continue
            for v, w, k in self.adj[u]:
                nd = d + w
                if nd < dist[v]:
                    dist[v] = nd
                    pred[v] = u
                    pred_edge[v] = k
                    heapq.heappush(heap, (nd, v))
        self._runs[source] = (dist, pred, pred_edge)
        return self._runs[source]

    def distance(self, a: int, b: int) -> float:
        d = self.run(a)[0][b]
        if math.isinf(d):
            raise DecodingError(f"nodes {a} and {b} are disconnected")
        return d

    def path_edges(self, a: int, b: int) -> List[int]:
        _, pred, pred_edge = self.run(a)
        out = []
        v = b
        while v != a:
            if pred[v] < 0:
                raise DecodingError(f"nodes {a} and {b} are disconnected")
            out.append(pred_edge[v])
            v = pred[v]
        return out[::-1]

    def path_correction(self, a: int, b: int) -> FrozenSet[int]:
        key = (a, b)
        if key not in self._corr:
            acc = frozenset()
            for k in self.path_edges(a, b):
                acc = acc ^ self.graph.edges[k].correction
            self._corr[key] = acc
        return self._corr[key]


def build_defect_graph(paths: ShortestPaths, defects: Sequence[int]) -> DefectGraph:
    k = len(defects)
    b = paths.graph.boundary
    weights: Dict[Tuple[int, int], float] = {}
    for i in range(k):
        for j in range(i + 1, k):
            weights[(i, j)] = paths.distance(defects[i], defects[j])
        weights[(i, k + i)] = paths.distance(defects[i], b)
    for i in range(k):
        for j in range(i + 1, k):
            weights[(k + i, k + j)] = 0.0
    return DefectGraph(tuple(defects), weights)


def match(dg: DefectGraph) -> List[Tuple[int, int]]:
    """Exact minimum-weight perfect matching (blossom) of a defect graph."""
    k = len(dg.defects)
    if k == 0:
        return []
    if k == 1:
        return [(0, 1)]
    if k == 2:
        if dg.weights[(0, 1)] <= dg.weights[(0, 2)] + dg.weights[(1, 3)]:
            return [(0, 1), (2, 3)]
        return [(0, 2), (1, 3)]
    return min_weight_perfect_matching(dg.size, dg.weights)


def min_weight_perfect_matching(n: int, weights: Dict[Tuple[int, int], float]
                                ) -> List[Tuple[int, int]]:
    """Minimum-weight perfect matching of a graph given as ``{(i, j): w}``.

    Solved as a maximum-cardinality maximum-weight matching on ``C - w``.
    """
    if n == 0:
        return []
    big = max(weights.values()) + 1.0
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for (i, j) in sorted(weights):
        g.add_edge(i, j, weight=big - weights[(i, j)])
    mate = nx.max_weight_matching(g, maxcardinality=True)
    pairs = sorted(tuple(sorted(p)) for p in mate)
    if 2 * len(pairs) != n:
        raise DecodingError("defect graph has no perfect matching")
    return pairs


def matching_weight(pairs: Iterable[Tuple[int, int]], weights: Dict[Tuple[int, int], float]) -> float:
    return sum(sorted(weights[tuple(sorted(p))] for p in pairs))


class Decoder:
    """Decodes shots against one graph; corrections are cached by defect set."""

    def __init__(self, graph: MatchingGraph):
        self.graph = graph
        self.paths = ShortestPaths(graph)
        self._cache: Dict[Tuple[int, ...], FrozenSet[int]] = {}

    def correction(self, defects: Sequence[int]) -> FrozenSet[int]:
        key = tuple(sorted(defects))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        dg = build_defect_graph(self.paths, key)
        k = len(key)
        corr = frozenset()
        for i, j in match(dg):
            if i < k and j < k:
                corr = corr ^ self.paths.path_correction(key[i], key[j])
            elif i < k:
                corr = corr ^ self.paths.path_correction(key[i], self.graph.boundary)
        self._cache[key] = corr
        return corr

    def decode(self, defects: Sequence, measured_data: Sequence[int], initial_state: str
               ) -> DecodeResult:
        defects = _as_flat(defects, self.graph.n_synd)
        data = np.array(measured_data, dtype=np.uint8).copy()
        if data.shape != (self.graph.distance,):
            raise ValueError(f"expected {self.graph.distance} data bits, got {data.shape}")
        for q in self.correction(defects):
            data[q] ^= 1
        if np.any(data[:-1] ^ data[1:]):
            raise DecodingError("corrected data word violates a stabilizer parity")
        failure = int(data[0]) != logical_value(normalize_state(initial_state))
        if failure:
            cat = NON_CORRECTED
        elif defects:
            cat = CORRECTED
        else:
            cat = NON_DETECTED
        return DecodeResult(tuple(int(b) for b in data), failure, cat, len(defects))


def _as_flat(defects, ns: int) -> Tuple[int, ...]:
    out = []
    for d in defects:
        if isinstance(d, tuple):
            t, s = d
            out.append(t * ns + s)
        else:
            out.append(int(d))
    return tuple(sorted(out))


def decode_shot(graph: MatchingGraph, defects, measured_data, initial_state) -> DecodeResult:
    return Decoder(graph).decode(defects, measured_data, initial_state)


def _decode_range(args):
    graph, syndromes, data, state = args
    dec = Decoder(graph)
    res = [dec.decode(flat_defects(s), d, state) for s, d in zip(syndromes, data)]
    return ([r.defect_count for r in res], [CATEGORIES.index(r.category) for r in res],
            [r.logical_failure for r in res])


def decode_batch(graph: MatchingGraph, syndromes: np.ndarray, data_bits: np.ndarray,
                 initial_state: str, threads: int = 1) -> Dict[str, np.ndarray]:
    """Decode every shot; returns arrays ``defect_count``, ``category``, ``failure``."""
    n = len(syndromes)
    if threads > 1 and n > 1:
        chunks = np.array_split(np.arange(n), threads)
        jobs = [(graph, syndromes[c], data_bits[c], initial_state) for c in chunks if len(c)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_decode_range, jobs))
    else:
        parts = [_decode_range((graph, syndromes, data_bits, initial_state))]
    counts, cats, fails = [], [], []
    for c, k, f in parts:
        counts += c
        cats += k
        fails += f
    return {"defect_count": np.array(counts, dtype=np.int64),
            "category": np.array([CATEGORIES[k] for k in cats]),
            "failure": np.array(fails, dtype=bool)}
