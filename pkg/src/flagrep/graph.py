"""Space-time matching graph with S, T, ST and boundary edges.

Nodes are syndrome coordinates ``(t, s)`` (0-based, see
:mod:`flagrep.syndrome`) flattened as ``t*(d-1) + s``, plus one virtual
boundary node with id ``(R+1)*(d-1)``.

Edge probabilities come either from enumerating every elementary fault of a
noisy circuit (:func:`build_hardware_graph`) or from defect correlations in
sampled data (:func:`build_sample_graph`). Both share one topology, which is
fixed by the circuit structure of ``(layout, R)``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .circuit import CircuitProgram, build_memory_experiment, data_measurement_slots
from .frame import trace_many
from .noise import CalibrationModel, attach_noise
from .pauli import CodeLayout, PauliString
from .syndrome import syndrome_matrix

P_MIN = 1e-12
KINDS = ("S", "T", "ST", "BOUNDARY")


class ModelError(RuntimeError):
    """A fault's defect pattern cannot be expressed with graph edges."""


def weight_from_probability(p: float) -> float:
    """Log-likelihood weight ``ln((1-p)/p)`` with ``p`` clamped to ``[1e-12, 0.5]``."""
    p = min(max(float(p), P_MIN), 0.5)
    return math.log((1.0 - p) / p)


W_MAX = weight_from_probability(0.0)


def xor_combine(p: float, q: float) -> float:
    """Probability that exactly one of two independent events fires."""
    return p * (1.0 - q) + q * (1.0 - p)


def node_index(t: int, s: int, d: int, rounds: int, order: str = "space-time") -> int:
    """1-based node label; ``t`` in ``1..R+1`` and ``s`` in ``1..d-1``.

    space-time: ``s + (d-1)(t-1)``; time-space: ``t + (R+1)(s-1)``.
    """
    if not (1 <= s <= d - 1 and 1 <= t <= rounds + 1):
        raise ValueError(f"node (t={t}, s={s}) outside d={d}, R={rounds}")
    if order == "space-time":
        return s + (d - 1) * (t - 1)
    if order == "time-space":
        return t + (rounds + 1) * (s - 1)
    raise ValueError(f"unknown ordering {order!r}")


@dataclass(frozen=True)
class Edge:
    u: int
    v: int  # v > u; v may be the boundary node
    kind: str
    p: float
    w: float
    correction: FrozenSet[int]  # data-qubit indices 0..d-1


@dataclass(frozen=True)
class Mechanism:
    """One Pauli outcome (or merged outcomes with the same effect) of one channel."""
    position: int
    pauli: str
    p: float
    defects: Tuple[int, ...]
    data_flips: FrozenSet[int]


@dataclass(frozen=True)
class MatchingGraph:
    distance: int
    rounds: int
    edges: Tuple[Edge, ...]
    warnings: int = 0

    @property
    def n_synd(self) -> int:
        return self.distance - 1

    @property
    def num_nodes(self) -> int:
        return (self.rounds + 1) * self.n_synd

    @property
    def boundary(self) -> int:
        return self.num_nodes

    def coord(self, node: int) -> Tuple[int, int]:
        if node == self.boundary:
            return (-1, -1)
        return divmod(node, self.n_synd)

    def edge_map(self) -> Dict[Tuple[int, int], Edge]:
        return {(e.u, e.v): e for e in self.edges}

    def topology(self) -> Tuple[Tuple[int, int, str], ...]:
        return tuple((e.u, e.v, e.kind) for e in self.edges)


def _classify(u: int, v: int, ns: int, boundary: int) -> Optional[str]:
    if v == boundary:
        return "BOUNDARY"
    (t1, s1), (t2, s2) = divmod(u, ns), divmod(v, ns)
    if t1 == t2 and abs(s1 - s2) == 1:
        return "S"
    if abs(t1 - t2) == 1 and s1 == s2:
        return "T"
    if abs(t1 - t2) == 1 and abs(s1 - s2) == 1:
        return "ST"
    return None


def _channel_generators(ins) -> List[Tuple[str, int]]:
    if ins.kind == "XERR":
        return [("X", ins.targets[0])]
    if ins.kind == "DEPOL1":
        q = ins.targets[0]
        return [("X", q), ("Z", q)]
    a, b = ins.targets
    return [("X", a), ("Z", a), ("X", b), ("Z", b)]


def _channel_outcomes(ins) -> List[Tuple[str, int, float]]:
    """(label, generator bitmask, probability) for every Pauli outcome."""
    p = ins.p
    if ins.kind == "XERR":
        return [("X", 0b1, p)]
    if ins.kind == "DEPOL1":
        return [("X", 0b01, p / 3), ("Y", 0b11, p / 3), ("Z", 0b10, p / 3)]
    out = []
    for k in range(1, 16):
        a = "IXZY"[k & 3]
        b = "IXZY"[k >> 2]
        out.append((a + b, k, p / 15))
    return out


def error_mechanisms(noisy: CircuitProgram, layout: CodeLayout, rounds: int) -> List[Mechanism]:
    """Enumerate every Pauli outcome of every noise channel and its effect.

    Outcomes of the same channel with identical effect are merged (their
    probabilities add, as they are mutually exclusive). Outcomes that flip no
    syndrome are dropped.
    """
    n = noisy.qubit_count
    channels = [(pos, ins) for pos, ins in enumerate(noisy.instructions) if ins.is_noise]
    injections = []
    spans = []
    for pos, ins in channels:
        gens = _channel_generators(ins)
        spans.append(len(injections))
        for kind, q in gens:
            injections.append((pos, PauliString.single(n, q, kind)))
    flips = trace_many(noisy, injections).astype(np.uint8)
    M = syndrome_matrix(layout, rounds).astype(np.int64)
    det = (flips.astype(np.int64) @ M) & 1
    data_slots = data_measurement_slots(layout, rounds)
    dflips = flips[:, data_slots]

    mechanisms = []
    for (pos, ins), start in zip(channels, spans):
        merged: Dict[Tuple[Tuple[int, ...], FrozenSet[int]], List] = {}
        for label, mask, p in _channel_outcomes(ins):
            dvec = np.zeros(det.shape[1], dtype=np.int64)
            fvec = np.zeros(dflips.shape[1], dtype=np.uint8)
            g = 0
            while mask:
                if mask & 1:
                    dvec ^= det[start + g]
                    fvec ^= dflips[start + g]
                mask >>= 1
                g += 1
            dets = tuple(int(i) for i in np.flatnonzero(dvec))
            if not dets:
                continue
            key = (dets, frozenset(int(i) for i in np.flatnonzero(fvec)))
            if key in merged:
                merged[key][1] += p
                merged[key][0] += "+" + label
            else:
                merged[key] = [label, p]
        for (dets, data), (label, p) in merged.items():
            mechanisms.append(Mechanism(pos, label, p, dets, data))
    return mechanisms


def _decompose(dets: Sequence[int], edges: Dict[Tuple[int, int], FrozenSet[int]],
               incident: Dict[int, List[Tuple[int, int]]], boundary: int,
               data: FrozenSet[int], max_edges: int = 3) -> Optional[List[Tuple[int, int]]]:
    """Smallest set of known edges whose endpoint XOR equals ``dets``.

    Decompositions whose corrections reproduce ``data`` are preferred.
    """
    target = frozenset(dets)
    for depth in range(1, max_edges + 1):
        found: List[List[Tuple[int, int]]] = []

        def search(odd: FrozenSet[int], chosen: List[Tuple[int, int]]):
            if not odd:
                found.append(list(chosen))
                return
            if len(chosen) == depth or len(odd) > 2 * (depth - len(chosen)):
                return
            node = min(odd)
            for e in incident.get(node, ()):
                if e in chosen:
                    continue
                toggled = set(odd)
                for x in e:
                    if x != boundary:
                        toggled ^= {x}
                chosen.append(e)
                search(frozenset(toggled), chosen)
                chosen.pop()

        search(target, [])
        if found:
            for combo in found:
                corr = frozenset()
                for e in combo:
                    corr = corr ^ edges[e]
                if corr == data:
                    return sorted(combo)
            return sorted(found[0])
    return None


def _assemble(layout: CodeLayout, rounds: int, mechanisms: Sequence[Mechanism]):
    """Map mechanisms onto edges: returns {edge: [probabilities]} and corrections."""
    ns = layout.n_synd
    boundary = (rounds + 1) * ns
    contributions: Dict[Tuple[int, int], List[float]] = defaultdict(list)
    corrections: Dict[Tuple[int, int], Tuple[float, FrozenSet[int]]] = {}
    complex_mechs = []
    for mech in mechanisms:
        dets = mech.defects
        if len(dets) == 1:
            e = (dets[0], boundary)
        elif len(dets) == 2 and _classify(dets[0], dets[1], ns, boundary):
            e = (dets[0], dets[1])
        else:
            complex_mechs.append(mech)
            continue
        contributions[e].append(mech.p)
        best = corrections.get(e)
        if best is None or mech.p > best[0]:
            corrections[e] = (mech.p, mech.data_flips)
    edge_corr = {e: c for e, (_, c) in corrections.items()}
    incident: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    for e in sorted(edge_corr):
        for x in e:
            if x != boundary:
                incident[x].append(e)
    for mech in complex_mechs:
        combo = _decompose(mech.defects, edge_corr, incident, boundary, mech.data_flips)
        if combo is None:
            coords = [divmod(x, ns) for x in mech.defects]
            raise ModelError(
                f"fault {mech.pauli} at instruction {mech.position} flips defects {coords}, "
                "which no combination of up to 3 graph edges reproduces")
        for e in combo:
            contributions[e].append(mech.p)
    return contributions, edge_corr, boundary


def _graph_from_probs(layout: CodeLayout, rounds: int, probs: Dict[Tuple[int, int], float],
                      corrections: Dict[Tuple[int, int], FrozenSet[int]], warn: int = 0
                      ) -> MatchingGraph:
    ns = layout.n_synd
    boundary = (rounds + 1) * ns
    edges = []
    for (u, v) in sorted(corrections):
        p = min(max(probs.get((u, v), 0.0), 0.0), 0.5)
        edges.append(Edge(u, v, _classify(u, v, ns, boundary), p, weight_from_probability(p),
                          corrections[(u, v)]))
    return MatchingGraph(layout.distance, rounds, tuple(edges), warn)


def build_hardware_graph(noisy: CircuitProgram, layout: CodeLayout, rounds: int) -> MatchingGraph:
    """Weights from exhaustive fault enumeration of a noisy circuit."""
    mechs = error_mechanisms(noisy, layout, rounds)
    contributions, corr, _ = _assemble(layout, rounds, mechs)
    topo = graph_topology(layout, rounds)
    extra = set(corr) - set(topo)
    if extra:
        raise ModelError(f"circuit produces edges outside the structural topology: {sorted(extra)}")
    probs = {}
    for e, ps in contributions.items():
        acc = 0.0
        for p in ps:
            acc = xor_combine(acc, p)
        probs[e] = acc
    merged_corr = dict(topo)
    merged_corr.update(corr)
    return _graph_from_probs(layout, rounds, probs, merged_corr)


@lru_cache(maxsize=64)
def _topology_cached(layout: CodeLayout, rounds: int) -> Tuple[Tuple[Tuple[int, int], FrozenSet[int]], ...]:
    state = "0" if layout.basis == "Z" else "+"
    ideal = build_memory_experiment(layout, rounds, state)
    n = layout.n_qubits
    # chain neighbours are the only gate pairs; rates are irrelevant to the structure
    calib = CalibrationModel.uniform(range(n), [(q, q + 1) for q in range(n - 1)])
    noisy = attach_noise(ideal, calib)
    mechs = error_mechanisms(noisy, layout, rounds)
    _, corr, _ = _assemble(layout, rounds, mechs)
    return tuple(sorted(corr.items()))


def graph_topology(layout: CodeLayout, rounds: int) -> Dict[Tuple[int, int], FrozenSet[int]]:
    """Edge set (with corrections) implied by the circuit structure alone."""
    return dict(_topology_cached(layout, rounds))


def pair_probability(mean_i, mean_j, mean_ij):
    """Probability of the mechanism flipping exactly nodes i and j from moments.

    ``1/2 - 1/2 * sqrt(1 - 4(<xixj> - <xi><xj>) / (1 - 2<xi> - 2<xj> + 4<xixj>))``,
    negative results set to 0. Returns ``(p, degenerate)`` where ``degenerate``
    marks a non-positive denominator or negative radicand (p set to 0 and 0.5
    respectively).
    """
    mi = np.asarray(mean_i, dtype=float)
    mj = np.asarray(mean_j, dtype=float)
    mij = np.asarray(mean_ij, dtype=float)
    den = 1.0 - 2.0 * mi - 2.0 * mj + 4.0 * mij
    bad_den = den <= 0
    safe = np.where(bad_den, 1.0, den)
    rad = 1.0 - 4.0 * (mij - mi * mj) / safe
    bad_rad = (rad < 0) & ~bad_den
    p = 0.5 - 0.5 * np.sqrt(np.clip(rad, 0.0, None))
    p = np.where(bad_den, 0.0, np.clip(p, 0.0, None))
    return p, bad_den | bad_rad


def node_moments(syndromes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Node means ``<x_i>`` and pair means ``<x_i x_j>`` of a syndrome batch."""
    x = np.asarray(syndromes, dtype=np.float64).reshape(len(syndromes), -1)
    n = x.shape[0]
    return x.mean(axis=0), (x.T @ x) / n


def build_sample_graph(syndromes: np.ndarray, layout: CodeLayout, rounds: int) -> MatchingGraph:
    """Weights estimated from pairwise defect correlations of sampled shots.

    Boundary probabilities are solved from each node's marginal after removing
    the contribution of its other edges. Degenerate estimates are counted in
    ``MatchingGraph.warnings``.
    """
    syndromes = np.asarray(syndromes)
    if len(syndromes) < 2:
        raise ValueError("need at least 2 shots to estimate correlations")
    if syndromes.shape[1:] != (rounds + 1, layout.n_synd):
        raise ValueError(f"syndrome arrays must be {(rounds + 1, layout.n_synd)}")
    topo = graph_topology(layout, rounds)
    mean, pair = node_moments(syndromes)
    boundary = (rounds + 1) * layout.n_synd
    probs: Dict[Tuple[int, int], float] = {}
    n_warn = 0
    inner = [(u, v) for (u, v) in topo if v != boundary]
    if inner:
        us = np.array([u for u, _ in inner])
        vs = np.array([v for _, v in inner])
        p, bad = pair_probability(mean[us], mean[vs], pair[us, vs])
        n_warn += int(bad.sum())
        probs.update({e: float(q) for e, q in zip(inner, p)})
    for (u, v) in topo:
        if v != boundary:
            continue
        keep = 1.0
        for (a, b), q in probs.items():
            if u in (a, b) and b != boundary:
                keep *= 1.0 - 2.0 * q
        if keep <= 0:
            n_warn += 1
            probs[(u, v)] = 0.0
            continue
        pb = 0.5 * (1.0 - (1.0 - 2.0 * mean[u]) / keep)
        probs[(u, v)] = float(min(max(pb, 0.0), 0.5))
    if n_warn:
        warnings.warn(f"{n_warn} degenerate edge estimates in sample-based graph")
    return _graph_from_probs(layout, rounds, probs, topo, n_warn)


def edge_weight_summary(g: MatchingGraph) -> Dict[str, float]:
    """Mean weight per non-boundary edge kind; kinds without edges are omitted."""
    out = {}
    for kind in ("S", "T", "ST"):
        ws = [e.w for e in g.edges if e.kind == kind]
        if ws:
            out[kind] = float(np.mean(ws))
    return out


EDGE_HEADER = "kind,t1,s1,t2,s2,p,w,correction_qubits"


def write_edges_csv(path: Union[str, Path], g: MatchingGraph) -> None:
    """One edge per row; ``s`` is 1-based, the boundary node is ``t=-1,s=-1``."""
    lines = [f"# distance={g.distance} rounds={g.rounds} warnings={g.warnings}", EDGE_HEADER]
    for e in g.edges:
        t1, s1 = g.coord(e.u)
        t2, s2 = g.coord(e.v)
        s1 = s1 + 1 if s1 >= 0 else -1
        s2 = s2 + 1 if s2 >= 0 else -1
        corr = " ".join(str(q) for q in sorted(e.correction))
        lines.append(f"{e.kind},{t1},{s1},{t2},{s2},{e.p!r},{e.w!r},{corr}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_edges_csv(path: Union[str, Path]) -> MatchingGraph:
    lines = Path(path).read_text().splitlines()
    meta = dict(kv.split("=") for kv in lines[0].lstrip("# ").split())
    d, rounds = int(meta["distance"]), int(meta["rounds"])
    if lines[1] != EDGE_HEADER:
        raise ValueError(f"{path}: unexpected header {lines[1]!r}")
    ns = d - 1
    boundary = (rounds + 1) * ns
    edges = []
    for ln in lines[2:]:
        if not ln:
            continue
        kind, t1, s1, t2, s2, p, w, corr = ln.split(",")
        u = boundary if int(t1) < 0 else int(t1) * ns + int(s1) - 1
        v = boundary if int(t2) < 0 else int(t2) * ns + int(s2) - 1
        edges.append(Edge(u, v, kind, float(p), float(w),
                          frozenset(int(q) for q in corr.split())))
    return MatchingGraph(d, rounds, tuple(edges), int(meta.get("warnings", 0)))
