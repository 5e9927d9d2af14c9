import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flagrep.circuit import build_memory_experiment, data_measurement_slots
from flagrep.decoder import (CORRECTED, NON_CORRECTED, NON_DETECTED, Decoder, DefectGraph,
                             ShortestPaths, build_defect_graph, decode_batch, match,
                             matching_weight, min_weight_perfect_matching)
from flagrep.frame import reference_record, sample, trace_error
from flagrep.graph import Edge, MatchingGraph, build_hardware_graph, weight_from_probability
from flagrep.noise import CalibrationModel, attach_noise
from flagrep.pauli import PauliString, build_layout
from flagrep.syndrome import compute_syndromes
from oracles import (all_matchings_weight, brute_force_defect_matching, brute_force_matching,
                     floyd_warshall, min_tjoin_weight)


def grid_graph(rows, cols, weights, boundary_cols=True):
    """Nodes t*cols+s; S edges along rows, T along columns, boundary at both ends of each row."""
    n = rows * cols
    b = n
    edges = []
    k = 0
    for t in range(rows):
        for s in range(cols):
            u = t * cols + s
            if s + 1 < cols:
                edges.append(Edge(u, u + 1, "S", 0.1, weights[k % len(weights)], frozenset({s + 1})))
                k += 1
            if t + 1 < rows:
                edges.append(Edge(u, u + cols, "T", 0.1, weights[k % len(weights)], frozenset()))
                k += 1
        if boundary_cols:
            edges.append(Edge(t * cols, b, "BOUNDARY", 0.1, weights[k % len(weights)], frozenset({0})))
            edges.append(Edge(t * cols + cols - 1, b, "BOUNDARY", 0.1,
                              weights[(k + 1) % len(weights)], frozenset({cols})))
            k += 2
    return MatchingGraph(cols + 1, rows - 1, tuple(edges))


def test_path_examples():
    edges = (Edge(0, 1, "T", 0.1, 2.0, frozenset()), Edge(0, 2, "S", 0.1, 3.0, frozenset({1})),
             Edge(1, 3, "S", 0.1, 3.0, frozenset({1})), Edge(0, 4, "BOUNDARY", 0.1, 1.5,
                                                            frozenset({0})))
    g = MatchingGraph(3, 1, edges)
    sp = ShortestPaths(g)
    assert sp.distance(0, 1) == 2.0 and sp.path_edges(0, 1) == [0]
    assert sp.distance(0, g.boundary) == 1.5


def test_grid_against_floyd_warshall():
    g = grid_graph(3, 3, [1.0])
    sp = ShortestPaths(g)
    fw = floyd_warshall(g.num_nodes + 1, [(e.u, e.v, e.w) for e in g.edges], sink=g.boundary)
    for a in range(g.num_nodes + 1):
        for b in range(g.num_nodes + 1):
            assert sp.distance(a, b) == pytest.approx(fw[a, b])


@given(st.integers(2, 4), st.integers(2, 4), st.lists(st.floats(0.1, 10), min_size=1, max_size=30))
def test_random_grids_against_floyd_warshall(rows, cols, ws):
    g = grid_graph(rows, cols, ws)
    sp = ShortestPaths(g)
    fw = floyd_warshall(g.num_nodes + 1, [(e.u, e.v, e.w) for e in g.edges], sink=g.boundary)
    for a in range(g.num_nodes + 1):
        for b in range(g.num_nodes + 1):
            assert sp.distance(a, b) == pytest.approx(fw[a, b])
        # path edges add up to the distance
        for b in range(g.num_nodes):
            assert sum(g.edges[k].w for k in sp.path_edges(a, b)) == pytest.approx(sp.distance(a, b))


def test_matching_examples():
    assert match(DefectGraph((), {})) == []
    dg = DefectGraph((0, 1), {(0, 1): 2.0, (0, 2): 5.0, (1, 3): 5.0, (2, 3): 0.0})
    assert match(dg) == [(0, 1), (2, 3)]
    dg = DefectGraph((0, 1), {(0, 1): 12.0, (0, 2): 5.0, (1, 3): 5.0, (2, 3): 0.0})
    assert match(dg) == [(0, 2), (1, 3)]


def test_blossom_against_enumeration_complete_graphs():
    rng = random.Random(99)
    for trial in range(400):
        n = rng.choice([2, 4, 6, 8, 10])
        w = {(i, j): float(rng.randint(0, 20)) for i in range(n) for j in range(i + 1, n)}
        got = matching_weight(min_weight_perfect_matching(n, w), w)
        assert got == brute_force_matching(n, w)
        if n <= 8:
            assert got == all_matchings_weight(n, w)


def test_defect_graph_matching_against_enumeration():
    rng = random.Random(7)
    for trial in range(600):
        k = rng.randint(1, 10)
        pair = {(i, j): float(rng.randint(1, 30)) for i in range(k) for j in range(i + 1, k)}
        bnd = [float(rng.randint(1, 30)) for _ in range(k)]
        weights = dict(pair)
        for i in range(k):
            weights[(i, k + i)] = bnd[i]
            for j in range(i + 1, k):
                weights[(k + i, k + j)] = 0.0
        dg = DefectGraph(tuple(range(k)), weights)
        assert matching_weight(match(dg), weights) == brute_force_defect_matching(k, pair, bnd)


def small_hardware_graph(rng):
    lay = build_layout(3, 0)
    R = 1
    n = lay.n_qubits
    calib = CalibrationModel.uniform(range(n), [(q, q + 1) for q in range(n - 1)],
                                     sx=1e-3, readout=1e-2, idle=1e-3, ecr=1e-2)
    g = build_hardware_graph(attach_noise(build_memory_experiment(lay, R, "0"), calib), lay, R)
    edges = tuple(Edge(e.u, e.v, e.kind, e.p, float(rng.integers(1, 8)), e.correction)
                  for e in g.edges)
    return MatchingGraph(g.distance, g.rounds, edges)


def test_decoder_solution_is_minimum_t_join():
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = small_hardware_graph(rng)
        dec = Decoder(g)
        plain = [(e.u, e.v, e.w) for e in g.edges]
        for mask in range(1 << g.num_nodes):
            defects = [i for i in range(g.num_nodes) if mask >> i & 1]
            dg = build_defect_graph(dec.paths, defects)
            got = matching_weight(match(dg), dg.weights)
            assert got == pytest.approx(min_tjoin_weight(g.num_nodes, plain, defects, g.boundary))


def noisy_setup(d, f, R, state="0"):
    lay = build_layout(d, f, "Z" if state in "01" else "X")
    n = lay.n_qubits
    calib = CalibrationModel.uniform(range(n), [(q, q + 1) for q in range(n - 1)],
                                     sx=1e-3, x=1e-3, readout=1e-2, idle=1e-3, ecr=1e-2)
    prog = attach_noise(build_memory_experiment(lay, R, state), calib)
    return lay, prog, build_hardware_graph(prog, lay, R)


def test_noiseless_shot_is_non_detected():
    lay, prog, g = noisy_setup(3, 0, 2)
    bits = reference_record(prog.ideal())
    syn = compute_syndromes(bits, lay, 2, "0")
    res = Decoder(g).decode([], bits[data_measurement_slots(lay, 2)], "0")
    assert not syn.any()
    assert res.category == NON_DETECTED and not res.logical_failure


def test_single_data_error_is_corrected():
    d, R = 5, 3
    lay, prog, g = noisy_setup(d, 0, R)
    ideal = prog.ideal()
    # X on the middle data qubit halfway through the circuit
    pos = ideal.measure_positions[lay.n_synd * 2 - 1] + 1
    flips = trace_error(ideal, (pos, PauliString.single(ideal.qubit_count, lay.data_qubits[2], "X")))
    bits = reference_record(ideal).copy()
    bits[list(flips)] ^= 1
    syn = compute_syndromes(bits, lay, R, "0")
    data = bits[data_measurement_slots(lay, R)]
    assert data[2] == 1
    res = Decoder(g).decode([tuple(x) for x in np.argwhere(syn)], data, "0")
    assert res.category == CORRECTED and not res.logical_failure
    assert res.corrected_data == (0,) * d


@pytest.mark.parametrize("d", [3, 5, 7])
def test_majority_flip_is_not_corrected(d):
    R = 2
    lay, prog, g = noisy_setup(d, 0, R)
    data = np.zeros(d, dtype=np.uint8)
    data[: (d + 1) // 2] = 1
    init = np.zeros(d, dtype=np.uint8)
    syn = np.zeros((R + 1, d - 1), dtype=np.uint8)
    syn[R] = data[:-1] ^ data[1:] ^ init[:-1] ^ init[1:]
    res = Decoder(g).decode([tuple(x) for x in np.argwhere(syn)], data, "0")
    assert res.category == NON_CORRECTED and res.logical_failure
    assert res.corrected_data == (1,) * d


def test_batch_threads_agree():
    lay, prog, g = noisy_setup(3, 1, 3)
    bits = sample(prog, 400, seed=1)
    syn = compute_syndromes(bits, lay, 3, "0")
    data = bits[:, data_measurement_slots(lay, 3)]
    a = decode_batch(g, syn, data, "0")
    b = decode_batch(g, syn, data, "0", threads=2)
    for key in a:
        assert np.array_equal(a[key], b[key])
    assert set(a["category"]) <= {NON_DETECTED, CORRECTED, NON_CORRECTED}
    assert np.array_equal(a["failure"], a["category"] == NON_CORRECTED)
