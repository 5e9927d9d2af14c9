"""End-to-end runs: circuit -> noisy samples -> syndromes -> graph -> decoding."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from .chain import HeavyHexGraph, select_chain
from .circuit import (STATE_BASIS, STATES, CircuitProgram, build_memory_experiment,
                      data_measurement_slots, normalize_state)
from .decoder import decode_batch
from .frame import sample
from .graph import MatchingGraph, build_hardware_graph, build_sample_graph
from .noise import CalibrationModel, attach_noise
from .pauli import CodeLayout, build_layout
from .syndrome import compute_syndromes


def coupling_graph(calib: CalibrationModel) -> HeavyHexGraph:
    return HeavyHexGraph.from_edges([tuple(sorted(p)) for p in calib.pairs], calib.qubits)


_chain_cache: Dict[tuple, Dict[int, int]] = {}


def chain_mapping(calib: CalibrationModel, n_qubits: int) -> Dict[int, int]:
    """Chain index -> physical qubit, chosen by cheapest ECR path on the coupling graph."""
    key = (n_qubits, tuple(sorted(calib.qubits)),
           tuple(sorted((tuple(sorted(k)), v) for k, v in calib.pairs.items())))
    if key not in _chain_cache:
        _chain_cache[key] = select_chain(coupling_graph(calib), n_qubits, dict(calib.pairs))
    return dict(_chain_cache[key])


def config_seed(seed: int, d: int, f: int, state: str) -> int:
    """Independent, reproducible sub-seed per configuration."""
    ss = np.random.SeedSequence([int(seed), d, f, STATES.index(normalize_state(state))])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass
class RunResult:
    layout: CodeLayout
    rounds: int
    state: str
    mapping: Dict[int, int]
    circuit: CircuitProgram
    bits: np.ndarray
    syndromes: np.ndarray
    data_bits: np.ndarray
    graph: MatchingGraph
    decoded: Dict[str, np.ndarray]


def noisy_circuit(layout: CodeLayout, rounds: int, state: str, calib: CalibrationModel,
                  mapping: Optional[Dict[int, int]] = None) -> Tuple[CircuitProgram, Dict[int, int]]:
    if mapping is None:
        mapping = chain_mapping(calib, layout.n_qubits)
    ideal = build_memory_experiment(layout, rounds, state)
    return attach_noise(ideal, calib, mapping), mapping


def run_memory(d: int, f: int, state: str, rounds: int, shots: int, seed: int,
               calib: CalibrationModel, backend: str = "hardware", threads: int = 1,
               mapping: Optional[Dict[int, int]] = None) -> RunResult:
    state = normalize_state(state)
    layout = build_layout(d, f, STATE_BASIS[state])
    circ, mapping = noisy_circuit(layout, rounds, state, calib, mapping)
    bits = sample(circ, shots, config_seed(seed, d, f, state), threads=threads)
    syn = compute_syndromes(bits, layout, rounds, state)
    data = bits[:, data_measurement_slots(layout, rounds)]
    if backend == "hardware":
        graph = build_hardware_graph(circ, layout, rounds)
    elif backend == "sample":
        graph = build_sample_graph(syn, layout, rounds)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    decoded = decode_batch(graph, syn, data, state, threads=threads)
    return RunResult(layout, rounds, state, mapping, circ, bits, syn, data, graph, decoded)
