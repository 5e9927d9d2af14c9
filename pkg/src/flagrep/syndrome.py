"""Syndrome bits and defects from raw measurement records.

Coordinates are 0-based internally: round ``t`` in ``0..R`` and syndrome
``s`` in ``0..d-2``. Row ``t`` compares extraction round ``t`` with round
``t+1`` (1-based rounds); row 0 compares round 1 with the prepared data and
row ``R`` compares round ``R`` with the final data readout. Each comparison
XORs the full patch of a syndrome qubit, i.e. the syndrome outcome together
with the outcomes of its flags. Syndrome ``s`` sits between data qubits ``s``
and ``s+1``.

Files use ``t`` as above and a 1-based ``s``.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from .circuit import data_measurement_slots, logical_value, normalize_state, round_measurement_slots
from .pauli import CodeLayout


@lru_cache(maxsize=64)
def syndrome_matrix(layout: CodeLayout, rounds: int) -> np.ndarray:
    """0/1 matrix ``M`` (measurements x nodes) with ``syndromes = bits @ M mod 2``.

    Node ``t * (d-1) + s`` is syndrome ``(t, s)``; the prepared-state term is
    added separately by :func:`compute_syndromes`.
    """
    ns = layout.n_synd
    slots = round_measurement_slots(layout, rounds)
    data = data_measurement_slots(layout, rounds)
    m = rounds * (ns + layout.n_flag) + layout.distance
    M = np.zeros((m, (rounds + 1) * ns), dtype=np.uint8)
    for s in range(ns):
        patch = layout.patch(s)
        for r in range(rounds):
            for q in patch:
                # round r+1 (1-based) feeds rows r and r+1
                M[slots[r][q], r * ns + s] ^= 1
                M[slots[r][q], (r + 1) * ns + s] ^= 1
        M[data[s], rounds * ns + s] ^= 1
        M[data[s + 1], rounds * ns + s] ^= 1
    M.setflags(write=False)
    return M


def initial_parity(layout: CodeLayout, initial_state: str) -> np.ndarray:
    """Row-0 contribution of the prepared data bits for each syndrome."""
    v = logical_value(normalize_state(initial_state))
    init = np.full(layout.distance, v, dtype=np.uint8)
    return init[:-1] ^ init[1:]


def compute_syndromes(bits: np.ndarray, layout: CodeLayout, rounds: int,
                      initial_state: str) -> np.ndarray:
    """Syndrome array(s) of shape ``(R+1, d-1)`` per shot.

    ``bits`` may be a single record (1-D) or a batch (shots, m).
    """
    bits = np.asarray(bits, dtype=np.uint8)
    M = syndrome_matrix(layout, rounds)
    single = bits.ndim == 1
    batch = bits[None, :] if single else bits
    if batch.shape[1] != M.shape[0]:
        raise ValueError(f"record has {batch.shape[1]} bits, expected {M.shape[0]} "
                         f"for {layout.label} with R={rounds}")
    flat = (batch.astype(np.int64) @ M.astype(np.int64)) & 1
    arr = flat.reshape(batch.shape[0], rounds + 1, layout.n_synd).astype(np.uint8)
    arr[:, 0, :] ^= initial_parity(layout, initial_state)
    return arr[0] if single else arr


def defects(arr: np.ndarray) -> List[Tuple[int, int]]:
    """Coordinates ``(t, s)`` of the set bits of one syndrome array, row-major."""
    ts, ss = np.nonzero(np.asarray(arr))
    return [(int(t), int(s)) for t, s in zip(ts, ss)]


def flat_defects(arr: np.ndarray) -> Tuple[int, ...]:
    """Defects of one syndrome array as space-time node ids ``t*(d-1)+s``."""
    return tuple(int(i) for i in np.flatnonzero(np.asarray(arr).reshape(-1)))


def column_names(layout: CodeLayout, rounds: int) -> List[str]:
    return [f"t{t}_s{s + 1}" for t in range(rounds + 1) for s in range(layout.n_synd)]


def write_syndromes_csv(path: Union[str, Path], arrays: np.ndarray, layout: CodeLayout,
                        rounds: int) -> None:
    arrays = np.asarray(arrays, dtype=np.uint8)
    flat = arrays.reshape(arrays.shape[0], -1)
    lines = [",".join(column_names(layout, rounds))]
    lines += [",".join("1" if b else "0" for b in row) for row in flat]
    Path(path).write_text("\n".join(lines) + "\n")


def read_syndromes_csv(path: Union[str, Path], layout: CodeLayout, rounds: int) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    if header != column_names(layout, rounds):
        raise ValueError(f"{path}: columns do not match {layout.label} with R={rounds}")
    data = np.array([[int(c) for c in ln.split(",")] for ln in lines[1:] if ln], dtype=np.uint8)
    return data.reshape(-1, rounds + 1, layout.n_synd)
