"""Pauli-frame sampling and deterministic error tracing.

Frames are tracked relative to the circuit with its Pauli gates removed,
which for every program produced by :mod:`flagrep.circuit` measures all
zeros. Explicit ``X``/``Z`` gates are therefore folded into the frame, so a
sampled bit is the actual measurement outcome.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .circuit import CircuitProgram
from .pauli import PauliString

BLOCK_SHOTS = 4096


@dataclass(frozen=True)
class ShotRecord:
    bits: Tuple[int, ...]


def _bits(mask: int):
    q = 0
    while mask:
        if mask & 1:
            yield q
        mask >>= 1
        q += 1


def _run(prog: CircuitProgram, width: int, *, rng: Optional[np.random.Generator] = None,
         injections: Optional[Dict[int, List[Tuple[int, PauliString]]]] = None,
         apply_paulis: bool = True) -> np.ndarray:
    """Propagate ``width`` frames through ``prog``; return (measurements, width) flips."""
    n = prog.qubit_count
    x = np.zeros((n, width), dtype=bool)
    z = np.zeros((n, width), dtype=bool)
    out = np.zeros((prog.num_measurements, width), dtype=bool)
    m = 0
    injections = injections or {}
    for pos, ins in enumerate(prog.instructions):
        if pos in injections:
            for col, pauli in injections[pos]:
                for q in _bits(pauli.x_mask):
                    x[q, col] ^= True
                for q in _bits(pauli.z_mask):
                    z[q, col] ^= True
        k = ins.kind
        t = ins.targets
        if k == "CNOT":
            c, tg = t
            x[tg] ^= x[c]
            z[c] ^= z[tg]
        elif k == "CZ":
            a, b = t
            z[a] ^= x[b]
            z[b] ^= x[a]
        elif k == "H":
            q = t[0]
            x[q], z[q] = z[q].copy(), x[q].copy()
        elif k == "MEASURE":
            out[m] = x[t[0]]
            m += 1
        elif k == "RESET":
            x[t[0]] = False
            z[t[0]] = False
        elif k == "X":
            if apply_paulis:
                x[t[0]] ^= True
        elif k == "Z":
            if apply_paulis:
                z[t[0]] ^= True
        elif rng is not None and ins.p:
            p = ins.p
            u = rng.random(width)
            idx = np.flatnonzero(u < p)
            if idx.size == 0:
                continue
            if k == "XERR":
                x[t[0], idx] ^= True
            elif k == "DEPOL1":
                # 0 -> X, 1 -> Y, 2 -> Z
                kind = np.minimum((u[idx] * 3 / p).astype(np.int64), 2)
                q = t[0]
                x[q, idx[kind != 2]] ^= True
                z[q, idx[kind != 0]] ^= True
            elif k == "DEPOL2":
                # outcome 1..15 read as bits (xa, za, xb, zb)
                pauli = np.minimum((u[idx] * 15 / p).astype(np.int64), 14) + 1
                a, b = t
                x[a, idx[(pauli & 1) != 0]] ^= True
                z[a, idx[(pauli & 2) != 0]] ^= True
                x[b, idx[(pauli & 4) != 0]] ^= True
                z[b, idx[(pauli & 8) != 0]] ^= True
    return out


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(block)])


def sample(circ: CircuitProgram, shots: int, seed: int, threads: int = 1) -> np.ndarray:
    """Sample ``shots`` measurement records; returns a (shots, m) uint8 array.

    Shots are split into fixed blocks of :data:`BLOCK_SHOTS`; block ``b`` draws
    from a generator seeded with ``(seed, b)``, so the output does not depend
    on ``threads``.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    blocks = [(b, min(BLOCK_SHOTS, shots - b * BLOCK_SHOTS))
              for b in range((shots + BLOCK_SHOTS - 1) // BLOCK_SHOTS)]

    def work(item):
        b, w = item
        return _run(circ, w, rng=_block_rng(seed, b)).T

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(item) for item in blocks]
    return np.concatenate(parts, axis=0).astype(np.uint8)


def sample_records(circ: CircuitProgram, shots: int, seed: int) -> List[ShotRecord]:
    return [ShotRecord(tuple(int(b) for b in row)) for row in sample(circ, shots, seed)]


def reference_record(circ: CircuitProgram) -> np.ndarray:
    """Noiseless measurement record."""
    return _run(circ, 1)[:, 0].astype(np.uint8)


def trace_many(circ: CircuitProgram, injections: Sequence[Tuple[int, PauliString]]) -> np.ndarray:
    """Flip pattern of each injected error; returns (len(injections), m) bool.

    Injection ``(pos, P)`` applies ``P`` just before instruction ``pos``
    (``pos == len(instructions)`` means after the last one). Noise channels
    and Pauli gates are ignored.
    """
    by_pos: Dict[int, List[Tuple[int, PauliString]]] = {}
    limit = len(circ.instructions)
    for col, (pos, pauli) in enumerate(injections):
        if not 0 <= pos <= limit:
            raise IndexError(f"injection position {pos} outside 0..{limit}")
        if pauli.n != circ.qubit_count:
            raise ValueError("Pauli length does not match the circuit")
        by_pos.setdefault(pos, []).append((col, pauli))
    out = _run(circ, len(injections), injections=by_pos, apply_paulis=False)
    return out.T


def trace_error(circ: CircuitProgram, injection: Tuple[int, PauliString]) -> Set[int]:
    """Measurement indices flipped by a single injected Pauli error."""
    flips = trace_many(circ, [injection])[0]
    return set(int(i) for i in np.flatnonzero(flips))


def pack_rows(bits: np.ndarray) -> List[str]:
    packed = np.packbits(np.asarray(bits, dtype=np.uint8), axis=1, bitorder="big")
    return [row.tobytes().hex() for row in packed]


def write_shots(path: Union[str, Path], bits: np.ndarray) -> None:
    """Header ``shots=<n> bits=<m>`` then one hex row per shot (MSB-first, zero padded)."""
    bits = np.asarray(bits, dtype=np.uint8)
    lines = [f"shots={bits.shape[0]} bits={bits.shape[1]}"] + pack_rows(bits)
    Path(path).write_text("\n".join(lines) + "\n")


def read_shots(path: Union[str, Path]) -> np.ndarray:
    lines = Path(path).read_text().split()
    if not lines:
        raise ValueError(f"{path}: empty shot file")
    header = dict(kv.split("=") for kv in lines[:2])
    n, m = int(header["shots"]), int(header["bits"])
    rows = lines[2:]
    if len(rows) != n:
        raise ValueError(f"{path}: header says {n} shots, found {len(rows)}")
    nbytes = (m + 7) // 8
    raw = np.frombuffer(bytes.fromhex("".join(rows)), dtype=np.uint8).reshape(n, nbytes) \
        if n else np.zeros((0, nbytes), dtype=np.uint8)
    return np.unpackbits(raw, axis=1, count=m, bitorder="big")
