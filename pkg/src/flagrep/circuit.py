"""Timed circuit IR and builders for flag-qubit syndrome extraction.

A :class:`CircuitProgram` is a flat instruction list split into layers by
``TICK`` markers. Every layer ends with a ``TICK``. Within a layer each qubit
takes part in at most one gate, except that a ``MEASURE`` may be followed by a
``RESET`` on the same qubit (measure-and-reset slot).

Round schedules (``S`` syndrome, ``Fa..Fd`` flags, ``D`` data)::

    f=0, Z:  CNOT(D_i->S_i) | CNOT(D_i+1->S_i) | MR
    f=0, X:  H(S) | CNOT(S_i->D_i) | CNOT(S_i->D_i+1) | H(S) | MR
    f=1:     H(S) | S->Fl | S->Fr, C(D_i,Fl) | C(D_i+1,Fr), S->Fl | S->Fr | H(S) | MR
    f=2:     H(S) | S->Fb | S->Fc, Fb->Fa | Fc->Fd, C(D_i,Fa)
             | C(D_i+1,Fd), Fb->Fa | Fc->Fd, S->Fb | S->Fc | H(S) | MR

``C`` is CZ(data, flag) in the Z basis and CNOT(flag->data) in the X basis.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .pauli import CodeLayout, ParameterError

GATES_1Q = ("H", "X", "Z", "I", "RESET", "MEASURE")
GATES_2Q = ("CNOT", "CZ")
NOISE_KINDS = ("DEPOL1", "DEPOL2", "XERR")
TEXT_NAMES = {"NOISE_DEPOL1": "DEPOL1", "NOISE_DEPOL2": "DEPOL2", "NOISE_XFLIP": "XERR"}

STATES = ("0", "1", "+", "-")
STATE_BASIS = {"0": "Z", "1": "Z", "+": "X", "-": "X"}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Instruction:
    kind: str
    targets: Tuple[int, ...] = ()
    p: Optional[float] = None

    def __post_init__(self):
        k = self.kind
        if k == "TICK":
            want = 0
        elif k in GATES_2Q or k == "DEPOL2":
            want = 2
        elif k in GATES_1Q or k in ("DEPOL1", "XERR"):
            want = 1
        else:
            raise CircuitError(f"unknown instruction kind {k!r}")
        if len(self.targets) != want:
            raise CircuitError(f"{k} takes {want} targets, got {self.targets}")
        if want == 2 and self.targets[0] == self.targets[1]:
            raise CircuitError(f"{k} targets must be distinct")
        if k in NOISE_KINDS:
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise CircuitError(f"{k} needs a probability in [0, 1], got {self.p}")
        elif self.p is not None:
            raise CircuitError(f"{k} takes no probability")

    @property
    def is_noise(self) -> bool:
        return self.kind in NOISE_KINDS

    def to_text(self) -> str:
        if self.kind == "TICK":
            return "TICK"
        qs = " ".join(str(q) for q in self.targets)
        if self.is_noise:
            return f"{self.kind}({self.p!r}) {qs}"
        return f"{self.kind} {qs}"


@dataclass(frozen=True)
class CircuitProgram:
    qubit_count: int
    instructions: Tuple[Instruction, ...]
    measurement_index: Dict[Tuple[int, int], int] = field(init=False, compare=False)
    measure_positions: Tuple[int, ...] = field(init=False, compare=False)
    step_schedule: Tuple[Tuple[int, ...], ...] = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        index: Dict[Tuple[int, int], int] = {}
        seen: Dict[int, int] = {}
        positions = []
        layers, current = [], []
        for pos, ins in enumerate(self.instructions):
            for q in ins.targets:
                if not 0 <= q < self.qubit_count:
                    raise CircuitError(f"qubit {q} out of range at instruction {pos}")
            if ins.kind == "MEASURE":
                q = ins.targets[0]
                occ = seen.get(q, 0)
                seen[q] = occ + 1
                index[(q, occ)] = len(positions)
                positions.append(pos)
            if ins.kind == "TICK":
                layers.append(tuple(current))
                current = []
            else:
                current.append(pos)
        if current:
            layers.append(tuple(current))
        object.__setattr__(self, "measurement_index", index)
        object.__setattr__(self, "measure_positions", tuple(positions))
        object.__setattr__(self, "step_schedule", tuple(layers))

    @property
    def num_measurements(self) -> int:
        return len(self.measure_positions)

    def measurement_qubits(self) -> List[int]:
        return [self.instructions[p].targets[0] for p in self.measure_positions]

    def ideal(self) -> "CircuitProgram":
        """The same program with every noise instruction removed."""
        return CircuitProgram(self.qubit_count, [i for i in self.instructions if not i.is_noise])

    def count(self, kind: str) -> int:
        return sum(1 for i in self.instructions if i.kind == kind)

    def to_text(self) -> str:
        lines = [f"# qubits {self.qubit_count}"]
        lines += [ins.to_text() for ins in self.instructions]
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def __add__(self, other: "CircuitProgram") -> "CircuitProgram":
        return CircuitProgram(max(self.qubit_count, other.qubit_count),
                              self.instructions + other.instructions)


_LINE = re.compile(r"^([A-Z0-9]+)(?:\(([^)]*)\))?((?:\s+\d+)*)\s*$")


def parse_circuit(text: str) -> CircuitProgram:
    """Inverse of :meth:`CircuitProgram.to_text`."""
    qubits = None
    instructions = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = re.match(r"#\s*qubits\s+(\d+)", line)
            if m:
                qubits = int(m.group(1))
            continue
        m = _LINE.match(line)
        if not m:
            raise CircuitError(f"line {lineno}: cannot parse {raw!r}")
        kind, p, qs = m.group(1), m.group(2), m.group(3)
        try:
            instructions.append(Instruction(kind, tuple(int(q) for q in qs.split()),
                                            float(p) if p is not None else None))
        except CircuitError as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
    if qubits is None:
        qubits = 1 + max((q for i in instructions for q in i.targets), default=-1)
    return CircuitProgram(qubits, instructions)


def validate_schedule(prog: CircuitProgram) -> None:
    """Raise if some layer uses a qubit in two gates (measure-then-reset excepted)."""
    for n, layer in enumerate(prog.step_schedule):
        last: Dict[int, str] = {}
        for pos in layer:
            ins = prog.instructions[pos]
            if ins.is_noise:
                continue
            for q in ins.targets:
                prev = last.get(q)
                if prev is not None and not (prev == "MEASURE" and ins.kind == "RESET"):
                    raise CircuitError(f"qubit {q} used twice in layer {n}")
                last[q] = ins.kind


class _Builder:
    def __init__(self, n: int):
        self.n = n
        self.ins: List[Instruction] = []

    def layer(self, gates: Iterable[Tuple[str, Sequence[int]]]):
        for kind, qs in gates:
            self.ins.append(Instruction(kind, tuple(qs)))
        self.ins.append(Instruction("TICK"))

    def program(self) -> CircuitProgram:
        return CircuitProgram(self.n, self.ins)


def _round_layers(layout: CodeLayout) -> List[List[Tuple[str, Tuple[int, ...]]]]:
    f = layout.flag_count
    D = layout.data_qubits
    S = layout.syndrome_qubits
    ns = layout.n_synd
    z_basis = layout.basis == "Z"

    def couple(data: int, flag: int):
        return ("CZ", (data, flag)) if z_basis else ("CNOT", (flag, data))

    hs = [("H", (S[i],)) for i in range(ns)]
    ancillas = sorted(q for i in range(ns) for q in layout.patch(i))
    mr = [("MEASURE", (q,)) for q in ancillas] + [("RESET", (q,)) for q in ancillas]

    if f == 0:
        if z_basis:
            return [
                [("CNOT", (D[i], S[i])) for i in range(ns)],
                [("CNOT", (D[i + 1], S[i])) for i in range(ns)],
                mr,
            ]
        return [
            hs,
            [("CNOT", (S[i], D[i])) for i in range(ns)],
            [("CNOT", (S[i], D[i + 1])) for i in range(ns)],
            hs,
            mr,
        ]

    L, R = layout.left_flags, layout.right_flags
    if f == 1:
        return [
            hs,
            [("CNOT", (S[i], L[i][0])) for i in range(ns)],
            [g for i in range(ns) for g in (("CNOT", (S[i], R[i][0])), couple(D[i], L[i][0]))],
            [g for i in range(ns) for g in (couple(D[i + 1], R[i][0]), ("CNOT", (S[i], L[i][0])))],
            [("CNOT", (S[i], R[i][0])) for i in range(ns)],
            hs,
            mr,
        ]
    # f == 2: L[i] = (Fb, Fa) closest first, R[i] = (Fc, Fd)
    return [
        hs,
        [("CNOT", (S[i], L[i][0])) for i in range(ns)],
        [g for i in range(ns) for g in (("CNOT", (S[i], R[i][0])), ("CNOT", (L[i][0], L[i][1])))],
        [g for i in range(ns) for g in (("CNOT", (R[i][0], R[i][1])), couple(D[i], L[i][1]))],
        [g for i in range(ns) for g in (couple(D[i + 1], R[i][1]), ("CNOT", (L[i][0], L[i][1])))],
        [g for i in range(ns) for g in (("CNOT", (R[i][0], R[i][1])), ("CNOT", (S[i], L[i][0])))],
        [("CNOT", (S[i], R[i][0])) for i in range(ns)],
        hs,
        mr,
    ]


def build_extraction_round(layout: CodeLayout) -> CircuitProgram:
    """One syndrome-extraction round ending with measure-and-reset of every ancilla."""
    b = _Builder(layout.n_qubits)
    for gates in _round_layers(layout):
        b.layer(gates)
    return b.program()


def logical_value(state: str) -> int:
    """Bit value every data qubit reads out for a noiseless prepared ``state``."""
    return 1 if state in ("1", "-") else 0


def normalize_state(state: str) -> str:
    s = str(state).replace("_L", "").replace("|", "").replace(">", "").strip()
    s = {"plus": "+", "minus": "-", "p": "+", "m": "-"}.get(s, s)
    if s not in STATES:
        raise ParameterError(f"unknown logical state {state!r}")
    return s


def build_memory_experiment(layout: CodeLayout, rounds: int, initial_state: str) -> CircuitProgram:
    """Reset, prepare, run ``rounds`` extraction rounds, then read out the data."""
    state = normalize_state(initial_state)
    if not isinstance(rounds, int) or rounds < 1:
        raise ParameterError(f"rounds must be >= 1, got {rounds!r}")
    if STATE_BASIS[state] != layout.basis:
        raise ParameterError(
            f"state {state}_L is not a {layout.basis}-basis state; use the matching layout basis")
    D = layout.data_qubits
    b = _Builder(layout.n_qubits)
    b.layer(("RESET", (q,)) for q in range(layout.n_qubits))
    if state in ("1", "-"):
        b.layer(("X", (q,)) for q in D)
    if layout.basis == "X":
        b.layer(("H", (q,)) for q in D)
    rnd = _round_layers(layout)
    for _ in range(rounds):
        for gates in rnd:
            b.layer(gates)
    if layout.basis == "X":
        b.layer(("H", (q,)) for q in D)
    b.layer(("MEASURE", (q,)) for q in D)
    return b.program()


def data_measurement_slots(layout: CodeLayout, rounds: int) -> List[int]:
    """Shot-bit positions of the final data readout, in data order."""
    base = rounds * (layout.n_synd + layout.n_flag)
    return [base + i for i in range(layout.distance)]


def round_measurement_slots(layout: CodeLayout, rounds: int) -> List[Dict[int, int]]:
    """Per round, a map chain-qubit -> shot-bit position for every ancilla readout."""
    per_round = layout.n_synd + layout.n_flag
    ancillas = sorted(q for s in range(layout.n_synd) for q in layout.patch(s))
    return [{q: r * per_round + k for k, q in enumerate(ancillas)} for r in range(rounds)]
