"""Calibration ingestion and circuit-level noise placement.

Channel placement around the ideal gates:

* CNOT / CZ  -> gate, then DEPOL2(composed ECR + four sqrt(X) rate)
* H          -> gate, then DEPOL1(sx_error)
* X          -> gate, then DEPOL1(x_error)
* RESET      -> gate, then XERR(reset_error)
* MEASURE    -> XERR(readout_error), then gate
* idle qubit in a layer -> DEPOL1(idle_error) at the end of the layer

Channels are emitted even at rate zero so that the set of error locations
depends only on the circuit, never on the calibration values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import jsonschema

from .circuit import CircuitProgram, Instruction


class CalibrationError(ValueError):
    """Calibration file is malformed or lacks a required qubit/pair."""


class MappingError(ValueError):
    pass


_PROB = {"type": "number", "minimum": 0, "exclusiveMaximum": 1}
CALIBRATION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["qubits", "pairs"],
    "properties": {
        "qubits": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "sx_error", "x_error", "readout_error", "idle_error"],
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "sx_error": _PROB,
                    "x_error": _PROB,
                    "readout_error": _PROB,
                    "reset_error": _PROB,
                    "idle_error": _PROB,
                },
            },
        },
        "pairs": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["a", "b", "ecr_error"],
                "properties": {
                    "a": {"type": "integer", "minimum": 0},
                    "b": {"type": "integer", "minimum": 0},
                    "ecr_error": _PROB,
                },
            },
        },
        "timings": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                k: {"type": "number", "minimum": 0}
                for k in ("gate_1q_ns", "gate_2q_ns", "readout_ns", "t1_us", "t2_us")
            },
        },
    },
}


@dataclass(frozen=True)
class QubitCalibration:
    sx_error: float
    x_error: float
    readout_error: float
    reset_error: float
    idle_error: float


@dataclass(frozen=True)
class CalibrationModel:
    qubits: Mapping[int, QubitCalibration]
    pairs: Mapping[FrozenSet[int], float]
    timings: Mapping[str, float] = field(default_factory=dict)

    def qubit(self, q: int) -> QubitCalibration:
        try:
            return self.qubits[q]
        except KeyError:
            raise CalibrationError(f"no calibration for qubit {q}") from None

    def ecr(self, a: int, b: int) -> float:
        try:
            return self.pairs[frozenset((a, b))]
        except KeyError:
            raise CalibrationError(f"no calibration for pair ({a}, {b})") from None

    def scaled(self, factor: float) -> "CalibrationModel":
        """Every error probability multiplied by ``factor`` (clipped below 1)."""
        def sc(p):
            return min(p * factor, 0.999999)
        qs = {q: QubitCalibration(*(sc(v) for v in (c.sx_error, c.x_error, c.readout_error,
                                                     c.reset_error, c.idle_error)))
              for q, c in self.qubits.items()}
        return CalibrationModel(qs, {k: sc(v) for k, v in self.pairs.items()}, dict(self.timings))

    def to_dict(self) -> dict:
        return {
            "qubits": [
                {"id": q, "sx_error": c.sx_error, "x_error": c.x_error,
                 "readout_error": c.readout_error, "reset_error": c.reset_error,
                 "idle_error": c.idle_error}
                for q, c in sorted(self.qubits.items())
            ],
            "pairs": [{"a": min(k), "b": max(k), "ecr_error": v}
                      for k, v in sorted(self.pairs.items(), key=lambda kv: sorted(kv[0]))],
            "timings": dict(self.timings),
        }

    @classmethod
    def uniform(cls, qubits: Iterable[int], pairs: Iterable[Tuple[int, int]], *, sx=0.0, x=0.0,
                readout=0.0, reset=None, idle=0.0, ecr=0.0) -> "CalibrationModel":
        reset = readout if reset is None else reset
        qc = QubitCalibration(sx, x, readout, reset, idle)
        return cls({int(q): qc for q in qubits}, {frozenset(p): ecr for p in pairs})


@dataclass(frozen=True)
class EffectiveGateRates:
    cnot_depol2: float
    cz_depol2: float
    h_depol1: float
    x_depol1: float
    reset_xflip: float
    measure_xflip: float
    idle_depol1: float


def calibration_from_dict(data) -> CalibrationModel:
    if not data:
        raise CalibrationError("calibration is empty")
    validator = jsonschema.Draft7Validator(CALIBRATION_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise CalibrationError(f"{path}: {err.message}")
    qubits: Dict[int, QubitCalibration] = {}
    for entry in data["qubits"]:
        q = entry["id"]
        if q in qubits:
            raise CalibrationError(f"qubits/{q}: duplicate id")
        qubits[q] = QubitCalibration(
            entry["sx_error"], entry["x_error"], entry["readout_error"],
            entry.get("reset_error", entry["readout_error"]), entry["idle_error"])
    pairs: Dict[FrozenSet[int], float] = {}
    for n, entry in enumerate(data["pairs"]):
        key = frozenset((entry["a"], entry["b"]))
        if len(key) != 2:
            raise CalibrationError(f"pairs/{n}: a and b must differ")
        if key in pairs and pairs[key] != entry["ecr_error"]:
            raise CalibrationError(f"pairs/{n}: conflicting duplicate pair {sorted(key)}")
        pairs[key] = entry["ecr_error"]
    return CalibrationModel(qubits, pairs, dict(data.get("timings", {})))


def load_calibration(path: Union[str, Path]) -> CalibrationModel:
    text = Path(path).read_text()
    if not text.strip():
        raise CalibrationError(f"{path}: file is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CalibrationError(f"{path}: invalid JSON ({exc})") from None
    return calibration_from_dict(data)


def bundled_calibration_path(name: str = "kyoto_avg.json") -> Path:
    return Path(str(resources.files("flagrep") / "data" / name))


def load_bundled(name: str = "kyoto_avg.json") -> CalibrationModel:
    """Averaged ibm_kyoto-like profile on the 127-qubit Eagle lattice.

    T1 = 217.69 us and T2 = 140.21 us are carried for reference only; they do
    not enter the noise model.
    """
    return load_calibration(bundled_calibration_path(name))


def compose_two_qubit_rate(calib: CalibrationModel, a: int, b: int) -> float:
    """Merge the ECR error and four sqrt(X) errors (two per qubit) into one rate.

    R_Z is virtual and error free.
    """
    keep = 1.0 - calib.ecr(a, b)
    for q in (a, b):
        keep *= (1.0 - calib.qubit(q).sx_error) ** 2
    return 1.0 - keep


def effective_rates(calib: CalibrationModel, qubit: int, pair: Optional[Tuple[int, int]] = None
                    ) -> EffectiveGateRates:
    c = calib.qubit(qubit)
    two = compose_two_qubit_rate(calib, *pair) if pair is not None else 0.0
    return EffectiveGateRates(two, two, c.sx_error, c.x_error, c.reset_error, c.readout_error,
                              c.idle_error)


def _as_mapping(mapping, n: int) -> Dict[int, int]:
    if mapping is None:
        return {q: q for q in range(n)}
    if isinstance(mapping, Mapping):
        out = {int(k): int(v) for k, v in mapping.items()}
    else:
        out = dict(enumerate(int(v) for v in mapping))
    missing = [q for q in range(n) if q not in out]
    if missing:
        raise MappingError(f"chain qubits {missing} have no physical assignment")
    return out


def attach_noise(circ: CircuitProgram, calib: CalibrationModel,
                 mapping: Union[None, Mapping[int, int], Sequence[int]] = None) -> CircuitProgram:
    """Insert calibrated noise channels around the ideal gates of ``circ``."""
    phys = _as_mapping(mapping, circ.qubit_count)
    two_cache: Dict[Tuple[int, int], float] = {}

    def two_rate(a, b):
        key = (phys[a], phys[b])
        if key not in two_cache:
            two_cache[key] = compose_two_qubit_rate(calib, *key)
        return two_cache[key]

    out: List[Instruction] = []
    busy: set = set()
    for ins in circ.instructions:
        k = ins.kind
        if k == "TICK":
            for q in range(circ.qubit_count):
                if q not in busy:
                    out.append(Instruction("DEPOL1", (q,), calib.qubit(phys[q]).idle_error))
            out.append(ins)
            busy = set()
            continue
        if ins.is_noise:
            out.append(ins)
            continue
        busy.update(ins.targets)
        if k == "MEASURE":
            q = ins.targets[0]
            out.append(Instruction("XERR", (q,), calib.qubit(phys[q]).readout_error))
            out.append(ins)
        elif k == "RESET":
            q = ins.targets[0]
            out.append(ins)
            out.append(Instruction("XERR", (q,), calib.qubit(phys[q]).reset_error))
        elif k in ("CNOT", "CZ"):
            out.append(ins)
            out.append(Instruction("DEPOL2", ins.targets, two_rate(*ins.targets)))
        elif k == "H":
            out.append(ins)
            out.append(Instruction("DEPOL1", ins.targets, calib.qubit(phys[ins.targets[0]]).sx_error))
        elif k == "X":
            out.append(ins)
            out.append(Instruction("DEPOL1", ins.targets, calib.qubit(phys[ins.targets[0]]).x_error))
        elif k == "I":
            out.append(ins)
            out.append(Instruction("DEPOL1", ins.targets, calib.qubit(phys[ins.targets[0]]).idle_error))
        else:
            out.append(ins)
    return CircuitProgram(circ.qubit_count, out)
