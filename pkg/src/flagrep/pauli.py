"""Sign-free Pauli algebra and repetition-code layouts with flag qubits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

ROLE_DATA = "data"
ROLE_SYNDROME = "syndrome"
ROLE_FLAG = "flag"


class ParameterError(ValueError):
    """Raised for invalid code or experiment parameters."""


@dataclass(frozen=True)
class PauliString:
    """Pauli operator on ``n`` qubits stored as X and Z bitmasks (bit q = qubit q).

    Phases are dropped: only commutation structure matters here.
    """

    n: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        limit = 1 << self.n
        if self.x_mask < 0 or self.z_mask < 0 or self.x_mask >= limit or self.z_mask >= limit:
            raise ValueError(f"masks exceed {self.n} qubits")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Build from a dense label such as ``"ZZI"`` (character q is qubit q)."""
        x = z = 0
        for q, ch in enumerate(label.upper()):
            if ch in "XY":
                x |= 1 << q
            if ch in "ZY":
                z |= 1 << q
            if ch not in "IXYZ_":
                raise ValueError(f"bad Pauli character {ch!r}")
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliString":
        kind = kind.upper()
        bit = 1 << qubit
        return cls(n, bit if kind in "XY" else 0, bit if kind in "ZY" else 0)

    @classmethod
    def product_on(cls, n: int, qubits, kind: str) -> "PauliString":
        x = z = 0
        for q in qubits:
            if kind in "XY":
                x |= 1 << q
            if kind in "ZY":
                z |= 1 << q
        return cls(n, x, z)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        _check_len(self, other)
        return PauliString(self.n, self.x_mask ^ other.x_mask, self.z_mask ^ other.z_mask)

    def label(self) -> str:
        out = []
        for q in range(self.n):
            x = (self.x_mask >> q) & 1
            z = (self.z_mask >> q) & 1
            out.append("IXZY"[x + 2 * z])
        return "".join(out)

    def support(self) -> Tuple[int, ...]:
        m = self.x_mask | self.z_mask
        return tuple(q for q in range(self.n) if (m >> q) & 1)


def _check_len(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise ValueError(f"Pauli length mismatch: {a.n} vs {b.n}")


def anticommutes(a: PauliString, b: PauliString) -> bool:
    """True iff the symplectic product of ``a`` and ``b`` is 1."""
    _check_len(a, b)
    overlap = (a.x_mask & b.z_mask) ^ (a.z_mask & b.x_mask)
    return bin(overlap).count("1") % 2 == 1


@dataclass(frozen=True)
class CodeLayout:
    """Qubit roles along the 1-D chain of a ``[[d,1,d]]_f`` repetition code.

    The chain reads ``D (F)^f S (F)^f D (F)^f S ... D``. Chain indices are
    logical; mapping onto hardware happens in :mod:`flagrep.chain`.
    """

    distance: int
    flag_count: int
    basis: str
    qubit_roles: Tuple[str, ...] = field(init=False)
    data_qubits: Tuple[int, ...] = field(init=False)
    syndrome_qubits: Tuple[int, ...] = field(init=False)
    # left flags ordered outward from the syndrome (closest first), same for right
    left_flags: Tuple[Tuple[int, ...], ...] = field(init=False)
    right_flags: Tuple[Tuple[int, ...], ...] = field(init=False)
    stabilizers: Tuple[PauliString, ...] = field(init=False)

    def __post_init__(self):
        d, f = self.distance, self.flag_count
        if not isinstance(d, int) or d < 3:
            raise ParameterError(f"distance must be an integer >= 3, got {d!r}")
        if f not in (0, 1, 2):
            raise ParameterError(f"flag_count must be 0, 1 or 2, got {f!r}")
        if self.basis not in ("Z", "X"):
            raise ParameterError(f"basis must be 'Z' or 'X', got {self.basis!r}")
        roles, data, synd, lf, rf = [], [], [], [], []
        for i in range(d):
            data.append(len(roles))
            roles.append(ROLE_DATA)
            if i == d - 1:
                break
            left = []
            for _ in range(f):
                left.append(len(roles))
                roles.append(ROLE_FLAG)
            synd.append(len(roles))
            roles.append(ROLE_SYNDROME)
            right = []
            for _ in range(f):
                right.append(len(roles))
                roles.append(ROLE_FLAG)
            lf.append(tuple(reversed(left)))
            rf.append(tuple(right))
        n = len(roles)
        stabs = tuple(
            PauliString.product_on(n, (data[i], data[i + 1]), self.basis) for i in range(d - 1)
        )
        object.__setattr__(self, "qubit_roles", tuple(roles))
        object.__setattr__(self, "data_qubits", tuple(data))
        object.__setattr__(self, "syndrome_qubits", tuple(synd))
        object.__setattr__(self, "left_flags", tuple(lf))
        object.__setattr__(self, "right_flags", tuple(rf))
        object.__setattr__(self, "stabilizers", stabs)

    @property
    def n_qubits(self) -> int:
        return len(self.qubit_roles)

    @property
    def n_synd(self) -> int:
        return self.distance - 1

    @property
    def n_flag(self) -> int:
        return 2 * self.flag_count * (self.distance - 1)

    def patch(self, s: int) -> Tuple[int, ...]:
        """Chain qubits measured for syndrome ``s`` (0-based): the syndrome and its flags."""
        return (self.syndrome_qubits[s],) + self.left_flags[s] + self.right_flags[s]

    @property
    def patch_size(self) -> int:
        return 1 + 2 * self.flag_count

    @property
    def label(self) -> str:
        return f"[[{self.distance},1,{self.distance}]]_f={self.flag_count}"


def build_layout(d: int, f: int, basis: str = "Z") -> CodeLayout:
    return CodeLayout(d, f, basis)


def logical_operator(layout: CodeLayout) -> PauliString:
    """Product of the basis Pauli over every data qubit."""
    return PauliString.product_on(layout.n_qubits, layout.data_qubits, layout.basis)
