"""Circuit intermediate representation.

Instructions are immutable records; a :class:`Circuit` is an ordered tuple of
them plus the qubit count and the directives pulled out of the program
(bit assignment, depolarizing channel).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import ceil, gcd, log2
from typing import Optional

MAX_QUBITS = 63


class Opcode(enum.Enum):
    I = "I"
    H = "H"
    X = "X"
    Y = "Y"
    Z = "Z"
    S = "S"
    SDAG = "S+"
    T = "T"
    TDAG = "T+"
    U1 = "U1"
    U2 = "U2"
    U3 = "U3"
    PLUS_X = "+X"
    MINUS_X = "-X"
    PLUS_Y = "+Y"
    MINUS_Y = "-Y"
    R = "R"
    RDAG = "R-"
    CNOT = "CNOT"
    CPHASE = "U"
    CPHASE_DAG = "U-"
    TOFFOLI = "TOFFOLI"
    BEGIN_MEASUREMENT = "BEGIN MEASUREMENT"
    GENERATE_EVENTS = "GENERATE EVENTS"
    M = "M"
    QUBITS = "QUBITS"
    BIT_ASSIGNMENT = "BIT ASSIGNMENT"
    SHORBOX = "SHORBOX"
    CLEAR = "CLEAR"
    SET = "SET"
    DEPOLARIZING_CHANNEL = "DEPOLARIZING CHANNEL"
    EXIT = "EXIT"

    @property
    def is_gate(self) -> bool:
        return self in GATE_OPCODES

    @property
    def arity(self) -> int:
        """Number of qubit operands (0 for directives)."""
        return _ARITY.get(self, 0)


SINGLE_QUBIT_GATES = frozenset({
    Opcode.I, Opcode.H, Opcode.X, Opcode.Y, Opcode.Z, Opcode.S, Opcode.SDAG,
    Opcode.T, Opcode.TDAG, Opcode.U1, Opcode.U2, Opcode.U3, Opcode.PLUS_X,
    Opcode.MINUS_X, Opcode.PLUS_Y, Opcode.MINUS_Y, Opcode.R, Opcode.RDAG,
})
TWO_QUBIT_GATES = frozenset({Opcode.CNOT, Opcode.CPHASE, Opcode.CPHASE_DAG})
GATE_OPCODES = SINGLE_QUBIT_GATES | TWO_QUBIT_GATES | {Opcode.TOFFOLI}

# gates that only move amplitudes around
PERMUTATION_GATES = frozenset({Opcode.X, Opcode.CNOT, Opcode.TOFFOLI})
# gates that are diagonal in the computational basis
PHASE_GATES = frozenset({
    Opcode.I, Opcode.Z, Opcode.S, Opcode.SDAG, Opcode.T, Opcode.TDAG,
    Opcode.U1, Opcode.R, Opcode.RDAG, Opcode.CPHASE, Opcode.CPHASE_DAG,
})

_ARITY = {op: 1 for op in SINGLE_QUBIT_GATES}
_ARITY.update({op: 2 for op in TWO_QUBIT_GATES})
_ARITY.update({Opcode.TOFFOLI: 3, Opcode.M: 1, Opcode.CLEAR: 1, Opcode.SET: 1})

# number of angle arguments carried by each parametrised gate
ANGLE_COUNT = {Opcode.U1: 1, Opcode.U2: 2, Opcode.U3: 3}


@dataclass(frozen=True)
class Instruction:
    """One statement of a program.

    ``angles`` holds radians (theta, phi, lambda order for U3); ``ints`` holds
    integer arguments such as ``k`` for R/U, ``(events, seed)`` for GENERATE
    EVENTS or ``(n_x, G, y)`` for SHORBOX.  ``line`` is the source line and
    does not take part in equality.
    """

    opcode: Opcode
    qubits: tuple[int, ...] = ()
    angles: tuple[float, ...] = ()
    ints: tuple[int, ...] = ()
    line: Optional[int] = field(default=None, compare=False)

    def __str__(self) -> str:
        from .parser import format_instruction

        return format_instruction(self)


@dataclass(frozen=True)
class BitPermutation:
    """Maps logical qubit ``q`` to physical bit position ``perm[q]``."""

    perm: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"not a permutation of 0..{len(self.perm) - 1}: {list(self.perm)}")

    @classmethod
    def identity(cls, n: int) -> "BitPermutation":
        return cls(tuple(range(n)))

    @property
    def is_identity(self) -> bool:
        return all(p == q for q, p in enumerate(self.perm))

    def inverse(self) -> "BitPermutation":
        inv = [0] * len(self.perm)
        for q, p in enumerate(self.perm):
            inv[p] = q
        return BitPermutation(tuple(inv))

    def compose(self, other: "BitPermutation") -> "BitPermutation":
        """``(self ∘ other)[q] = self[other[q]]``."""
        return BitPermutation(tuple(self.perm[p] for p in other.perm))

    def __len__(self):
        return len(self.perm)


@dataclass(frozen=True)
class NoiseConfig:
    p_x: float = 0.0
    p_y: float = 0.0
    p_z: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("p_x", "p_y", "p_z"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name}={p} outside [0, 1]")
        if self.p_x + self.p_y + self.p_z > 1.0 + 1e-12:
            raise ValueError("p_x + p_y + p_z exceeds 1")
        if self.seed >= 2**31 - 1:
            raise ValueError("depolarizing channel seed must be smaller than 2^31-1")

    @property
    def active(self) -> bool:
        return self.p_x + self.p_y + self.p_z > 0.0


@dataclass(frozen=True)
class ShorParams:
    """Register split and arithmetic parameters of SHORBOX."""

    n_x: int
    G: int
    y: int

    def f_width(self) -> int:
        """Qubits needed to hold values of ``y^x mod G``."""
        return max(1, ceil(log2(self.G))) if self.G > 1 else 1

    def check(self, n_qubits: int) -> list[str]:
        problems = []
        if not 0 < self.n_x < n_qubits:
            problems.append(f"x-register size {self.n_x} must satisfy 0 < n_x < N={n_qubits}")
        if self.G < 2:
            problems.append(f"G={self.G} must be at least 2")
        elif self.G >= 2**32:
            problems.append(f"G={self.G} must be below 2^32")
        if not 1 <= self.y < self.G:
            problems.append(f"y={self.y} must satisfy 1 <= y < G")
        elif gcd(self.y, self.G) != 1:
            problems.append(f"y={self.y} is not coprime to G={self.G}")
        f_qubits = n_qubits - self.n_x
        if self.G >= 2 and 0 < self.n_x < n_qubits and f_qubits < self.f_width():
            problems.append(
                f"f-register ({f_qubits} qubits) < ceil(log2 {self.G})={self.f_width()}")
        return problems


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    instructions: tuple[Instruction, ...]

    def __post_init__(self):
        if not 2 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"QUBITS must be in 2..{MAX_QUBITS}, got {self.n_qubits}")

    @property
    def bit_assignment(self) -> BitPermutation:
        for ins in self.instructions:
            if ins.opcode is Opcode.BIT_ASSIGNMENT:
                return BitPermutation(ins.ints)
        return BitPermutation.identity(self.n_qubits)

    @property
    def noise(self) -> Optional[NoiseConfig]:
        for ins in self.instructions:
            if ins.opcode is Opcode.DEPOLARIZING_CHANNEL:
                px, py, pz = ins.angles
                return NoiseConfig(px, py, pz, ins.ints[0])
        return None

    def gates(self) -> list[Instruction]:
        return [ins for ins in self.instructions if ins.opcode.is_gate]

    def __len__(self):
        return len(self.instructions)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot join circuits of different width")
        return Circuit(self.n_qubits, self.instructions + other.instructions)
