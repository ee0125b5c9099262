"""State-vector engine with 2-byte amplitudes.

Each amplitude ``z = r e^{i theta}`` is stored as two signed bytes.  The phase
byte is ``theta`` in steps of pi/128.  The magnitude byte reserves -128 for
``r = 0`` and 127 for ``r = 1`` and spreads the remaining 253 codes linearly
over ``[r0, r1]``, the smallest and largest magnitude strictly between 0 and
1 present in the state.  The bounds move with the state: a gate whose output
magnitudes leave the current interval by more than one quantisation step
re-encodes the state under new bounds.

Gates are applied in one of four ways: permutations (X, CNOT, TOFFOLI) move
codes, Y moves codes and shifts phases, diagonal gates only touch the phase
byte, and everything else is decoded, multiplied in full precision and
re-encoded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..circuit import (PHASE_GATES, Circuit, Instruction, Opcode, ShorParams, controlled_part,
                       diagonal_phase)
from ..result import MeasurementRecord
from ..rng import Rng
from ..sampling import tree_sample
from . import _enc_kernels as E
from .base import Backend, Interpreter, check_memory

BYTES_PER_AMPLITUDE = 2
SENTINEL = (0.5, 0.5)
SAMPLE_BLOCK_BITS = 8


# -- scalar codec --------------------------------------------------------------------

def encode(z: complex, r0: float, r1: float) -> tuple[int, int]:
    r = abs(z)
    if r > 1.0 + 1e-9:
        raise ValueError(f"|z| = {r} exceeds 1")
    if r0 > r1:
        raise ValueError("r0 must not exceed r1")
    b0 = E.encode_mag(r, r0, r1)
    b1 = 0 if b0 == E.ZERO else E.encode_phase(z.real, z.imag)
    return int(b0), int(b1)


def decode(code: tuple[int, int], r0: float, r1: float) -> complex:
    b0, b1 = code
    return complex(Tables(r0, r1).decode(b0, b1))


def _phase_tables():
    cos = np.cos(np.pi * np.arange(-128, 128) / 128)
    sin = np.sin(np.pi * np.arange(-128, 128) / 128)
    # exact quarter turns keep Y and Z moves free of rounding
    for b, c, s in ((-128, -1.0, 0.0), (-64, 0.0, -1.0), (0, 1.0, 0.0), (64, 0.0, 1.0)):
        cos[b + 128], sin[b + 128] = c, s
    return cos, sin


_COS, _SIN = _phase_tables()


class Tables:
    """Lookup tables from codes to magnitudes and phase factors."""

    def __init__(self, r0: float, r1: float):
        self.r0, self.r1 = r0, r1
        b = np.arange(-128, 128, dtype=np.float64)
        if r1 == r0:
            mag = np.full(256, r0)
        else:
            mag = (b + 127.0) * (r1 - r0) / 253.0 + r0
        mag[0], mag[255] = 0.0, 1.0
        self.mag = mag
        self.cos = _COS
        self.sin = _SIN

    def decode(self, b0, b1):
        r = self.mag[np.asarray(b0, dtype=np.int64) + 128]
        p = np.asarray(b1, dtype=np.int64) + 128
        return r * (self.cos[p] + 1j * self.sin[p])


def encode_array(z: np.ndarray, r0: float, r1: float) -> np.ndarray:
    codes = np.empty((z.size, 2), dtype=np.int8)
    for i, v in enumerate(np.asarray(z, dtype=complex).ravel()):
        codes[i] = encode(complex(v), r0, r1)
    return codes


def decode_array(codes: np.ndarray, r0: float, r1: float) -> np.ndarray:
    return Tables(r0, r1).decode(codes[:, 0], codes[:, 1])


def intermediate_bounds(z: np.ndarray) -> tuple[float, float]:
    r = np.abs(np.asarray(z))
    mid = r[(r >= E.EPS0) & (np.abs(r - 1.0) >= E.EPS1)]
    if mid.size == 0:
        return SENTINEL
    return float(mid.min()), float(mid.max())


# -- gate plans (shared with the distributed engine) ----------------------------------

@dataclass(frozen=True)
class GatePlan:
    """How one gate touches a code array whose bit positions are ``bits``."""

    kind: str  # "swap", "y", "phase", "general"
    sorted_bits: np.ndarray
    ctrl_mask: int
    tbit: int
    block: np.ndarray | None = None
    phase_mask: int = 0
    delta: float = 0.0

    @property
    def controlled(self) -> bool:
        return self.ctrl_mask != 0


def plan_gate(instr: Instruction, bits: tuple[int, ...]) -> GatePlan:
    """``bits[i]`` is the physical position of ``instr.qubits[i]``."""
    op = instr.opcode
    controls, target, block = controlled_part(instr)
    ctrl_mask = 0
    for b in bits[:-1]:
        ctrl_mask |= 1 << b
    sorted_bits = np.array(sorted(bits), dtype=np.int64)
    tbit = 1 << bits[-1]
    if op in (Opcode.X, Opcode.CNOT, Opcode.TOFFOLI):
        return GatePlan("swap", sorted_bits, ctrl_mask, tbit)
    if op is Opcode.Y:
        return GatePlan("y", sorted_bits, 0, tbit)
    if op in PHASE_GATES:
        mask = ctrl_mask | tbit
        return GatePlan("phase", sorted_bits, ctrl_mask, tbit, phase_mask=mask,
                        delta=128.0 * diagonal_phase(instr) / math.pi)
    return GatePlan("general", sorted_bits, ctrl_mask, tbit,
                    block=np.ascontiguousarray(block, dtype=np.complex128))


def _groups(codes: np.ndarray, plan: GatePlan) -> int:
    return codes.shape[0] >> plan.sorted_bits.size


def plan_scan(codes: np.ndarray, plan: GatePlan, tables: Tables):
    """(lo, hi) of the new intermediate magnitudes and (lo, hi) of untouched ones."""
    lo, hi = E.gate_scan(codes, plan.sorted_bits, plan.ctrl_mask, plan.tbit, plan.block,
                         tables.mag, tables.cos, tables.sin, 0, _groups(codes, plan))
    if plan.controlled:
        ulo, uhi = E.untouched_range(codes, plan.ctrl_mask, tables.mag, 0, codes.shape[0])
    else:
        ulo, uhi = np.inf, -np.inf
    return (lo, hi), (ulo, uhi)


def choose_bounds(r0: float, r1: float, out: tuple[float, float],
                  untouched: tuple[float, float], controlled: bool) -> tuple[float, float]:
    """Bounds to encode a general gate's result with.

    A gate that rewrites every amplitude gets the exact range of its outputs
    for free.  A controlled gate keeps the old bounds unless an output leaves
    them by more than one step, since rebounding it costs a pass over the
    amplitudes it does not touch.
    """
    lo, hi = out
    if not controlled:
        return (lo, hi) if lo <= hi else SENTINEL
    if lo > hi:
        return r0, r1
    step = (r1 - r0) / 253.0
    if lo >= r0 - step and hi <= r1 + step:
        return r0, r1
    lo, hi = min(lo, untouched[0]), max(hi, untouched[1])
    return lo, hi


def plan_write(codes: np.ndarray, plan: GatePlan, old: Tables, r0: float, r1: float) -> None:
    n = codes.shape[0]
    if plan.kind == "swap":
        E.swap_pairs(codes, plan.sorted_bits, plan.ctrl_mask, plan.tbit, 0, _groups(codes, plan))
    elif plan.kind == "y":
        E.y_pairs(codes, plan.sorted_bits, plan.tbit, 0, _groups(codes, plan))
    elif plan.kind == "phase":
        if plan.delta != 0.0:
            E.phase_shift(codes, plan.phase_mask, plan.delta, 0, n)
    else:
        E.gate_write(codes, plan.sorted_bits, plan.ctrl_mask, plan.tbit, plan.block,
                     old.mag, old.cos, old.sin, r0, r1, 0, _groups(codes, plan))
        if plan.controlled and (r0, r1) != (old.r0, old.r1):
            E.recode_untouched(codes, plan.ctrl_mask, old.mag, r0, r1, 0, n)


def merge_ranges(ranges) -> tuple[float, float]:
    lo, hi = np.inf, -np.inf
    for a, b in ranges:
        lo, hi = min(lo, a), max(hi, b)
    return lo, hi


# -- whole state -----------------------------------------------------------------------

@dataclass
class EncodedState:
    n_qubits: int
    codes: np.ndarray
    r0: float = SENTINEL[0]
    r1: float = SENTINEL[1]
    history: list = field(default_factory=list)

    @property
    def tables(self) -> Tables:
        return Tables(self.r0, self.r1)

    @property
    def nbytes(self) -> int:
        return self.codes.nbytes

    def to_complex(self) -> np.ndarray:
        return decode_array(self.codes, self.r0, self.r1)

    def set_bounds(self, r0: float, r1: float, reason: str = "") -> None:
        if (r0, r1) != (self.r0, self.r1):
            self.r0, self.r1 = r0, r1
            self.history.append({"reason": reason, "r0": r0, "r1": r1})


def init_encoded(n: int) -> EncodedState:
    check_memory(BYTES_PER_AMPLITUDE << n, "encoded state")
    codes = np.empty((1 << n, 2), dtype=np.int8)
    codes[:, 0] = E.ZERO
    codes[:, 1] = 0
    codes[0, 0] = E.ONE
    return EncodedState(n, codes)


def from_amplitudes(z: np.ndarray) -> EncodedState:
    z = np.asarray(z, dtype=complex)
    n = z.size.bit_length() - 1
    r0, r1 = intermediate_bounds(z)
    return EncodedState(n, encode_array(z, r0, r1), r0, r1)


def rescale(state: EncodedState) -> tuple[float, float]:
    """Re-encode under the tight bounds of the magnitudes currently stored."""
    old = state.tables
    lo, hi = E.magnitude_range(state.codes, old.mag, 1.0, 0, state.codes.shape[0])
    r0, r1 = (lo, hi) if lo <= hi else SENTINEL
    E.rescale_mags(state.codes, old.mag, 1.0, r0, r1, 0, state.codes.shape[0])
    state.set_bounds(r0, r1, "rescale")
    return r0, r1


def apply_gate_encoded(state: EncodedState, instr: Instruction) -> None:
    plan = plan_gate(instr, instr.qubits)
    old = state.tables
    r0, r1 = state.r0, state.r1
    if plan.kind == "general":
        out, untouched = plan_scan(state.codes, plan, old)
        r0, r1 = choose_bounds(r0, r1, out, untouched, plan.controlled)
    plan_write(state.codes, plan, old, r0, r1)
    state.set_bounds(r0, r1, instr.opcode.value)


def project(state: EncodedState, bit: int, keep: int, prob: float) -> None:
    old = state.tables
    n = state.codes.shape[0]
    E.project_codes(state.codes, bit, keep, 0, n)
    scale = 1.0 / math.sqrt(prob)
    lo, hi = E.magnitude_range(state.codes, old.mag, scale, 0, n)
    r0, r1 = (lo, hi) if lo <= hi else SENTINEL
    E.rescale_mags(state.codes, old.mag, scale, r0, r1, 0, n)
    state.set_bounds(r0, r1, "projection")


def expectations(state: EncodedState) -> MeasurementRecord:
    t = state.tables
    vals = []
    for q in range(state.n_qubits):
        sx, sy, sz, sn = E.qubit_sums(state.codes, q, t.mag, t.cos, t.sin)
        vals.append((0.5 - sx / sn, 0.5 - sy / sn, sz / sn))
    vals = np.array(vals)
    return MeasurementRecord(vals[:, 0], vals[:, 1], vals[:, 2])


def sample_codes(codes: np.ndarray, tables: Tables, uniforms: np.ndarray) -> np.ndarray:
    n_bits = codes.shape[0].bit_length() - 1
    block_bits = min(SAMPLE_BLOCK_BITS, n_bits)
    masses = np.empty(codes.shape[0] >> block_bits)
    E.block_masses(codes, tables.mag, block_bits, masses)
    size = 1 << block_bits

    def probs(b):
        return tables.mag[codes[b * size:(b + 1) * size, 0].astype(np.int64) + 128] ** 2

    return tree_sample(masses, probs, uniforms)


def shorbox(state: EncodedState, params: ShorParams) -> None:
    problems = params.check(state.n_qubits)
    if problems:
        raise ValueError("; ".join(problems))
    codes = state.codes
    codes[0, 0] = E.ZERO
    E.shorbox_codes(codes, params.n_x, params.G, params.y)
    amp = 2.0 ** (-params.n_x / 2)
    state.set_bounds(amp, amp, "SHORBOX")


class EncodedBackend(Backend):
    def __init__(self, n_qubits: int):
        self.n_qubits = n_qubits
        self.state = init_encoded(n_qubits)

    def apply_gate(self, instr):
        apply_gate_encoded(self.state, instr)

    def bit_probabilities(self, q):
        return E.bit_probability(self.state.codes, q, self.state.tables.mag)

    def project(self, q, bit, prob):
        project(self.state, q, bit, prob)

    def expectations(self):
        return expectations(self.state)

    def sample(self, uniforms):
        return sample_codes(self.state.codes, self.state.tables, uniforms)

    def is_ground_state(self):
        c = self.state.codes
        return c[0, 0] == E.ONE and c[0, 1] == 0 and E.count_nonzero(c, 1, c.shape[0]) == 0

    def shorbox(self, params):
        shorbox(self.state, params)

    def diagnostics(self):
        return {"bytes_per_amplitude": BYTES_PER_AMPLITUDE, "state_bytes": self.state.nbytes,
                "r0": self.state.r0, "r1": self.state.r1, "bounds_history": self.state.history}


class EncodedEngine(Interpreter):
    """Runs circuits on 2-byte amplitudes; BIT ASSIGNMENT does not affect it."""

    name = "encoded"

    def make_backend(self, circuit: Circuit) -> EncodedBackend:
        return EncodedBackend(circuit.n_qubits)


def run(circuit: Circuit, rng: Rng | int | None = None):
    return EncodedEngine().run(circuit, rng)
