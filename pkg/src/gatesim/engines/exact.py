"""Full-precision state-vector engine.

Amplitudes live in one ``complex128`` array; gates are applied in place to
groups of 2, 4 or 8 amplitudes.  The array helpers below take raw arrays and
physical bit positions so the distributed engine can reuse them on slices.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..circuit import Circuit, Instruction, ShorParams, controlled_part, gate_matrix
from ..result import EventList, MeasurementRecord
from ..rng import Rng
from ..sampling import tree_sample
from . import _kernels as K
from .base import Backend, Interpreter, check_memory

BYTES_PER_AMPLITUDE = 16
SAMPLE_BLOCK_BITS = 8


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


def init_state(n: int) -> StateVector:
    check_memory(BYTES_PER_AMPLITUDE << n)
    try:
        a = np.zeros(1 << n, dtype=np.complex128)
    except MemoryError as exc:
        raise MemoryError(f"state vector needs {BYTES_PER_AMPLITUDE << n} bytes") from exc
    a[0] = 1.0
    return StateVector(n, a)


# -- threading ---------------------------------------------------------------

@lru_cache(maxsize=None)
def _pool(threads: int) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=threads, thread_name_prefix="gatesim")


def _ranges(total: int, parts: int):
    bounds = np.linspace(0, total, parts + 1).astype(np.int64)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def _fan_out(fn, total: int, threads: int) -> None:
    """Call ``fn(lo, hi)`` on disjoint ranges covering ``[0, total)``."""
    if threads <= 1 or total < 2 * threads:
        fn(0, total)
        return
    list(_pool(threads).map(lambda r: fn(*r), _ranges(total, threads)))


# -- array level kernels -------------------------------------------------------

def update_single(a: np.ndarray, bit: int, u: np.ndarray, threads: int = 1) -> None:
    half = 1 << bit
    nstates = a.size // 2
    n_k = nstates // half
    u = np.ascontiguousarray(u, dtype=np.complex128)
    # parallelise the high-bit loop when it has enough iterations, else the low one
    if nstates // (half + half) >= half:
        _fan_out(lambda k0, k1: K.single_kl(a, half, u, k0, k1, 0, half), n_k, threads)
    else:
        _fan_out(lambda l0, l1: K.single_kl(a, half, u, 0, n_k, l0, l1), half, threads)


def _controlled_block(u: np.ndarray) -> np.ndarray | None:
    d = u.shape[0]
    head = d - 2
    if (np.array_equal(u[:head, :head], np.eye(head))
            and not u[:head, head:].any() and not u[head:, :head].any()):
        return u[head:, head:]
    return None


def update_multi(a: np.ndarray, bits: tuple[int, ...], u: np.ndarray, threads: int = 1) -> None:
    """Apply a 2^m x 2^m matrix written in the basis |bits[0], ..., bits[-1]>."""
    if len(set(bits)) != len(bits):
        raise ValueError(f"operand bits must be distinct, got {bits}")
    if len(bits) == 1:
        update_single(a, bits[0], u, threads)
        return
    u = np.ascontiguousarray(u, dtype=np.complex128)
    sorted_bits = np.array(sorted(bits), dtype=np.int64)
    groups = a.size >> len(bits)
    block = _controlled_block(u)
    if block is not None:
        mask = 0
        for b in bits[:-1]:
            mask |= 1 << b
        tbit = 1 << bits[-1]
        block = np.ascontiguousarray(block)
        _fan_out(lambda g0, g1: K.controlled_single(a, sorted_bits, mask, tbit, block, g0, g1),
                 groups, threads)
    else:
        operand_bits = np.array(bits, dtype=np.int64)
        _fan_out(lambda g0, g1: K.dense_group(a, sorted_bits, operand_bits, u, g0, g1),
                 groups, threads)


def qubit_expectation(a: np.ndarray, bit: int) -> tuple[float, float, float]:
    sx, sy, sz, sn = K.qubit_sums(a, bit)
    return 0.5 - sx / sn, 0.5 - sy / sn, sz / sn


def sample_array(a: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    n_bits = a.size.bit_length() - 1
    block_bits = min(SAMPLE_BLOCK_BITS, n_bits)
    masses = np.empty(a.size >> block_bits)
    K.block_masses(a, block_bits, masses)
    size = 1 << block_bits

    def probs(b):
        seg = a[b * size:(b + 1) * size]
        return seg.real ** 2 + seg.imag ** 2

    return tree_sample(masses, probs, uniforms)


# -- state level operations ------------------------------------------------------

def apply_single(state: StateVector, j: int, u: np.ndarray, threads: int = 1) -> None:
    if not 0 <= j < state.n_qubits:
        raise ValueError(f"qubit {j} out of range")
    update_single(state.amplitudes, j, u, threads)


def apply_two(state: StateVector, j_control: int, j_target: int, u: np.ndarray,
              threads: int = 1) -> None:
    update_multi(state.amplitudes, (j_control, j_target), u, threads)


def apply_three(state: StateVector, c1: int, c2: int, t: int, u: np.ndarray,
                threads: int = 1) -> None:
    update_multi(state.amplitudes, (c1, c2, t), u, threads)


def apply_instruction(state: StateVector, instr: Instruction, threads: int = 1) -> None:
    controls, target, block = controlled_part(instr)
    if controls:
        update_multi(state.amplitudes, instr.qubits, gate_matrix(instr), threads)
    else:
        update_single(state.amplitudes, target, block, threads)


def expectations(state: StateVector) -> MeasurementRecord:
    vals = np.array([qubit_expectation(state.amplitudes, q) for q in range(state.n_qubits)])
    return MeasurementRecord(vals[:, 0], vals[:, 1], vals[:, 2])


def _project(state: StateVector, j: int, bit: int, prob: float) -> None:
    K.project(state.amplitudes, j, bit, 1.0 / np.sqrt(prob))


def project_measure(state: StateVector, j: int, rng: Rng | np.random.Generator) -> int:
    gen = rng["measure"] if isinstance(rng, Rng) else rng
    p0, p1 = K.bit_probability(state.amplitudes, j)
    total = p0 + p1
    bit = int(gen.random() < p1 / total)
    _project(state, j, bit, (p1 if bit else p0) / total)
    return bit


def clear_or_set(state: StateVector, j: int, target_bit: int) -> None:
    from .base import ZERO_PROJECTION, ExecutionError

    p0, p1 = K.bit_probability(state.amplitudes, j)
    p = (p1 if target_bit else p0) / (p0 + p1)
    if p < ZERO_PROJECTION:
        raise ExecutionError(f"projection of qubit {j} onto |{target_bit}> has amplitude zero")
    _project(state, j, target_bit, p)


def generate_events(state: StateVector, count: int, seed: int | None) -> EventList:
    if count <= 0:
        raise ValueError("event count must be positive")
    rng = Rng(seed)
    return EventList(sample_array(state.amplitudes, rng["events"].random(count)),
                     rng.seed, state.n_qubits)


def shorbox(state: StateVector, params: ShorParams) -> None:
    problems = params.check(state.n_qubits)
    if problems:
        raise ValueError("; ".join(problems))
    a = state.amplitudes
    if a[0] != 1 or np.count_nonzero(a) != 1:
        raise ValueError("SHORBOX requires the state |0...0>")
    a[0] = 0
    K.shorbox_fill(a, params.n_x, params.G, params.y, 2.0 ** (-params.n_x / 2))


# -- engine ---------------------------------------------------------------------------

class ExactBackend(Backend):
    def __init__(self, n_qubits: int, threads: int = 1):
        self.n_qubits = n_qubits
        self.threads = threads
        self.state = init_state(n_qubits)

    def apply_gate(self, instr):
        apply_instruction(self.state, instr, self.threads)

    def bit_probabilities(self, q):
        return K.bit_probability(self.state.amplitudes, q)

    def project(self, q, bit, prob):
        _project(self.state, q, bit, prob)

    def expectations(self):
        return expectations(self.state)

    def sample(self, uniforms):
        return sample_array(self.state.amplitudes, uniforms)

    def is_ground_state(self):
        a = self.state.amplitudes
        return a[0] == 1 and np.count_nonzero(a) == 1

    def shorbox(self, params):
        shorbox(self.state, params)


class ExactEngine(Interpreter):
    """Reference engine; BIT ASSIGNMENT does not affect it."""

    name = "exact"

    def __init__(self, threads: int = 1):
        self.threads = threads

    def make_backend(self, circuit: Circuit) -> ExactBackend:
        return ExactBackend(circuit.n_qubits, self.threads)


def run(circuit: Circuit, rng: Rng | int | None = None, threads: int = 1):
    return ExactEngine(threads).run(circuit, rng)
