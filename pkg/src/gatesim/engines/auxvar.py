"""Path-sum amplitude evaluator built on a discrete auxiliary-field split.

Every controlled phase ``diag(1, 1, 1, e^{ia})`` factorises as an average over
one auxiliary spin ``s = +-1`` of a product of two single-qubit diagonals::

    U(a) = 1/2 sum_s D(s) (x) D(s),   D(s) = diag(e^{i(xs - a/4)}, e^{-i(xs - a/4)})

with ``cos 2x = e^{ia/2}``.  CNOT is rewritten as ``H_t U(pi) H_t``.  With P
such factors the circuit becomes ``2^-P`` times a sum over ``2^P`` spin
configurations of product states, each qubit evolving on its own through a
chain of 2x2 matrices.  Amplitudes then cost ``O(N M 2^P)`` time but only
``O(N + M)`` memory.

Configurations are visited in Gray-code order so each step re-evaluates only
the two chains touched by the flipped spin.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..circuit import Circuit, Instruction, Opcode, gate_matrix, phase_angle
from ..result import RunResult

_H = gate_matrix(Instruction(Opcode.H, (0,)))
_SKIP = {Opcode.BIT_ASSIGNMENT, Opcode.BEGIN_MEASUREMENT}
_STOP = {Opcode.GENERATE_EVENTS, Opcode.EXIT}


class UnsupportedInstruction(ValueError):
    def __init__(self, instr: Instruction):
        self.instruction = instr
        where = f" at line {instr.line}" if instr.line is not None else ""
        super().__init__(f"{instr.opcode.value}{where} is not supported by the auxvar engine")


@dataclass(frozen=True)
class HsParameter:
    a: float
    x: complex

    def factor(self, s: int) -> np.ndarray:
        """Single-qubit diagonal contributed to each participating qubit for spin ``s``."""
        w = self.x * s - self.a / 4
        return np.diag([cmath.exp(1j * w), cmath.exp(-1j * w)])


def solve_hs(a: float) -> HsParameter:
    return HsParameter(float(a), 0.5 * complex(np.arccos(complex(cmath.exp(0.5j * a)))))


def reconstruct(hs: HsParameter) -> np.ndarray:
    """Spin average of the two-qubit product; equals diag(1, 1, 1, e^{ia})."""
    return 0.5 * sum(np.kron(hs.factor(s), hs.factor(s)) for s in (1, -1))


@dataclass
class PathProgram:
    n_qubits: int
    factors: list[tuple[int, int, float, complex]]  # (qubit_a, qubit_b, a, x)
    timelines: list[list]  # per qubit: 2x2 matrices and ("factor", p) markers

    @property
    def p_count(self) -> int:
        return len(self.factors)

    @property
    def weight(self) -> float:
        return 0.5 ** self.p_count

    def cost(self, n_amplitudes: int) -> int:
        """Rough operation count ``N * M * 2^P``."""
        return self.n_qubits * n_amplitudes * (1 << self.p_count)

    def flatten(self):
        """Arrays consumed by the numba kernels."""
        start, kind, ref, mats = [0], [], [], []
        for line in self.timelines:
            for item in line:
                if isinstance(item, tuple):
                    kind.append(1)
                    ref.append(item[1])
                else:
                    kind.append(0)
                    ref.append(len(mats))
                    mats.append(item)
            start.append(len(kind))
        mats = np.array(mats, dtype=np.complex128).reshape(-1, 2, 2)
        fq = np.array([(a, b) for a, b, _, _ in self.factors], dtype=np.int64).reshape(-1, 2)
        fa = np.array([f[2] for f in self.factors], dtype=np.float64)
        fx = np.array([f[3] for f in self.factors], dtype=np.complex128)
        return (np.array(start, np.int64), np.array(kind, np.int64), np.array(ref, np.int64),
                mats, fq, fa, fx)


def compile_to_paths(circuit: Circuit) -> PathProgram:
    n = circuit.n_qubits
    timelines: list[list] = [[] for _ in range(n)]
    factors = []

    def push(q, m):
        line = timelines[q]
        # fold consecutive fixed matrices into one
        if line and not isinstance(line[-1], tuple):
            line[-1] = m @ line[-1]
        else:
            line.append(np.asarray(m, dtype=np.complex128))

    def attach(qa, qb, a):
        p = len(factors)
        factors.append((qa, qb, a, solve_hs(a).x))
        timelines[qa].append(("factor", p))
        timelines[qb].append(("factor", p))

    for ins in circuit.instructions:
        op = ins.opcode
        if op in _STOP:
            break
        if op in _SKIP:
            continue
        if op is Opcode.DEPOLARIZING_CHANNEL:
            noise = circuit.noise
            if noise is not None and noise.active:
                raise UnsupportedInstruction(ins)
            continue
        if not op.is_gate or op is Opcode.TOFFOLI:
            raise UnsupportedInstruction(ins)
        if op is Opcode.CNOT:
            c, t = ins.qubits
            push(t, _H)
            attach(c, t, phase_angle(1))
            push(t, _H)
        elif op in (Opcode.CPHASE, Opcode.CPHASE_DAG):
            attach(*ins.qubits, phase_angle(ins.ints[0], op is Opcode.CPHASE_DAG))
        else:
            push(ins.qubits[0], gate_matrix(ins))
    return PathProgram(n, factors, timelines)


# -- kernels ------------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _eval_line(j, start, kind, ref, mats, fa, fx, spins, vec):
    v0 = 1.0 + 0j
    v1 = 0j
    for e in range(start[j], start[j + 1]):
        if kind[e] == 0:
            m = mats[ref[e]]
            v0, v1 = m[0, 0] * v0 + m[0, 1] * v1, m[1, 0] * v0 + m[1, 1] * v1
        else:
            p = ref[e]
            ph = np.exp(1j * (fx[p] * spins[p] - fa[p] / 4.0))
            v0 = v0 * ph
            v1 = v1 / ph
    vec[j, 0] = v0
    vec[j, 1] = v1


@njit(cache=True, nogil=True)
def _trailing_zeros(g):
    t = 0
    while (g & 1) == 0:
        g >>= 1
        t += 1
    return t


@njit(cache=True, nogil=True)
def _kahan_add(acc, comp, i, term):
    y = term - comp[i]
    t = acc[i] + y
    comp[i] = (t - acc[i]) - y
    acc[i] = t


@njit(cache=True, nogil=True)
def _accumulate(n, start, kind, ref, mats, fq, fa, fx, g0, g1, query, full,
                spins, vec, term, acc, comp):
    """Add configurations g0..g1-1 (Gray order) into acc with compensated sums."""
    gray = g0 ^ (g0 >> 1)
    for p in range(spins.size):
        spins[p] = -1.0 if (gray >> p) & 1 else 1.0
    for j in range(n):
        _eval_line(j, start, kind, ref, mats, fa, fx, spins, vec)
    for g in range(g0, g1):
        if g > g0:
            p = _trailing_zeros(g)
            spins[p] = -spins[p]
            _eval_line(fq[p, 0], start, kind, ref, mats, fa, fx, spins, vec)
            _eval_line(fq[p, 1], start, kind, ref, mats, fa, fx, spins, vec)
        if full:
            term[0] = 1.0
            size = 1
            for j in range(n):
                for i in range(size - 1, -1, -1):
                    term[i + size] = term[i] * vec[j, 1]
                    term[i] = term[i] * vec[j, 0]
                size *= 2
            for i in range(size):
                _kahan_add(acc, comp, i, term[i])
        else:
            for m in range(query.size):
                b = query[m]
                t = 1.0 + 0j
                for j in range(n):
                    t *= vec[j, (b >> j) & 1]
                _kahan_add(acc, comp, m, t)


def amplitudes(program: PathProgram, query=None, parts: int = 1) -> np.ndarray:
    """Amplitudes of the basis states in ``query`` (all 2^N states if None).

    ``parts`` splits the configuration range into contiguous chunks whose
    partial sums are added in chunk order.
    """
    n = program.n_qubits
    full = query is None
    q = np.zeros(0, np.int64) if full else np.asarray(query, dtype=np.int64).ravel()
    if not full and (q.size == 0 or q.min() < 0 or q.max() >= 1 << n):
        raise ValueError("query must list at least one basis state in [0, 2^N)")
    m = (1 << n) if full else q.size
    start, kind, ref, mats, fq, fa, fx = program.flatten()
    if mats.shape[0] == 0:
        mats = np.zeros((1, 2, 2), np.complex128)
    fq = fq if fq.size else np.zeros((0, 2), np.int64)
    total = 1 << program.p_count
    spins = np.empty(program.p_count, np.float64)
    vec = np.empty((n, 2), np.complex128)
    term = np.empty(m if full else 1, np.complex128)
    out = np.zeros(m, np.complex128)
    bounds = np.linspace(0, total, max(1, min(parts, total)) + 1).astype(np.int64)
    acc = np.zeros(m, np.complex128)
    comp = np.zeros(m, np.complex128)
    for g0, g1 in zip(bounds[:-1], bounds[1:]):
        acc[:] = 0
        comp[:] = 0
        _accumulate(n, start, kind, ref, mats, fq, fa, fx, int(g0), int(g1), q, full,
                    spins, vec, term, acc, comp)
        out += acc
    out *= program.weight
    return out


def parse_query(labels, n_qubits: int) -> list[int]:
    """Basis labels given as bitstrings (qubit N-1 leftmost) or 0x-prefixed hex."""
    out = []
    for lab in labels:
        lab = lab.strip()
        if lab.lower().startswith("0x"):
            v = int(lab, 16)
        elif lab and set(lab) <= {"0", "1"}:
            if len(lab) != n_qubits:
                raise ValueError(f"bitstring {lab!r} must have {n_qubits} digits")
            v = int(lab, 2)
        else:
            raise ValueError(f"cannot read basis label {lab!r}")
        if v >= 1 << n_qubits:
            raise ValueError(f"basis label {lab!r} out of range")
        out.append(v)
    return out


class AuxvarEngine:
    name = "auxvar"

    def __init__(self, parts: int = 1):
        self.parts = parts

    def run(self, circuit: Circuit, query=None) -> RunResult:
        program = compile_to_paths(circuit)
        values = amplitudes(program, query, self.parts)
        labels = range(1 << circuit.n_qubits) if query is None else query
        return RunResult(
            n_qubits=circuit.n_qubits, engine=self.name,
            amplitudes={int(k): complex(v) for k, v in zip(labels, values)},
            diagnostics={"p_count": program.p_count, "cost": program.cost(len(values))})
