"""Defining matrices of the unitary instructions.

Two- and three-qubit matrices are written in the basis ``|q0, q1[, q2]>`` of
the instruction's operands in the order they appear, i.e. row index
``2*b(control) + b(target)`` for CNOT and U.
"""
from __future__ import annotations

from math import cos, pi, sin, sqrt

import numpy as np

from .ir import Instruction, Opcode

_S2 = 1.0 / sqrt(2.0)

_FIXED = {
    Opcode.I: [[1, 0], [0, 1]],
    Opcode.H: [[_S2, _S2], [_S2, -_S2]],
    Opcode.X: [[0, 1], [1, 0]],
    Opcode.Y: [[0, -1j], [1j, 0]],
    Opcode.Z: [[1, 0], [0, -1]],
    Opcode.S: [[1, 0], [0, 1j]],
    Opcode.SDAG: [[1, 0], [0, -1j]],
    Opcode.T: [[1, 0], [0, (1 + 1j) * _S2]],
    Opcode.TDAG: [[1, 0], [0, (1 - 1j) * _S2]],
    Opcode.PLUS_X: [[_S2, 1j * _S2], [1j * _S2, _S2]],
    Opcode.MINUS_X: [[_S2, -1j * _S2], [-1j * _S2, _S2]],
    Opcode.PLUS_Y: [[_S2, _S2], [-_S2, _S2]],
    Opcode.MINUS_Y: [[_S2, -_S2], [_S2, _S2]],
}
_FIXED = {op: np.array(m, dtype=complex) for op, m in _FIXED.items()}

_CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
_TOFFOLI = np.eye(8, dtype=complex)[[0, 1, 2, 3, 4, 5, 7, 6]]


def phase_angle(k: int, dagger: bool = False) -> float:
    """The R(k)/U(k) phase ``2*pi/2^k`` (negated for the dagger form)."""
    a = 2.0 * pi / 2.0**k
    return -a if dagger else a


def _phase(angle: float) -> complex:
    # exact values on the quarter turns keep permutation-like gates exact
    q = angle / (pi / 2)
    if q == round(q):
        return (1, 1j, -1, -1j)[int(round(q)) % 4]
    return complex(cos(angle), sin(angle))


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = cos(theta / 2), sin(theta / 2)
    return np.array([[c, -_phase(lam) * s],
                     [_phase(phi) * s, _phase(phi + lam) * c]], dtype=complex)


def diagonal_phase(instr: Instruction) -> float:
    """Phase picked up by the |1> (or |11>) component of a diagonal gate."""
    op = instr.opcode
    if op in (Opcode.R, Opcode.CPHASE):
        return phase_angle(instr.ints[0])
    if op in (Opcode.RDAG, Opcode.CPHASE_DAG):
        return phase_angle(instr.ints[0], dagger=True)
    if op is Opcode.U1:
        return instr.angles[0]
    return {Opcode.I: 0.0, Opcode.Z: pi, Opcode.S: pi / 2, Opcode.SDAG: -pi / 2,
            Opcode.T: pi / 4, Opcode.TDAG: -pi / 4}[op]


def gate_matrix(instr: Instruction) -> np.ndarray:
    op = instr.opcode
    if not op.is_gate:
        raise ValueError(f"{op.value} is not a unitary gate instruction")
    if op in _FIXED:
        return _FIXED[op].copy()
    if op in (Opcode.U1, Opcode.R, Opcode.RDAG):
        return np.diag([1, _phase(diagonal_phase(instr))]).astype(complex)
    if op is Opcode.U2:
        phi, lam = instr.angles
        return u3(pi / 2, phi, lam)
    if op is Opcode.U3:
        return u3(*instr.angles)
    if op is Opcode.CNOT:
        return _CNOT.copy()
    if op in (Opcode.CPHASE, Opcode.CPHASE_DAG):
        return np.diag([1, 1, 1, _phase(diagonal_phase(instr))]).astype(complex)
    if op is Opcode.TOFFOLI:
        return _TOFFOLI.copy()
    raise AssertionError(op)


def controlled_part(instr: Instruction) -> tuple[tuple[int, ...], int, np.ndarray]:
    """Split a gate into (controls, target, 2x2 matrix applied when all controls are 1).

    Single-qubit gates come back with no controls.
    """
    op = instr.opcode
    if op in (Opcode.CNOT, Opcode.CPHASE, Opcode.CPHASE_DAG, Opcode.TOFFOLI):
        m = gate_matrix(instr)
        return instr.qubits[:-1], instr.qubits[-1], m[-2:, -2:].copy()
    return (), instr.qubits[0], gate_matrix(instr)
