"""Benchmark circuit generators."""
from __future__ import annotations

from typing import Sequence

from .ir import MAX_QUBITS, BitPermutation, Circuit, Instruction, Opcode, ShorParams


def _check_width(n: int) -> None:
    if not 2 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in 2..{MAX_QUBITS}, got {n}")


def _h(q):
    return Instruction(Opcode.H, (q,))


def _cnot(c, t):
    return Instruction(Opcode.CNOT, (c, t))


def _cphase(c, t, k, dagger=False):
    return Instruction(Opcode.CPHASE_DAG if dagger else Opcode.CPHASE, (c, t), ints=(k,))


_MEASURE = Instruction(Opcode.BEGIN_MEASUREMENT)


def gen_hadamard_wall(n: int) -> Circuit:
    _check_width(n)
    return Circuit(n, tuple(_h(j) for j in range(n)) + (_MEASURE,))


def gen_ghz_chain(n: int) -> Circuit:
    _check_width(n)
    body = [_h(0)] + [_cnot(j, j + 1) for j in range(n - 1)]
    return Circuit(n, tuple(body) + (_MEASURE,))


def swap_network(a: int, b: int) -> list[Instruction]:
    """SWAP(a, b) as three CNOTs; the instruction set has no swap."""
    return [_cnot(a, b), _cnot(b, a), _cnot(a, b)]


def gen_qft(targets: Sequence[int], inverse: bool = False) -> tuple[Instruction, ...]:
    """Quantum Fourier transform on ``targets`` (``targets[0]`` is the least significant bit).

    Maps ``|x>`` to ``2^{-n/2} sum_c exp(2 pi i x c / 2^n) |c>`` with ``c`` read in
    the same bit order, so the final bit reversal is included.  The inverse is
    the reversed sequence with conjugated phases.
    """
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"QFT targets must be distinct: {targets}")
    n = len(targets)
    seq: list[Instruction] = []
    for j in reversed(range(n)):
        seq.append(_h(targets[j]))
        for m in reversed(range(j)):
            seq.append(_cphase(targets[m], targets[j], j - m + 1))
    for i in range(n // 2):
        seq += swap_network(targets[i], targets[n - 1 - i])
    if not inverse:
        return tuple(seq)
    inv = []
    for ins in reversed(seq):
        if ins.opcode is Opcode.CPHASE:
            ins = _cphase(*ins.qubits, ins.ints[0], dagger=True)
        inv.append(ins)
    return tuple(inv)


def _prepare(value: int, qubits: Sequence[int]) -> list[Instruction]:
    return [Instruction(Opcode.X, (q,)) for bit, q in enumerate(qubits) if value >> bit & 1]


def gen_adder(k_bits: int, a: int, b: int, n_qubits: int | None = None,
              bit_assignment: Sequence[int] | None = None) -> Circuit:
    """Transform-domain adder computing ``(a + b) mod 2^k_bits``.

    The sum register (register 1) is qubits ``0..k-1`` and starts out holding
    ``a``; register 2 is qubits ``k..2k-1`` and holds ``b``.  Qubit ``i`` of
    each register carries bit ``i`` (least significant first).
    """
    n = 2 * k_bits if n_qubits is None else n_qubits
    _check_width(n)
    if k_bits < 1 or 2 * k_bits > n:
        raise ValueError(f"two {k_bits}-bit registers do not fit in {n} qubits")
    for name, v in (("a", a), ("b", b)):
        if not 0 <= v < 2**k_bits:
            raise ValueError(f"{name}={v} overflows a {k_bits}-bit register")
    reg1 = list(range(k_bits))
    reg2 = list(range(k_bits, 2 * k_bits))

    body: list[Instruction] = []
    if bit_assignment is not None:
        body.append(Instruction(Opcode.BIT_ASSIGNMENT, ints=BitPermutation(tuple(bit_assignment)).perm))
    body += _prepare(b, reg2)
    body += _prepare(a, reg1)
    body += gen_qft(reg1)
    # multiplying amplitude c by exp(2 pi i b c / 2^k) adds b in the transform domain
    for j in range(k_bits):
        for l in range(k_bits - j):
            body.append(_cphase(reg2[l], reg1[j], k_bits - j - l))
    body += gen_qft(reg1, inverse=True)
    body.append(_MEASURE)
    return Circuit(n, tuple(body))


def gen_shor(n: int, params: ShorParams, events: int = 64, seed: int = 1) -> Circuit:
    _check_width(n)
    problems = params.check(n)
    if problems:
        raise ValueError("; ".join(problems))
    body = [Instruction(Opcode.SHORBOX, ints=(params.n_x, params.G, params.y))]
    body += gen_qft(range(params.n_x))
    body.append(_MEASURE)
    body.append(Instruction(Opcode.GENERATE_EVENTS, ints=(events, seed)))
    return Circuit(n, tuple(body))
