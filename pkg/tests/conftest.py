import numpy as np
import pytest

from gatesim.circuit import Circuit, Instruction, Opcode, gate_matrix

SINGLE = [Opcode.I, Opcode.H, Opcode.X, Opcode.Y, Opcode.Z, Opcode.S, Opcode.SDAG, Opcode.T,
          Opcode.TDAG, Opcode.PLUS_X, Opcode.MINUS_X, Opcode.PLUS_Y, Opcode.MINUS_Y]


def random_gate(rng, n, *, toffoli=True, general=True):
    r = rng.random()
    if r < 0.2:
        a, b = (int(v) for v in rng.choice(n, 2, replace=False))
        return Instruction(Opcode.CNOT, (a, b))
    if r < 0.3:
        a, b = (int(v) for v in rng.choice(n, 2, replace=False))
        op = Opcode.CPHASE if rng.random() < 0.5 else Opcode.CPHASE_DAG
        return Instruction(op, (a, b), ints=(int(rng.integers(1, 6)),))
    if toffoli and n >= 3 and r < 0.35:
        return Instruction(Opcode.TOFFOLI, tuple(int(v) for v in rng.choice(n, 3, replace=False)))
    q = (int(rng.integers(n)),)
    if general and r < 0.45:
        kind = rng.integers(5)
        if kind == 0:
            return Instruction(Opcode.U1, q, angles=(float(rng.uniform(-4, 4)),))
        if kind == 1:
            return Instruction(Opcode.U2, q, angles=tuple(float(v) for v in rng.uniform(-4, 4, 2)))
        if kind == 2:
            return Instruction(Opcode.U3, q, angles=tuple(float(v) for v in rng.uniform(-4, 4, 3)))
        op = Opcode.R if kind == 3 else Opcode.RDAG
        return Instruction(op, q, ints=(int(rng.integers(1, 6)),))
    return Instruction(SINGLE[rng.integers(len(SINGLE))], q)


def random_circuit(rng, n, n_gates, tail=(), **kw):
    body = tuple(random_gate(rng, n, **kw) for _ in range(n_gates))
    return Circuit(n, body + tuple(tail))


def supported_circuit(rng, n, n_gates, p_max):
    body, p = [], 0
    for _ in range(n_gates):
        r = rng.random()
        if p < p_max and r < 0.3:
            a, b = (int(v) for v in rng.choice(n, 2, replace=False))
            if rng.random() < 0.5:
                body.append(Instruction(Opcode.CNOT, (a, b)))
            else:
                op = Opcode.CPHASE if rng.random() < 0.5 else Opcode.CPHASE_DAG
                body.append(Instruction(op, (a, b), ints=(int(rng.integers(1, 5)),)))
            p += 1
        elif r < 0.4:
            body.append(Instruction(Opcode.U3, (int(rng.integers(n)),),
                                    angles=tuple(float(v) for v in rng.uniform(-3, 3, 3))))
        else:
            body.append(Instruction(SINGLE[rng.integers(len(SINGLE))], (int(rng.integers(n)),)))
    return Circuit(n, tuple(body))


def embed(instr: Instruction, n: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of one gate, assembled from Kronecker products.

    Writes u = sum_{r,c} u[r,c] |r><c| with each operand's |r_o><c_o| placed
    at its qubit and identities elsewhere; qubit 0 is the last Kronecker factor.
    """
    u = gate_matrix(instr)
    qs = instr.qubits
    m = len(qs)
    full = np.zeros((2**n, 2**n), dtype=complex)
    for r in range(2**m):
        for c in range(2**m):
            if u[r, c] == 0:
                continue
            factors = [np.eye(2)] * n
            for o, q in enumerate(qs):
                rb, cb = (r >> (m - 1 - o)) & 1, (c >> (m - 1 - o)) & 1
                e = np.zeros((2, 2))
                e[rb, cb] = 1
                factors[q] = e
            term = np.array([[1.0]])
            for q in reversed(range(n)):
                term = np.kron(term, factors[q])
            full += u[r, c] * term
    return full


def dense_run(circuit: Circuit, psi=None) -> np.ndarray:
    n = circuit.n_qubits
    if psi is None:
        psi = np.zeros(2**n, complex)
        psi[0] = 1
    for ins in circuit.instructions:
        if ins.opcode.is_gate:
            psi = embed(ins, n) @ psi
    return psi


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, shown at the end of the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
