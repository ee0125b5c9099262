"""Instruction interpreter shared by the state-vector engines.

An engine supplies a backend holding the machine state; the interpreter walks
the program, draws random numbers from the per-purpose streams and calls the
backend primitives.  Keeping the control flow here is what makes the exact,
encoded and distributed engines consume identical random numbers.
"""
from __future__ import annotations

import abc
from math import sqrt

import numpy as np
import psutil

from ..circuit import Circuit, Instruction, Opcode, ShorParams
from ..result import EventList, MeasurementRecord, RunResult
from ..rng import Rng

ZERO_PROJECTION = 1e-14
_PAULI = {1: Opcode.X, 2: Opcode.Y, 3: Opcode.Z}


class ExecutionError(RuntimeError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ResourceError(MemoryError):
    pass


def check_memory(n_bytes: int, what: str = "state vector") -> None:
    available = psutil.virtual_memory().available
    if n_bytes > available:
        raise ResourceError(
            f"{what} needs {n_bytes} bytes but only {available} bytes are available")


class Backend(abc.ABC):
    """Primitive operations on one machine state, addressed by logical qubit."""

    n_qubits: int

    @abc.abstractmethod
    def apply_gate(self, instr: Instruction) -> None: ...

    @abc.abstractmethod
    def bit_probabilities(self, q: int) -> tuple[float, float]: ...

    @abc.abstractmethod
    def project(self, q: int, bit: int, prob: float) -> None:
        """Keep the branch with qubit ``q`` equal to ``bit`` and divide by sqrt(prob)."""

    @abc.abstractmethod
    def expectations(self) -> MeasurementRecord: ...

    @abc.abstractmethod
    def sample(self, uniforms: np.ndarray) -> np.ndarray:
        """Logical basis indices for each uniform draw."""

    @abc.abstractmethod
    def is_ground_state(self) -> bool: ...

    @abc.abstractmethod
    def shorbox(self, params: ShorParams) -> None: ...

    def diagnostics(self) -> dict:
        return {}


class Interpreter(abc.ABC):
    name = "base"

    @abc.abstractmethod
    def make_backend(self, circuit: Circuit) -> Backend: ...

    def run(self, circuit: Circuit, rng: Rng | int | None = None) -> RunResult:
        if not isinstance(rng, Rng):
            rng = Rng(rng)
        backend = self.make_backend(circuit)
        self.backend = backend
        n = circuit.n_qubits
        result = RunResult(n_qubits=n, engine=self.name, seeds={"run": rng.seed})

        noise = circuit.noise
        if noise is not None and noise.active:
            result.seeds["noise"] = rng.reseed("noise", noise.seed)
        else:
            noise = None

        for ins in circuit.instructions:
            op = ins.opcode
            if op.is_gate:
                backend.apply_gate(ins)
                if noise is not None:
                    self._depolarize(backend, noise, rng, n)
            elif op is Opcode.BEGIN_MEASUREMENT:
                rec = backend.expectations()
                rec.line = ins.line
                result.measurements.append(rec)
            elif op is Opcode.M:
                q = ins.qubits[0]
                p0, p1 = backend.bit_probabilities(q)
                total = p0 + p1
                bit = int(rng["measure"].random() < p1 / total)
                backend.project(q, bit, (p1 if bit else p0) / total)
                result.outcomes.append((q, bit))
            elif op in (Opcode.CLEAR, Opcode.SET):
                q = ins.qubits[0]
                bit = int(op is Opcode.SET)
                p0, p1 = backend.bit_probabilities(q)
                p = (p1 if bit else p0) / (p0 + p1)
                if p < ZERO_PROJECTION:
                    raise ExecutionError(
                        f"{op.value} {q}: projection leaves a state with amplitude zero", ins.line)
                backend.project(q, bit, p)
            elif op is Opcode.SHORBOX:
                params = ShorParams(*ins.ints)
                problems = params.check(n)
                if problems:
                    raise ExecutionError("SHORBOX: " + "; ".join(problems), ins.line)
                if not backend.is_ground_state():
                    raise ExecutionError("SHORBOX requires the state |0...0>", ins.line)
                backend.shorbox(params)
            elif op is Opcode.GENERATE_EVENTS:
                count, seed = ins.ints
                used = rng.reseed("events", seed)
                result.seeds["events"] = used
                idx = backend.sample(rng["events"].random(count))
                result.events = EventList(idx, used, n)
                break
            elif op is Opcode.EXIT:
                rec = backend.expectations()
                rec.label, rec.line = "EXIT", ins.line
                result.measurements.append(rec)
                result.exited = True
                break
            # BIT ASSIGNMENT / DEPOLARIZING CHANNEL are configuration, consumed above
        result.diagnostics = backend.diagnostics()
        return result

    @staticmethod
    def _depolarize(backend: Backend, noise, rng: Rng, n: int) -> None:
        u = rng["noise"].random(n)
        cut = np.cumsum([noise.p_x, noise.p_y, noise.p_z])
        which = np.searchsorted(cut, u, side="right") + 1  # 1=X, 2=Y, 3=Z, 4=nothing
        for q in np.flatnonzero(which <= 3):
            backend.apply_gate(Instruction(_PAULI[int(which[q])], (int(q),)))


def renorm(prob: float) -> float:
    return 1.0 / sqrt(prob)
