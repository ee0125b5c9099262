"""Static checks on parsed circuits."""
from __future__ import annotations

from dataclasses import dataclass, field

from .ir import Circuit, Opcode, ShorParams


@dataclass(frozen=True)
class Issue:
    severity: str  # "error" | "warning" | "info"
    message: str
    line: int | None = None
    index: int | None = None

    def __str__(self):
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{self.severity}: {where}{self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "error"]

    @property
    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self):
        return bool(self.issues)

    def __len__(self):
        return len(self.issues)

    def __iter__(self):
        return iter(self.issues)


def validate(circuit: Circuit) -> ValidationReport:
    report = ValidationReport()
    add = report.issues.append
    seen_gate = False
    exit_at = None
    seen = {Opcode.BIT_ASSIGNMENT: 0, Opcode.DEPOLARIZING_CHANNEL: 0}

    for idx, ins in enumerate(circuit.instructions):
        op = ins.opcode
        if exit_at is not None:
            add(Issue("warning", f"{op.value} after EXIT (line {exit_at}) is unreachable", ins.line, idx))
            continue
        if op is Opcode.SHORBOX and seen_gate:
            add(Issue("warning", "SHORBOX after gates only runs if the state is back to |0...0>",
                      ins.line, idx))
        if op.is_gate or op is Opcode.SHORBOX:
            seen_gate = True
        if op in seen:
            seen[op] += 1
            if seen_gate:
                add(Issue("error", f"{op.value} must appear before the first gate instruction", ins.line, idx))
            if seen[op] > 1:
                add(Issue("error", f"{op.value} given more than once", ins.line, idx))
        if op in (Opcode.R, Opcode.RDAG, Opcode.CPHASE, Opcode.CPHASE_DAG) and ins.ints[0] == 0:
            add(Issue("warning", f"{op.value[0]} with k=0 is a phase of 2*pi (no-op)", ins.line, idx))
        if op is Opcode.SHORBOX:
            params = ShorParams(*ins.ints)
            for problem in params.check(circuit.n_qubits):
                add(Issue("error", f"SHORBOX: {problem}", ins.line, idx))
            n_x = params.n_x
            if params.G > 1 and not params.G**2 <= 2**n_x < 2 * params.G**2:
                add(Issue("info", f"x-register of {n_x} qubits outside G^2 <= 2^n_x < 2G^2", ins.line, idx))
        if op is Opcode.EXIT:
            exit_at = ins.line if ins.line is not None else idx
        if op is Opcode.GENERATE_EVENTS:
            # terminates the run just like EXIT
            exit_at = ins.line if ins.line is not None else idx
    return report
