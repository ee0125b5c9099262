"""Lexer/parser and pretty-printer for the assembler-style circuit language."""
from __future__ import annotations

import re
from typing import Iterable

from .ir import ANGLE_COUNT, MAX_QUBITS, Circuit, Instruction, NoiseConfig, Opcode


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# multi-word mnemonics first so that "BEGIN MEASUREMENT" is not read as "BEGIN"
_MULTIWORD = {
    ("BEGIN", "MEASUREMENT"): Opcode.BEGIN_MEASUREMENT,
    ("GENERATE", "EVENTS"): Opcode.GENERATE_EVENTS,
    ("BIT", "ASSIGNMENT"): Opcode.BIT_ASSIGNMENT,
    ("DEPOLARIZING", "CHANNEL"): Opcode.DEPOLARIZING_CHANNEL,
}
_SINGLEWORD = {op.value: op for op in Opcode if " " not in op.value}
_SINGLEWORD.pop("R-")
_SINGLEWORD.pop("U-")

_KEYVAL = re.compile(r"([A-Za-z_]+)\s*=\s*([^\s,]+)")


def _int(tok: str, line: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected integer {what}, got {tok!r}", line) from None


def _float(tok: str, line: int, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"expected number {what}, got {tok!r}", line) from None


def _lines(text: str) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("!", 1)[0].strip()
        if body:
            yield lineno, body


def _parse_depolarizing(rest: str, line: int) -> Instruction:
    values = {"P_X": 0.0, "P_Y": 0.0, "P_Z": 0.0, "SEED": 0}
    consumed = _KEYVAL.sub("", rest).replace(",", "").strip()
    if consumed:
        raise ParseError(f"malformed DEPOLARIZING CHANNEL arguments: {rest!r}", line)
    for key, val in _KEYVAL.findall(rest):
        key = key.upper()
        if key not in values:
            raise ParseError(f"unknown DEPOLARIZING CHANNEL argument {key}", line)
        values[key] = _int(val, line, "SEED") if key == "SEED" else _float(val, line, key)
    try:
        NoiseConfig(values["P_X"], values["P_Y"], values["P_Z"], values["SEED"])
    except ValueError as exc:
        raise ParseError(str(exc), line) from None
    return Instruction(Opcode.DEPOLARIZING_CHANNEL,
                       angles=(values["P_X"], values["P_Y"], values["P_Z"]),
                       ints=(values["SEED"],), line=line)


def _parse_statement(body: str, line: int, n_qubits: int | None) -> Instruction:
    words = body.split()
    head = tuple(w.upper() for w in words[:2])
    if head in _MULTIWORD:
        op, args = _MULTIWORD[head], words[2:]
    elif words[0].upper() in _SINGLEWORD:
        op, args = _SINGLEWORD[words[0].upper()], words[1:]
    else:
        raise ParseError(f"unknown mnemonic {words[0]!r}", line)

    if op is Opcode.QUBITS:
        if len(args) != 1:
            raise ParseError("QUBITS takes exactly one argument", line)
        n = _int(args[0], line, "qubit count")
        if not 2 <= n <= MAX_QUBITS:
            raise ParseError(f"QUBITS must be in 2..{MAX_QUBITS}, got {n}", line)
        return Instruction(op, ints=(n,), line=line)
    if n_qubits is None:
        raise ParseError("QUBITS must be first", line)

    if op is Opcode.DEPOLARIZING_CHANNEL:
        return _parse_depolarizing(" ".join(args), line)
    if op is Opcode.BIT_ASSIGNMENT:
        perm = tuple(_int(a, line, "bit position") for a in args)
        if sorted(perm) != list(range(n_qubits)):
            raise ParseError(f"BIT ASSIGNMENT must be a permutation of 0..{n_qubits - 1}", line)
        return Instruction(op, ints=perm, line=line)
    if op in (Opcode.BEGIN_MEASUREMENT, Opcode.EXIT):
        if args:
            raise ParseError(f"{op.value} takes no arguments", line)
        return Instruction(op, line=line)
    if op is Opcode.GENERATE_EVENTS:
        if len(args) != 2:
            raise ParseError("GENERATE EVENTS takes <events> <seed>", line)
        events, seed = (_int(a, line, "argument") for a in args)
        if events <= 0:
            raise ParseError("number of events must be positive", line)
        return Instruction(op, ints=(events, seed), line=line)
    if op is Opcode.SHORBOX:
        if len(args) != 3:
            raise ParseError("SHORBOX takes <n_x> <G> <y>", line)
        return Instruction(op, ints=tuple(_int(a, line, "argument") for a in args), line=line)

    # qubit-addressing instructions
    arity = op.arity
    n_angles = ANGLE_COUNT.get(op, 0)
    n_ints = 1 if op in (Opcode.R, Opcode.CPHASE) else 0
    if len(args) != arity + n_angles + n_ints:
        raise ParseError(f"{op.value} expects {arity + n_angles + n_ints} arguments, got {len(args)}", line)
    qubits = tuple(_int(a, line, "qubit index") for a in args[:arity])
    for q in qubits:
        if not 0 <= q < n_qubits:
            raise ParseError(f"qubit index {q} out of range 0..{n_qubits - 1}", line)
    if len(set(qubits)) != len(qubits):
        raise ParseError(f"{op.value} operands must be distinct, got {list(qubits)}", line)
    angles = tuple(_float(a, line, "angle") for a in args[arity:arity + n_angles])
    ints: tuple[int, ...] = ()
    if n_ints:
        tok = args[-1]
        k = _int(tok, line, "k")
        if tok.startswith("-"):
            op = Opcode.RDAG if op is Opcode.R else Opcode.CPHASE_DAG
        ints = (abs(k),)
    return Instruction(op, qubits, angles, ints, line=line)


def parse_program(text: str) -> Circuit:
    """Parse program text into a :class:`Circuit`.

    Raises :class:`ParseError` carrying the offending line number.
    """
    n_qubits = None
    body: list[Instruction] = []
    for lineno, stmt in _lines(text):
        ins = _parse_statement(stmt, lineno, n_qubits)
        if ins.opcode is Opcode.QUBITS:
            if n_qubits is not None:
                raise ParseError("QUBITS may appear only once", lineno)
            n_qubits = ins.ints[0]
            continue
        body.append(ins)
    if n_qubits is None:
        raise ParseError("empty program: QUBITS must be first")
    return Circuit(n_qubits, tuple(body))


def _num(x: float) -> str:
    return repr(float(x))


def format_instruction(ins: Instruction) -> str:
    op = ins.opcode
    q = " ".join(str(i) for i in ins.qubits)
    if op in (Opcode.R, Opcode.CPHASE):
        return f"{op.value} {q} {ins.ints[0]}"
    if op in (Opcode.RDAG, Opcode.CPHASE_DAG):
        return f"{op.value[0]} {q} -{ins.ints[0]}"
    if op in ANGLE_COUNT:
        return f"{op.value} {q} " + " ".join(_num(a) for a in ins.angles)
    if op is Opcode.DEPOLARIZING_CHANNEL:
        px, py, pz = ins.angles
        return (f"DEPOLARIZING CHANNEL P_X = {_num(px)} , P_Y = {_num(py)} , "
                f"P_Z = {_num(pz)} , SEED = {ins.ints[0]}")
    if op in (Opcode.BIT_ASSIGNMENT, Opcode.GENERATE_EVENTS, Opcode.SHORBOX):
        return f"{op.value} " + " ".join(str(i) for i in ins.ints)
    if ins.qubits:
        return f"{op.value} {q}"
    return op.value


def pretty_print(circuit: Circuit) -> str:
    lines = [f"QUBITS {circuit.n_qubits}"]
    lines += [format_instruction(ins) for ins in circuit.instructions]
    return "\n".join(lines) + "\n"
