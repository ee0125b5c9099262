"""Run results and their text/JSON serialisations."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Optional

import numpy as np


@dataclass
class MeasurementRecord:
    """Per-qubit <Qx>, <Qy>, <Qz> (each (1 - <sigma>)/2) in logical qubit order."""

    qx: np.ndarray
    qy: np.ndarray
    qz: np.ndarray
    label: str = "BEGIN MEASUREMENT"
    line: Optional[int] = None

    @property
    def n_qubits(self) -> int:
        return len(self.qz)

    def rows(self):
        return zip(range(self.n_qubits), self.qx, self.qy, self.qz)

    def as_array(self) -> np.ndarray:
        return np.stack([self.qx, self.qy, self.qz], axis=1)

    def to_dict(self) -> dict:
        return {"label": self.label, "line": self.line,
                "qx": [float(v) for v in self.qx],
                "qy": [float(v) for v in self.qy],
                "qz": [float(v) for v in self.qz]}


@dataclass
class EventList:
    events: np.ndarray  # basis-state labels, logical bit order
    seed: int
    n_qubits: int

    def bitstrings(self) -> list[str]:
        """Labels with qubit N-1 leftmost."""
        return [format(int(e), f"0{self.n_qubits}b") for e in self.events]

    def __len__(self):
        return len(self.events)


@dataclass
class RunResult:
    n_qubits: int
    engine: str
    measurements: list[MeasurementRecord] = field(default_factory=list)
    outcomes: list[tuple[int, int]] = field(default_factory=list)  # (qubit, bit) from M
    events: Optional[EventList] = None
    amplitudes: Optional[dict[int, complex]] = None
    seeds: dict[str, int] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)
    exited: bool = False

    def to_json(self, indent: int | None = 2) -> str:
        doc = {
            "n_qubits": self.n_qubits,
            "engine": self.engine,
            "measurements": [m.to_dict() for m in self.measurements],
            "outcomes": [{"qubit": q, "bit": b} for q, b in self.outcomes],
            "seeds": self.seeds,
            "exited": self.exited,
            "diagnostics": _plain(self.diagnostics),
        }
        if self.events is not None:
            doc["events"] = {"seed": self.events.seed, "count": len(self.events),
                             "states": self.events.bitstrings()}
        if self.amplitudes is not None:
            doc["amplitudes"] = [
                {"state": format(k, f"0{self.n_qubits}b"), "re": v.real, "im": v.imag}
                for k, v in self.amplitudes.items()]
        return json.dumps(doc, indent=indent)

    def format_tables(self) -> str:
        blocks = []
        for rec in self.measurements:
            where = f" (line {rec.line})" if rec.line is not None else ""
            blocks.append(f"{rec.label}{where}\n" + format_expectations(rec))
        for q, b in self.outcomes:
            blocks.append(f"M {q} -> {b}")
        if self.amplitudes is not None:
            blocks.append(format_amplitudes(self.amplitudes, self.n_qubits))
        return "\n".join(blocks)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "__dataclass_fields__"):
        return _plain(asdict(obj))
    return obj


def format_value(x: float) -> str:
    """Three decimals, half away from zero, locale independent."""
    d = Decimal(repr(float(x))).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP)
    if d == 0:
        d = abs(d)
    return f"{d:.3f}"


def format_expectations(record: MeasurementRecord) -> str:
    lines = ["qubit <Qx> <Qy> <Qz>"]
    for q, x, y, z in record.rows():
        lines.append(f"{q:5d} {format_value(x)} {format_value(y)} {format_value(z)}")
    return "\n".join(lines)


def format_amplitudes(amps: dict[int, complex], n_qubits: int) -> str:
    lines = ["state re im"]
    for k, v in amps.items():
        lines.append(f"{format(k, f'0{n_qubits}b')} {v.real:.12e} {v.imag:.12e}")
    return "\n".join(lines)
