"""Timing sweeps over qubit count, engine and rank count."""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field

from .circuit import Circuit, gen_ghz_chain, gen_hadamard_wall
from .engines import EncodedEngine, ExactEngine, ResourceError
from .engines.dist import DistEngine

GENERATORS = {"hadamard": gen_hadamard_wall, "ghz": gen_ghz_chain}
FIELDS = ["circuit", "engine", "n_qubits", "ranks", "gates", "elapsed", "per_gate",
          "normalized", "local_per_rank", "transport_bytes", "status"]


def gates_only(circuit: Circuit) -> Circuit:
    return Circuit(circuit.n_qubits, tuple(i for i in circuit.instructions if i.opcode.is_gate))


def make_engine(name: str, ranks: int = 1, threads: int = 1):
    if name == "exact":
        return ExactEngine(threads)
    if name == "encoded":
        return EncodedEngine()
    if name == "dist":
        return DistEngine(ranks)
    raise ValueError(f"engine {name!r} cannot be benchmarked")


def time_circuit(engine, circuit: Circuit, repeat: int = 1) -> tuple[float, dict]:
    """Best-of-``repeat`` wall time of the gate sequence and the last diagnostics."""
    best, diag = float("inf"), {}
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = engine.run(circuit, 1)
        best = min(best, time.perf_counter() - t0)
        diag = result.diagnostics
    return best, diag


def warm_up(engines) -> None:
    """Compile the kernels outside the timed region."""
    small = gates_only(gen_ghz_chain(6)) + gates_only(gen_hadamard_wall(6))
    for name in engines:
        make_engine(name, 2).run(small, 1)


@dataclass
class BenchReport:
    rows: list[dict] = field(default_factory=list)

    def normalize(self) -> None:
        """Divide each series' per-gate time by its value at the smallest N."""
        base: dict[tuple, float] = {}
        for row in sorted(self.rows, key=lambda r: r["n_qubits"]):
            if row["status"] != "ok":
                continue
            key = (row["circuit"], row["engine"], row["ranks"])
            base.setdefault(key, row["per_gate"])
            row["normalized"] = row["per_gate"] / base[key]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: row.get(k, "") for k in FIELDS})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"rows": self.rows}, indent=2)

    def series(self, circuit: str, engine: str, ranks: int = 1) -> dict[int, dict]:
        return {r["n_qubits"]: r for r in self.rows
                if (r["circuit"], r["engine"], r["ranks"]) == (circuit, engine, ranks)
                and r["status"] == "ok"}


def bench_scaling(engines=("exact",), n_range=range(10, 16), ranks_range=(1,),
                  circuits=("hadamard", "ghz"), threads: int = 1, repeat: int = 1) -> BenchReport:
    report = BenchReport()
    warm_up(engines)
    for circuit_name in circuits:
        for engine_name in engines:
            for ranks in (ranks_range if engine_name == "dist" else (1,)):
                for n in n_range:
                    row = {"circuit": circuit_name, "engine": engine_name, "n_qubits": n,
                           "ranks": ranks}
                    circuit = gates_only(GENERATORS[circuit_name](n))
                    row["gates"] = len(circuit)
                    try:
                        engine = make_engine(engine_name, ranks, threads)
                        elapsed, diag = time_circuit(engine, circuit, repeat)
                    except (MemoryError, ResourceError) as exc:
                        row.update(status=f"out of memory: {exc}")
                        report.rows.append(row)
                        continue
                    except ValueError as exc:
                        row.update(status=f"skipped: {exc}")
                        report.rows.append(row)
                        continue
                    row.update(elapsed=elapsed, per_gate=elapsed / max(1, len(circuit)),
                               status="ok", transport_bytes=diag.get("transport_bytes", 0))
                    if "local_seconds" in diag:
                        local = diag["local_seconds"]
                        row["local_per_rank"] = sum(local) / len(local)
                    report.rows.append(row)
    report.normalize()
    return report
