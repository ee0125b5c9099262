"""Distributed-memory execution model with in-process ranks.

The ``2^N`` amplitudes are split over ``K_h = 2^{N_h}`` ranks by the top
``N_h`` bits of the physical index; each rank owns ``K_l = 2^{N_l}``
consecutive amplitudes.  Logical qubit ``q`` sits at physical bit
``perm[q]``.  A gate whose operands are all local is applied by every rank
on its own slice.  Otherwise each global operand is first exchanged with a
local bit: rank pairs that differ in that global bit trade half of their
slices through a :class:`Transport`, and the permutation records the swap.

Ranks run in lockstep inside one process; they share nothing except what
passes through the transport and the collective reductions done by the
coordinator in fixed rank order.
"""
from __future__ import annotations

import time
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..circuit import BitPermutation, Circuit, Instruction, Opcode, ShorParams, gate_matrix
from ..result import MeasurementRecord
from ..rng import Rng
from ..sampling import tree_sample
from . import _enc_kernels as E
from . import _kernels as K
from . import encoded as enc
from .base import Backend, ExecutionError, Interpreter, check_memory
from .exact import update_multi

MIN_BUFFER_BYTES = 16
SAMPLE_BLOCK_BITS = 8


@dataclass(frozen=True)
class RankLayout:
    n_qubits: int
    n_high: int

    def __post_init__(self):
        if not 0 <= self.n_high < self.n_qubits:
            raise ValueError(f"need 0 <= n_high < n_qubits, got n_high={self.n_high} "
                             f"for {self.n_qubits} qubits")

    @property
    def n_low(self) -> int:
        return self.n_qubits - self.n_high

    @property
    def k_high(self) -> int:
        return 1 << self.n_high

    @property
    def k_low(self) -> int:
        return 1 << self.n_low

    def buffer_bytes(self) -> int:
        """Per-rank exchange buffer: an even share of 2^{N-3} bytes."""
        return max(MIN_BUFFER_BYTES, (1 << max(self.n_qubits - 3, 0)) // self.k_high)

    def bytes_per_rank(self, bytes_per_amplitude: int = 16) -> int:
        return bytes_per_amplitude * self.k_low


def partition(n: int, n_high: int) -> RankLayout:
    return RankLayout(n, n_high)


class Transport:
    """Reliable ordered point-to-point byte channels with traffic counters."""

    def __init__(self, n_ranks: int):
        self.n_ranks = n_ranks
        self._channels: dict[tuple[int, int], deque] = defaultdict(deque)
        self.bytes_sent = 0
        self.messages = 0
        self.sent_by_rank = [0] * n_ranks

    def send(self, src: int, dst: int, payload: bytes) -> None:
        self._channels[src, dst].append(bytes(payload))
        self.bytes_sent += len(payload)
        self.sent_by_rank[src] += len(payload)
        self.messages += 1

    def receive(self, dst: int, src: int) -> bytes:
        chan = self._channels[src, dst]
        if not chan:
            raise ExecutionError(f"rank {dst} expected a message from rank {src}")
        return chan.popleft()

    def pending(self) -> int:
        return sum(len(c) for c in self._channels.values())


@dataclass
class ExchangeBuffer:
    capacity: int  # bytes

    def chunk(self, itemsize: int) -> int:
        if self.capacity < itemsize:
            raise ValueError(f"exchange buffer of {self.capacity} bytes cannot hold one amplitude")
        return self.capacity // itemsize


@dataclass
class RankState:
    rank_id: int
    data: np.ndarray  # complex amplitudes, or (K_l, 2) int8 codes
    perm: list[int]
    local_seconds: float = 0.0


@njit(cache=True)
def _half_indices(j0, j1, bit, upper):
    """Flat offsets of elements j0..j1-1 of the half-slice with local ``bit`` == upper."""
    out = np.empty(j1 - j0, np.int64)
    low = (1 << bit) - 1
    hb = (1 << bit) if upper else 0
    for k in range(j1 - j0):
        j = j0 + k
        out[k] = ((j >> bit) << (bit + 1)) | hb | (j & low)
    return out


@njit(cache=True)
def _shor_physical(n_x, G, y, perm):
    """Physical index of every SHORBOX basis state under bit permutation ``perm``."""
    g = np.uint64(G)
    yy = np.uint64(y)
    f = np.uint64(1)
    out = np.empty(1 << n_x, np.int64)
    for x in range(1 << n_x):
        logical = x + (np.int64(f) << n_x)
        phys = 0
        for q in range(perm.size):
            if (logical >> q) & 1:
                phys |= 1 << perm[q]
        out[x] = phys
        f = (f * yy) % g
    return out


class DistBackend(Backend):
    """Coordinator for ``K_h`` ranks holding exact or encoded slices."""

    def __init__(self, n_qubits: int, layout: RankLayout, transport: Transport | None = None,
                 perm: BitPermutation | None = None, storage: str = "exact",
                 buffer_bytes: int | None = None):
        if storage not in ("exact", "encoded"):
            raise ValueError(f"unknown storage {storage!r}")
        self.n_qubits = n_qubits
        self.layout = layout
        self.storage = storage
        self.transport = transport or Transport(layout.k_high)
        self.buffer = ExchangeBuffer(buffer_bytes or layout.buffer_bytes())
        perm = list((perm or BitPermutation.identity(n_qubits)).perm)
        itemsize = 16 if storage == "exact" else 2
        check_memory(itemsize << n_qubits, f"{storage} state over {layout.k_high} ranks")
        self.ranks = []
        for r in range(layout.k_high):
            if storage == "exact":
                data = np.zeros(layout.k_low, np.complex128)
            else:
                data = np.empty((layout.k_low, 2), np.int8)
                data[:, 0] = E.ZERO
                data[:, 1] = 0
            self.ranks.append(RankState(r, data, list(perm)))
        if storage == "exact":
            self.ranks[0].data[0] = 1.0
        else:
            self.ranks[0].data[0, 0] = E.ONE
        self.r0, self.r1 = enc.SENTINEL
        self.bounds_history: list[dict] = []
        self.swap_trace: list[dict] = []
        self.instruction_bytes: list[dict] = []
        self.forgone_bytes = 0

    # -- layout ---------------------------------------------------------------------------

    @property
    def perm(self) -> list[int]:
        return self.ranks[0].perm

    def is_local(self, pos: int) -> bool:
        return pos < self.layout.n_low

    def swap_global_local(self, j_global: int, j_local: int, reason: str = "") -> int:
        """Exchange physical bit ``j_global`` with ``j_local``; returns bytes moved."""
        lay = self.layout
        if self.is_local(j_global) or not self.is_local(j_local):
            raise ValueError(f"need a global and a local position, got {j_global}, {j_local}")
        gbit = 1 << (j_global - lay.n_low)
        itemsize = self.ranks[0].data[:1].nbytes
        dtype = self.ranks[0].data.dtype
        row = self.ranks[0].data.shape[1:]
        half = lay.k_low // 2
        chunk = self.buffer.chunk(itemsize)
        before = self.transport.bytes_sent
        for lo_rank in range(lay.k_high):
            if lo_rank & gbit:
                continue
            hi_rank = lo_rank | gbit
            a, b = self.ranks[lo_rank].data, self.ranks[hi_rank].data
            for j0 in range(0, half, chunk):
                j1 = min(half, j0 + chunk)
                ia = _half_indices(j0, j1, j_local, True)   # low rank gives its bit=1 half
                ib = _half_indices(j0, j1, j_local, False)  # high rank gives its bit=0 half
                self.transport.send(lo_rank, hi_rank, a[ia].tobytes())
                incoming = self.transport.receive(hi_rank, lo_rank)
                self.transport.send(hi_rank, lo_rank, b[ib].tobytes())
                b[ib] = np.frombuffer(incoming, dtype=dtype).reshape((-1,) + row)
                a[ia] = np.frombuffer(self.transport.receive(lo_rank, hi_rank),
                                      dtype=dtype).reshape((-1,) + row)
        for rank in self.ranks:
            p = rank.perm
            qa, qb = p.index(j_global), p.index(j_local)
            p[qa], p[qb] = j_local, j_global
        moved = self.transport.bytes_sent - before
        self.swap_trace.append({"global": j_global, "local": j_local, "reason": reason,
                                "bytes": moved})
        return moved

    def localize(self, qubits, reason: str) -> tuple[int, ...]:
        """Bring every logical qubit in ``qubits`` to a local position."""
        busy = {self.perm[q] for q in qubits}
        if len(qubits) > self.layout.n_low:
            raise ExecutionError(
                f"{len(qubits)} operands cannot all be local with {self.layout.n_low} local qubits")
        for q in qubits:
            pos = self.perm[q]
            if self.is_local(pos):
                continue
            partner = max(p for p in range(self.layout.n_low) if p not in busy)
            self.swap_global_local(pos, partner, reason)
            busy.discard(pos)
            busy.add(partner)
        return tuple(self.perm[q] for q in qubits)

    def canonicalize(self) -> None:
        """Move every qubit back to its own bit position."""
        n_low = self.layout.n_low
        for g in range(n_low, self.n_qubits):
            pos = self.perm[g]
            if pos == g:
                continue
            if not self.is_local(pos):
                self.swap_global_local(pos, n_low - 1, "restore")
                pos = self.perm[g]
            self.swap_global_local(g, pos, "restore")
        perm = self.perm[:n_low]
        if perm != list(range(n_low)):
            for rank in self.ranks:
                rank.data = self._transpose_local(rank.data, perm)
                rank.perm[:n_low] = range(n_low)

    @staticmethod
    def _transpose_local(data: np.ndarray, perm: list[int]) -> np.ndarray:
        n = len(perm)
        extra = list(data.shape[1:])
        arr = data.reshape([2] * n + extra)
        # array axis k holds bit n-1-k
        axes = [n - 1 - perm[n - 1 - k] for k in range(n)] + list(range(n, n + len(extra)))
        return np.ascontiguousarray(arr.transpose(axes)).reshape(data.shape)

    # -- per-rank helpers -------------------------------------------------------------

    def _each(self, fn):
        out = []
        for rank in self.ranks:
            t0 = time.perf_counter()
            out.append(fn(rank.data))
            rank.local_seconds += time.perf_counter() - t0
        return out

    def _record(self, instr: Instruction | None, label: str, before: int) -> None:
        self.instruction_bytes.append({
            "op": label, "qubits": list(instr.qubits) if instr else [],
            "line": instr.line if instr else None, "bytes": self.transport.bytes_sent - before})

    def _tables(self) -> enc.Tables:
        return enc.Tables(self.r0, self.r1)

    def _set_bounds(self, r0, r1, reason):
        if (r0, r1) != (self.r0, self.r1):
            self.r0, self.r1 = r0, r1
            self.bounds_history.append({"reason": reason, "r0": r0, "r1": r1})

    # -- Backend ------------------------------------------------------------------------

    def apply_gate(self, instr: Instruction) -> None:
        before = self.transport.bytes_sent
        bits = self.localize(instr.qubits, "gate")
        if instr.opcode in (Opcode.CNOT, Opcode.TOFFOLI):
            self.forgone_bytes += self.transport.bytes_sent - before
        self.apply_local(instr, bits)
        self._record(instr, instr.opcode.value, before)

    def apply_local(self, instr: Instruction, bits: tuple[int, ...]) -> None:
        if any(not self.is_local(b) for b in bits):
            raise ExecutionError(f"{instr.opcode.value} has a global operand", instr.line)
        if self.storage == "exact":
            u = gate_matrix(instr)
            self._each(lambda a: update_multi(a, bits, u))
            return
        plan = enc.plan_gate(instr, bits)
        old = self._tables()
        r0, r1 = self.r0, self.r1
        if plan.kind == "general":
            scans = self._each(lambda c: enc.plan_scan(c, plan, old))
            out = enc.merge_ranges(s[0] for s in scans)
            untouched = enc.merge_ranges(s[1] for s in scans)
            r0, r1 = enc.choose_bounds(r0, r1, out, untouched, plan.controlled)
        self._each(lambda c: enc.plan_write(c, plan, old, r0, r1))
        self._set_bounds(r0, r1, instr.opcode.value)

    def bit_probabilities(self, q):
        pos = self.perm[q]
        if self.is_local(pos):
            if self.storage == "exact":
                parts = self._each(lambda a: K.bit_probability(a, pos))
            else:
                mag = self._tables().mag
                parts = self._each(lambda c: E.bit_probability(c, pos, mag))
            return sum(p[0] for p in parts), sum(p[1] for p in parts)
        rbit = 1 << (pos - self.layout.n_low)
        p = [0.0, 0.0]
        for rank, mass in zip(self.ranks, self._norms()):
            p[bool(rank.rank_id & rbit)] += mass
        return p[0], p[1]

    def _norms(self) -> list[float]:
        if self.storage == "exact":
            return self._each(lambda a: float(np.vdot(a, a).real))
        mag = self._tables().mag
        return self._each(lambda c: sum(E.bit_probability(c, 0, mag)))

    def project(self, q, bit, prob):
        pos = self.perm[q]
        scale = 1.0 / np.sqrt(prob)
        local = self.is_local(pos)
        rbit = 0 if local else 1 << (pos - self.layout.n_low)

        def drop(rank) -> bool:
            return not local and bool(rank.rank_id & rbit) != bool(bit)

        if self.storage == "exact":
            for rank in self.ranks:
                if drop(rank):
                    rank.data[:] = 0
                elif local:
                    K.project(rank.data, pos, bit, scale)
                else:
                    rank.data *= scale
            return
        old = self._tables()
        for rank in self.ranks:
            if drop(rank):
                rank.data[:, 0] = E.ZERO
                rank.data[:, 1] = 0
            elif local:
                E.project_codes(rank.data, pos, bit, 0, rank.data.shape[0])
        n = self.layout.k_low
        lo, hi = enc.merge_ranges(self._each(lambda c: E.magnitude_range(c, old.mag, scale, 0, n)))
        r0, r1 = (lo, hi) if lo <= hi else enc.SENTINEL
        self._each(lambda c: E.rescale_mags(c, old.mag, scale, r0, r1, 0, n))
        self._set_bounds(r0, r1, "projection")

    def _qubit_sums(self, pos):
        if self.storage == "exact":
            parts = self._each(lambda a: K.qubit_sums(a, pos))
        else:
            t = self._tables()
            parts = self._each(lambda c: E.qubit_sums(c, pos, t.mag, t.cos, t.sin))
        sx = sy = sz = sn = 0.0
        for px, py, pz, pn in parts:
            sx, sy, sz, sn = sx + px, sy + py, sz + pz, sn + pn
        return 0.5 - sx / sn, 0.5 - sy / sn, sz / sn

    def expectations(self) -> MeasurementRecord:
        before = self.transport.bytes_sent
        vals = np.zeros((self.n_qubits, 3))
        pending = []
        for q in range(self.n_qubits):
            if self.is_local(self.perm[q]):
                vals[q] = self._qubit_sums(self.perm[q])
            else:
                pending.append(q)
        for q in pending:
            (pos,) = self.localize((q,), "measure")
            vals[q] = self._qubit_sums(pos)
        self._record(None, "BEGIN MEASUREMENT", before)
        return MeasurementRecord(vals[:, 0], vals[:, 1], vals[:, 2])

    def sample(self, uniforms):
        before = self.transport.bytes_sent
        self.canonicalize()
        block_bits = min(SAMPLE_BLOCK_BITS, self.layout.n_low)
        per_rank = self.layout.k_low >> block_bits
        size = 1 << block_bits
        masses = np.empty(self.layout.k_high * per_rank)
        if self.storage == "exact":
            for r, rank in enumerate(self.ranks):
                K.block_masses(rank.data, block_bits, masses[r * per_rank:(r + 1) * per_rank])

            def probs(b):
                seg = self.ranks[b // per_rank].data[(b % per_rank) * size:][:size]
                return seg.real ** 2 + seg.imag ** 2
        else:
            mag = self._tables().mag
            for r, rank in enumerate(self.ranks):
                E.block_masses(rank.data, mag, block_bits, masses[r * per_rank:(r + 1) * per_rank])

            def probs(b):
                seg = self.ranks[b // per_rank].data[(b % per_rank) * size:][:size]
                return mag[seg[:, 0].astype(np.int64) + 128] ** 2
        out = tree_sample(masses, probs, uniforms)
        self._record(None, "GENERATE EVENTS", before)
        return out

    def is_ground_state(self):
        first = self.ranks[0].data
        if self.storage == "exact":
            return first[0] == 1 and all(
                np.count_nonzero(r.data) == (r.rank_id == 0) for r in self.ranks)
        return first[0, 0] == E.ONE and first[0, 1] == 0 and all(
            E.count_nonzero(r.data, 0, self.layout.k_low) == (r.rank_id == 0) for r in self.ranks)

    def shorbox(self, params: ShorParams) -> None:
        phys = _shor_physical(params.n_x, params.G, params.y, np.array(self.perm, np.int64))
        owner = phys >> self.layout.n_low
        offset = phys & (self.layout.k_low - 1)
        amp = 2.0 ** (-params.n_x / 2)
        for rank in self.ranks:
            mine = offset[owner == rank.rank_id]
            if self.storage == "exact":
                rank.data[0] = 0
                rank.data[mine] = amp
            else:
                rank.data[0] = (E.ZERO, 0)
                rank.data[mine] = (0, 0)
        if self.storage == "encoded":
            self._set_bounds(amp, amp, "SHORBOX")

    def gather(self) -> np.ndarray:
        """Logical state vector (exact storage) or decoded amplitudes (encoded)."""
        if self.storage == "exact":
            phys = np.concatenate([r.data for r in self.ranks])
        else:
            phys = np.concatenate([enc.decode_array(r.data, self.r0, self.r1) for r in self.ranks])
        idx = np.arange(phys.size)
        logical_to_phys = np.zeros_like(idx)
        for q, p in enumerate(self.perm):
            logical_to_phys |= ((idx >> q) & 1) << p
        return phys[logical_to_phys]

    def diagnostics(self) -> dict:
        lay = self.layout
        d = {"ranks": lay.k_high, "n_high": lay.n_high, "n_low": lay.n_low,
             "buffer_bytes": self.buffer.capacity, "transport_bytes": self.transport.bytes_sent,
             "messages": self.transport.messages, "swap_trace": self.swap_trace,
             "instruction_bytes": self.instruction_bytes,
             "cnot_toffoli_exchange_bytes": self.forgone_bytes,
             "local_seconds": [r.local_seconds for r in self.ranks],
             "permutation": list(self.perm), "storage": self.storage}
        if self.storage == "encoded":
            d.update(r0=self.r0, r1=self.r1, bounds_history=self.bounds_history)
        return d


class DistEngine(Interpreter):
    """Runs a circuit over ``ranks`` in-process ranks (a power of two)."""

    name = "dist"

    def __init__(self, ranks: int = 2, storage: str = "exact", buffer_bytes: int | None = None,
                 transport: Transport | None = None):
        if ranks < 1 or ranks & (ranks - 1):
            raise ValueError(f"rank count must be a power of two, got {ranks}")
        self.ranks = ranks
        self.storage = storage
        self.buffer_bytes = buffer_bytes
        self.transport = transport

    def make_backend(self, circuit: Circuit) -> DistBackend:
        layout = partition(circuit.n_qubits, self.ranks.bit_length() - 1)
        return DistBackend(circuit.n_qubits, layout, self.transport, circuit.bit_assignment,
                           self.storage, self.buffer_bytes)


def run_distributed(circuit: Circuit, layout: RankLayout, transport: Transport | None = None,
                    rng: Rng | int | None = None, storage: str = "exact"):
    return DistEngine(layout.k_high, storage, transport=transport).run(circuit, rng)
