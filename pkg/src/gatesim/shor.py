"""Classical side of period finding: from sampled x-register values to factors."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Optional

from .circuit import Circuit, ShorParams, gen_shor

MAX_MULTIPLE = 8


@dataclass
class ShorOutcome:
    samples: list[int]
    period: Optional[int] = None
    factors: Optional[tuple[int, int]] = None
    reason: str = ""
    candidates: list[int] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.factors is not None


def classical_order(y: int, G: int) -> int:
    """Smallest r > 0 with y^r = 1 mod G, by brute force."""
    if gcd(y, G) != 1:
        raise ValueError(f"{y} is not invertible modulo {G}")
    r, v = 1, y % G
    while v != 1 % G:
        v = v * y % G
        r += 1
    return r


def period_candidates(c: int, n_x: int, G: int, y: int) -> list[int]:
    """Periods consistent with one sample ``c`` of the transformed x-register."""
    if c == 0:
        return []
    d = Fraction(c, 1 << n_x).limit_denominator(G).denominator
    return [k * d for k in range(1, MAX_MULTIPLE + 1) if pow(y, k * d, G) == 1]


def factors_from_period(r: int, params: ShorParams) -> tuple[Optional[tuple[int, int]], str]:
    G, y = params.G, params.y
    if r % 2:
        return None, f"period {r} is odd; retry with a different y"
    h = pow(y, r // 2, G)
    if h == G - 1:
        return None, f"y^(r/2) = -1 mod {G}; retry with a different y"
    for p in (gcd(h - 1, G), gcd(h + 1, G)):
        if 1 < p < G and G % p == 0:
            q = G // p
            return (min(p, q), max(p, q)), ""
    return None, f"gcd test on period {r} gave only trivial divisors"


def shor_postprocess(samples: Iterable[int], params: ShorParams) -> ShorOutcome:
    """Recover the period of ``y^x mod G`` and, if possible, the factors of G.

    ``samples`` may be full basis labels; only the low ``n_x`` bits are used.
    """
    mask = (1 << params.n_x) - 1
    xs = [int(s) & mask for s in samples]
    found = sorted({r for c in xs for r in period_candidates(c, params.n_x, params.G, params.y)})
    out = ShorOutcome(xs, candidates=found)
    if not found:
        out.reason = "no sample yields a valid period"
        return out
    out.period = found[0]
    out.factors, out.reason = factors_from_period(out.period, params)
    return out


def shor_circuit(params: ShorParams, n_qubits: Optional[int] = None, events: int = 64,
                 seed: int = 1) -> Circuit:
    """SHORBOX + QFT + sampling with the smallest register that fits."""
    n = n_qubits or params.n_x + params.f_width()
    return gen_shor(n, params, events, seed)
