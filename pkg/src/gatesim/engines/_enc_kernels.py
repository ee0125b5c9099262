"""Kernels operating on 2-byte polar amplitude codes.

``codes`` has shape (2^n, 2): column 0 is the magnitude code, column 1 the
phase code.  Decoding goes through 256-entry lookup tables built by the
caller for the current magnitude bounds.
"""
import math

import numpy as np
from numba import njit

from ._kernels import insert_zero_bits, tree_sum

_OPTS = dict(cache=True, nogil=True)

ZERO = -128
ONE = 127
EPS0 = 1e-12
EPS1 = 1e-12


@njit(**_OPTS)
def round_away(x):
    if x >= 0.0:
        return math.floor(x + 0.5)
    return -math.floor(-x + 0.5)


@njit(**_OPTS)
def wrap_phase(v):
    return ((v + 128) % 256) - 128


@njit(**_OPTS)
def is_intermediate(r):
    return r >= EPS0 and r <= 1.0 - EPS1


@njit(**_OPTS)
def encode_mag(r, r0, r1):
    if r < EPS0:
        return ZERO
    if r > 1.0 - EPS1:
        return ONE
    if r1 == r0:
        return 0
    b = round_away((r - r0) * 253.0 / (r1 - r0) - 127.0)
    if b < -127.0:
        b = -127.0
    elif b > 126.0:
        b = 126.0
    return int(b)


@njit(**_OPTS)
def encode_phase(re, im):
    b = int(round_away(128.0 * math.atan2(im, re) / math.pi))
    if b == 128:
        b = -128
    return b


@njit(**_OPTS)
def _store(codes, i, z, r0, r1):
    r = abs(z)
    b0 = encode_mag(r, r0, r1)
    codes[i, 0] = b0
    codes[i, 1] = 0 if b0 == ZERO else encode_phase(z.real, z.imag)


@njit(**_OPTS)
def _load(codes, i, mag, cs, sn):
    r = mag[codes[i, 0] + 128]
    p = codes[i, 1] + 128
    return complex(r * cs[p], r * sn[p])


@njit(**_OPTS)
def swap_pairs(codes, sorted_bits, ctrl_mask, tbit, g0, g1):
    for g in range(g0, g1):
        i0 = insert_zero_bits(g, sorted_bits) | ctrl_mask
        i1 = i0 | tbit
        for c in range(2):
            t = codes[i0, c]
            codes[i0, c] = codes[i1, c]
            codes[i1, c] = t


@njit(**_OPTS)
def y_pairs(codes, sorted_bits, tbit, g0, g1):
    """Y: new a0 = -i a1, new a1 = i a0."""
    for g in range(g0, g1):
        i0 = insert_zero_bits(g, sorted_bits)
        i1 = i0 | tbit
        m0 = codes[i0, 0]
        p0 = codes[i0, 1]
        m1 = codes[i1, 0]
        p1 = codes[i1, 1]
        codes[i0, 0] = m1
        codes[i0, 1] = 0 if m1 == ZERO else wrap_phase(np.int32(p1) - 64)
        codes[i1, 0] = m0
        codes[i1, 1] = 0 if m0 == ZERO else wrap_phase(np.int32(p0) + 64)


@njit(**_OPTS)
def phase_shift(codes, mask, delta, i0, i1):
    """Add ``delta`` phase steps to every nonzero amplitude whose ``mask`` bits are all 1."""
    for i in range(i0, i1):
        if (i & mask) == mask and codes[i, 0] != ZERO:
            v = int(round_away(codes[i, 1] + delta))
            codes[i, 1] = wrap_phase(v)


@njit(**_OPTS)
def gate_scan(codes, sorted_bits, ctrl_mask, tbit, u, mag, cs, sn, g0, g1):
    """Min and max intermediate output magnitude of a (controlled) 2x2 update."""
    lo = np.inf
    hi = -np.inf
    for g in range(g0, g1):
        i0 = insert_zero_bits(g, sorted_bits) | ctrl_mask
        i1 = i0 | tbit
        if codes[i0, 0] == ZERO and codes[i1, 0] == ZERO:
            continue
        x = _load(codes, i0, mag, cs, sn)
        y = _load(codes, i1, mag, cs, sn)
        r = abs(u[0, 0] * x + u[0, 1] * y)
        if is_intermediate(r):
            lo = min(lo, r)
            hi = max(hi, r)
        r = abs(u[1, 0] * x + u[1, 1] * y)
        if is_intermediate(r):
            lo = min(lo, r)
            hi = max(hi, r)
    return lo, hi


@njit(**_OPTS)
def gate_write(codes, sorted_bits, ctrl_mask, tbit, u, mag, cs, sn, r0, r1, g0, g1):
    for g in range(g0, g1):
        i0 = insert_zero_bits(g, sorted_bits) | ctrl_mask
        i1 = i0 | tbit
        if codes[i0, 0] == ZERO and codes[i1, 0] == ZERO:
            continue
        x = _load(codes, i0, mag, cs, sn)
        y = _load(codes, i1, mag, cs, sn)
        _store(codes, i0, u[0, 0] * x + u[0, 1] * y, r0, r1)
        _store(codes, i1, u[1, 0] * x + u[1, 1] * y, r0, r1)


@njit(**_OPTS)
def untouched_range(codes, ctrl_mask, mag, i0, i1):
    """Min/max intermediate magnitude over amplitudes a controlled gate leaves alone."""
    lo = np.inf
    hi = -np.inf
    for i in range(i0, i1):
        b = codes[i, 0]
        if (i & ctrl_mask) != ctrl_mask and b != ZERO and b != ONE:
            r = mag[b + 128]
            lo = min(lo, r)
            hi = max(hi, r)
    return lo, hi


@njit(**_OPTS)
def recode_untouched(codes, ctrl_mask, mag, r0, r1, i0, i1):
    for i in range(i0, i1):
        b = codes[i, 0]
        if (i & ctrl_mask) != ctrl_mask and b != ZERO and b != ONE:
            codes[i, 0] = encode_mag(mag[b + 128], r0, r1)


@njit(**_OPTS)
def magnitude_range(codes, mag, scale, i0, i1):
    """Min/max of intermediate magnitudes after multiplying every amplitude by ``scale``."""
    lo = np.inf
    hi = -np.inf
    for i in range(i0, i1):
        b = codes[i, 0]
        if b == ZERO:
            continue
        r = mag[b + 128] * scale
        if is_intermediate(r):
            lo = min(lo, r)
            hi = max(hi, r)
    return lo, hi


@njit(**_OPTS)
def rescale_mags(codes, mag, scale, r0, r1, i0, i1):
    for i in range(i0, i1):
        b = codes[i, 0]
        if b != ZERO:
            m = encode_mag(mag[b + 128] * scale, r0, r1)
            codes[i, 0] = m
            if m == ZERO:
                codes[i, 1] = 0


@njit(**_OPTS)
def project_codes(codes, bit, keep, i0, i1):
    """Zero the discarded branch of ``bit``."""
    half = 1 << bit
    want = half if keep else 0
    for i in range(i0, i1):
        if (i & half) != want:
            codes[i, 0] = ZERO
            codes[i, 1] = 0


@njit(**_OPTS)
def bit_probability(codes, bit, mag):
    half = 1 << bit
    p0 = 0.0
    p1 = 0.0
    for i in range(codes.shape[0]):
        b = codes[i, 0]
        if b == ZERO:
            continue
        r = mag[b + 128]
        if i & half:
            p1 += r * r
        else:
            p0 += r * r
    return p0, p1


@njit(**_OPTS)
def qubit_sums(codes, bit, mag, cs, sn):
    half = 1 << bit
    npairs = codes.shape[0] // 2
    sx = 0.0
    sy = 0.0
    sz = 0.0
    sn_ = 0.0
    bx = 0.0
    by = 0.0
    bz = 0.0
    bn = 0.0
    for g in range(npairs):
        i0 = ((g >> bit) << (bit + 1)) | (g & (half - 1))
        i1 = i0 | half
        if codes[i0, 0] != ZERO or codes[i1, 0] != ZERO:
            x = _load(codes, i0, mag, cs, sn)
            y = _load(codes, i1, mag, cs, sn)
            p = x.conjugate() * y
            bx += p.real
            by += p.imag
            z1 = y.real * y.real + y.imag * y.imag
            bz += z1
            bn += x.real * x.real + x.imag * x.imag + z1
        if (g & 4095) == 4095:
            sx += bx
            sy += by
            sz += bz
            sn_ += bn
            bx = 0.0
            by = 0.0
            bz = 0.0
            bn = 0.0
    return sx + bx, sy + by, sz + bz, sn_ + bn


@njit(**_OPTS)
def block_masses(codes, mag, block_bits, out):
    size = 1 << block_bits
    buf = np.empty(size, np.float64)
    for b in range(out.size):
        base = b * size
        for i in range(size):
            r = mag[codes[base + i, 0] + 128]
            buf[i] = r * r
        out[b] = tree_sum(buf, size)


@njit(**_OPTS)
def shorbox_codes(codes, n_x, G, y):
    """Mark x + 2^n_x * (y^x mod G) with the single intermediate magnitude code 0."""
    g = np.uint64(G)
    yy = np.uint64(y)
    f = np.uint64(1)
    for x in range(1 << n_x):
        i = x + (np.int64(f) << n_x)
        codes[i, 0] = 0
        codes[i, 1] = 0
        f = (f * yy) % g


@njit(**_OPTS)
def intermediate_present(codes, i0, i1):
    for i in range(i0, i1):
        b = codes[i, 0]
        if b != ZERO and b != ONE:
            return True
    return False


@njit(**_OPTS)
def count_nonzero(codes, i0, i1):
    n = 0
    for i in range(i0, i1):
        if codes[i, 0] != ZERO:
            n += 1
    return n
