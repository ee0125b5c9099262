"""In-place amplitude update kernels for full-precision state vectors.

Every kernel works on a half-open range of group indices so that callers can
hand disjoint ranges to different threads; ``nogil`` lets those threads run
concurrently.  Bit positions are physical positions in the array index.
"""
import numpy as np
from numba import njit

_OPTS = dict(cache=True, nogil=True)


@njit(**_OPTS)
def single_kl(a, half, u, k0, k1, l0, l1):
    """2x2 update on pairs (i0, i0 | half); outer loop over high bits, inner over low bits."""
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    step = 2 * half
    for k in range(k0, k1):
        base = k * step
        for l in range(l0, l1):
            i0 = base | l
            i1 = i0 | half
            x = a[i0]
            y = a[i1]
            a[i0] = u00 * x + u01 * y
            a[i1] = u10 * x + u11 * y


@njit(**_OPTS)
def insert_zero_bits(g, sorted_bits):
    for b in sorted_bits:
        low = g & ((1 << b) - 1)
        g = ((g >> b) << (b + 1)) | low
    return g


@njit(**_OPTS)
def controlled_single(a, sorted_bits, ctrl_mask, tbit, u, g0, g1):
    """2x2 update on the target pair of every group whose control bits are all 1."""
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for g in range(g0, g1):
        i0 = insert_zero_bits(g, sorted_bits) | ctrl_mask
        i1 = i0 | tbit
        x = a[i0]
        y = a[i1]
        a[i0] = u00 * x + u01 * y
        a[i1] = u10 * x + u11 * y


@njit(**_OPTS)
def dense_group(a, sorted_bits, operand_bits, u, g0, g1):
    """General 2^m x 2^m update; operand 0 is the most significant local index bit."""
    m = operand_bits.size
    d = 1 << m
    idx = np.empty(d, np.int64)
    buf = np.empty(d, np.complex128)
    for g in range(g0, g1):
        base = insert_zero_bits(g, sorted_bits)
        for r in range(d):
            i = base
            for o in range(m):
                if (r >> (m - 1 - o)) & 1:
                    i |= 1 << operand_bits[o]
            idx[r] = i
            buf[r] = a[i]
        for r in range(d):
            acc = 0j
            for c in range(d):
                acc += u[r, c] * buf[c]
            a[idx[r]] = acc


@njit(**_OPTS)
def qubit_sums(a, bit):
    """Return (Re sum conj(a0) a1, Im sum conj(a0) a1, sum |a1|^2, sum |a|^2) for one bit.

    Accumulates in blocks of 4096 pairs to keep rounding small and fixed.
    """
    half = 1 << bit
    npairs = a.size // 2
    sx = 0.0
    sy = 0.0
    sz = 0.0
    sn = 0.0
    bx = 0.0
    by = 0.0
    bz = 0.0
    bn = 0.0
    for g in range(npairs):
        i0 = ((g >> bit) << (bit + 1)) | (g & (half - 1))
        i1 = i0 | half
        x = a[i0]
        y = a[i1]
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
            sn += bn
            bx = 0.0
            by = 0.0
            bz = 0.0
            bn = 0.0
    return sx + bx, sy + by, sz + bz, sn + bn


@njit(**_OPTS)
def bit_probability(a, bit):
    """(sum |a|^2 over bit=0, over bit=1)."""
    half = 1 << bit
    p0 = 0.0
    p1 = 0.0
    for i in range(a.size):
        v = a[i].real * a[i].real + a[i].imag * a[i].imag
        if i & half:
            p1 += v
        else:
            p0 += v
    return p0, p1


@njit(**_OPTS)
def project(a, bit, keep, scale):
    half = 1 << bit
    want = half if keep else 0
    for i in range(a.size):
        if (i & half) == want:
            a[i] = a[i] * scale
        else:
            a[i] = 0j


@njit(**_OPTS)
def tree_sum(buf, n):
    """Pairwise sum of buf[:n] (n a power of two); destroys buf."""
    while n > 1:
        n //= 2
        for i in range(n):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
    return buf[0]


@njit(**_OPTS)
def block_masses(a, block_bits, out):
    """out[b] = pairwise-tree sum of |a|^2 over block b of 2^block_bits amplitudes."""
    size = 1 << block_bits
    buf = np.empty(size, np.float64)
    for b in range(out.size):
        base = b * size
        for i in range(size):
            v = a[base + i]
            buf[i] = v.real * v.real + v.imag * v.imag
        out[b] = tree_sum(buf, size)


@njit(**_OPTS)
def shorbox_fill(a, n_x, G, y, amp):
    """a[x + 2^n_x * (y^x mod G)] = amp for all x; a must be zero on entry."""
    g = np.uint64(G)
    yy = np.uint64(y)
    f = np.uint64(1)
    for x in range(1 << n_x):
        a[x + (np.int64(f) << n_x)] = amp
        f = (f * yy) % g
