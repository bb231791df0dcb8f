"""Hot inner loops of the sieve and the gap scan.

Every kernel exists twice: a numba version (``*_nb``) written as explicit
loops and a numpy version (``*_np``) written with vectorised slicing.  The
public names at the bottom of the module are bound to one or the other
according to :data:`primespec._accel.USE_NUMBA`.

Bit layout shared by all kernels: a segment starting at the even number
``lo`` holds ``nbits`` bits, bit ``b`` (byte ``b >> 3``, bit ``b & 7``,
little-endian within the byte) stands for the odd number ``lo + 2*b + 1``.
A set bit means "prime".
"""
import numpy as np

from ._accel import USE_NUMBA, njit

#: gap histograms are indexed by d // 2; largest prime gap below 2**64 is 1550
GAP_SLOTS = 1024

_CLEAR_MASK = np.array([0xFF ^ (1 << i) for i in range(8)], dtype=np.uint8)
_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)
_LOWBIT = np.array([(i & -i).bit_length() - 1 if i else -1 for i in range(256)], dtype=np.int64)


def _first_index(p, lo, hi):
    """Bit index of the first odd multiple of ``p`` that is >= max(p*p, lo+1), or -1."""
    pp = p * p
    if pp >= hi:
        return -1
    if pp > lo:
        m = pp
    else:
        m = ((lo + p) // p) * p
        if m % 2 == 0:
            m += p
    return (m - lo - 1) // 2


# --------------------------------------------------------------------- numba


@njit
def _sieve_segment_nb(bits, lo, nbits, base):
    nbytes = (nbits + 7) >> 3
    for i in range(nbytes):
        bits[i] = 0xFF
    tail = nbits & 7
    if tail:
        bits[nbytes - 1] = (1 << tail) - 1
    hi = lo + 2 * nbits
    clear = _CLEAR_MASK
    for t in range(base.shape[0]):
        p = base[t]
        pp = p * p
        if pp >= hi:
            break
        if pp > lo:
            m = pp
        else:
            m = ((lo + p) // p) * p
            if m % 2 == 0:
                m += p
        j = (m - lo - 1) // 2
        # the bit pattern of j & 7 repeats every 8 strides
        p8 = 8 * p
        for r in range(8):
            jr = j + r * p
            if jr >= nbits:
                break
            byte = jr >> 3
            mask = clear[jr & 7]
            step = p8 >> 3
            last = nbits - 1
            while jr <= last:
                bits[byte] &= mask
                byte += step
                jr += p8
    if lo == 0 and nbits > 0:
        bits[0] &= 0xFE


@njit
def _count_bits_nb(bits, nbits):
    table = _POPCOUNT
    total = 0
    for i in range((nbits + 7) >> 3):
        total += table[bits[i]]
    return total


@njit
def _extract_nb(bits, lo, nbits):
    n = _count_bits_nb(bits, nbits)
    out = np.empty(n, dtype=np.int64)
    low = _LOWBIT
    k = 0
    for i in range((nbits + 7) >> 3):
        v = np.int64(bits[i])
        while v:
            b = low[v]
            v &= v - 1
            out[k] = lo + 2 * (8 * i + b) + 1
            k += 1
    return out


@njit
def _gap_scan_nb(bits, lo, nbits, prev, hist):
    """Fold the primes of one segment into ``hist``.

    Returns (count, last_prime, max_gap, max_gap_prime); the gap from
    ``prev`` to the first prime of the segment is included when prev > 0.
    """
    low = _LOWBIT
    count = 0
    gmax = 0
    gprime = 0
    slots = hist.shape[0]
    for i in range((nbits + 7) >> 3):
        v = np.int64(bits[i])
        if v == 0:
            continue
        base = lo + 16 * i + 1
        while v:
            b = low[v]
            v &= v - 1
            n = base + 2 * b
            if prev > 0:
                d = n - prev
                s = d >> 1
                if s >= slots:
                    return -1, n, d, prev
                hist[s] += 1
                if d > gmax:
                    gmax = d
                    gprime = prev
            prev = n
            count += 1
    return count, prev, gmax, gprime


# --------------------------------------------------------------------- numpy


def _sieve_segment_np(bits, lo, nbits, base):
    flags = np.ones(nbits, dtype=bool)
    hi = lo + 2 * nbits
    for p in base.tolist():
        j = _first_index(p, lo, hi)
        if j < 0:
            break
        flags[j::p] = False
    if lo == 0 and nbits > 0:
        flags[0] = False
    packed = np.packbits(flags, bitorder="little")
    bits[: packed.size] = packed


def _flags(bits, nbits):
    return np.unpackbits(bits[: (nbits + 7) >> 3], bitorder="little", count=nbits).astype(bool)


def _count_bits_np(bits, nbits):
    return int(_POPCOUNT[bits[: (nbits + 7) >> 3]].sum()) if nbits else 0


def _extract_np(bits, lo, nbits):
    return lo + 2 * np.flatnonzero(_flags(bits, nbits)).astype(np.int64) + 1


def _gap_scan_np(bits, lo, nbits, prev, hist):
    primes = _extract_np(bits, lo, nbits)
    if primes.size == 0:
        return 0, prev, 0, 0
    seq = np.concatenate(([prev], primes)) if prev > 0 else primes
    gaps = np.diff(seq)
    if gaps.size == 0:
        return int(primes.size), int(primes[-1]), 0, 0
    slots = gaps >> 1
    if slots.max() >= hist.shape[0]:
        i = int(np.argmax(slots >= hist.shape[0]))
        return -1, int(seq[i + 1]), int(gaps[i]), int(seq[i])
    hist += np.bincount(slots, minlength=hist.shape[0])
    i = int(np.argmax(gaps))
    return int(primes.size), int(primes[-1]), int(gaps[i]), int(seq[i])


if USE_NUMBA:
    sieve_segment = _sieve_segment_nb
    count_bits = _count_bits_nb
    extract_primes = _extract_nb
    gap_scan = _gap_scan_nb
else:
    sieve_segment = _sieve_segment_np
    count_bits = _count_bits_np
    extract_primes = _extract_np
    gap_scan = _gap_scan_np
