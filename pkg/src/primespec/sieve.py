"""Segmented, odd-only, bit-packed sieve of Eratosthenes.

The stream works on half-open ranges ``[start, limit)``.  Each segment is a
bitset with one bit per odd integer (see :mod:`primespec.kernels` for the
layout); the prime 2 is emitted separately.  Base primes up to
``isqrt(limit)`` are produced once by a small non-segmented sieve.
"""
from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import kernels

MAX_LIMIT = 2**62
DEFAULT_SEGMENT_SIZE = 2**20


class SieveConfigError(ValueError):
    """Invalid sieve parameters or a query outside the sieved range."""


@dataclass(frozen=True)
class SieveConfig:
    """``limit`` is exclusive, ``start`` inclusive; ``segment_size`` is in bytes."""

    limit: int
    segment_size: int = DEFAULT_SEGMENT_SIZE
    start: int = 0
    base_primes_path: str | None = None

    def __post_init__(self):
        if self.segment_size <= 0:
            raise SieveConfigError(f"segment_size must be positive, got {self.segment_size}")
        if self.limit > MAX_LIMIT:
            raise SieveConfigError(f"limit {self.limit} exceeds supported range 2**62")
        if self.start < 0:
            raise SieveConfigError(f"start must be non-negative, got {self.start}")


def small_primes(n: int) -> np.ndarray:
    """All primes <= n (plain byte sieve, used for base primes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


@lru_cache(maxsize=8)
def _base_table(bound: int) -> np.ndarray:
    table = small_primes(bound)
    table.setflags(write=False)
    return table


_BASE_MAGIC = b"PSBASE1\0"


def save_base_primes(path, primes: np.ndarray, bound: int) -> None:
    """Binary checkpoint: magic, uint64 bound, uint64 count, then the primes
    (all primes <= bound) as little-endian uint64."""
    primes = np.asarray(primes, dtype="<u8")
    with open(path, "wb") as fh:
        fh.write(_BASE_MAGIC)
        fh.write(struct.pack("<QQ", bound, primes.size))
        fh.write(primes.tobytes())


def load_base_primes(path) -> tuple[int, np.ndarray]:
    with open(path, "rb") as fh:
        if fh.read(8) != _BASE_MAGIC:
            raise SieveConfigError(f"{path}: not a base-prime checkpoint file")
        bound, n = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(8 * n), dtype="<u8")
    if data.size != n:
        raise SieveConfigError(f"{path}: truncated base-prime file")
    return int(bound), data.astype(np.int64)


class PrimeStream:
    """Ordered primes in ``[config.start, config.limit)``.

    Iterating yields Python ints (convenient, slow); :meth:`chunks` yields one
    numpy array per segment and :meth:`segments` exposes the raw bitsets for
    kernels that fold over them.
    """

    def __init__(self, config: SieveConfig):
        self.config = config
        self._base = None

    @property
    def start(self) -> int:
        return self.config.start

    @property
    def limit(self) -> int:
        return self.config.limit

    @property
    def base_primes(self) -> np.ndarray:
        """Primes <= isqrt(limit - 1), loaded from the checkpoint file when it covers them."""
        if self._base is None:
            need = math.isqrt(max(self.limit - 1, 0))
            path = self.config.base_primes_path
            if path is not None and Path(path).exists():
                bound, primes = load_base_primes(path)
                if bound >= need:
                    self._base = primes[primes <= need]
            if self._base is None:
                self._base = _base_table(need)
                if path is not None:
                    save_base_primes(path, self._base, need)
        return self._base

    def includes_two(self) -> bool:
        return self.start <= 2 < self.limit

    def segments(self, splits: Sequence[int] = ()) -> Iterator[tuple[int, int, np.ndarray, int]]:
        """Yield ``(lo, hi, bits, nbits)`` covering the odd numbers of the range.

        ``lo`` and ``hi`` are even; the segment holds odd n with lo < n < hi.
        Every value in ``splits`` (rounded down to even) is a segment boundary,
        so a fold can snapshot "all primes < split" between segments.  The
        ``bits`` buffer is reused; consume it before advancing.
        """
        if self.limit <= max(self.start, 3):
            return
        lo = self.start - (self.start & 1)
        end = self.limit - (self.limit & 1)
        span = 16 * self.config.segment_size
        cuts = sorted({s - (s & 1) for s in splits if lo < s - (s & 1) < end})
        odd_base = self.base_primes[1:] if self.base_primes.size else self.base_primes
        buf = np.empty(self.config.segment_size, dtype=np.uint8)
        ci = 0
        while lo < end:
            hi = min(lo + span, end)
            while ci < len(cuts) and cuts[ci] <= lo:
                ci += 1
            if ci < len(cuts) and cuts[ci] < hi:
                hi = cuts[ci]
            nbits = (hi - lo) // 2
            kernels.sieve_segment(buf, lo, nbits, odd_base)
            yield lo, hi, buf, nbits
            lo = hi

    def chunks(self) -> Iterator[np.ndarray]:
        if self.includes_two():
            yield np.array([2], dtype=np.int64)
        for lo, hi, bits, nbits in self.segments():
            arr = kernels.extract_primes(bits, lo, nbits)
            if self.start > lo + 1:
                arr = arr[arr >= self.start]
            if arr.size:
                yield arr

    def __iter__(self) -> Iterator[int]:
        for arr in self.chunks():
            yield from arr.tolist()

    def to_array(self) -> np.ndarray:
        parts = list(self.chunks())
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def count(self) -> int:
        total = 1 if self.includes_two() else 0
        for lo, hi, bits, nbits in self.segments():
            if self.start > lo + 1:
                total += int(np.count_nonzero(kernels.extract_primes(bits, lo, nbits) >= self.start))
            else:
                total += int(kernels.count_bits(bits, nbits))
        return total

    def count_below(self, x: int) -> int:
        """Number of streamed primes < x; x beyond the range is an error."""
        if x > self.limit:
            raise SieveConfigError(f"x={x} lies beyond the sieved range [.., {self.limit})")
        return PrimeStream(SieveConfig(x, self.config.segment_size, self.start)).count()


def stream_primes(config: SieveConfig) -> PrimeStream:
    return PrimeStream(config)


def prime_count(x: int, segment_size: int = DEFAULT_SEGMENT_SIZE) -> int:
    """Exact pi(x), the number of primes <= x, by sieving."""
    if x < 0:
        raise SieveConfigError(f"prime_count needs x >= 0, got {x}")
    if x + 1 > MAX_LIMIT:
        raise SieveConfigError(f"x={x} beyond sieve range")
    return PrimeStream(SieveConfig(x + 1, segment_size)).count()


@dataclass(frozen=True)
class StaircaseSample:
    """``values[k] = pi(x0 + k*h)``."""

    x0: int
    h: int
    values: np.ndarray

    def __len__(self):
        return len(self.values)

    def grid(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(len(self.values), dtype=np.int64)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "pi(x)"])
            for x, y in zip(self.grid().tolist(), np.asarray(self.values).tolist()):
                w.writerow([x, y])

    @classmethod
    def from_csv(cls, path) -> "StaircaseSample":
        """Read ``x,pi`` rows with a uniform stride (header optional)."""
        xs, ys = [], []
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    xs.append(int(float(row[0])) if "e" in row[0].lower() else int(row[0]))
                    ys.append(int(row[1]))
                except (ValueError, IndexError):
                    if lineno == 1:
                        continue
                    raise SieveConfigError(f"{path}:{lineno}: malformed row {row!r}") from None
        if len(xs) < 2:
            raise SieveConfigError(f"{path}: need at least two rows")
        steps = np.diff(np.asarray(xs, dtype=np.int64))
        if steps.min() <= 0 or steps.min() != steps.max():
            raise SieveConfigError(f"{path}: grid is not uniform and increasing")
        return cls(xs[0], int(steps[0]), np.asarray(ys, dtype=np.int64))


def sample_staircase(x0: int, h: int, n_samples: int, segment_size: int = DEFAULT_SEGMENT_SIZE) -> StaircaseSample:
    """pi on the grid x0, x0+h, ..., x0+(n_samples-1)h."""
    if x0 < 0 or h < 1 or n_samples < 1:
        raise SieveConfigError(f"need x0 >= 0, h >= 1, n_samples >= 1 (got {x0}, {h}, {n_samples})")
    top = x0 + (n_samples - 1) * h
    if top + 1 > MAX_LIMIT:
        raise SieveConfigError(f"grid end {top} beyond sieve range")
    pi0 = prime_count(x0, segment_size)
    grid = x0 + h * np.arange(n_samples, dtype=np.int64)
    values = np.full(n_samples, pi0, dtype=np.int64)
    full = np.zeros(n_samples + 1, dtype=np.int64)
    for arr in PrimeStream(SieveConfig(top + 1, segment_size, start=x0 + 1)).chunks():
        a = int(np.searchsorted(grid, arr[0], side="left"))
        b = int(np.searchsorted(grid, arr[-1], side="left"))
        values[a:b] += np.searchsorted(arr, grid[a:b], side="right")
        full[b] += arr.size
    values += np.cumsum(full)[:n_samples]
    return StaircaseSample(x0, h, values)
