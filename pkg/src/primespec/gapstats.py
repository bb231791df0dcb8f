"""Consecutive-prime gap statistics.

``tau_d(x)`` counts consecutive primes p_n < p_{n+1} < x with
p_{n+1} - p_n = d.  The single odd gap (2, 3) is kept out of the even-gap
tables but it is still a consecutive pair, so ``sum_d tau_d(x) + 1 = pi(x)``
holds once it is added back (see :meth:`GapTable.pair_count`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .sieve import PrimeStream, SieveConfig
from .specfun import TWIN_CONSTANT, li_array, riemann_r_array, singular_series


class IncompleteDataError(RuntimeError):
    """The prime stream does not reach the requested threshold."""


@dataclass(frozen=True)
class GapTable:
    """Gap counts below the threshold ``x``.

    ``pi_x`` is the number of primes below ``x`` (equal to pi(x) whenever x is
    composite, in particular for every power-of-two checkpoint).
    """

    x: int
    counts: dict
    pi_x: int
    max_gap: int
    max_gap_prime: int

    @property
    def odd_pairs(self) -> int:
        """Consecutive pairs with odd gap: only (2, 3), present once x > 3."""
        return 1 if self.x > 3 else 0

    def pair_count(self) -> int:
        return sum(self.counts.values()) + self.odd_pairs

    def identity_holds(self) -> bool:
        return self.pi_x == 0 or self.pair_count() + 1 == self.pi_x

    def tau(self, d: int) -> int:
        return self.counts.get(d, 0)

    def as_arrays(self):
        ds = np.array(sorted(self.counts), dtype=np.int64)
        return ds, np.array([self.counts[d] for d in ds.tolist()], dtype=np.int64)


@dataclass(frozen=True)
class CheckpointSeries:
    tables: tuple

    def __iter__(self):
        return iter(self.tables)

    def __len__(self):
        return len(self.tables)

    @property
    def thresholds(self):
        return [t.x for t in self.tables]

    def table(self, x: int) -> GapTable:
        for t in self.tables:
            if t.x == x:
                return t
        raise LookupError(f"no checkpoint recorded at x={x}")


@dataclass
class ScanState:
    """Running fold state, enough to resume a scan at ``position``."""

    position: int = 0
    hist: np.ndarray = field(default_factory=lambda: np.zeros(kernels.GAP_SLOTS, dtype=np.int64))
    prime_count: int = 0
    last_prime: int = 0
    max_gap: int = 0
    max_gap_prime: int = 0

    def snapshot(self, x: int) -> GapTable:
        nz = np.flatnonzero(self.hist)
        counts = {int(2 * s): int(self.hist[s]) for s in nz.tolist()}
        return GapTable(x, counts, self.prime_count, self.max_gap, self.max_gap_prime)

    @classmethod
    def from_table(cls, table: GapTable, last_prime: int) -> "ScanState":
        hist = np.zeros(kernels.GAP_SLOTS, dtype=np.int64)
        for d, c in table.counts.items():
            hist[d // 2] = c
        return cls(table.x - (table.x & 1), hist, table.pi_x, last_prime, table.max_gap, table.max_gap_prime)


def _check_checkpoints(checkpoints: Sequence[int]) -> list:
    cps = [int(c) for c in checkpoints]
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError(f"checkpoints must be strictly increasing: {cps}")
    return cps


def accumulate(primes: PrimeStream, checkpoints: Sequence[int], state: ScanState | None = None,
               on_checkpoint=None) -> CheckpointSeries:
    """Fold the stream into one GapTable per checkpoint.

    ``state`` resumes an earlier fold; the stream must then start at
    ``state.position``.  ``on_checkpoint(table, state)`` is called as each
    table completes.
    """
    cps = _check_checkpoints(checkpoints)
    if not cps:
        return CheckpointSeries(())
    if primes.limit < cps[-1]:
        raise IncompleteDataError(f"stream ends at {primes.limit}, below checkpoint {cps[-1]}")
    if state is None:
        if primes.start != 0:
            raise ValueError("a fresh accumulation needs a stream starting at 0")
        state = ScanState()
    elif primes.start != state.position:
        raise ValueError(f"resume stream must start at {state.position}, not {primes.start}")
    pending = cps if state.position == 0 else [c for c in cps if c - (c & 1) > state.position]
    tables = []

    def flush(done: int):
        # c is complete once every odd number below it lies below ``done``
        while pending and pending[0] - (pending[0] & 1) <= done:
            t = state.snapshot(pending.pop(0))
            tables.append(t)
            if on_checkpoint is not None:
                on_checkpoint(t, state)

    if state.position == 0:
        while pending and pending[0] <= 2:
            tables.append(state.snapshot(pending.pop(0)))
        if primes.includes_two():
            state.prime_count += 1
    for lo, hi, bits, nbits in primes.segments(splits=pending):
        n, last, gmax, gprime = kernels.gap_scan(bits, lo, nbits, state.last_prime, state.hist)
        if n < 0:
            raise OverflowError(f"gap {gmax} after {gprime} exceeds table capacity")
        state.prime_count += int(n)
        state.last_prime = int(last)
        if gmax > state.max_gap:
            state.max_gap, state.max_gap_prime = int(gmax), int(gprime)
        state.position = hi
        flush(hi)
        if not pending:
            break
    else:
        state.position = max(state.position, primes.limit - (primes.limit & 1))
        flush(state.position)
    return CheckpointSeries(tuple(tables))


def scan_gaps(limit: int, checkpoints: Sequence[int] | None = None, segment_size: int | None = None) -> CheckpointSeries:
    """Convenience wrapper: sieve from 0 and accumulate at ``checkpoints``
    (default: powers of two from 2**15 up to ``limit``)."""
    if checkpoints is None:
        checkpoints = [2**k for k in range(15, limit.bit_length()) if 2**k <= limit]
    kw = {} if segment_size is None else {"segment_size": segment_size}
    return accumulate(PrimeStream(SieveConfig(limit, **kw)), checkpoints)


def max_gap(series: CheckpointSeries, x: int) -> tuple:
    """(G(x), prime opening the gap) for a recorded checkpoint."""
    t = series.table(x)
    if t.max_gap == 0:
        raise ValueError(f"no even gap below x={x}; G(x) is undefined")
    return t.max_gap, t.max_gap_prime


def unfold_gap(p_n: float, d_n: float) -> float:
    """Unfolded spacing d / (ln p + d / p)."""
    if p_n < 3 or d_n < 2 or d_n % 2:
        raise ValueError(f"unfold_gap needs p >= 3 and even d >= 2 (got {p_n}, {d_n})")
    return d_n / (math.log(p_n) + d_n / p_n)


# --------------------------------------------------------- unfolded histograms


@dataclass(frozen=True)
class UnfoldedHistogram:
    bin_width: float
    bins: dict
    source: str
    max_value: float = 0.0

    @property
    def total(self) -> int:
        return sum(self.bins.values())

    def normalized(self, mode: str = "probability"):
        """(bin_centres, heights); ``mode`` is 'probability' (density) or 'max'."""
        idx = np.array(sorted(self.bins), dtype=np.int64)
        counts = np.array([self.bins[i] for i in idx.tolist()], dtype=np.float64)
        centres = (idx + 0.5) * self.bin_width
        if mode == "probability":
            return centres, counts / (counts.sum() * self.bin_width)
        if mode == "max":
            return centres, counts / counts.max()
        raise ValueError(f"unknown normalisation {mode!r}")


def default_bin_widths(max_spacing: float, n_values: int) -> tuple:
    return (0.1, 0.005, max_spacing / math.sqrt(n_values))


def unfolded_spacings(primes: PrimeStream, limit: int | None = None, mode: str = "li"):
    """Yield arrays of r_{n+1} - r_n, r = li(p) or R(p), for odd primes < limit."""
    unfold = {"li": li_array, "r": riemann_r_array}.get(mode)
    if unfold is None:
        raise ValueError(f"mode must be 'li' or 'r', got {mode!r}")
    limit = primes.limit if limit is None else limit
    if limit > primes.limit:
        raise IncompleteDataError(f"stream ends at {primes.limit}, below {limit}")
    prev = None
    for arr in primes.chunks():
        arr = arr[(arr >= 3) & (arr < limit)]
        if arr.size == 0:
            continue
        r = unfold(arr)
        seq = r if prev is None else np.concatenate(([prev], r))
        prev = r[-1]
        if seq.size > 1:
            yield np.diff(seq)


def unfold_histogram(primes: PrimeStream, limit: int, bin_width: float, mode: str = "li") -> UnfoldedHistogram:
    if not bin_width > 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    acc = np.zeros(0, dtype=np.int64)
    dmax = 0.0
    for D in unfolded_spacings(primes, limit, mode):
        idx = np.floor(D / bin_width).astype(np.int64)
        c = np.bincount(idx)
        if c.size > acc.size:
            c[: acc.size] += acc
            acc = c
        else:
            acc[: c.size] += c
        dmax = max(dmax, float(D.max()))
    bins = {int(i): int(acc[i]) for i in np.flatnonzero(acc).tolist()}
    return UnfoldedHistogram(bin_width, bins, f"{mode}-unfold", dmax)


# ---------------------------------------------------------------- rescaling


@dataclass(frozen=True)
class ScaledCurve:
    """Points (u = d pi(x)/x, t = x tau_d / (C2 P(d) pi(x)^2)) for one x."""

    x: int
    d: np.ndarray
    u: np.ndarray
    t: np.ndarray
    tau: np.ndarray
    min_count_filter: int

    def __len__(self):
        return len(self.u)


def rescale(table: GapTable, min_count: int = 1000) -> ScaledCurve:
    if min_count < 0:
        raise ValueError("min_count must be >= 0")
    ds, taus = table.as_arrays()
    keep = taus > min_count
    ds, taus = ds[keep], taus[keep]
    x, pi = float(table.x), float(table.pi_x)
    P = np.array([singular_series(int(d)) for d in ds.tolist()])
    u = ds * pi / x
    t = x * taus / (TWIN_CONSTANT * P * pi * pi)
    return ScaledCurve(table.x, ds, u, t, taus, min_count)


# ---------------------------------------------------------------- Gallagher


@dataclass(frozen=True)
class IntervalCountHistogram:
    h: int
    N: int
    counts: dict
    lam: float

    def pmf(self) -> np.ndarray:
        kmax = max(self.counts) if self.counts else 0
        out = np.zeros(kmax + 1)
        for k, c in self.counts.items():
            out[k] = c / self.N
        return out


def gallagher_counts(h: int, N: int, primes: np.ndarray | None = None,
                     covered_to: int | None = None) -> IntervalCountHistogram:
    """counts[k] = #{0 <= n < N : (n, n+h] holds exactly k primes}.

    ``primes`` may be supplied with ``covered_to``, the bound below which the
    list is known complete; otherwise the range is sieved.
    """
    if h < 1 or N < 1:
        raise ValueError(f"need h >= 1 and N >= 1 (got {h}, {N})")
    top = N - 1 + h
    if primes is None:
        primes = PrimeStream(SieveConfig(top + 1)).to_array()
    elif covered_to is None or covered_to < top:
        raise IncompleteDataError(f"prime list must be complete up to {top} (covered_to={covered_to})")
    primes = primes[primes <= top]
    indicator = np.zeros(top + 1, dtype=np.int32)
    indicator[primes] = 1
    cum = np.cumsum(indicator, dtype=np.int64)  # cum[m] = pi(m)
    k = cum[h : h + N] - cum[:N]
    c = np.bincount(k)
    counts = {int(i): int(c[i]) for i in np.flatnonzero(c).tolist()}
    return IntervalCountHistogram(h, N, counts, h / math.log(N) if N > 1 else math.inf)


def poisson_tv_distance(hist: IntervalCountHistogram, lam: float | None = None) -> float:
    """Total-variation distance between the empirical k-distribution and Poisson(lam)."""
    from scipy.stats import poisson

    lam = hist.lam if lam is None else lam
    emp = hist.pmf()
    ks = np.arange(emp.size)
    pois = poisson.pmf(ks, lam)
    return 0.5 * (np.abs(emp - pois).sum() + max(0.0, 1.0 - pois.sum()))
