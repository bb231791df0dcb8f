"""Spectral rigidity Delta_3 of a level sequence.

Two evaluations are provided:

* :func:`delta3_unfolded` - exact minimum over (a, b) of
  (1/L) int_0^L (N(x+eps) - a eps - b)^2 deps for unfolded levels in a window,
  via the Bohigas-Giannoni closed form;
* :func:`delta3_sampled` - the same integral with N replaced by a staircase
  known only on a grid of step h and (a, b) fitted to the grid points.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .fitting import RankError, linear_lsq
from .gapstats import IncompleteDataError
from .sieve import PrimeStream, SieveConfig, StaircaseSample
from .specfun import li_array, li_inverse, riemann_r_array, riemann_r_inverse

UNFOLDED = "unfolded"
SAMPLED = "sampled"


class AlignmentError(ValueError):
    """Window length is not a whole number of grid steps."""


@dataclass(frozen=True)
class UnfoldedWindow:
    x: float
    L: float
    levels: np.ndarray

    @classmethod
    def from_levels(cls, levels, x: float, L: float) -> "UnfoldedWindow":
        """Keep the levels with x < e <= x + L."""
        if not L > 0:
            raise ValueError(f"window length must be positive, got {L}")
        e = np.sort(np.asarray(levels, dtype=np.float64))
        lo = np.searchsorted(e, x, side="right")
        hi = np.searchsorted(e, x + L, side="right")
        return cls(float(x), float(L), e[lo:hi])

    @property
    def centered(self) -> np.ndarray:
        return self.levels - (self.x + self.L / 2)

    def __len__(self):
        return len(self.levels)


def delta3_unfolded(window: UnfoldedWindow) -> float:
    """Bohigas-Giannoni closed form, levels indexed k = 1..n in ascending order."""
    L = window.L
    if not L > 0:
        raise ValueError(f"window length must be positive, got {L}")
    n = len(window)
    if n == 0:
        return 0.0
    e = window.centered
    k = np.arange(1, n + 1, dtype=np.float64)
    s1 = e.sum()
    s2 = (e * e).sum()
    cross = ((n - 2 * k + 1) * e).sum()
    L2 = L * L
    return n * n / 16.0 - s1 * s1 / L2 + 1.5 * n * s2 / L2 - 3.0 * s2 * s2 / (L2 * L2) + cross / L


@dataclass(frozen=True)
class RigidityCurve:
    method: str
    x: float
    h: int | None
    L: np.ndarray
    values: np.ndarray
    ensemble_size: int = 1
    stderr: np.ndarray | None = field(default=None, compare=False)

    def __iter__(self):
        return iter(zip(self.L.tolist(), self.values.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["L", "delta3", "method", "x", "h", "ensemble_size"])
            for L, v in self:
                w.writerow([repr(float(L)), repr(float(v)), self.method, repr(float(self.x)),
                            "" if self.h is None else self.h, self.ensemble_size])

    @classmethod
    def from_csv(cls, path) -> "RigidityCurve":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: empty rigidity file")
        h = rows[0]["h"]
        return cls(rows[0]["method"], float(rows[0]["x"]), int(h) if h else None,
                   np.array([float(r["L"]) for r in rows]), np.array([float(r["delta3"]) for r in rows]),
                   int(rows[0]["ensemble_size"]))


def unfolded_curve(levels, x: float, L_grid) -> RigidityCurve:
    e = np.sort(np.asarray(levels, dtype=np.float64))
    Ls = np.asarray(L_grid, dtype=np.float64)
    vals = np.array([delta3_unfolded(UnfoldedWindow.from_levels(e, x, L)) for L in Ls.tolist()])
    return RigidityCurve(UNFOLDED, float(x), None, Ls, vals)


# ------------------------------------------------------------------ primes


_UNFOLD = {"li": (li_array, li_inverse), "r": (riemann_r_array, riemann_r_inverse)}


def prime_preimage(x: float, L: float, unfold_mode: str = "r") -> tuple:
    """Integer range [lo, hi) of primes whose unfolded value can land in (x, x+L]."""
    _, inverse = _UNFOLD[unfold_mode]
    lo = inverse(x)
    hi = inverse(x + L)
    pad = 64 + 1e-9 * hi
    return max(int(lo - pad), 2), int(hi + pad) + 1


def unfolded_prime_levels(x: float, L: float, unfold_mode: str = "r", primes: PrimeStream | None = None):
    """Unfolded values r = Li(p) or R(p) of the primes landing in (x, x+L]."""
    if unfold_mode not in _UNFOLD:
        raise ValueError(f"unfold_mode must be 'li' or 'r', got {unfold_mode!r}")
    forward, _ = _UNFOLD[unfold_mode]
    lo, hi = prime_preimage(x, L, unfold_mode)
    if primes is None:
        primes = PrimeStream(SieveConfig(hi, start=lo))
    elif primes.start > lo or primes.limit < hi:
        raise IncompleteDataError(
            f"primes cover [{primes.start}, {primes.limit}) but the window needs [{lo}, {hi})")
    p = primes.to_array()
    p = p[(p >= lo) & (p < hi)]
    r = forward(p)
    keep = (r > x) & (r <= x + L)
    return p[keep], r[keep]


def delta3_primes(x: float, L: float, unfold_mode: str = "r", primes: PrimeStream | None = None) -> float:
    _, levels = unfolded_prime_levels(x, L, unfold_mode, primes)
    return delta3_unfolded(UnfoldedWindow.from_levels(levels, x, L))


def prime_curve(x: float, L_grid, unfold_mode: str = "r", primes: PrimeStream | None = None) -> RigidityCurve:
    Ls = np.asarray(L_grid, dtype=np.float64)
    _, levels = unfolded_prime_levels(x, float(Ls.max()), unfold_mode, primes)
    return unfolded_curve(levels, x, Ls)


# ----------------------------------------------------------------- sampled


def smooth_fit_ab(x: float, L: float) -> tuple:
    """Line through (x+eps)/ln(x+eps) at eps = L/4 and 3L/4."""
    if not x > math.e or not L > 0:
        raise ValueError("smooth_fit_ab needs x > e and L > 0")
    q1 = x + L / 4
    q3 = x + 3 * L / 4
    f1 = q1 / math.log(q1)
    f3 = q3 / math.log(q3)
    a = 2.0 / L * (f3 - f1)
    b = f1 - a * L / 4
    return a, b


def delta3_sampled(sample: StaircaseSample, x: int, L: int) -> float:
    """Delta_3' over [x, x+L) from y_k = pi(x + k h), pi constant on each cell.

    The staircase is shifted by y_0 before use; the fitted intercept moves
    with it and the value is unchanged, but far fewer digits cancel.
    """
    h = sample.h
    if L % h:
        raise AlignmentError(f"L={L} is not a multiple of h={h}")
    if (x - sample.x0) % h or x < sample.x0:
        raise AlignmentError(f"x={x} is not on the sample grid")
    n = L // h
    if n < 2:
        raise RankError("need at least two grid points inside the window")
    k0 = (x - sample.x0) // h
    if k0 + n > len(sample):
        raise IncompleteDataError(f"sample ends at {sample.x0 + (len(sample) - 1) * h}, window needs {x + L - h}")
    y = np.asarray(sample.values[k0 : k0 + n], dtype=np.float64)
    y = y - y[0]
    k = np.arange(n, dtype=np.float64)
    fit = linear_lsq(k * h, y)
    a, b = fit.a, fit.b
    Lf = float(L)
    hf = float(h)
    tail = (y * (y - 2 * b) * hf - a * y * (2 * k + 1) * hf * hf).sum()
    return b * b + a * b * Lf + a * a * Lf * Lf / 3.0 + tail / Lf


def sampled_curve(sample: StaircaseSample, x: int, L_grid) -> RigidityCurve:
    Ls = [int(L) for L in L_grid]
    vals = np.array([delta3_sampled(sample, x, L) for L in Ls])
    return RigidityCurve(SAMPLED, float(x), sample.h, np.array(Ls, dtype=np.float64), vals)


def leading_term(x: float, h: float) -> float:
    """h^2 / (3 ln^2 x)."""
    if not x > 1 or not h > 0:
        raise ValueError("leading_term needs x > 1 and h > 0")
    lx = math.log(x)
    return h * h / (3.0 * lx * lx)


def doubling_grid(first: float, last: float) -> np.ndarray:
    out = []
    L = first
    while L <= last:
        out.append(L)
        L *= 2
    return np.array(out, dtype=np.float64)
