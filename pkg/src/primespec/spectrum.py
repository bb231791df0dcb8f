"""Power spectrum of the singular series P(d) sampled at even d."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .specfun import TWIN_CONSTANT, singular_series_table


class SpectrumConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PowerSpectrum:
    M: int
    frequencies: np.ndarray   # n / (2M), n = 0..M-1
    power: np.ndarray         # |sum_k P(2k) exp(-2 pi i k n / M)|^2
    signal: np.ndarray

    @property
    def inv_f(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / self.frequencies

    def half(self):
        """Bins n = 1..M/2 as (1/f, power)."""
        n = np.arange(1, self.M // 2 + 1)
        return self.inv_f[n], self.power[n]

    def peaks(self, count: int = 10):
        """Local maxima of the half spectrum, strongest first, as (1/f, power)."""
        inv, p = self.half()
        inner = np.flatnonzero((p[1:-1] > p[:-2]) & (p[1:-1] >= p[2:])) + 1
        # the Nyquist bin has only one neighbour
        cand = list(inner) + ([len(p) - 1] if p[-1] > p[-2] else [])
        cand.sort(key=lambda i: (-p[i], i))
        return [(float(inv[i]), float(p[i])) for i in cand[:count]]

    def dominant_period(self) -> float:
        inv, p = self.half()
        return float(inv[int(np.argmax(p))])

    def power_near(self, period: float) -> float:
        """Power at the bin whose 1/f is closest to ``period``."""
        inv, p = self.half()
        return float(p[int(np.argmin(np.abs(inv - period)))])

    def to_csv(self, path) -> None:
        inv, p = self.half()
        order = np.argsort(inv, kind="stable")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["inv_f", "power"])
            for i in order.tolist():
                w.writerow([repr(float(inv[i])), repr(float(p[i]))])


def singular_series_signal(M: int) -> np.ndarray:
    """P(2k) for k = 0..M-1 with P(0) set to the mean 2/C2."""
    table = singular_series_table(2 * M)
    s = table[0 : 2 * M : 2].copy()
    s[0] = 2.0 / TWIN_CONSTANT
    return s


def spectrum_of(signal) -> PowerSpectrum:
    s = np.asarray(signal, dtype=np.float64)
    M = s.size
    if M < 8:
        raise SpectrumConfigError(f"need M >= 8 samples, got {M}")
    F = np.fft.fft(s)
    power = F.real**2 + F.imag**2
    return PowerSpectrum(M, np.arange(M) / (2.0 * M), power, s)


def power_spectrum(M: int) -> PowerSpectrum:
    if M < 8:
        raise SpectrumConfigError(f"need M >= 8 samples, got {M}")
    return spectrum_of(singular_series_signal(M))


def parseval_error(spec: PowerSpectrum) -> float:
    lhs = float(np.sum(spec.signal**2))
    rhs = float(np.sum(spec.power)) / spec.M
    return abs(lhs - rhs) / lhs
