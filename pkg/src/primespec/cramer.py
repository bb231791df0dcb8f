"""Cramer random model: integer k is declared prime with probability 1/ln k.

Each sample draws from its own PCG64 stream keyed by (seed, sample index),
so a sample is reproducible on its own and independent of worker count.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .rigidity import UNFOLDED, RigidityCurve, unfolded_curve
from .specfun import li_array, li_inverse, riemann_r, riemann_r_array, riemann_r_inverse, li

#: candidates drawn per RNG call; fixed so the stream layout never changes
BLOCK = 1 << 18

_UNFOLD = {
    "r": (riemann_r, riemann_r_array, riemann_r_inverse),
    "li": (li, li_array, li_inverse),
}


def first_candidate(x: float, unfold: str = "r") -> int:
    """Smallest integer k with U(k) > x, U being R or li."""
    f, _, inv = _UNFOLD[unfold]
    k = max(int(inv(x)) - 2, 3)
    while f(k) <= x:
        k += 1
    while k > 3 and f(k - 1) > x:
        k -= 1
    return k


@dataclass(frozen=True)
class CramerConfig:
    x: float = 1e6
    L_max: float = 2.0**14
    seed: int = 0
    samples: int = 100
    include_even: bool = True
    k0: int | None = None
    unfold: str = "r"

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.unfold not in _UNFOLD:
            raise ValueError(f"unfold must be 'r' or 'li', got {self.unfold!r}")
        if self.k0 is None:
            object.__setattr__(self, "k0", first_candidate(self.x, self.unfold))
        if self.k0 < 3:
            raise ValueError(f"k0 must be >= 3, got {self.k0}")
        if not self.L_max > 0:
            raise ValueError("L_max must be positive")

    @property
    def k_end(self) -> int:
        """Last candidate whose unfolded value can fall inside (x, x + L_max]."""
        _, _, inv = _UNFOLD[self.unfold]
        return int(inv(self.x + self.L_max)) + 2

    def rng(self, index: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, index])))


def generate_sample(config: CramerConfig, rng: np.random.Generator) -> np.ndarray:
    """Accepted k in [k0, k_end], ascending.

    With ``include_even`` false only odd k are candidates and each is kept
    with probability 2/ln k.
    """
    step = 1 if config.include_even else 2
    start = config.k0 if config.include_even else config.k0 | 1
    end = config.k_end
    scale = 1.0 if config.include_even else 2.0
    out = []
    lo = start
    while lo <= end:
        k = lo + step * np.arange(BLOCK, dtype=np.int64)
        u = rng.random(BLOCK)
        hit = u < scale / np.log(k.astype(np.float64))
        k = k[hit]
        out.append(k[k <= end])
        lo += step * BLOCK
    return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


def sample_curve(config: CramerConfig, index: int, L_grid) -> RigidityCurve:
    k = generate_sample(config, config.rng(index))
    _, forward, _ = _UNFOLD[config.unfold]
    return unfolded_curve(forward(k), config.x, L_grid)


def _sample_values(args):
    config, index, L_grid = args
    return sample_curve(config, index, L_grid).values


@dataclass(frozen=True)
class CramerEnsemble:
    config: CramerConfig
    per_sample: list
    mean_curve: RigidityCurve
    stderr: np.ndarray = field(repr=False)

    @property
    def L(self) -> np.ndarray:
        return self.mean_curve.L

    def slope_through_origin(self) -> float:
        L = self.mean_curve.L
        return float((L * self.mean_curve.values).sum() / (L * L).sum())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["L", "mean_delta3", "stderr", "n_samples"])
            for L, m, s in zip(self.L.tolist(), self.mean_curve.values.tolist(), self.stderr.tolist()):
                w.writerow([repr(L), repr(m), repr(s), len(self.per_sample)])

    def samples_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sample", "L", "delta3"])
            for i, c in enumerate(self.per_sample):
                for L, v in c:
                    w.writerow([i, repr(L), repr(v)])


def read_ensemble_csv(path):
    """(L, mean, stderr, n_samples) arrays from an ensemble CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    L = np.array([float(r["L"]) for r in rows])
    m = np.array([float(r["mean_delta3"]) for r in rows])
    s = np.array([float(r["stderr"]) for r in rows])
    return L, m, s, int(rows[0]["n_samples"]) if rows else 0


def ensemble_delta3(config: CramerConfig, L_grid, workers: int = 1) -> CramerEnsemble:
    Ls = np.asarray(L_grid, dtype=np.float64)
    if np.any(np.diff(Ls) <= 0):
        raise ValueError("L_grid must be strictly increasing")
    if Ls.max() > config.L_max:
        config = replace(config, L_max=float(Ls.max()))
    jobs = [(config, i, Ls) for i in range(config.samples)]
    if workers > 1 and config.samples > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_sample_values, jobs))
    else:
        values = [_sample_values(j) for j in jobs]
    V = np.vstack(values)
    n = V.shape[0]
    # compensated column sums keep the mean independent of summation order
    mean = np.array([math.fsum(col) / n for col in V.T.tolist()])
    if n > 1:
        var = np.array([math.fsum((c - m) ** 2 for c in col) / (n - 1) for col, m in zip(V.T.tolist(), mean)])
        stderr = np.sqrt(var / n)
    else:
        stderr = np.full(len(Ls), np.nan)
    per = [RigidityCurve(UNFOLDED, config.x, None, Ls, v) for v in V]
    mean_curve = RigidityCurve(UNFOLDED, config.x, None, Ls, mean, ensemble_size=n, stderr=stderr)
    return CramerEnsemble(config, per, mean_curve, stderr)
