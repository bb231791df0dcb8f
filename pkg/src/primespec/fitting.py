"""Least-squares fits: straight lines, a general linear basis, and the
exponential decay of rescaled gap curves."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import singular_series_table

DEFAULT_U_RANGE = (0.5, 5.0)


class RankError(ValueError):
    """Fit abscissae do not determine the parameters."""


@dataclass(frozen=True)
class LinearFit:
    """y ~ a*x + b."""

    a: float
    b: float
    residual_ss: float
    n: int


@dataclass(frozen=True)
class ExpFit:
    """t ~ prefactor * exp(-slope * u)."""

    prefactor: float
    slope: float
    residual_ss: float
    n_points: int
    u_range: tuple


def linear_lsq(x, y, weights=None) -> LinearFit:
    """Closed-form least-squares straight line.

    Sums are taken about the means, which is algebraically the textbook
    a = (n Sxy - Sx Sy)/(n Sxx - Sx^2), b = mean(y - a x) but does not lose
    digits when x is far from 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("x and y differ in length")
    n = x.size
    if n < 2:
        raise RankError("need at least two points")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=np.float64)
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    dx = x - xm
    sxx = (w * dx * dx).sum()
    if not sxx > 0 or sxx <= 1e-28 * (w * x * x).sum():
        raise RankError("abscissae are all equal")
    a = (w * dx * (y - ym)).sum() / sxx
    b = ym - a * xm
    r = y - a * x - b
    return LinearFit(float(a), float(b), float((w * r * r).sum()), n)


def general_lsq(design, y):
    """Coefficients c minimising |design @ c - y|^2 (SVD-based) and the residual sum."""
    design = np.asarray(design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise RankError(f"design matrix has rank {rank} < {design.shape[1]}")
    r = y - design @ coef
    return coef, float(r @ r)


def cosine_basis_fit(d_max: int, values=None):
    """Fit P(d) ~ alpha + beta cos(2 pi d / 6) over even d = 2..d_max.

    ``values`` replaces P(d) (array indexed by d) for synthetic checks.
    Returns (alpha, beta, residual_ss).
    """
    if d_max < 6:
        raise ValueError(f"d_max must be >= 6, got {d_max}")
    d = np.arange(2, d_max + 1, 2)
    table = singular_series_table(d_max) if values is None else np.asarray(values, dtype=np.float64)
    y = table[d]
    # cos(2 pi d/6) for even d is exactly 1 (6 | d) or -1/2
    c = np.where(d % 6 == 0, 1.0, -0.5)
    coef, rss = general_lsq(np.column_stack([np.ones_like(c), c]), y)
    return float(coef[0]), float(coef[1]), rss


def exp_fit(curve, u_range=DEFAULT_U_RANGE, weighted: bool = False) -> ExpFit:
    """Straight-line fit to (u, ln t) inside ``u_range``.

    ``weighted`` weights each point by its gap count tau_d (Poisson errors of
    ln t scale as tau^{-1/2}); off by default.
    """
    u = np.asarray(curve.u, dtype=np.float64)
    t = np.asarray(curve.t, dtype=np.float64)
    lo, hi = u_range
    sel = (u >= lo) & (u <= hi)
    if np.any(t[sel] <= 0):
        raise ValueError("exp_fit needs t > 0 inside the fit range")
    if sel.sum() < 3:
        raise RankError(f"only {int(sel.sum())} points inside u_range {u_range}")
    w = np.asarray(curve.tau, dtype=np.float64)[sel] if weighted else None
    fit = linear_lsq(u[sel], np.log(t[sel]), weights=w)
    return ExpFit(math.exp(fit.b), -fit.a, fit.residual_ss, int(sel.sum()), tuple(u_range))
