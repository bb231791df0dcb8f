"""Conjectured closed forms for tau_d(x) and the maximal gap G(x)."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .specfun import TWIN_CONSTANT, li, singular_series

PI_BASED = "pi-based"
LOG_BASED = "log-based"


@dataclass(frozen=True)
class TauPrediction:
    x: int
    d: int
    value: float
    variant: str


def tau_expected(d: int, x: float, pi_x: float | None = None, variant: str = PI_BASED,
                 small_gap_decay: bool = False) -> float:
    """C2 (pi^2/x) P(d) exp(-d pi/x); d in {2, 4} carries no exponential factor
    unless ``small_gap_decay`` is set.  The log-based variant puts x/ln x in
    place of pi(x)."""
    if d < 2 or d % 2:
        raise ValueError(f"tau_expected needs even d >= 2, got {d}")
    if variant == PI_BASED:
        if pi_x is None or pi_x <= 0:
            raise ValueError("pi-based variant needs the exact pi(x)")
        density = pi_x / x
    elif variant == LOG_BASED:
        if not x > math.e:
            raise ValueError("log-based variant needs x > e")
        density = 1.0 / math.log(x)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    value = TWIN_CONSTANT * x * density * density
    if d >= 6:
        value *= singular_series(d) * math.exp(-d * density)
    elif small_gap_decay:
        value *= math.exp(-d * density)
    return value


def predict(d: int, x: int, pi_x: int | None = None, variant: str = PI_BASED) -> TauPrediction:
    return TauPrediction(x, d, tau_expected(d, x, pi_x, variant), variant)


def hardy_littlewood_pairs(d: int, x: float) -> float:
    """pi_d(x) ~ C2 P(d) x / ln^2 x, all (not only consecutive) prime pairs."""
    if d < 2 or d % 2:
        raise ValueError(f"d must be even >= 2, got {d}")
    lx = math.log(x)
    return TWIN_CONSTANT * singular_series(d) * x / (lx * lx)


def tau_from_pi_d(pi_d: float, d: int, x: float) -> float:
    """tau_d ~ pi_d exp(-d/ln x), stated for d >= 6."""
    if d < 6 or d % 2:
        raise ValueError(f"relation holds for even d >= 6, got {d}")
    if not x > math.e:
        raise ValueError("x must exceed e")
    return pi_d * math.exp(-d / math.log(x))


def gmax_expected(x: float, pi_x: float | None = None) -> float:
    """(x/pi)(2 ln pi - ln x + ln C2); pi(x) falls back to li(x) when not given."""
    pi = li(x) if pi_x is None else pi_x
    if pi < 2:
        raise ValueError("gmax_expected needs pi(x) >= 2")
    bracket = 2.0 * math.log(pi) - math.log(x) + math.log(TWIN_CONSTANT)
    if bracket <= 0:
        raise ValueError(f"degenerate range: x={x} gives a non-positive bracket {bracket:.3g}")
    return x / pi * bracket
