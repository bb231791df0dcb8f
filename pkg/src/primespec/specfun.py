"""Number-theoretic special functions: li, Riemann R, Moebius, the twin-prime
constant and the Hardy-Littlewood singular series P(d).

``li`` is the series ``gamma + ln ln x + sum ln^n x / (n n!)``, i.e. the
integral from 0 (principal value).  It exceeds the integral from 2 by
``li(2) = 1.04516...``; differences li(b) - li(a) do not depend on the
convention.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

EULER_GAMMA = 0.57721566490153286060651209008240243
#: 2 * prod_{p>2} (1 - 1/(p-1)^2), published value
TWIN_CONSTANT = 1.32032363169373914785562422002911155686524
LI_2 = 1.04516378011749278484458888919461313652261

REL_TOL = 1e-15
ZETA_MMAX = 200


class Constants:
    euler_gamma = EULER_GAMMA
    twin_constant = TWIN_CONSTANT
    c_max_gap = math.log(TWIN_CONSTANT)
    alpha = 2.0 / TWIN_CONSTANT
    beta = 1.0 / TWIN_CONSTANT


def _term_cap(t: float) -> int:
    # 10*ceil(ln x) terms, with a floor so x close to 1 is still fully summed
    return max(10 * math.ceil(abs(t)), 40)


def li_of_log(t: float) -> float:
    """li(e**t) for t > 0, evaluated from the logarithm directly."""
    if not t > 0:
        raise ValueError(f"li needs x > 1 (ln x = {t})")
    total = 0.0
    term = 1.0
    for n in range(1, _term_cap(t) + 1):
        term *= t / n            # t^n / n!
        contrib = term / n
        total += contrib
        if contrib < REL_TOL * abs(total):
            break
    return EULER_GAMMA + math.log(t) + total


def li(x: float) -> float:
    """Logarithmic integral li(x) for x > 1."""
    if not x > 1:
        raise ValueError(f"li needs x > 1, got {x}")
    return li_of_log(math.log(x))


def li_asymptotic(x: float) -> float:
    """Divergent expansion sum_{n<n0} n! x / ln^{n+1} x cut at n0 = floor(ln x)."""
    if not x > math.e:
        raise ValueError(f"li_asymptotic needs x > e, got {x}")
    lx = math.log(x)
    n0 = math.floor(lx)
    total = 0.0
    term = x / lx
    for n in range(n0):
        total += term
        term *= (n + 1) / lx
    return total


def li_array(x) -> np.ndarray:
    """Vectorised li over an array of arguments > 1."""
    t = np.log(np.asarray(x, dtype=np.float64))
    if t.size and not np.all(t > 0):
        raise ValueError("li needs x > 1")
    total = np.zeros_like(t)
    term = np.ones_like(t)
    tmax = float(t.max()) if t.size else 1.0
    for n in range(1, _term_cap(tmax) + 1):
        term *= t / n
        contrib = term / n
        total += contrib
        if np.all(contrib < REL_TOL * np.abs(total)):
            break
    return EULER_GAMMA + np.log(t) + total


# ----------------------------------------------------------------- zeta, R


def zeta_real(s: float, n_direct: int = 20) -> float:
    """zeta(s) for real s > 1: direct sum to N plus an Euler-Maclaurin tail."""
    if not s > 1:
        raise ValueError(f"zeta_real needs s > 1, got {s}")
    N = n_direct
    head = math.fsum(k ** -s for k in range(1, N))
    # tail sum_{k>=N} k^-s = N^{1-s}/(s-1) + N^-s/2 + sum_j B_2j/(2j)! (s)_{2j-1} N^{-s-2j+1}
    tail = N ** (1 - s) / (s - 1) + 0.5 * N**-s
    bernoulli = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)
    rising = s
    fact = 2.0
    power = N ** (-s - 1)
    for j, b in enumerate(bernoulli, start=1):
        tail += b / fact * rising * power
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
        power /= N * N
    return head + tail


@lru_cache(maxsize=1)
def zeta_table() -> np.ndarray:
    """``table[m] = zeta(m + 1)`` for m = 1..ZETA_MMAX (index 0 unused)."""
    out = np.empty(ZETA_MMAX + 1)
    out[0] = np.nan
    for m in range(1, ZETA_MMAX + 1):
        out[m] = zeta_real(m + 1.0)
    out.setflags(write=False)
    return out


def riemann_r(x: float) -> float:
    """R(x) by the Gram series 1 + sum ln^m x / (m m! zeta(m+1))."""
    if not x > 1:
        raise ValueError(f"riemann_r needs x > 1, got {x}")
    t = math.log(x)
    z = zeta_table()
    total = 1.0
    term = 1.0
    for m in range(1, min(_term_cap(t), ZETA_MMAX) + 1):
        term *= t / m
        contrib = term / (m * z[m])
        total += contrib
        if contrib < REL_TOL * total:
            break
    return total


def riemann_r_array(x) -> np.ndarray:
    t = np.log(np.asarray(x, dtype=np.float64))
    if t.size and not np.all(t > 0):
        raise ValueError("riemann_r needs x > 1")
    z = zeta_table()
    total = np.ones_like(t)
    term = np.ones_like(t)
    tmax = float(t.max()) if t.size else 1.0
    for m in range(1, min(_term_cap(tmax), ZETA_MMAX) + 1):
        term *= t / m
        contrib = term / (m * z[m])
        total += contrib
        if np.all(contrib < REL_TOL * total):
            break
    return total


def riemann_r_mobius(x: float, k_max: int = 10**6) -> float:
    """R(x) = sum_k mu(k)/k li(x^{1/k}), an independent route to the Gram series.

    Terms k <= k_max are summed exactly.  For k > k_max only the constant
    part of li(x^{1/k}) = gamma + ln(ln x / k) + O(ln x / k) survives; its
    tail is closed with the classical sums sum mu(k)/k = 0 and
    sum mu(k) ln k / k = -1.
    """
    if not x > 1:
        raise ValueError(f"riemann_r_mobius needs x > 1, got {x}")
    t = math.log(x)
    mu = mobius_table(k_max)
    k = np.flatnonzero(mu).astype(np.float64)
    k = k[k >= 1]
    muk = mu[k.astype(np.int64)].astype(np.float64)
    head = math.fsum((muk / k * li_array_of_log(t / k)).tolist())
    m1 = math.fsum((muk / k).tolist())
    m2 = math.fsum((muk * np.log(k) / k).tolist())
    tail = -(EULER_GAMMA + math.log(t)) * m1 + 1.0 + m2
    return head + tail


def li_array_of_log(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    total = np.zeros_like(t)
    term = np.ones_like(t)
    for n in range(1, _term_cap(float(t.max())) + 1):
        term *= t / n
        contrib = term / n
        total += contrib
        if np.all(contrib < REL_TOL * np.abs(total)):
            break
    return EULER_GAMMA + np.log(t) + total


def riemann_r_inverse(y: float) -> float:
    """Real x with R(x) = y (Newton iteration on R'(x) ~ 1/ln x)."""
    if y <= 1:
        raise ValueError("riemann_r_inverse needs y > 1")
    x = max(y * math.log(max(y, 3.0)), 3.0)
    for _ in range(100):
        step = (riemann_r(x) - y) * math.log(x)
        x = max(x - step, 1.5)
        if abs(step) < 1e-14 * x:
            break
    return x


def li_inverse(y: float) -> float:
    if y <= 0:
        raise ValueError("li_inverse needs y > 0")
    x = max(y * math.log(max(y, 3.0)), 3.0)
    for _ in range(100):
        step = (li(x) - y) * math.log(x)
        x = max(x - step, 1.5)
        if abs(step) < 1e-14 * x:
            break
    return x


# --------------------------------------------------------------- Moebius


def mobius(n: int) -> int:
    """mu(n) by trial division."""
    if n < 1:
        raise ValueError(f"mobius needs n >= 1, got {n}")
    sign = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            sign = -sign
        p += 1 if p == 2 else 2
    if n > 1:
        sign = -sign
    return sign


@lru_cache(maxsize=4)
def mobius_table(n: int) -> np.ndarray:
    """``table[k] = mu(k)`` for 0 <= k <= n (table[0] = 0), by a sieve."""
    from .sieve import small_primes

    mu = np.ones(n + 1, dtype=np.int8)
    mu[0] = 0
    for p in small_primes(n).tolist():
        mu[p::p] *= -1
        if p * p <= n:
            mu[p * p :: p * p] = 0
    mu.setflags(write=False)
    return mu


# ------------------------------------------------------------- constants


def twin_constant_product(p_cut: int = 10**7) -> float:
    """2 prod_{2<p<=p_cut} (1 - 1/(p-1)^2) times a tail estimate for p > p_cut.

    The tail uses sum_{p>P} 1/p^2 ~ E1(ln P), the first-order prime density
    integral, expanded asymptotically.
    """
    from .sieve import small_primes

    p = small_primes(p_cut)[1:].astype(np.float64)
    log_prod = np.sum(np.log1p(-1.0 / (p - 1.0) ** 2))
    y = math.log(p_cut)
    e1 = math.exp(-y) / y * sum((-1) ** k * math.factorial(k) / y**k for k in range(6))
    return 2.0 * math.exp(log_prod - e1)


def _check_even(d: int) -> None:
    if d < 2 or d % 2:
        raise ValueError(f"singular series needs even d >= 2, got {d}")


def singular_series(d: int, exact: bool = False):
    """P(d) = prod over odd primes p | d of (p-1)/(p-2)."""
    _check_even(d)
    value = Fraction(1)
    n = d
    while n % 2 == 0:
        n //= 2
    p = 3
    while p * p <= n:
        if n % p == 0:
            value *= Fraction(p - 1, p - 2)
            while n % p == 0:
                n //= p
        p += 2
    if n > 1:
        value *= Fraction(n - 1, n - 2)
    return value if exact else float(value)


def singular_series_table(d_max: int) -> np.ndarray:
    """``table[d] = P(d)`` for 0 <= d <= d_max; odd d and d = 0 hold NaN."""
    from .sieve import small_primes

    table = np.ones(d_max + 1)
    for p in small_primes(d_max)[1:].tolist():
        table[p::p] *= (p - 1) / (p - 2)
    table[1::2] = np.nan
    table[0] = np.nan
    return table


def singular_series_approx(d: int) -> float:
    """(2 + cos(2 pi d / 6)) / C2; for even d the cosine is exactly 1 or -1/2."""
    _check_even(d)
    cosine = 1.0 if d % 6 == 0 else -0.5
    return (2.0 + cosine) / TWIN_CONSTANT


def singular_series_mean(n: int) -> float:
    """(1/n) sum_{k=1}^{n} P(2k)."""
    if n < 1:
        raise ValueError(f"singular_series_mean needs n >= 1, got {n}")
    table = singular_series_table(2 * n)
    return math.fsum(table[2::2].tolist()) / n
