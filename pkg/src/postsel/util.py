"""Small shared helpers: integer logs, popcount tables, binomial tails."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

INV_SQRT2 = 1.0 / math.sqrt(2.0)

# popcount lookup for uint16 masks, used by the vectorized samplers
POP16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.uint8)


def ceil_log2_int(n: int) -> int:
    """Smallest L with 2**L >= n, for integer n >= 1."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return (n - 1).bit_length()


def ceil_log2_ratio(num: int, den: int) -> int:
    """Smallest L >= 0 with den * 2**L >= num. Exact, no floats."""
    if num < 1 or den < 1:
        raise ValueError("num and den must be positive")
    lo = 0
    while den << lo < num:
        lo += 1
    return lo


def binom_pmf(n: int, k: int, p: float) -> float:
    """Binomial pmf via exact combinatorics times float powers."""
    if k < 0 or k > n:
        return 0.0
    return math.comb(n, k) * (p ** k) * ((1.0 - p) ** (n - k))


def binom_tail_geq(n: int, k: int, p: float) -> float:
    """Pr[Binomial(n, p) >= k]."""
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    # sum the smaller side for accuracy
    if k > n / 2:
        return math.fsum(binom_pmf(n, j, p) for j in range(k, n + 1))
    return 1.0 - math.fsum(binom_pmf(n, j, p) for j in range(0, k))


def binom_tail_geq_fraction(n: int, k: int, p: Fraction) -> Fraction:
    """Exact Pr[Binomial(n, p) >= k] over the rationals."""
    if k <= 0:
        return Fraction(1)
    if k > n:
        return Fraction(0)
    q = 1 - p
    total = Fraction(0)
    for j in range(k, n + 1):
        total += math.comb(n, j) * p ** j * q ** (n - j)
    return total
