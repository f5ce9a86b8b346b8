"""Boolean functions, multilinear polynomials, and probability extraction.

Index convention: input x = (x_1 .. x_n) maps to index sum(x_i * 2^(n-i)),
so x_1 is the most significant bit.  Monomial and character masks use the
same convention: bit 2^(n-i) of a mask stands for variable i.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CapacityError, DomainError, TheoremViolation

COEFF_TOL = 1e-12


def bits_to_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | (1 if b else 0)
    return idx


def index_to_bits(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


class TruthTable:
    """Real-valued function on {0,1}^n stored densely."""

    __slots__ = ("n", "values")

    def __init__(self, n: int, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (1 << n,):
            raise ValueError(f"need {1 << n} values for n={n}, got {arr.shape}")
        self.n = n
        self.values = arr

    @classmethod
    def from_function(cls, n: int, fn: Callable[[tuple], float]) -> "TruthTable":
        vals = [fn(index_to_bits(i, n)) for i in range(1 << n)]
        return cls(n, vals)

    @classmethod
    def from_string(cls, text: str) -> "TruthTable":
        text = text.strip()
        if not text:
            raise DomainError("empty truth table")
        if all(c in "01" for c in text):
            size = len(text)
            vals = [1.0 if c == "1" else 0.0 for c in text]
        else:
            parts = text.split()
            size = len(parts)
            vals = [float(p) for p in parts]
        n = size.bit_length() - 1
        if size != 1 << n or size < 1:
            raise DomainError(f"truth table length {size} is not a power of two")
        return cls(n, vals)

    def to_string(self) -> str:
        if self.is_boolean():
            return "".join("1" if v > 0.5 else "0" for v in self.values)
        return " ".join(repr(float(v)) for v in self.values)

    def is_boolean(self) -> bool:
        return bool(np.all((self.values == 0.0) | (self.values == 1.0)))

    def __call__(self, bits: Sequence[int]) -> float:
        return float(self.values[bits_to_index(bits)])


class MultilinearPoly:
    """Multilinear polynomial in the monomial basis: mask -> coefficient."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: dict):
        self.n = n
        self.coeffs = {
            int(m): float(c) for m, c in coeffs.items() if abs(c) > COEFF_TOL
        }
        for m in self.coeffs:
            if not 0 <= m < (1 << n):
                raise ValueError(f"mask {m} out of range for n={n}")

    def degree(self) -> int:
        if not self.coeffs:
            return 0
        return max(m.bit_count() for m in self.coeffs)

    def evaluate(self, bits: Sequence[int]) -> float:
        idx = bits_to_index(bits)
        return math.fsum(c for m, c in self.coeffs.items() if (m & idx) == m)

    def table(self) -> TruthTable:
        vals = np.zeros(1 << self.n)
        for m, c in self.coeffs.items():
            idx = np.arange(1 << self.n)
            vals += np.where((idx & m) == m, c, 0.0)
        return TruthTable(self.n, vals)

    def __eq__(self, other):
        return (
            isinstance(other, MultilinearPoly)
            and self.n == other.n
            and self.coeffs == other.coeffs
        )

    def __repr__(self):
        return f"MultilinearPoly(n={self.n}, terms={len(self.coeffs)})"


class FourierSpectrum:
    """Expansion over parity characters chi_S(x) = (-1)^(|x & S|)."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: dict):
        self.n = n
        self.coeffs = {
            int(m): float(c) for m, c in coeffs.items() if abs(c) > COEFF_TOL
        }
        for m in self.coeffs:
            if not 0 <= m < (1 << n):
                raise ValueError(f"mask {m} out of range for n={n}")

    def degree(self) -> int:
        if not self.coeffs:
            return 0
        return max(m.bit_count() for m in self.coeffs)

    def l1_norm(self) -> float:
        return math.fsum(abs(c) for c in self.coeffs.values())

    def evaluate(self, bits: Sequence[int]) -> float:
        idx = bits_to_index(bits)
        return math.fsum(
            c * (1 - 2 * ((m & idx).bit_count() & 1)) for m, c in self.coeffs.items()
        )


def mask_to_subset(mask: int, n: int) -> list[int]:
    """Positions (1-indexed) present in a coefficient mask."""
    return [i for i in range(1, n + 1) if mask & (1 << (n - i))]


def subset_to_mask(subset: Sequence[int], n: int) -> int:
    mask = 0
    for i in subset:
        if not 1 <= i <= n:
            raise ValueError(f"position {i} out of range 1..{n}")
        mask |= 1 << (n - i)
    return mask


def mobius_interpolate(table: TruthTable) -> MultilinearPoly:
    """Exact monomial coefficients of the unique multilinear extension."""
    c = table.values.astype(np.float64).copy()
    n = table.n
    for i in range(n):
        bit = 1 << i
        view = c.reshape(-1, 2 * bit)
        view[:, bit:] -= view[:, :bit]
    return MultilinearPoly(n, {m: c[m] for m in range(1 << n) if abs(c[m]) > COEFF_TOL})


def fourier(table: TruthTable) -> FourierSpectrum:
    """Character coefficients g_hat(S) = 2^-n sum_x g(x) (-1)^(|x & S|)."""
    c = table.values.astype(np.float64).copy()
    n = table.n
    for i in range(n):
        bit = 1 << i
        view = c.reshape(-1, 2 * bit)
        lo = view[:, :bit].copy()
        hi = view[:, bit:].copy()
        view[:, :bit] = lo + hi
        view[:, bit:] = lo - hi
    c /= float(1 << n)
    return FourierSpectrum(n, {m: c[m] for m in range(1 << n) if abs(c[m]) > COEFF_TOL})


def inverse_fourier(spec: FourierSpectrum) -> TruthTable:
    n = spec.n
    c = np.zeros(1 << n)
    for m, v in spec.coeffs.items():
        c[m] = v
    for i in range(n):
        bit = 1 << i
        view = c.reshape(-1, 2 * bit)
        lo = view[:, :bit].copy()
        hi = view[:, bit:].copy()
        view[:, :bit] = lo + hi
        view[:, bit:] = lo - hi
    return TruthTable(n, c)


MAX_EXTRACT_BITS = 12


def extract_pq(alg) -> tuple[MultilinearPoly, MultilinearPoly]:
    """Recover the acceptance polynomials of a postselected algorithm.

    The algorithm must expose n_bits, query_count, and joint_probs(bits)
    returning (Pr[a=1], Pr[a=1 and b=1]).  Both probabilities, as functions
    of the input bits, are multilinear of degree at most twice the query
    count; that bound is enforced and its failure reported as a
    TheoremViolation since it indicates a broken algorithm object.

    Returns (P, Q) with P the joint polynomial and Q the acceptance one.
    """
    n = alg.n_bits
    if n > MAX_EXTRACT_BITS:
        raise CapacityError(f"extraction sweeps 2^n inputs; n={n} exceeds {MAX_EXTRACT_BITS}")
    qvals = np.empty(1 << n)
    pvals = np.empty(1 << n)
    for idx in range(1 << n):
        q, p = alg.joint_probs(index_to_bits(idx, n))
        if not (-1e-9 <= p <= q + 1e-9 and q <= 1.0 + 1e-9):
            raise TheoremViolation(
                f"joint_probs returned impossible pair (q={q!r}, p={p!r})"
            )
        qvals[idx] = q
        pvals[idx] = p
    P = mobius_interpolate(TruthTable(n, pvals))
    Q = mobius_interpolate(TruthTable(n, qvals))
    bound = 2 * alg.query_count
    if P.degree() > bound or Q.degree() > bound:
        raise TheoremViolation(
            f"extracted degrees ({P.degree()}, {Q.degree()}) exceed 2T={bound}"
        )
    return P, Q


def ratio_check(P: MultilinearPoly, Q: MultilinearPoly, bits: Sequence[int]) -> float:
    """Signed ratio (Q - 2P)/Q at one input; negative means output 1."""
    q = Q.evaluate(bits)
    if abs(q) < 1e-12:
        raise DomainError(f"acceptance probability vanishes at {tuple(bits)}")
    p = P.evaluate(bits)
    return (q - 2.0 * p) / q


@dataclass
class UnivariatePoly:
    """Dense univariate polynomial, coefficients in ascending degree."""

    coeffs: list

    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and abs(self.coeffs[d]) <= COEFF_TOL:
            d -= 1
        return d

    def __call__(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


def interpolate_univariate(points: Sequence[tuple[float, float]]) -> UnivariatePoly:
    """Newton-form interpolation through distinct points, expanded to monomials."""
    xs = [float(p[0]) for p in points]
    ys = [float(p[1]) for p in points]
    k = len(xs)
    if len(set(xs)) != k:
        raise DomainError("interpolation nodes must be distinct")
    # divided differences
    dd = list(ys)
    for j in range(1, k):
        for i in range(k - 1, j - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - j])
    # Horner on the node list, expanding to monomial coefficients
    coeffs = [dd[k - 1]]
    for j in range(k - 2, -1, -1):
        nxt = [0.0] * (len(coeffs) + 1)
        for i, cv in enumerate(coeffs):
            nxt[i + 1] += cv
            nxt[i] -= xs[j] * cv
        nxt[0] += dd[j]
        coeffs = nxt
    poly = UnivariatePoly(coeffs)
    worst = max(abs(poly(x) - y) for x, y in zip(xs, ys))
    if worst > 1e-8:
        raise DomainError(f"interpolation residual {worst!r} too large")
    return poly


def poly_to_json(poly: MultilinearPoly) -> str:
    terms = [
        {"subset": mask_to_subset(m, poly.n), "coeff": c}
        for m, c in sorted(poly.coeffs.items())
    ]
    return json.dumps({"n": poly.n, "terms": terms}, indent=2, sort_keys=True)


def poly_from_json(text: str) -> MultilinearPoly:
    data = json.loads(text)
    n = int(data["n"])
    coeffs = {}
    for term in data["terms"]:
        mask = subset_to_mask(term["subset"], n)
        coeffs[mask] = coeffs.get(mask, 0.0) + float(term["coeff"])
    return MultilinearPoly(n, coeffs)


def spectrum_to_json(spec: FourierSpectrum) -> str:
    terms = [
        {"subset": mask_to_subset(m, spec.n), "coeff": c}
        for m, c in sorted(spec.coeffs.items())
    ]
    return json.dumps({"n": spec.n, "terms": terms}, indent=2, sort_keys=True)


def spectrum_from_json(text: str) -> FourierSpectrum:
    data = json.loads(text)
    n = int(data["n"])
    coeffs = {}
    for term in data["terms"]:
        mask = subset_to_mask(term["subset"], n)
        coeffs[mask] = coeffs.get(mask, 0.0) + float(term["coeff"])
    return FourierSpectrum(n, coeffs)
