"""Rational approximants to sign and absolute value.

The classical degree-d construction places nodes at a^1 .. a^d with
a = exp(-1/sqrt(d)) and uses the odd rational function

    s_d(x) = (1 - q(x)) / (1 + q(x)),   q(x) = prod_k (a^k - x) / (a^k + x)

for x >= 0, extended oddly to x < 0.  Each factor of q lies in (-1, 1] for
x >= 0, so the product never underflows and s_d is exactly 1 at every
node.  The absolute-value approximant is x * s_d(x).  Uniform error on
[-1, 1] decays like exp(-sqrt(d)).

quantum_sign builds a different sign approximant: the exact acceptance
probability of the majority voting algorithm, rescaled from weights
0..N to inputs in [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, NumericalUnderflow
from .majority import default_amplification_reps, majority_exact, t_for_eps


def newman_nodes(d: int) -> np.ndarray:
    if d < 1:
        raise DomainError(f"degree must be >= 1, got {d}")
    a = math.exp(-1.0 / math.sqrt(d))
    return a ** np.arange(1, d + 1)


def _q_product(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    # factors in (-1, 1] for x >= 0; multiply directly, no log transform
    return np.prod((nodes[:, None] - x[None, :]) / (nodes[:, None] + x[None, :]), axis=0)


def newman_sign(d: int, x) -> np.ndarray | float:
    """Odd rational approximant to sign(x), exactly +1 at the nodes."""
    nodes = newman_nodes(d)
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    ax = np.abs(arr)
    q = _q_product(nodes, ax)
    den = 1.0 + q
    if np.any(den == 0.0):
        raise NumericalUnderflow("denominator 1 + q vanished")
    out = np.sign(arr) * (1.0 - q) / den
    return float(out[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else out


def newman_abs(d: int, x) -> np.ndarray | float:
    """Even rational approximant to |x| of rational degree d."""
    nodes = newman_nodes(d)
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    ax = np.abs(arr)
    q = _q_product(nodes, ax)
    den = 1.0 + q
    if np.any(den == 0.0):
        raise NumericalUnderflow("denominator 1 + q vanished")
    out = ax * (1.0 - q) / den
    return float(out[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else out


@dataclass
class GridRow:
    z: float
    value: float
    reference: float
    abs_error: float
    tag: str


class GridReport:
    """Evaluation rows of an approximant against its reference."""

    def __init__(self, rows: list[GridRow]):
        self.rows = rows

    def max_error(self, tag: Optional[str] = None) -> tuple[float, float]:
        """(largest absolute error, z where it occurs) over rows with tag."""
        cand = [r for r in self.rows if tag is None or r.tag == tag]
        if not cand:
            raise DomainError(f"no rows tagged {tag!r}")
        worst = max(cand, key=lambda r: r.abs_error)
        return worst.abs_error, worst.z

    def to_csv(self) -> str:
        lines = ["z,value,reference,abs_error,tag"]
        for r in self.rows:
            lines.append(
                f"{r.z!r},{r.value!r},{r.reference!r},{r.abs_error!r},{r.tag}"
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "rows": [
                {
                    "z": r.z,
                    "value": r.value,
                    "reference": r.reference,
                    "abs_error": r.abs_error,
                    "tag": r.tag,
                }
                for r in self.rows
            ]
        }


def error_grid(
    fn: Callable[[float], float],
    reference: Callable[[float], float],
    segments: Sequence[tuple[float, float, str]],
    points_per_segment: int,
    extra_points: Iterable[tuple[float, str]] = (),
) -> GridReport:
    """Evaluate fn against reference on tagged segments plus extra points."""
    rows = []
    for lo, hi, tag in segments:
        for z in np.linspace(lo, hi, points_per_segment):
            v = float(fn(float(z)))
            ref = float(reference(float(z)))
            rows.append(GridRow(float(z), v, ref, abs(v - ref), tag))
    for z, tag in extra_points:
        v = float(fn(float(z)))
        ref = float(reference(float(z)))
        rows.append(GridRow(float(z), v, ref, abs(v - ref), tag))
    return GridReport(rows)


def fit_decay(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares slope and intercept of ln(error) against sqrt(degree)."""
    if len(points) < 3:
        raise DomainError("need at least 3 (degree, error) points")
    ds = np.array([p[0] for p in points], dtype=np.float64)
    es = np.array([p[1] for p in points], dtype=np.float64)
    if np.any(es <= 0.0) or np.any(ds <= 0.0):
        raise DomainError("degrees and errors must be positive")
    slope, intercept = np.polyfit(np.sqrt(ds), np.log(es), 1)
    return float(slope), float(intercept)


class SignApproximant:
    """Sign approximant from exact majority acceptance probabilities.

    Rescales z in [-1, 1] to the weight w = N (z + 1) / 2 and returns
    2 Pr[majority outputs 1] - 1.  The accuracy guarantee covers
    [-1 + 2/N, -2/N] and [0, 1]; the gap (-2/N, 0) sits between the last
    guaranteed band point and the midpoint, and the far end near z = -1
    degenerates (every plus-probability is exactly 1/2 at weight 0), so
    points there are tagged "outside" and carry no guarantee.
    """

    def __init__(self, eps: float):
        if not 0.0 < eps <= 1.0:
            raise DomainError(f"eps must lie in (0, 1], got {eps!r}")
        self.eps = eps
        self.N = 2 * math.ceil(1.0 / eps)
        self.t = t_for_eps(eps)
        self.reps = default_amplification_reps(eps)

    def weight_of(self, z: float) -> float:
        return self.N * (z + 1.0) / 2.0

    def domain_tag(self, z: float) -> str:
        lo_band = (-1.0 + 2.0 / self.N, -2.0 / self.N)
        if lo_band[0] - 1e-12 <= z <= lo_band[1] + 1e-12:
            return "assertable"
        if -1e-12 <= z <= 1.0 + 1e-12:
            return "assertable"
        if -1.0 <= z <= 1.0:
            return "outside"
        raise DomainError(f"z={z!r} outside [-1, 1]")

    def __call__(self, z: float) -> float:
        if not -1.0 <= z <= 1.0:
            raise DomainError(f"z={z!r} outside [-1, 1]")
        p1 = majority_exact(self.N, self.eps, self.weight_of(z))
        return 2.0 * p1 - 1.0


def quantum_sign(eps: float) -> SignApproximant:
    return SignApproximant(eps)


def quantum_abs(eps: float, z: float) -> float:
    """Approximate |z| as z * s(z) with the majority-based sign approximant.

    On (-eps, eps) the bound |z s(z) - |z|| <= 2 |z| holds with no domain
    caveat, because |s| <= 1 everywhere.
    """
    return z * quantum_sign(eps)(z)
