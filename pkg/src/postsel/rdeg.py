"""Exact feasibility oracle for low-degree rational approximation.

A Boolean f has a degree-d rational approximation with error eps when
multilinear P, Q of degree at most d exist with, at every input x,

    Q(x) >= 1,   0 <= P(x) <= Q(x),
    P(x) >= (1 - eps) Q(x)  where f(x) = 1,
    P(x) <= eps Q(x)        where f(x) = 0.

(Any pair with Q positive can be rescaled to Q >= 1, so the normalization
costs nothing.)  All constraints are linear in the coefficients, so
feasibility is decided exactly by a Phase-I simplex over Fractions with
Bland's rule.  For symmetric f the symmetrized pair of any witness is
again a witness, so the much smaller weight-basis program is conclusive
in both directions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .boolfn import TruthTable, index_to_bits, mask_to_subset
from .errors import CapacityError, DomainError, SimplexStall

MAX_FULL_N = 4
MAX_FULL_D = 4
MAX_SYM_N = 64
MAX_SYM_D = 16

SIMPLEX_ITER_CAP = 200000


def phase1_feasible(
    G: Sequence[Sequence[Fraction]], h: Sequence[Fraction]
) -> tuple[bool, Optional[list[Fraction]]]:
    """Exact feasibility of {x free : G x <= h} via Phase-I simplex.

    Returns (feasible, x) with x a rational feasible point when one
    exists.  Bland's rule prevents cycling; the iteration cap turns a
    runaway (which would indicate a bug) into SimplexStall.
    """
    m = len(G)
    if m == 0:
        return True, []
    n = len(G[0])
    zero, one = Fraction(0), Fraction(1)

    # columns: u_0..u_{n-1}, v_0..v_{n-1} (x = u - v), slacks, artificials
    ncols = 2 * n + 2 * m
    rows = []
    for i in range(m):
        flip = h[i] < 0
        sgn = -one if flip else one
        row = [zero] * (ncols + 1)
        for j in range(n):
            row[j] = sgn * G[i][j]
            row[n + j] = -sgn * G[i][j]
        row[2 * n + i] = sgn
        row[2 * n + m + i] = one
        row[ncols] = sgn * h[i]
        rows.append(row)

    basis = [2 * n + m + i for i in range(m)]
    # reduced costs for minimizing the artificial sum
    cost = [zero] * (ncols + 1)
    for i in range(m):
        for j in range(ncols + 1):
            cost[j] -= rows[i][j]
    for i in range(m):
        cost[2 * n + m + i] = zero

    for _ in range(SIMPLEX_ITER_CAP):
        enter = -1
        for j in range(ncols):
            if cost[j] < 0:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][ncols] / a
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            raise SimplexStall("phase-1 objective unbounded; tableau is corrupt")
        piv = rows[leave][enter]
        rows[leave] = [v / piv for v in rows[leave]]
        for i in range(m):
            if i != leave and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[leave])]
        if cost[enter] != 0:
            f = cost[enter]
            cost = [v - f * w for v, w in zip(cost, rows[leave])]
        basis[leave] = enter
    else:
        raise SimplexStall(f"no optimum within {SIMPLEX_ITER_CAP} pivots")

    objective = -cost[ncols]
    if objective != 0:
        return False, None
    x = [zero] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] += rows[i][ncols]
        elif b < 2 * n:
            x[b - n] -= rows[i][ncols]
    return True, x


def _as_fraction(eps) -> Fraction:
    if isinstance(eps, Fraction):
        val = eps
    elif isinstance(eps, int):
        val = Fraction(eps)
    elif isinstance(eps, str):
        val = Fraction(eps)
    elif isinstance(eps, float):
        raise DomainError(
            "eps must be exactly rational (Fraction, int, or 'num/den' string); "
            f"a float like {eps!r} would be silently distorted"
        )
    else:
        raise DomainError(f"cannot interpret eps={eps!r}")
    if not 0 <= val < Fraction(1, 2):
        raise DomainError(f"eps must lie in [0, 1/2), got {val}")
    return val


def _check_boolean(f: TruthTable) -> None:
    if not f.is_boolean():
        raise DomainError("feasibility oracle needs a 0/1-valued table")


def _symmetric_profile(f: TruthTable) -> list[int]:
    """Value per Hamming weight; DomainError when f is not symmetric."""
    n = f.n
    prof: list[Optional[int]] = [None] * (n + 1)
    for idx in range(1 << n):
        w = idx.bit_count()
        v = int(f.values[idx])
        if prof[w] is None:
            prof[w] = v
        elif prof[w] != v:
            raise DomainError("table is not symmetric; use the full mode")
    return prof  # type: ignore[return-value]


@dataclass
class Witness:
    """Rational coefficients of a feasible (P, Q) pair."""

    mode: str            # "full" (monomial masks) or "symmetric" (weight basis)
    n: int
    d: int
    eps: Fraction
    p_coeffs: dict       # full: mask -> Fraction; symmetric: j -> Fraction
    q_coeffs: dict

    def to_json(self) -> str:
        def enc(coeffs):
            out = []
            for key, val in sorted(coeffs.items()):
                entry = {"coeff": f"{val.numerator}/{val.denominator}"}
                if self.mode == "full":
                    entry["subset"] = mask_to_subset(key, self.n)
                else:
                    entry["order"] = key
                out.append(entry)
            return out

        return json.dumps(
            {
                "mode": self.mode,
                "n": self.n,
                "d": self.d,
                "eps": f"{self.eps.numerator}/{self.eps.denominator}",
                "p": enc(self.p_coeffs),
                "q": enc(self.q_coeffs),
            },
            indent=2,
            sort_keys=True,
        )

    def evaluate(self, bits: Sequence[int]) -> tuple[Fraction, Fraction]:
        """(P(x), Q(x)) exactly."""
        if self.mode == "full":
            idx = 0
            for b in bits:
                idx = (idx << 1) | (1 if b else 0)
            p = sum((c for m, c in self.p_coeffs.items() if (m & idx) == m), Fraction(0))
            q = sum((c for m, c in self.q_coeffs.items() if (m & idx) == m), Fraction(0))
            return p, q
        w = sum(1 for b in bits if b)
        p = sum((c * math.comb(w, j) for j, c in self.p_coeffs.items()), Fraction(0))
        q = sum((c * math.comb(w, j) for j, c in self.q_coeffs.items()), Fraction(0))
        return p, q


@dataclass
class FeasibilityResult:
    feasible: bool
    witness: Optional[Witness]
    mode: str
    conclusive: bool
    detail: str


def _build_full(f: TruthTable, d: int, eps: Fraction):
    n = f.n
    masks = [m for m in range(1 << n) if m.bit_count() <= d]
    nv = len(masks)
    zero, one = Fraction(0), Fraction(1)
    G, h = [], []
    for idx in range(1 << n):
        mono = [one if (m & idx) == m else zero for m in masks]
        pq = mono + [zero] * nv
        qq = [zero] * nv + mono
        # Q >= 1
        G.append([-v for v in qq])
        h.append(-one)
        # P >= 0
        G.append([-v for v in pq])
        h.append(zero)
        if f.values[idx] == 1.0:
            # P <= Q and P >= (1 - eps) Q
            G.append([a - b for a, b in zip(pq, qq)])
            h.append(zero)
            G.append([(one - eps) * b - a for a, b in zip(pq, qq)])
            h.append(zero)
        else:
            # P <= eps Q (implies P <= Q)
            G.append([a - eps * b for a, b in zip(pq, qq)])
            h.append(zero)
    return G, h, masks


def _build_symmetric(profile: list[int], n: int, d: int, eps: Fraction):
    nv = d + 1
    zero, one = Fraction(0), Fraction(1)
    G, h = [], []
    for w in range(n + 1):
        basis = [Fraction(math.comb(w, j)) for j in range(nv)]
        pq = basis + [zero] * nv
        qq = [zero] * nv + basis
        G.append([-v for v in qq])
        h.append(-one)
        G.append([-v for v in pq])
        h.append(zero)
        if profile[w] == 1:
            G.append([a - b for a, b in zip(pq, qq)])
            h.append(zero)
            G.append([(one - eps) * b - a for a, b in zip(pq, qq)])
            h.append(zero)
        else:
            G.append([a - eps * b for a, b in zip(pq, qq)])
            h.append(zero)
    return G, h


def rdeg_feasible(f: TruthTable, d: int, eps, symmetric: bool = False) -> FeasibilityResult:
    """Decide degree-d feasibility of f at error eps, exactly.

    The full mode enumerates all monomials (small n only).  The symmetric
    mode works in the weight basis and is conclusive in both directions
    for symmetric f, since averaging a general witness over all input
    permutations yields a symmetric one.
    """
    _check_boolean(f)
    epsf = _as_fraction(eps)
    if d < 0:
        raise DomainError(f"degree must be >= 0, got {d}")
    if symmetric:
        if f.n > MAX_SYM_N or d > MAX_SYM_D:
            raise CapacityError(
                f"symmetric mode supports n <= {MAX_SYM_N}, d <= {MAX_SYM_D}"
            )
        profile = _symmetric_profile(f)
        G, h = _build_symmetric(profile, f.n, d, epsf)
        feasible, x = phase1_feasible(G, h)
        witness = None
        if feasible:
            nv = d + 1
            witness = Witness(
                mode="symmetric",
                n=f.n,
                d=d,
                eps=epsf,
                p_coeffs={j: x[j] for j in range(nv) if x[j] != 0},
                q_coeffs={j: x[nv + j] for j in range(nv) if x[nv + j] != 0},
            )
        return FeasibilityResult(
            feasible=feasible,
            witness=witness,
            mode="symmetric",
            conclusive=True,
            detail="weight-basis program; conclusive for symmetric tables",
        )

    if f.n > MAX_FULL_N or d > MAX_FULL_D:
        raise CapacityError(f"full mode supports n <= {MAX_FULL_N}, d <= {MAX_FULL_D}")
    G, h, masks = _build_full(f, d, epsf)
    feasible, x = phase1_feasible(G, h)
    witness = None
    if feasible:
        nv = len(masks)
        witness = Witness(
            mode="full",
            n=f.n,
            d=d,
            eps=epsf,
            p_coeffs={m: x[j] for j, m in enumerate(masks) if x[j] != 0},
            q_coeffs={m: x[nv + j] for j, m in enumerate(masks) if x[nv + j] != 0},
        )
    return FeasibilityResult(
        feasible=feasible,
        witness=witness,
        mode="full",
        conclusive=True,
        detail="monomial-basis program over all inputs",
    )


def verify_witness(f: TruthTable, witness: Witness, eps=None) -> tuple[bool, list[str]]:
    """Exact check of a witness against every input; lists all violations."""
    _check_boolean(f)
    epsf = _as_fraction(eps) if eps is not None else witness.eps
    problems = []
    if witness.mode == "full":
        too_big = [m for m in list(witness.p_coeffs) + list(witness.q_coeffs)
                   if m.bit_count() > witness.d]
        if too_big:
            problems.append(f"coefficients exceed degree {witness.d}: masks {too_big}")
    else:
        too_big = [j for j in list(witness.p_coeffs) + list(witness.q_coeffs)
                   if j > witness.d]
        if too_big:
            problems.append(f"coefficients exceed degree {witness.d}: orders {too_big}")
    for idx in range(1 << f.n):
        bits = index_to_bits(idx, f.n)
        p, q = witness.evaluate(bits)
        if q < 1:
            kind = "nonpositive" if q <= 0 else "below 1"
            problems.append(f"Q({bits}) = {q} is {kind}")
            continue
        if p < 0 or p > q:
            problems.append(f"P({bits}) = {p} outside [0, Q] with Q = {q}")
        if f.values[idx] == 1.0:
            if p < (1 - epsf) * q:
                problems.append(f"ratio at {bits} is {p}/{q}, below 1 - eps")
        else:
            if p > epsf * q:
                problems.append(f"ratio at {bits} is {p}/{q}, above eps")
    return not problems, problems


def scan_degree(
    f: TruthTable, eps, d_max: int, symmetric: bool = False
) -> tuple[Optional[int], list[FeasibilityResult]]:
    """Smallest feasible degree up to d_max, with per-degree results."""
    results = []
    found = None
    for d in range(d_max + 1):
        res = rdeg_feasible(f, d, eps, symmetric=symmetric)
        results.append(res)
        if res.feasible and found is None:
            found = d
            break
    return found, results
