"""Majority from postselected weight measurements.

Two families of weight-qubit settings drive everything.  Family A sweeps
geometric guesses 2^i for the quantity (N - 2z) / (sqrt(2) z); whenever
t <= z <= N/2 - t some guess lands within a factor 2 of the truth and its
plus-probability is at least MIN_STRADDLE_PLUS_PROB > 1/2, while for
z >= N/2 every element of either family has plus-probability at most 1/2.
Family B pins down the remaining band: its element with index i is exactly
|+> when z = i, so it survives forever there.

eliminate_a repeatedly majority-tests surviving A-elements with growing
sample sizes until either all die (evidence for z >= N/2) or a query
budget runs out (evidence for z < N/2).  eliminate_b walks through the B
list, killing the front element on any single minus outcome.  The main
algorithm votes over amplified A-runs and requires the B-run to consent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .constructions import ABPair, rho_plus
from .errors import CapacityError, DomainError
from .util import (
    binom_tail_geq,
    binom_tail_geq_fraction,
    ceil_log2_ratio,
)

# (3 + 2 sqrt(2)) / 6: worst-case plus-probability of the best A-element
# when its guess is within a factor 2 of the true value
MIN_STRADDLE_PLUS_PROB = (3.0 + 2.0 * math.sqrt(2.0)) / 6.0


@dataclass(frozen=True)
class MajorityParams:
    """Sizes and constants for one (N, t) instance."""

    N: int
    t: int
    budget_constant: int = 180
    copies_factor: int = 5
    b_trials_factor: int = 8

    def __post_init__(self):
        if self.N < 4 or self.N % 2:
            raise DomainError(f"N must be even and >= 4, got {self.N}")
        if not 1 <= self.t <= self.N // 4:
            raise DomainError(f"need 1 <= t <= N/4, got t={self.t} at N={self.N}")

    @property
    def half_width(self) -> int:
        """Half-width of family A; also the budget scale."""
        return ceil_log2_ratio(self.N, self.t)

    @property
    def budget(self) -> int:
        return self.budget_constant * self.half_width

    @property
    def b_trials(self) -> int:
        return self.b_trials_factor * self.t


@dataclass(frozen=True)
class FamilyElement:
    """One weight-qubit setting, identified by family kind and index."""

    kind: str
    index: int
    N: int

    @property
    def ratio(self) -> float:
        if self.kind == "A":
            return 2.0 ** self.index
        i = self.index
        return (self.N - 2 * i) / (math.sqrt(2.0) * i)

    @property
    def ab(self) -> ABPair:
        return ABPair.from_ratio(self.ratio)

    def rho(self, z: float) -> float:
        """Plus-probability of this element's weight qubit at weight z."""
        if self.kind == "A":
            return rho_plus(self.N, z, self.ab)
        # the sqrt(2) cancels for B-elements; this form is exact at the
        # certainty points (rho = 1 at z = index, rho = 1/2 at z = N/2)
        i = self.index
        u = (self.N - 2 * i) * z / i
        v = self.N - 2 * z
        den = u * u + v * v
        if den == 0.0:
            raise DomainError(f"weight qubit vanishes at z={z} for B[{i}]")
        return 0.5 * (u + v) ** 2 / den

    def rho_fraction(self, z) -> Fraction:
        """Exact rational plus-probability, B-elements only."""
        if self.kind != "B":
            raise DomainError("exact rational form exists only for family B")
        i = self.index
        zf = Fraction(z)
        u = Fraction(self.N - 2 * i) * zf / i
        v = self.N - 2 * zf
        den = u * u + v * v
        if den == 0:
            raise DomainError(f"weight qubit vanishes at z={z} for B[{i}]")
        return (u + v) ** 2 / (2 * den)


def build_family_a(params: MajorityParams) -> list[FamilyElement]:
    L = params.half_width
    return [FamilyElement("A", i, params.N) for i in range(-L, L + 1)]


def build_family_b(params: MajorityParams) -> list[FamilyElement]:
    N, t = params.N, params.t
    low = range(1, t)
    high = range(N // 2 - t + 1, N // 2)
    indices = sorted(set(low) | set(high))
    return [FamilyElement("B", i, N) for i in indices]


@dataclass
class TrialRecord:
    k: int
    surviving: list
    plus_counts: list


@dataclass
class ElimTranscript:
    """Full record of one elimination run."""

    trials: list
    queries: int
    output: int

    def to_json_dict(self) -> dict:
        return {
            "trials": [
                {"k": tr.k, "surviving": tr.surviving, "plus_counts": tr.plus_counts}
                for tr in self.trials
            ],
            "queries": self.queries,
            "output": self.output,
        }


def _check_weight(N: int, z) -> None:
    if not 0 <= z <= N:
        raise DomainError(f"weight {z!r} outside 0..{N}")


def eliminate_a_sample(
    params: MajorityParams, z, rng, counter=None
) -> tuple[int, ElimTranscript]:
    """One sampled A-elimination run at weight z.

    Trial k draws copies_factor*k weight-qubit measurements per surviving
    element; an element needs a strict majority of plus outcomes to stay
    (a tie eliminates).  Output 1 when every element is gone, output 0 when
    the query budget is hit with survivors left; the budget is only checked
    between trials, so a started trial always completes.
    """
    _check_weight(params.N, z)
    fam = build_family_a(params)
    rhos = [e.rho(z) for e in fam]
    alive = list(range(len(fam)))
    queries = 0
    trials = []
    k = 0
    while True:
        k += 1
        m = params.copies_factor * k
        counts = [int(rng.binomial(m, rhos[j])) for j in alive]
        queries += m * len(alive)
        alive = [j for j, c in zip(alive, counts) if 2 * c > m]
        trials.append(
            TrialRecord(k=k, surviving=[fam[j].index for j in alive], plus_counts=counts)
        )
        if not alive:
            output = 1
            break
        if queries >= params.budget:
            output = 0
            break
    if counter is not None:
        counter.add(queries)
    return output, ElimTranscript(trials, queries, output)


def eliminate_b_sample(
    params: MajorityParams, z, rng, counter=None
) -> tuple[int, ElimTranscript]:
    """One sampled B-elimination run at weight z.

    Walks the B list front to back for b_trials_factor*t trials, one
    measurement each; any minus kills the front element.  Output 1 when
    the list empties, 0 when members remain after the last trial.
    """
    _check_weight(params.N, z)
    fam = build_family_b(params)
    rhos = [e.rho(z) for e in fam]
    pos = 0
    queries = 0
    trials = []
    for tau in range(1, params.b_trials + 1):
        if pos == len(fam):
            break
        plus = 1 if rng.random() < rhos[pos] else 0
        queries += 1
        if not plus:
            pos += 1
        trials.append(
            TrialRecord(
                k=tau,
                surviving=[e.index for e in fam[pos:]],
                plus_counts=[plus],
            )
        )
    output = 1 if pos == len(fam) else 0
    if counter is not None:
        counter.add(queries)
    return output, ElimTranscript(trials, queries, output)


MAX_EXACT_FAMILY = 15


@lru_cache(maxsize=4096)
def _submask_order(mask: int) -> np.ndarray:
    """All submasks of mask, in doubling order over ascending bits."""
    subs = np.array([0], dtype=np.int64)
    b = mask
    while b:
        low = b & -b
        subs = np.concatenate([subs, subs | low])
        b ^= low
    subs.flags.writeable = False
    return subs


def _survival_split(mask: int, survive: np.ndarray) -> np.ndarray:
    """Probability of each submask in _submask_order(mask) surviving."""
    probs = np.array([1.0])
    b = mask
    while b:
        low = b & -b
        j = low.bit_length() - 1
        s = survive[j]
        probs = np.concatenate([probs * (1.0 - s), probs * s])
        b ^= low
    return probs


def eliminate_a_exact(params: MajorityParams, z) -> float:
    """Exact probability that an A-elimination run outputs 1 at weight z.

    Dynamic program over (survivor set, queries spent); the queries spent
    along a trajectory are determined by the survivor-count history, so
    states carry a small discrete distribution of query totals.  Branch
    mass below 1e-16 is pruned and tracked; total discarded mass must stay
    below 1e-12 or the result is rejected.
    """
    _check_weight(params.N, z)
    fam = build_family_a(params)
    nfam = len(fam)
    if nfam > MAX_EXACT_FAMILY:
        raise CapacityError(f"exact elimination supports at most {MAX_EXACT_FAMILY} elements")
    rhos = [e.rho(z) for e in fam]
    budget = params.budget
    full = (1 << nfam) - 1
    # mask -> (query totals array, probabilities array)
    states = {full: (np.array([0], dtype=np.int64), np.array([1.0]))}
    p_one = 0.0
    dropped = 0.0
    k = 0
    while states:
        k += 1
        if k > 10000:
            raise AssertionError("elimination DP failed to terminate")
        m = params.copies_factor * k
        need = m // 2 + 1
        survive = np.array([binom_tail_geq(m, need, r) for r in rhos])
        nxt: dict[int, list] = {}
        for S, (qs, ps) in states.items():
            cnt = S.bit_count()
            qs2 = qs + m * cnt
            subs = _submask_order(S)
            split = _survival_split(S, survive)
            for T, tp in zip(subs, split):
                if tp < 1e-16:
                    dropped += tp * float(ps.sum())
                    continue
                branch = ps * tp
                if T == 0:
                    p_one += float(branch.sum())
                    continue
                done = qs2 >= budget
                if done.all():
                    continue  # output 0, mass accounted implicitly
                if done.any():
                    keep = ~done
                    nxt.setdefault(int(T), []).append((qs2[keep], branch[keep]))
                else:
                    nxt.setdefault(int(T), []).append((qs2, branch))
        states = {}
        remaining = 0.0
        for T, parts in nxt.items():
            qs = np.concatenate([p[0] for p in parts])
            ps = np.concatenate([p[1] for p in parts])
            uq, inv = np.unique(qs, return_inverse=True)
            up = np.bincount(inv, weights=ps)
            keep = up >= 1e-16
            dropped += float(up[~keep].sum())
            if keep.any():
                states[T] = (uq[keep], up[keep])
                remaining += float(up[keep].sum())
        if remaining < 1e-13:
            dropped += remaining
            break
    if dropped > 1e-12:
        raise AssertionError(f"elimination DP discarded {dropped!r} probability mass")
    return p_one


def eliminate_b_exact(
    params: MajorityParams, z, exact: bool = False
) -> Union[float, Fraction]:
    """Probability that a B-elimination run outputs 1 at weight z.

    With exact=True the computation runs over the rationals (z must be an
    integer or Fraction) and the returned value is exact.
    """
    _check_weight(params.N, z)
    fam = build_family_b(params)
    mlen = len(fam)
    if exact:
        one = Fraction(1)
        rhos = [e.rho_fraction(z) for e in fam]
    else:
        one = 1.0
        rhos = [e.rho(z) for e in fam]
    if mlen == 0:
        return one
    zero = one - one
    # position j = number of dead elements; mlen is absorbing
    probs = [one] + [zero] * mlen
    for _ in range(params.b_trials):
        nxt = [zero] * (mlen + 1)
        nxt[mlen] = probs[mlen] + probs[mlen - 1] * (one - rhos[mlen - 1])
        for j in range(mlen - 1, 0, -1):
            nxt[j] = probs[j] * rhos[j] + probs[j - 1] * (one - rhos[j - 1])
        nxt[0] = probs[0] * rhos[0]
        probs = nxt
    return probs[mlen]


def t_for_eps(eps: float) -> int:
    """Certainty band width for a target error: ceil(log2(2/eps)), min 1."""
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if eps >= 2.0:
        return 1
    return max(1, math.ceil(math.log2(2.0 / eps) - 1e-12))


def default_amplification_reps(eps: float) -> int:
    """Number of A-runs voted over: smallest odd integer covering the
    amplification exponent 1.5 * log2(2/eps)."""
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    x = 1.5 * math.log2(2.0 / eps) if eps < 2.0 else 1.0
    r = max(1, math.ceil(x - 1e-12))
    if r % 2 == 0:
        r += 1
    return r


@dataclass
class MajorityRun:
    """Result of one sampled majority computation."""

    output: int
    queries: int
    a_outputs: list
    b_output: Optional[int]
    transcripts: list = field(default_factory=list)


def majority_sample_weight(
    n: int,
    z,
    eps: float,
    rng,
    amplification_reps: Optional[int] = None,
    record: bool = False,
) -> MajorityRun:
    """Sampled majority decision at a known weight z on n positions.

    Outputs 1 for z >= n/2 with error probability at most eps.  When the
    certainty band would not fit (t > n/4) the trivial algorithm reads all
    n positions instead.
    """
    if n < 2 or n % 2:
        raise DomainError(f"n must be even and >= 2, got {n}")
    _check_weight(n, z)
    t = t_for_eps(eps)
    if t > n // 4:
        # trivial fallback: read every position
        return MajorityRun(
            output=1 if 2 * z >= n else 0,
            queries=n,
            a_outputs=[],
            b_output=None,
        )
    params = MajorityParams(n, t)
    r = amplification_reps or default_amplification_reps(eps)
    queries = 0
    a_outputs = []
    transcripts = []
    for _ in range(r):
        out, tr = eliminate_a_sample(params, z, rng)
        a_outputs.append(out)
        queries += tr.queries
        if record:
            transcripts.append(tr)
    vote = 1 if 2 * sum(a_outputs) > r else 0
    b_output = None
    if vote:
        b_output, btr = eliminate_b_sample(params, z, rng)
        queries += btr.queries
        if record:
            transcripts.append(btr)
        output = b_output
    else:
        output = 0
    return MajorityRun(
        output=output,
        queries=queries,
        a_outputs=a_outputs,
        b_output=b_output,
        transcripts=transcripts,
    )


def _normalize_bits(x) -> list[int]:
    if isinstance(x, str):
        if not all(c in "01" for c in x):
            raise DomainError("bit string must contain only 0 and 1")
        return [1 if c == "1" else 0 for c in x]
    bits = [1 if b else 0 for b in x]
    return bits


def majority_sample(
    x,
    eps: float,
    rng,
    amplification_reps: Optional[int] = None,
    record: bool = False,
) -> MajorityRun:
    """Sampled majority of a bit string, with the 01-prefix guard.

    The input is extended by one 0 and one 1, which leaves the majority
    value unchanged but keeps the effective weight away from the two
    degenerate ends where every element's plus-probability collapses to
    exactly 1/2.  The run interacts with the input only through weight
    measurements, so it is simulated at the padded weight directly.
    """
    bits = _normalize_bits(x)
    if len(bits) % 2:
        raise DomainError("input length must be even")
    if not bits:
        raise DomainError("input must be nonempty")
    n = len(bits) + 2
    z = sum(bits) + 1
    return majority_sample_weight(
        n, z, eps, rng, amplification_reps=amplification_reps, record=record
    )


def majority_exact(
    n: int, eps: float, z, amplification_reps: Optional[int] = None
) -> float:
    """Exact probability that the sampled majority algorithm outputs 1.

    Mirrors majority_sample_weight: amplified A-vote times B-consent, with
    the same parameters and fallback rule.
    """
    if n < 2 or n % 2:
        raise DomainError(f"n must be even and >= 2, got {n}")
    _check_weight(n, z)
    t = t_for_eps(eps)
    if t > n // 4:
        return 1.0 if 2 * z >= n else 0.0
    params = MajorityParams(n, t)
    r = amplification_reps or default_amplification_reps(eps)
    p_a = eliminate_a_exact(params, z)
    p_b = float(eliminate_b_exact(params, z))
    vote = binom_tail_geq(r, (r + 1) // 2, p_a)
    return vote * p_b
