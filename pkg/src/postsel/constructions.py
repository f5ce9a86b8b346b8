"""Weight-qubit preparation and the one-query OR demonstration.

The central object is a single qubit whose amplitudes encode the Hamming
weight z of an N-bit input:

    |w(z)>  proportional to  ( alpha * z,  beta * (N - 2z) / sqrt(2) )

weight_qubit gives the closed form; weight_qubit_circuit prepares the same
qubit by an explicit one-query circuit with two postselections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import qsim
from .errors import DomainError, PostselectionImpossible
from .util import INV_SQRT2, ceil_log2_int


@dataclass(frozen=True)
class ABPair:
    """Normalized amplitude pair (alpha, beta) for the helper ancilla."""

    alpha: float
    beta: float

    def __post_init__(self):
        nrm = self.alpha ** 2 + self.beta ** 2
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError(f"(alpha, beta) not normalized: |.|^2 = {nrm!r}")

    @classmethod
    def from_ratio(cls, ratio: float) -> "ABPair":
        """Pair with alpha/beta = ratio, both components positive."""
        if not ratio > 0.0:
            raise DomainError(f"ratio must be positive, got {ratio!r}")
        hyp = math.hypot(ratio, 1.0)
        return cls(ratio / hyp, 1.0 / hyp)


@dataclass(frozen=True)
class QubitState:
    """A normalized single-qubit real state."""

    amp0: float
    amp1: float

    def __post_init__(self):
        nrm = self.amp0 ** 2 + self.amp1 ** 2
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError(f"qubit not normalized: |.|^2 = {nrm!r}")

    def plus_prob(self) -> float:
        """Probability of outcome + when measured in the |+>/|-> basis."""
        t = self.amp0 + self.amp1
        return 0.5 * t * t

    def as_array(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1])


def weight_qubit(N: int, z: int, ab: ABPair) -> QubitState:
    """Closed form of the weight qubit, normalized."""
    if N < 1 or not 0 <= z <= N:
        raise DomainError(f"need 0 <= z <= N with N >= 1, got N={N}, z={z}")
    a = ab.alpha * z
    b = ab.beta * (N - 2 * z) * INV_SQRT2
    h = math.hypot(a, b)
    if h == 0.0:
        raise DomainError(f"weight qubit vanishes at N={N}, z={z} for this pair")
    return QubitState(a / h, b / h)


def weight_qubit_success_prob(N: int, z: int, ab: ABPair) -> float:
    """Closed-form probability that both postselections succeed."""
    num = (ab.alpha * z) ** 2 + (ab.beta * (N - 2 * z)) ** 2 / 2.0
    return num / float(N) ** 2


def rho_plus(N: int, z: int, ab: ABPair) -> float:
    """Probability of + when the weight qubit is measured in the +/- basis."""
    a = ab.alpha * z
    b = ab.beta * (N - 2 * z) * INV_SQRT2
    den = a * a + b * b
    if den == 0.0:
        raise DomainError(f"weight qubit vanishes at N={N}, z={z} for this pair")
    t = a + b
    return 0.5 * t * t / den


@lru_cache(maxsize=64)
def _uniform_prep_matrix(m: int, N: int) -> np.ndarray:
    """Real orthogonal involution U with U e_0 = uniform over values 0..N-1."""
    size = 1 << m
    u = np.zeros(size)
    u[:N] = 1.0 / math.sqrt(N)
    w = -u.copy()
    w[0] += 1.0
    wn = np.linalg.norm(w)
    if wn < 1e-12:
        return np.eye(size)
    w /= wn
    return np.eye(size) - 2.0 * np.outer(w, w)


@lru_cache(maxsize=64)
def _stage1_pre_query_state(N: int) -> qsim.PureState:
    """Prepared index register (uniform over 0..N-1) with fresh data qubit.

    Cached per N; callers must not mutate the returned state's buffer.
    """
    m = ceil_log2_int(N)
    state = qsim.init_basis_state(m + 1, 0)
    return qsim.apply_register_gate(state, range(1, m + 1), _uniform_prep_matrix(m, N))


def _weight_qubit_stage1(
    N: int, x: Sequence[int], counter: qsim.QueryCounter
) -> tuple[QubitState, float]:
    """One-query circuit producing a qubit proportional to (N - z, z)."""
    m = ceil_log2_int(N)
    state = _stage1_pre_query_state(N)
    state = qsim.apply_bit_query(
        state, x, range(1, m + 1), m + 1, counter, index_offset=1
    )
    state = qsim.apply_register_gate(state, range(1, m + 1), _uniform_prep_matrix(m, N))
    mask = qsim.register_mask(m + 1, range(1, m + 1))
    state, prob = qsim.postselect(state, mask, 0)
    return QubitState(state.amplitude(0), state.amplitude(1)), prob


def _weight_qubit_stage2(psi: QubitState, ab: ABPair) -> tuple[QubitState, float]:
    """Ancilla + controlled mixing + postselection, in closed form.

    Joint state (data psi) x (ancilla alpha|0> + beta|1>), a basis change
    on the data qubit controlled by the ancilla, then postselect data = 1;
    output is the ancilla qubit.  Equivalent to _stage2_qsim below.
    """
    a1 = ab.alpha * psi.amp1
    b1 = ab.beta * (psi.amp0 - psi.amp1) * INV_SQRT2
    prob = a1 * a1 + b1 * b1
    if prob < 1e-15:
        raise PostselectionImpossible(f"stage-2 postselection has probability {prob!r}")
    h = math.sqrt(prob)
    return QubitState(a1 / h, b1 / h), prob


def _stage2_qsim(psi: QubitState, ab: ABPair) -> tuple[QubitState, float]:
    """Same map as _weight_qubit_stage2 run through simulator primitives."""
    joint = np.kron(psi.as_array(), np.array([ab.alpha, ab.beta]))
    state = qsim.PureState(2, joint)
    state = qsim.apply_1q_gate(state, 1, qsim.HADAMARD, control=(2, 1))
    state, prob = qsim.postselect(state, qsim.qubit_bit(2, 1), qsim.qubit_bit(2, 1))
    return QubitState(state.amplitude(2), state.amplitude(3)), prob


def weight_qubit_circuit(
    N: int, x: Sequence[int], ab: ABPair, counter: qsim.QueryCounter
) -> tuple[QubitState, float]:
    """Prepare the weight qubit for input x with one query.

    Returns (qubit, cumulative success probability of both postselections).
    """
    if N < 2:
        raise DomainError("circuit form needs N >= 2")
    if len(x) != N:
        raise DomainError(f"x has {len(x)} bits, expected {N}")
    psi, p1 = _weight_qubit_stage1(N, x, counter)
    out, p2 = _weight_qubit_stage2(psi, ab)
    return out, p1 * p2


def weight_qubit_circuit_batch(
    N: int,
    x: Sequence[int],
    ab_list: Sequence[ABPair],
    counter: qsim.QueryCounter,
) -> list[tuple[QubitState, float]]:
    """Run weight_qubit_circuit for many (alpha, beta) pairs on one input.

    Stage 1 does not depend on the pair, so it is simulated once; the
    counter is still charged one query per produced output, matching
    len(ab_list) independent runs.
    """
    if N < 2:
        raise DomainError("circuit form needs N >= 2")
    psi, p1 = _weight_qubit_stage1(N, x, counter)
    counter.add(len(ab_list) - 1)
    results = []
    for ab in ab_list:
        out, p2 = _weight_qubit_stage2(psi, ab)
        results.append((out, p1 * p2))
    return results


def weight_qubit_grid(
    N: int, z: int, alphas: np.ndarray, betas: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form weight qubits for many (alpha, beta) pairs at once.

    Returns (amp0s, amp1s) of the normalized qubits.
    """
    a = alphas * float(z)
    b = betas * float(N - 2 * z) * INV_SQRT2
    h = np.hypot(a, b)
    if np.any(h == 0.0):
        raise DomainError(f"weight qubit vanishes at N={N}, z={z} for some pair")
    return a / h, b / h


def weight_qubit_circuit_grid(
    N: int,
    x: Sequence[int],
    alphas: np.ndarray,
    betas: np.ndarray,
    counter: qsim.QueryCounter,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized form of weight_qubit_circuit_batch.

    Returns (amp0s, amp1s, cumulative_probs) arrays, one entry per pair.
    Counter semantics match len(alphas) independent circuit runs.
    """
    if N < 2:
        raise DomainError("circuit form needs N >= 2")
    psi, p1 = _weight_qubit_stage1(N, x, counter)
    counter.add(len(alphas) - 1)
    a1 = alphas * psi.amp1
    b1 = betas * ((psi.amp0 - psi.amp1) * INV_SQRT2)
    prob2 = a1 * a1 + b1 * b1
    if np.any(prob2 < 1e-15):
        raise PostselectionImpossible("stage-2 postselection vanishes for some pair")
    h = np.sqrt(prob2)
    return a1 / h, b1 / h, p1 * prob2


@dataclass(frozen=True)
class OrDemoResult:
    success_prob: float
    conditional_error: float
    output: int


class OrDemoAlgorithm:
    """One-query postselected algorithm for OR on n bits.

    A branch of amplitude eps0 skips the oracle entirely and reports 0;
    the rest of the amplitude spreads uniformly over the n positions and
    copies the addressed bit into the output qubit.  Postselecting on
    (output = 1 or skip branch) yields OR with one-sided error that decays
    like eps0^2 * n.
    """

    def __init__(self, n_bits: int, eps0: float):
        if n_bits < 1:
            raise DomainError("need at least one input bit")
        if not 0.0 < eps0 < 1.0:
            raise DomainError(f"eps0 must lie in (0, 1), got {eps0!r}")
        self.n_bits = n_bits
        self.eps0 = eps0
        self.query_count = 1
        self.is_coherent = True

    def _final_state(self, bits: Sequence[int], counter=None) -> qsim.PureState:
        n = self.n_bits
        m = ceil_log2_int(n + 1)
        size = 1 << (m + 1)
        amps = np.zeros(size)
        amps[0] = self.eps0
        spread = math.sqrt((1.0 - self.eps0 ** 2) / n)
        for i in range(1, n + 1):
            amps[i << 1] = spread
        state = qsim.PureState(m + 1, amps)
        if counter is None:
            counter = qsim.QueryCounter()
        return qsim.apply_bit_query(state, bits, range(1, m + 1), m + 1, counter)

    def joint_probs(self, bits: Sequence[int]) -> tuple[float, float]:
        """Return (Pr[a=1], Pr[a=1 and b=1]) for this input."""
        state = self._final_state(bits)
        m = state.num_qubits - 1
        probs = state.probabilities()
        q = 0.0
        p = 0.0
        for idx, pr in enumerate(probs):
            if pr == 0.0:
                continue
            value = idx >> 1
            b = idx & 1
            a = 1 if (value == 0 or b == 1) else 0
            if a:
                q += pr
                if b:
                    p += pr
        return q, p


def or_postselect_demo(
    x: Sequence[int], eps0: float, mode: str = "exact", rng=None
) -> OrDemoResult:
    """Run the OR demo on a concrete input.

    mode "exact" evaluates the postselected output distribution exactly;
    mode "sample" draws the output bit with the supplied generator.
    """
    alg = OrDemoAlgorithm(len(x), eps0)
    q, p = alg.joint_probs(x)
    if q < 1e-15:
        raise PostselectionImpossible("accepting branch has zero probability")
    p_one = p / q
    f = 1 if any(x) else 0
    err = (1.0 - p_one) if f else p_one
    if mode == "exact":
        output = 1 if p_one > 0.5 else 0
    elif mode == "sample":
        if rng is None:
            raise DomainError("sample mode needs an rng")
        output = 1 if rng.random() < p_one else 0
    else:
        raise DomainError(f"unknown mode {mode!r}")
    return OrDemoResult(success_prob=q, conditional_error=err, output=output)
