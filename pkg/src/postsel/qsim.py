"""Real-amplitude state-vector simulator with query counting.

Conventions used throughout:

* Qubits are numbered 1..n with qubit 1 the most significant bit of the
  basis-state index, so basis index j assigns qubit q the bit
  ``(j >> (n - q)) & 1``.
* Amplitudes are real float64.  Unitaries must therefore be real
  orthogonal matrices.
* Input bit strings x have positions 1..N (x[0] is position 1).

The simulator refuses to allocate more than MAX_QUBITS qubits.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CapacityError, DomainError, PostselectionImpossible

MAX_QUBITS = 24
NORM_TOL = 1e-9

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])


class QueryCounter:
    """Counts oracle queries charged by query operations."""

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0

    def add(self, n: int = 1):
        self.count += n

    def __repr__(self):
        return f"QueryCounter({self.count})"


class PureState:
    """A normalized real state vector over num_qubits qubits."""

    __slots__ = ("num_qubits", "amps")

    def __init__(self, num_qubits: int, amps):
        if not 1 <= num_qubits <= MAX_QUBITS:
            raise CapacityError(
                f"num_qubits={num_qubits} outside supported range 1..{MAX_QUBITS}"
            )
        arr = np.asarray(amps, dtype=np.float64)
        if arr.shape != (1 << num_qubits,):
            raise ValueError(
                f"state over {num_qubits} qubits needs {1 << num_qubits} "
                f"amplitudes, got shape {arr.shape}"
            )
        nrm = float(arr @ arr)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |amps|^2 = {nrm!r}")
        self.num_qubits = num_qubits
        self.amps = arr

    def probabilities(self) -> np.ndarray:
        return self.amps * self.amps

    def amplitude(self, index: int) -> float:
        return float(self.amps[index])

    def __repr__(self):
        return f"PureState(num_qubits={self.num_qubits})"


def qubit_bit(num_qubits: int, qubit: int) -> int:
    """Index-space bit value of the given qubit (qubit 1 = MSB)."""
    if not 1 <= qubit <= num_qubits:
        raise ValueError(f"qubit {qubit} out of range 1..{num_qubits}")
    return 1 << (num_qubits - qubit)


def register_mask(num_qubits: int, qubits: Iterable[int]) -> int:
    mask = 0
    for q in qubits:
        mask |= qubit_bit(num_qubits, q)
    return mask


def init_basis_state(num_qubits: int, index: int = 0) -> PureState:
    if not 0 <= index < (1 << num_qubits):
        raise ValueError(f"basis index {index} out of range")
    amps = np.zeros(1 << num_qubits)
    amps[index] = 1.0
    return PureState(num_qubits, amps)


@lru_cache(maxsize=64)
def _arange(size: int) -> np.ndarray:
    arr = np.arange(size, dtype=np.int64)
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=64)
def _register_values_cached(num_qubits: int, qubits: tuple) -> np.ndarray:
    idx = _arange(1 << num_qubits)
    vals = np.zeros(1 << num_qubits, dtype=np.int64)
    for q in qubits:
        vals = (vals << 1) | ((idx >> (num_qubits - q)) & 1)
    vals.flags.writeable = False
    return vals


def _register_values(num_qubits: int, qubits: Sequence[int], size: int) -> np.ndarray:
    """Value held in a sub-register (MSB-first qubit list), per basis index."""
    return _register_values_cached(num_qubits, tuple(qubits))


def apply_1q_gate(
    state: PureState,
    qubit: int,
    gate: np.ndarray,
    control: Optional[tuple[int, int]] = None,
) -> PureState:
    """Apply a real orthogonal 2x2 gate, optionally controlled.

    control is (control_qubit, control_value); the gate acts only on the
    subspace where that qubit has that value.
    """
    g = np.asarray(gate, dtype=np.float64)
    if g.shape != (2, 2):
        raise ValueError("gate must be 2x2")
    if not np.allclose(g @ g.T, np.eye(2), atol=1e-10):
        raise ValueError("gate must be real orthogonal")
    n = state.num_qubits
    tbit = qubit_bit(n, qubit)

    if control is None:
        pre = (1 << n) // (2 * tbit)
        post = tbit
        v = state.amps.reshape(pre, 2, post)
        out = np.empty_like(v)
        out[:, 0, :] = g[0, 0] * v[:, 0, :] + g[0, 1] * v[:, 1, :]
        out[:, 1, :] = g[1, 0] * v[:, 0, :] + g[1, 1] * v[:, 1, :]
        return PureState(n, out.reshape(-1))

    cq, cval = control
    if cq == qubit:
        raise ValueError("control and target must differ")
    cbit = qubit_bit(n, cq)
    idx = _arange(1 << n)
    sel0 = ((idx & tbit) == 0) & (((idx & cbit) != 0) == bool(cval))
    i0 = idx[sel0]
    i1 = i0 | tbit
    out = state.amps.copy()
    a0 = state.amps[i0]
    a1 = state.amps[i1]
    out[i0] = g[0, 0] * a0 + g[0, 1] * a1
    out[i1] = g[1, 0] * a0 + g[1, 1] * a1
    return PureState(n, out)


def apply_register_gate(
    state: PureState, qubits: Sequence[int], gate: np.ndarray
) -> PureState:
    """Apply a real orthogonal 2^k x 2^k matrix to a k-qubit register."""
    k = len(qubits)
    g = np.asarray(gate, dtype=np.float64)
    if g.shape != (1 << k, 1 << k):
        raise ValueError(f"gate shape {g.shape} does not match {k} qubits")
    if not np.allclose(g @ g.T, np.eye(1 << k), atol=1e-10):
        raise ValueError("gate must be real orthogonal")
    n = state.num_qubits
    axes = [q - 1 for q in qubits]
    if axes == list(range(k)):
        # register is a contiguous MSB prefix, no axis shuffle needed
        out = g @ state.amps.reshape(1 << k, -1)
        return PureState(n, out.reshape(-1))
    tensor = state.amps.reshape([2] * n)
    rest = [a for a in range(n) if a not in axes]
    moved = np.transpose(tensor, axes + rest).reshape(1 << k, -1)
    out = g @ moved
    inv = np.argsort(axes + rest)
    new_amps = np.transpose(out.reshape([2] * n), inv).reshape(-1)
    return PureState(n, new_amps)


def apply_bit_query(
    state: PureState,
    x: Sequence[int],
    index_qubits: Sequence[int],
    target: int,
    counter: QueryCounter,
    *,
    index_offset: int = 0,
) -> PureState:
    """One query to the bit oracle for input x.

    The index register (MSB-first qubit list) holds a value v; the oracle
    XORs x at position v + index_offset into the target qubit.  Positions
    outside 1..len(x) act as the identity, so with the default offset the
    register value 0 addresses nothing.  Charges exactly one query.
    """
    n = state.num_qubits
    tbit = qubit_bit(n, target)
    if target in index_qubits:
        raise ValueError("target qubit cannot be part of the index register")
    size = 1 << n
    vals = _register_values(n, index_qubits, size)

    # lut[v] = addressed bit for register value v (0 when out of range)
    vcount = 1 << len(index_qubits)
    pos = np.arange(vcount) + index_offset
    lut = np.zeros(vcount, dtype=np.int64)
    ok = (pos >= 1) & (pos <= len(x))
    if ok.any():
        xarr = np.asarray(x, dtype=np.int64)
        lut[ok] = xarr[pos[ok] - 1]
    flips = lut[vals] * tbit

    new_amps = state.amps[_arange(size) ^ flips]
    counter.add(1)
    return PureState(n, new_amps)


def apply_subset_phase_query(
    state: PureState,
    x: Sequence[int],
    subset_qubits: Sequence[int],
    d: int,
    counter: QueryCounter,
) -> PureState:
    """Phase oracle on a subset register: |S> picks up (-1)^(x . S).

    The register has one qubit per input position (qubit i of the list
    addresses position i+1).  Implementable with d serial bit queries only
    when every basis state in the support encodes a subset of size <= d,
    so that is enforced; charges d queries.
    """
    if len(subset_qubits) != len(x):
        raise ValueError("subset register must have one qubit per input position")
    n = state.num_qubits
    size = 1 << n
    vals = _register_values(n, subset_qubits, size)

    sizes = np.zeros(size, dtype=np.int64)
    hit = np.zeros(size, dtype=np.int64)
    for i, bit in enumerate(x):
        sel = (vals >> (len(x) - 1 - i)) & 1
        sizes += sel
        if bit:
            hit += sel
    support = np.abs(state.amps) > 1e-12
    if np.any(support & (sizes > d)):
        raise DomainError(
            f"state has support on subsets larger than the query budget d={d}"
        )
    signs = 1.0 - 2.0 * (hit & 1)
    counter.add(d)
    return PureState(n, state.amps * signs)


def postselect(state: PureState, mask: int, value: int) -> tuple[PureState, float]:
    """Project onto {index & mask == value}, renormalize.

    Returns (collapsed state, probability of the postselected event).
    Raises PostselectionImpossible when that probability is below 1e-15.
    """
    keep = (_arange(1 << state.num_qubits) & mask) == value
    kept = np.where(keep, state.amps, 0.0)
    prob = float(kept @ kept)
    if prob < 1e-15:
        raise PostselectionImpossible(
            f"postselection mask={mask:#x} value={value:#x} has probability {prob!r}"
        )
    return PureState(state.num_qubits, kept / math.sqrt(prob)), prob


class Distribution:
    """Measurement outcome distribution over bit tuples."""

    __slots__ = ("probs",)

    def __init__(self, probs: dict):
        self.probs = probs

    def __getitem__(self, outcome) -> float:
        return self.probs.get(tuple(outcome), 0.0)

    def items(self):
        return self.probs.items()

    def total(self) -> float:
        return math.fsum(self.probs.values())


def measure(state: PureState, qubits: Sequence[int], rng=None):
    """Measure the listed qubits in the computational basis.

    Without an rng, returns the full Distribution.  With an rng, samples
    one outcome and returns (outcome_tuple, collapsed_state).
    """
    n = state.num_qubits
    size = 1 << n
    vals = _register_values(n, qubits, size)
    probs = state.probabilities()
    agg = np.bincount(vals, weights=probs, minlength=1 << len(qubits))

    if rng is None:
        out = {}
        for v, p in enumerate(agg):
            if p > 0.0:
                bits = tuple((v >> (len(qubits) - 1 - i)) & 1 for i in range(len(qubits)))
                out[bits] = float(p)
        return Distribution(out)

    r = rng.random()
    acc = 0.0
    chosen = len(agg) - 1
    for v, p in enumerate(agg):
        acc += p
        if r < acc:
            chosen = v
            break
    bits = tuple((chosen >> (len(qubits) - 1 - i)) & 1 for i in range(len(qubits)))
    kept = np.where(vals == chosen, state.amps, 0.0)
    nrm = math.sqrt(float(kept @ kept))
    return bits, PureState(n, kept / nrm)
