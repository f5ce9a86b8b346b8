"""Compile acceptance polynomials into explicit postselected circuits.

Given the pair (P, Q) of a postselected algorithm, write Q and R = Q - 2P
in the character basis.  A circuit over 1 + N qubits prepares

    |0> sum_S Qhat(S) |S>  +  |1> sum_S Rhat(S) |S>   (normalized)

then applies d phase queries so each |S> picks up (-1)^(x . S), maps the
subset register back to |0..0> amplitude Q(x) resp. R(x) via a Hadamard
layer, postselects the register on all zeros, and rotates the first qubit
with one more Hadamard.  The surviving qubit outputs 1 with probability
determined solely by the ratio R(x)/Q(x).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import qsim
from .boolfn import (
    FourierSpectrum,
    MultilinearPoly,
    TruthTable,
    extract_pq,
    fourier,
    index_to_bits,
    mask_to_subset,
    ratio_check,
    subset_to_mask,
)
from .errors import (
    DegreeOverflowError,
    DomainError,
    StageFailure,
    TheoremViolation,
)


def error_formula(ratio: float, target_sign: int) -> float:
    """Conditional error of the compiled circuit at a given ratio.

    target_sign is +1 when the correct output is 0 and -1 when it is 1;
    the formulas are mirror images of each other.
    """
    if target_sign == 1:
        return (1.0 - ratio) ** 2 / (2.0 * (1.0 + ratio * ratio))
    if target_sign == -1:
        return (1.0 + ratio) ** 2 / (2.0 * (1.0 + ratio * ratio))
    raise DomainError(f"target_sign must be +1 or -1, got {target_sign!r}")


class CompiledAlgorithm:
    """A d-query postselected circuit built from two character spectra."""

    def __init__(
        self,
        q_hat: FourierSpectrum,
        r_hat: FourierSpectrum,
        degree: int,
        eps: Optional[float] = None,
    ):
        if q_hat.n != r_hat.n:
            raise DomainError("spectra are over different variable counts")
        worst = max(q_hat.degree(), r_hat.degree())
        if worst > degree:
            raise DegreeOverflowError(
                f"spectra have support on subsets of size {worst} > d={degree}"
            )
        gamma_sq = sum(c * c for c in q_hat.coeffs.values()) + sum(
            c * c for c in r_hat.coeffs.values()
        )
        if gamma_sq <= 0.0:
            raise DomainError("cannot compile the zero algorithm")
        self.n_bits = q_hat.n
        self.degree = degree
        self.query_count = degree
        self.q_hat = q_hat
        self.r_hat = r_hat
        self.gamma = math.sqrt(gamma_sq)
        self.eps = eps
        self.is_coherent = True

    def values_at(self, bits: Sequence[int]) -> tuple[float, float]:
        """(Q(x), R(x)) evaluated from the spectra."""
        return self.q_hat.evaluate(bits), self.r_hat.evaluate(bits)

    def joint_probs(self, bits: Sequence[int]) -> tuple[float, float]:
        """(Pr[a=1], Pr[a=1 and b=1]) in closed form."""
        qx, rx = self.values_at(bits)
        scale = (2.0 ** self.n_bits) * self.gamma ** 2
        q = (qx * qx + rx * rx) / scale
        p = (qx - rx) ** 2 / (2.0 * scale)
        return q, p

    def initial_state(self) -> qsim.PureState:
        n = self.n_bits
        amps = np.zeros(1 << (n + 1))
        for m, c in self.q_hat.coeffs.items():
            amps[m] = c / self.gamma
        for m, c in self.r_hat.coeffs.items():
            amps[(1 << n) | m] = c / self.gamma
        return qsim.PureState(n + 1, amps)

    def to_json(self) -> str:
        data = {
            "n": self.n_bits,
            "d": self.degree,
            "eps": self.eps,
            "q_hat": [
                {"subset": mask_to_subset(m, self.n_bits), "coeff": c}
                for m, c in sorted(self.q_hat.coeffs.items())
            ],
            "r_hat": [
                {"subset": mask_to_subset(m, self.n_bits), "coeff": c}
                for m, c in sorted(self.r_hat.coeffs.items())
            ],
        }
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CompiledAlgorithm":
        data = json.loads(text)
        n = int(data["n"])

        def load(terms):
            coeffs = {}
            for t in terms:
                coeffs[subset_to_mask(t["subset"], n)] = float(t["coeff"])
            return FourierSpectrum(n, coeffs)

        return cls(load(data["q_hat"]), load(data["r_hat"]), int(data["d"]), data.get("eps"))


def compile_from_spectra(
    q_hat: FourierSpectrum,
    r_hat: FourierSpectrum,
    degree: Optional[int] = None,
    eps: Optional[float] = None,
) -> CompiledAlgorithm:
    """Build the compiled circuit directly from character spectra."""
    if degree is None:
        degree = max(q_hat.degree(), r_hat.degree())
    return CompiledAlgorithm(q_hat, r_hat, degree, eps)


def compile_rational(
    P: MultilinearPoly, Q: MultilinearPoly, eps: float
) -> CompiledAlgorithm:
    """Compile an acceptance pair (P, Q), validating it first.

    Requires 0 <= P(x) <= Q(x) with Q(x) > 0 everywhere, and that the
    sign-of-ratio decision achieves conditional error at most eps at every
    input.  The query count of the result equals max(deg Q, deg R).
    """
    if P.n != Q.n:
        raise DomainError("P and Q are over different variable counts")
    n = P.n
    ptab = P.table()
    qtab = Q.table()
    rtab = TruthTable(n, qtab.values - 2.0 * ptab.values)
    for idx in range(1 << n):
        pv, qv = ptab.values[idx], qtab.values[idx]
        if qv <= 1e-12:
            raise DomainError(f"Q must be positive everywhere; Q={qv!r} at index {idx}")
        if pv < -1e-9 or pv > qv + 1e-9:
            raise DomainError(f"need 0 <= P <= Q; got P={pv!r}, Q={qv!r} at index {idx}")
    q_hat = fourier(qtab)
    r_hat = fourier(rtab)
    alg = compile_from_spectra(q_hat, r_hat, eps=eps)
    worst = 0.0
    for idx in range(1 << n):
        ratio = rtab.values[idx] / qtab.values[idx]
        sign = -1 if ratio < 0 else 1
        worst = max(worst, error_formula(ratio, sign))
    if worst > eps + 1e-12:
        raise DomainError(
            f"pair only achieves conditional error {worst!r}, above target {eps!r}"
        )
    return alg


@dataclass
class CompiledRow:
    """Outcome of running a compiled circuit on one input."""

    bits: tuple
    success_prob: float
    conditional_error: float
    ratio: float
    output: int
    queries: int


def run_compiled(
    alg: CompiledAlgorithm, bits: Sequence[int], mode: str = "exact", rng=None
) -> CompiledRow:
    """Execute the compiled circuit on input bits through the simulator.

    mode "exact" reads the postselected output distribution; mode "sample"
    draws the output bit.  The simulated conditional error must match
    error_formula to 1e-10, otherwise the circuit itself is broken and a
    TheoremViolation is raised.
    """
    n = alg.n_bits
    counter = qsim.QueryCounter()
    state = alg.initial_state()
    subset_qubits = list(range(2, n + 2))
    state = qsim.apply_subset_phase_query(state, bits, subset_qubits, alg.degree, counter)
    for q in subset_qubits:
        state = qsim.apply_1q_gate(state, q, qsim.HADAMARD)
    mask = qsim.register_mask(n + 1, subset_qubits)
    state, success = qsim.postselect(state, mask, 0)
    state = qsim.apply_1q_gate(state, 1, qsim.HADAMARD)
    dist = qsim.measure(state, [1])
    p_one = dist[(1,)]

    qx, rx = alg.values_at(bits)
    if abs(qx) < 1e-12:
        raise DomainError(f"acceptance polynomial vanishes at {tuple(bits)}")
    ratio = rx / qx
    output = 1 if ratio < 0 else 0
    cond_err = 1.0 - p_one if output == 1 else p_one
    expected = error_formula(ratio, -1 if output == 1 else 1)
    if abs(cond_err - expected) > 1e-10:
        raise TheoremViolation(
            f"simulated error {cond_err!r} disagrees with formula {expected!r}"
        )
    if mode == "sample":
        if rng is None:
            raise DomainError("sample mode needs an rng")
        output = 1 if rng.random() < p_one else 0
    elif mode != "exact":
        raise DomainError(f"unknown mode {mode!r}")
    return CompiledRow(
        bits=tuple(int(b) for b in bits),
        success_prob=success,
        conditional_error=cond_err,
        ratio=ratio,
        output=output,
        queries=counter.count,
    )


def roundtrip(f: TruthTable, P: MultilinearPoly, Q: MultilinearPoly, eps: float) -> dict:
    """Compile (P, Q), run it everywhere, extract back, and cross-check.

    Raises StageFailure naming the first broken stage; on success returns a
    summary with the compiled degree, worst conditional error, and the
    degrees of the re-extracted polynomials.
    """
    if not f.is_boolean():
        raise StageFailure("precheck", "target table is not 0/1-valued")
    n = f.n
    ptab, qtab = P.table(), Q.table()
    for idx in range(1 << n):
        qv = qtab.values[idx]
        if qv <= 1e-12:
            raise StageFailure("precheck", f"Q vanishes at index {idx}")
        want = f.values[idx]
        ratio = (qv - 2.0 * ptab.values[idx]) / qv
        if (ratio < 0) != (want == 1.0):
            raise StageFailure(
                "precheck", f"sign of ratio disagrees with target at index {idx}"
            )

    try:
        alg = compile_rational(P, Q, eps)
    except DomainError as e:
        raise StageFailure("compile", str(e))

    worst = 0.0
    for idx in range(1 << n):
        bits = index_to_bits(idx, n)
        try:
            row = run_compiled(alg, bits)
        except TheoremViolation as e:
            raise StageFailure("run", str(e))
        if row.output != int(f.values[idx]):
            raise StageFailure("run", f"compiled output wrong at index {idx}")
        worst = max(worst, row.conditional_error)

    try:
        P2, Q2 = extract_pq(alg)
    except TheoremViolation as e:
        raise StageFailure("extract", str(e))

    for idx in range(1 << n):
        bits = index_to_bits(idx, n)
        try:
            ratio = ratio_check(P2, Q2, bits)
        except DomainError as e:
            raise StageFailure("ratio_check", str(e))
        if (ratio < 0) != (f.values[idx] == 1.0):
            raise StageFailure("ratio_check", f"re-extracted sign wrong at index {idx}")

    if max(P2.degree(), Q2.degree()) > 2 * alg.degree:
        raise StageFailure(
            "degree",
            f"re-extracted degrees ({P2.degree()}, {Q2.degree()}) exceed {2 * alg.degree}",
        )

    return {
        "n": n,
        "compiled_degree": alg.degree,
        "worst_conditional_error": worst,
        "extracted_degrees": [P2.degree(), Q2.degree()],
    }
