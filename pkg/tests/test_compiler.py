"""Spectra compiler and roundtrip tests."""

import numpy as np
import pytest

from postsel import boolfn, compiler
from postsel.constructions import OrDemoAlgorithm
from postsel.errors import DegreeOverflowError, DomainError, StageFailure


def test_error_formula_basics():
    # perfect agreement with the target sign costs nothing
    assert compiler.error_formula(-1.0, -1) == 0.0
    assert compiler.error_formula(1.0, 1) == 0.0
    # ratio 0 makes the output bit a fair coin
    assert abs(compiler.error_formula(0.0, 1) - 0.5) < 1e-12
    assert abs(compiler.error_formula(0.0, -1) - 0.5) < 1e-12
    # mirror symmetry
    for r in (-0.8, -0.2, 0.3, 0.9):
        assert abs(compiler.error_formula(r, 1)
                   - compiler.error_formula(-r, -1)) < 1e-15


def test_compile_from_spectra_counts_queries():
    n = 2
    m1 = boolfn.subset_to_mask([1], n)
    q_hat = boolfn.FourierSpectrum(n, {0: 1.0, m1: -0.25})
    r_hat = boolfn.FourierSpectrum(n, {0: -0.5, m1: 0.25})
    alg = compiler.compile_from_spectra(q_hat, r_hat)
    assert alg.degree == 1 and alg.query_count == 1
    with pytest.raises(DegreeOverflowError):
        compiler.compile_from_spectra(q_hat, r_hat, degree=0)


def test_run_compiled_matches_joint_probs():
    for n in (2, 3):
        alg_src = OrDemoAlgorithm(n, 0.15)
        P, Q = boolfn.extract_pq(alg_src)
        alg = compiler.compile_rational(P, Q, 0.5)
        for idx in range(1 << n):
            bits = boolfn.index_to_bits(idx, n)
            row = compiler.run_compiled(alg, bits)
            q, p = alg.joint_probs(bits)
            qs, ps = alg_src.joint_probs(bits)
            assert abs(row.success_prob - q) < 1e-12
            # compilation preserves the acceptance ratio, not p/q itself
            assert abs(row.ratio - (qs - 2 * ps) / qs) < 1e-10
            assert row.queries == alg.degree


def test_compiled_sampling_mode():
    alg_src = OrDemoAlgorithm(2, 0.2)
    P, Q = boolfn.extract_pq(alg_src)
    alg = compiler.compile_rational(P, Q, 0.5)
    rng = np.random.default_rng(5)
    row = compiler.run_compiled(alg, (1, 0), mode="sample", rng=rng)
    assert row.output in (0, 1)


def test_compile_rational_rejects_bad_target():
    alg_src = OrDemoAlgorithm(2, 0.4)  # worst error well above 1e-3
    P, Q = boolfn.extract_pq(alg_src)
    with pytest.raises(DomainError):
        compiler.compile_rational(P, Q, 1e-3)


def test_compile_rational_rejects_negative_q():
    n = 1
    P = boolfn.MultilinearPoly(n, {})
    Q = boolfn.MultilinearPoly(n, {0: 1.0, 1: -2.0})  # Q(1) = -1
    with pytest.raises(DomainError):
        compiler.compile_rational(P, Q, 0.5)


def test_roundtrip_stage_failure_carries_stage():
    f = boolfn.TruthTable.from_string("01")
    P = boolfn.MultilinearPoly(1, {0: 1.0})   # P > Q somewhere is impossible
    Q = boolfn.MultilinearPoly(1, {0: 0.5})
    with pytest.raises(StageFailure) as exc:
        compiler.roundtrip(f, P, Q, 0.25)
    assert exc.value.stage in ("precheck", "compile")


def test_compiled_json_roundtrip():
    n = 2
    q_hat = boolfn.FourierSpectrum(n, {0: 1.05, 1: -0.5, 2: -0.5})
    r_hat = boolfn.FourierSpectrum(n, {0: -0.95, 1: 0.5, 2: 0.5})
    alg = compiler.compile_from_spectra(q_hat, r_hat, eps=0.05)
    back = compiler.CompiledAlgorithm.from_json(alg.to_json())
    assert back.degree == alg.degree
    for idx in range(1 << n):
        bits = boolfn.index_to_bits(idx, n)
        assert np.allclose(back.joint_probs(bits), alg.joint_probs(bits))
