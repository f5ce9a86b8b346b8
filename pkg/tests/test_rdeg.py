"""Exact LP feasibility oracle tests."""

from fractions import Fraction

import pytest

from postsel import boolfn, rdeg
from postsel.errors import CapacityError, DomainError


def or_table(n):
    return boolfn.TruthTable.from_function(n, lambda b: 1.0 if any(b) else 0.0)


def test_eps_must_be_exact():
    with pytest.raises(DomainError):
        rdeg.rdeg_feasible(or_table(2), 1, 0.1)       # float is ambiguous
    with pytest.raises(DomainError):
        rdeg.rdeg_feasible(or_table(2), 1, "3/5")     # eps must be below 1/2
    # both exact spellings work
    assert rdeg.rdeg_feasible(or_table(2), 1, "1/10").feasible
    assert rdeg.rdeg_feasible(or_table(2), 1, Fraction(1, 10)).feasible


def test_capacity_limits():
    with pytest.raises(CapacityError):
        rdeg.rdeg_feasible(or_table(5), 1, "1/10")            # full mode n cap
    with pytest.raises(CapacityError):
        rdeg.rdeg_feasible(or_table(3), 5, "1/10")            # full mode d cap


def test_witness_evaluates_and_verifies():
    f = or_table(2)
    res = rdeg.rdeg_feasible(f, 1, "1/10")
    assert res.feasible and res.conclusive
    ok, problems = rdeg.verify_witness(f, res.witness)
    assert ok, problems
    # every constraint is exact rational arithmetic
    eps = Fraction(1, 10)
    for idx in range(4):
        bits = boolfn.index_to_bits(idx, 2)
        P, Q = res.witness.evaluate(bits)
        assert Q >= 1 and 0 <= P <= Q
        if any(bits):
            assert P >= (1 - eps) * Q
        else:
            assert P <= eps * Q


def test_verify_witness_catches_tampering():
    f = or_table(2)
    res = rdeg.rdeg_feasible(f, 1, "1/10")
    w = res.witness
    bad_p = dict(w.p_coeffs)
    some_key = next(iter(bad_p))
    bad_p[some_key] = bad_p[some_key] + 7
    tampered = rdeg.Witness(w.mode, w.n, w.d, w.eps, bad_p, w.q_coeffs)
    ok, problems = rdeg.verify_witness(f, tampered)
    assert not ok and problems


def test_and_symmetry_with_or():
    # AND is OR with inputs/outputs flipped, so its degree profile matches
    and2 = boolfn.TruthTable.from_function(2, lambda b: 1.0 if all(b) else 0.0)
    assert not rdeg.rdeg_feasible(and2, 0, "1/10").feasible
    assert rdeg.rdeg_feasible(and2, 1, "1/10").feasible


def test_symmetric_mode_agrees_with_full_mode():
    # OR3 is symmetric: the weight-basis program must reach the same verdicts
    f = or_table(3)
    for d in (0, 1):
        full = rdeg.rdeg_feasible(f, d, "1/10")
        sym = rdeg.rdeg_feasible(f, d, "1/10", symmetric=True)
        assert full.feasible == sym.feasible
        assert sym.conclusive
        if sym.feasible:
            ok, problems = rdeg.verify_witness(f, sym.witness)
            assert ok, problems


def test_symmetric_mode_handles_larger_instances():
    # majority on 5 bits at degree 2; full mode cannot touch n = 5
    maj5 = boolfn.TruthTable.from_function(
        5, lambda b: 1.0 if sum(b) * 2 >= 5 else 0.0)
    res = rdeg.rdeg_feasible(maj5, 2, "1/10", symmetric=True)
    assert res.conclusive
    if res.feasible:
        ok, problems = rdeg.verify_witness(maj5, res.witness)
        assert ok, problems


def test_symmetric_mode_requires_symmetric_function():
    f = boolfn.TruthTable.from_string("0100")   # depends on the variable order
    with pytest.raises(DomainError):
        rdeg.rdeg_feasible(f, 1, "1/10", symmetric=True)


def test_scan_degree_reports_first_feasible():
    found, results = rdeg.scan_degree(or_table(2), "1/10", 2)
    assert found == 1
    assert len(results) == 2                    # stops at the first hit
    assert [r.feasible for r in results] == [False, True]


def test_phase1_simplex_small_cases():
    one = Fraction(1)
    # constraints are G x <= h: {x >= 2, x <= 1} is empty
    ok, _ = rdeg.phase1_feasible([[-one], [one]], [Fraction(-2), Fraction(1)])
    assert not ok
    ok, x = rdeg.phase1_feasible([[-one], [one]], [Fraction(-2), Fraction(3)])
    assert ok and Fraction(2) <= x[0] <= Fraction(3)
