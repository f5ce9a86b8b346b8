"""Polynomial and Fourier machinery tests."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from postsel import boolfn
from postsel.constructions import OrDemoAlgorithm
from postsel.errors import DomainError, TheoremViolation


def brute_multilinear(poly, bits):
    total = 0.0
    for mask, c in poly.coeffs.items():
        term = c
        for i in range(poly.n):
            if mask & (1 << (poly.n - 1 - i)) and not bits[i]:
                term = 0.0
                break
        total += term
    return total


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2 ** 31 - 1))
def test_mobius_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    table = boolfn.TruthTable(n, rng.normal(size=1 << n))
    poly = boolfn.mobius_interpolate(table)
    back = poly.table()
    assert np.max(np.abs(back.values - table.values)) < 1e-9
    # spot check against the direct sum-over-subsets evaluation
    idx = int(rng.integers(1 << n))
    bits = boolfn.index_to_bits(idx, n)
    assert abs(poly.evaluate(bits) - brute_multilinear(poly, bits)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2 ** 31 - 1))
def test_fourier_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    table = boolfn.TruthTable(n, rng.normal(size=1 << n))
    spec = boolfn.fourier(table)
    back = boolfn.inverse_fourier(spec)
    assert np.max(np.abs(back.values - table.values)) < 1e-9


def test_fourier_parity_convention():
    # the spectrum of a single variable x_1 over {0,1}: x_1 = 1/2 - chi/2
    table = boolfn.TruthTable.from_function(2, lambda b: float(b[0]))
    spec = boolfn.fourier(table)
    m1 = boolfn.subset_to_mask([1], 2)
    assert abs(spec.coeffs[0] - 0.5) < 1e-12
    assert abs(spec.coeffs[m1] + 0.5) < 1e-12


def test_truth_table_parsing():
    t = boolfn.TruthTable.from_string("0110")
    assert t.n == 2 and t.is_boolean()
    assert t.to_string() == "0110"
    reals = boolfn.TruthTable.from_string("0.5 1.0 0.25 0.0")
    assert not reals.is_boolean()
    with pytest.raises(DomainError):
        boolfn.TruthTable.from_string("011")  # not a power of two


def test_mask_subset_conversions():
    n = 4
    for subset in ([], [1], [2, 4], [1, 2, 3, 4]):
        m = boolfn.subset_to_mask(subset, n)
        assert boolfn.mask_to_subset(m, n) == subset


def test_degree_and_equality():
    p = boolfn.MultilinearPoly(2, {0: 1.0, 3: 0.5})
    assert p.degree() == 2
    q = boolfn.MultilinearPoly(2, {0: 1.0, 3: 0.5, 1: 1e-15})
    assert p == q  # tiny coefficients are dropped


def test_extract_pq_on_or_demo():
    alg = OrDemoAlgorithm(3, 0.2)
    P, Q = boolfn.extract_pq(alg)
    assert Q.degree() <= 2 * alg.query_count
    assert P.degree() <= 2 * alg.query_count
    for idx in range(8):
        bits = boolfn.index_to_bits(idx, 3)
        q, p = alg.joint_probs(bits)
        assert abs(Q.evaluate(bits) - q) < 1e-10
        assert abs(P.evaluate(bits) - p) < 1e-10


def test_extract_pq_rejects_degree_cheat():
    class Liar:
        n_bits = 2
        query_count = 0  # claims zero queries but p depends on the input

        def joint_probs(self, bits):
            return (1.0, 0.5 * bits[0])

    with pytest.raises(TheoremViolation):
        boolfn.extract_pq(Liar())


def test_ratio_check():
    P = boolfn.MultilinearPoly(1, {})
    Q = boolfn.MultilinearPoly(1, {0: 1.0})
    assert abs(boolfn.ratio_check(P, Q, (0,)) - 1.0) < 1e-12
    with pytest.raises(DomainError):
        boolfn.ratio_check(P, boolfn.MultilinearPoly(1, {}), (0,))


def test_interpolate_univariate_cubic():
    f = lambda x: 2 * x ** 3 - x + 0.5
    xs = [-1.0, -0.3, 0.4, 2.0]
    poly = boolfn.interpolate_univariate([(x, f(x)) for x in xs])
    assert poly.degree() == 3
    for x in np.linspace(-1, 2, 7):
        assert abs(poly(x) - f(x)) < 1e-9


def test_poly_json_roundtrip():
    p = boolfn.MultilinearPoly(3, {0: 0.25, 5: -1.5})
    text = boolfn.poly_to_json(p)
    back = boolfn.poly_from_json(text)
    assert back == p
    payload = json.loads(text)
    assert payload["n"] == 3


def test_spectrum_json_roundtrip():
    s = boolfn.FourierSpectrum(2, {0: 1.05, 2: -0.5})
    back = boolfn.spectrum_from_json(boolfn.spectrum_to_json(s))
    assert back.coeffs == s.coeffs and back.n == 2
