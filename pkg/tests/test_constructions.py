"""Weight-qubit construction and OR demo tests."""

import math

import numpy as np
import pytest

from postsel import qsim
from postsel.constructions import (ABPair, OrDemoAlgorithm, or_postselect_demo,
                                   weight_qubit, weight_qubit_circuit,
                                   weight_qubit_circuit_batch,
                                   weight_qubit_success_prob)
from postsel.errors import DomainError
from postsel.seeding import derive_stream


def test_ab_pair_normalization():
    ab = ABPair.from_ratio(3.0)
    assert abs(ab.alpha ** 2 + ab.beta ** 2 - 1.0) < 1e-12
    assert abs(ab.alpha / ab.beta - 3.0) < 1e-12
    with pytest.raises(ValueError):
        ABPair(1.0, 1.0)  # not normalized


def test_weight_qubit_closed_form_values():
    N, z = 6, 2
    ab = ABPair.from_ratio(1.0)
    qs = weight_qubit(N, z, ab)
    # proportional to (alpha z, beta (N - 2z) / sqrt 2)
    want = np.array([z, (N - 2 * z) / math.sqrt(2)]) * ab.alpha
    want /= np.linalg.norm(want)
    got = qs.as_array()
    assert min(np.max(np.abs(got - want)), np.max(np.abs(got + want))) < 1e-12


def test_weight_qubit_circuit_non_power_of_two():
    # N = 6 exercises the padded index register
    N = 6
    ab = ABPair.from_ratio(0.7)
    x = [1, 0, 1, 1, 0, 0]
    ctr = qsim.QueryCounter()
    qs, prob = weight_qubit_circuit(N, x, ab, ctr)
    assert ctr.count == 1
    want = weight_qubit(N, sum(x), ab).as_array()
    got = qs.as_array()
    assert min(np.max(np.abs(got - want)), np.max(np.abs(got + want))) < 1e-10
    assert abs(prob - weight_qubit_success_prob(N, sum(x), ab)) < 1e-12


def test_weight_qubit_batch_matches_singles():
    N = 8
    x = [0, 1, 1, 1, 0, 0, 1, 0]
    abs_ = [ABPair.from_ratio(r) for r in (0.25, 1.0, 4.0)]
    ctr = qsim.QueryCounter()
    batch = weight_qubit_circuit_batch(N, x, abs_, ctr)
    assert ctr.count == len(abs_)
    for ab, (qs, prob) in zip(abs_, batch):
        ctr2 = qsim.QueryCounter()
        qs2, prob2 = weight_qubit_circuit(N, x, ab, ctr2)
        assert np.max(np.abs(qs.as_array() - qs2.as_array())) < 1e-12
        assert abs(prob - prob2) < 1e-14


def test_weight_qubit_degenerate_weight():
    # z = N/2 with alpha = 0 leaves nothing to keep
    with pytest.raises(DomainError):
        weight_qubit(4, 2, ABPair(0.0, 1.0))


def test_or_demo_closed_forms():
    eps0 = 0.1
    for n in (2, 3, 4):
        alg = OrDemoAlgorithm(n, eps0)
        assert alg.query_count == 1
        for idx in range(1 << n):
            bits = tuple((idx >> (n - 1 - i)) & 1 for i in range(n))
            q, p = alg.joint_probs(bits)
            s = sum(bits)
            assert abs(q - (eps0 ** 2 + (1 - eps0 ** 2) * s / n)) < 1e-12
            assert abs(p - (1 - eps0 ** 2) * s / n) < 1e-12


def test_or_demo_exact_error():
    res = or_postselect_demo([0, 0, 1, 0], 0.1)
    assert res.output == 1
    s, n, e2 = 1, 4, 0.01
    want = e2 / (e2 + (1 - e2) * s / n)
    assert abs(res.conditional_error - want) < 1e-12
    res0 = or_postselect_demo([0, 0, 0], 0.1)
    assert res0.output == 0 and res0.conditional_error == 0.0


def test_or_demo_sampling_agrees():
    rng = derive_stream(11, "test:or-demo", 0)
    exact = or_postselect_demo([1, 0, 0, 0], 0.3)
    hits = 0
    runs = 4000
    for _ in range(runs):
        r = or_postselect_demo([1, 0, 0, 0], 0.3, mode="sample", rng=rng)
        hits += r.output
    p_hat = hits / runs
    p = 1.0 - exact.conditional_error
    assert abs(p_hat - p) < 4 * math.sqrt(p * (1 - p) / runs) + 1e-9
