"""Majority algorithm family and elimination tests."""

import math
from fractions import Fraction

import pytest

from postsel import majority
from postsel.errors import DomainError
from postsel.seeding import derive_stream


def test_params_validation():
    with pytest.raises(DomainError):
        majority.MajorityParams(15, 1)   # odd N
    with pytest.raises(DomainError):
        majority.MajorityParams(16, 5)   # t above N/4
    with pytest.raises(DomainError):
        majority.MajorityParams(16, 0)
    p = majority.MajorityParams(16, 2)
    assert p.half_width == 3 and p.budget == 180 * 3 and p.b_trials == 16


def test_family_a_ratios_are_powers_of_two():
    p = majority.MajorityParams(32, 2)
    fam = majority.build_family_a(p)
    L = p.half_width
    assert [e.index for e in fam] == list(range(-L, L + 1))
    for e in fam:
        assert abs(e.ratio - 2.0 ** e.index) < 1e-12


def test_family_b_indices_and_ratio():
    p = majority.MajorityParams(16, 3)
    fam = majority.build_family_b(p)
    assert [e.index for e in fam] == [1, 2, 6, 7]
    for e in fam:
        want = (p.N - 2 * e.index) / (math.sqrt(2) * e.index)
        assert abs(e.ratio - want) < 1e-12


def test_family_b_rho_fraction_matches_float():
    p = majority.MajorityParams(16, 3)
    for e in majority.build_family_b(p):
        for z in (1, 3, 7, 8):
            fr = e.rho_fraction(z)
            assert isinstance(fr, Fraction)
            assert abs(float(fr) - e.rho(z)) < 1e-12
        # certainty at the matching weight, coin flip at the midpoint
        assert e.rho_fraction(e.index) == 1
        assert e.rho_fraction(p.N // 2) == Fraction(1, 2)


def test_eliminate_a_exact_extremes():
    p = majority.MajorityParams(16, 1)
    # at and beyond N/2 every element is a subfair coin and dies out
    assert majority.eliminate_a_exact(p, 8) > 0.99
    assert majority.eliminate_a_exact(p, 16) > 0.99
    # mid-band some element straddles and survives the budget
    assert majority.eliminate_a_exact(p, 4) < 0.01


def test_eliminate_b_exact_certainty_band():
    p = majority.MajorityParams(16, 2)
    # an element with rho exactly 1 never dies, so the run cannot output 1
    assert majority.eliminate_b_exact(p, 1, exact=True) == 0
    assert majority.eliminate_b_exact(p, 7, exact=True) == 0


def test_eliminate_sample_respects_budget():
    p = majority.MajorityParams(16, 1)
    family_size = 2 * p.half_width + 1
    rng = derive_stream(4, "test:budget", 0)
    for z in (4, 8, 16):
        out, tr = majority.eliminate_a_sample(p, z, rng)
        assert out in (0, 1)
        # one started trial may finish past the boundary
        last = tr.trials[-1].k if tr.trials else 0
        assert tr.queries <= p.budget + 5 * last * family_size


def test_t_for_eps_and_reps():
    assert majority.t_for_eps(0.2) == 4
    assert majority.t_for_eps(1 / 16) == 5
    assert majority.t_for_eps(2.0) == 1
    assert majority.default_amplification_reps(0.2) == 5
    assert majority.default_amplification_reps(1 / 16) == 9
    # smallest odd count at least 1
    assert majority.default_amplification_reps(2.0) == 1


def test_majority_sample_guard_and_conventions():
    rng = derive_stream(9, "test:guard", 0)
    with pytest.raises(DomainError):
        majority.majority_sample([0, 1, 1], 0.2, rng)   # odd length
    with pytest.raises(DomainError):
        majority.majority_sample([], 0.2, rng)
    # eps = 0.9 forces the deterministic full-read fallback on 4 guarded bits
    run = majority.majority_sample([1, 0], 0.9, rng)
    assert run.output == 1   # ties count as majority
    assert majority.majority_sample([0, 0], 0.9, rng).output == 0


def test_majority_exact_trivial_fallback():
    # t exceeds n/4, so the algorithm reads everything and is exact
    assert majority.majority_exact(8, 0.2, 3) == 0.0
    assert majority.majority_exact(8, 0.2, 4) == 1.0


def test_majority_exact_tracks_batch_sampling():
    from postsel.experiments import majority_batch

    n, eps, runs = 18, 0.3, 3000
    rng = derive_stream(21, "test:maj-agree", 0)
    for z in (2, 9, 16):
        exact = majority.majority_exact(n, eps, z)
        outputs, _ = majority_batch(n, z, eps, rng, runs)
        p_hat = float(outputs.mean())
        sigma = math.sqrt(max(exact * (1 - exact), 1e-12) / runs)
        assert abs(p_hat - exact) < 5 * sigma + 1e-9


def test_majority_scalar_sampler_agrees():
    n, eps, runs = 18, 0.3, 300
    z = 16
    rng = derive_stream(22, "test:maj-scalar", 0)
    exact = majority.majority_exact(n, eps, z)
    ones = sum(
        majority.majority_sample_weight(n, z, eps, rng).output
        for _ in range(runs)
    )
    sigma = math.sqrt(max(exact * (1 - exact), 1e-12) / runs)
    assert abs(ones / runs - exact) < 5 * sigma + 1e-9


def test_majority_exact_meets_error_target():
    # z = 0 is outside the weight-level contract (every plus probability
    # degenerates to 1/2 there); the bit-level prefix guard exists to keep
    # real inputs away from it, so the sweep starts at 1
    n, eps = 18, 0.3
    for z in (1, 2, 5, 8, 9, 11, 14, 18):
        exact = majority.majority_exact(n, eps, z)
        err = 1.0 - exact if 2 * z >= n else exact
        assert err <= eps + 1e-9, (z, err)
