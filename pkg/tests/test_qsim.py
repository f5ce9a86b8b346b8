"""State-vector simulator unit tests."""

import numpy as np
import pytest

from postsel import qsim
from postsel.errors import CapacityError, DomainError, PostselectionImpossible


def test_capacity_limit():
    with pytest.raises(CapacityError):
        qsim.init_basis_state(qsim.MAX_QUBITS + 1)


def test_basis_state_and_amplitude():
    st = qsim.init_basis_state(3, index=5)
    assert st.amplitude(5) == 1.0
    probs = st.probabilities()
    assert probs[5] == 1.0 and probs.sum() == 1.0


def test_norm_guard():
    with pytest.raises(ValueError):
        qsim.PureState(2, np.array([1.0, 1.0, 0.0, 0.0]))


def test_hadamard_involution():
    st = qsim.init_basis_state(4, index=9)
    for q in (1, 3, 4):
        st = qsim.apply_1q_gate(st, q, qsim.HADAMARD)
    for q in (1, 3, 4):
        st = qsim.apply_1q_gate(st, q, qsim.HADAMARD)
    assert abs(st.amplitude(9) - 1.0) < 1e-12


def test_gate_must_be_orthogonal():
    bad = np.array([[1.0, 0.1], [0.0, 1.0]])
    st = qsim.init_basis_state(1)
    with pytest.raises(ValueError):
        qsim.apply_1q_gate(st, 1, bad)


def test_controlled_gate_acts_only_on_control_one():
    # qubit 1 is the most significant
    st = qsim.init_basis_state(2, index=0)
    st = qsim.apply_1q_gate(st, 2, qsim.PAULI_X, control=(1, 1))
    assert abs(st.amplitude(0) - 1.0) < 1e-12
    st = qsim.init_basis_state(2, index=2)
    st = qsim.apply_1q_gate(st, 2, qsim.PAULI_X, control=(1, 1))
    assert abs(st.amplitude(3) - 1.0) < 1e-12


def test_register_gate_matches_kron_oracle():
    rng = np.random.default_rng(7)
    # random orthogonal 4x4 via QR
    m, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    amps = rng.normal(size=8)
    amps /= np.linalg.norm(amps)
    st = qsim.PureState(3, amps)
    out = qsim.apply_register_gate(st, (1, 2), m)
    want = np.kron(m, np.eye(2)) @ amps
    assert np.max(np.abs(out.amps - want)) < 1e-12
    # non-contiguous register (2, 3) against explicit permuted kron
    out2 = qsim.apply_register_gate(st, (2, 3), m)
    want2 = np.kron(np.eye(2), m) @ amps
    assert np.max(np.abs(out2.amps - want2)) < 1e-12


def test_bit_query_flips_target():
    x = [1, 0, 1]
    n = 3  # two index qubits + one target
    ctr = qsim.QueryCounter()
    amps = np.full(8, np.sqrt(1 / 8))
    st = qsim.PureState(n, amps)
    st = qsim.apply_bit_query(st, x, (1, 2), 3, ctr, index_offset=0)
    assert ctr.count == 1
    for idx in range(8):
        v = idx >> 1
        bit = x[v - 1] if 1 <= v <= 3 else 0
        src = idx ^ bit
        assert abs(st.amps[idx] - amps[src]) < 1e-12


def test_bit_query_offset_shifts_lookup():
    x = [1, 1]
    ctr = qsim.QueryCounter()
    st = qsim.init_basis_state(2, index=0)  # index register value 0
    st = qsim.apply_bit_query(st, x, (1,), 2, ctr, index_offset=1)
    # offset 1 makes register value 0 read x[0] = 1, so the target flips
    assert abs(st.amplitude(1) - 1.0) < 1e-12


def test_subset_phase_query():
    x = [1, 0, 1]
    ctr = qsim.QueryCounter()
    amps = np.zeros(8)
    amps[0b101] = 1.0  # subset {1, 3}, both positions read 1
    st = qsim.PureState(3, amps)
    out = qsim.apply_subset_phase_query(st, x, (1, 2, 3), 2, ctr)
    assert ctr.count == 2
    assert abs(out.amps[0b101] - 1.0) < 1e-12  # (-1)^2
    amps2 = np.zeros(8)
    amps2[0b100] = 1.0  # subset {1}, one flip
    out2 = qsim.apply_subset_phase_query(qsim.PureState(3, amps2), x, (1, 2, 3), 2, ctr)
    assert abs(out2.amps[0b100] + 1.0) < 1e-12


def test_subset_phase_rejects_large_support():
    amps = np.zeros(4)
    amps[0b11] = 1.0
    st = qsim.PureState(2, amps)
    with pytest.raises(DomainError):
        qsim.apply_subset_phase_query(st, [1, 1], (1, 2), 1, qsim.QueryCounter())


def test_postselect_probability_and_renorm():
    st = qsim.init_basis_state(2)
    st = qsim.apply_1q_gate(st, 1, qsim.HADAMARD)
    st = qsim.apply_1q_gate(st, 2, qsim.HADAMARD)
    kept, prob = qsim.postselect(st, qsim.qubit_bit(2, 1), 0)
    assert abs(prob - 0.5) < 1e-12
    assert abs(np.linalg.norm(kept.amps) - 1.0) < 1e-12


def test_postselect_impossible():
    st = qsim.init_basis_state(2, index=0)
    with pytest.raises(PostselectionImpossible):
        qsim.postselect(st, qsim.qubit_bit(2, 1), 1)


def test_measure_distribution_and_sampling():
    st = qsim.init_basis_state(2)
    st = qsim.apply_1q_gate(st, 1, qsim.HADAMARD)
    dist = qsim.measure(st, (1,))
    assert abs(dist[(0,)] - 0.5) < 1e-12 and abs(dist[(1,)] - 0.5) < 1e-12
    assert abs(dist.total() - 1.0) < 1e-12
    rng = np.random.default_rng(3)
    bits, collapsed = qsim.measure(st, (1,), rng=rng)
    assert bits in ((0,), (1,))
    # collapsed state is a basis state on the measured qubit
    dist2 = qsim.measure(collapsed, (1,))
    assert abs(dist2[bits] - 1.0) < 1e-12
