"""Simulator primitives: gate matrices, application, marginals."""

import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from qagent import statevec
from qagent.statevec import StateVector

RT2 = 1 / math.sqrt(2)


def rand_state(n, seed=0, batch=None):
    rng = np.random.default_rng(seed)
    shape = (2 ** n,) if batch is None else (batch, 2 ** n)
    a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    a /= np.linalg.norm(a, axis=-1, keepdims=True)
    return StateVector.from_amplitudes(a)


class TestStateVector:
    def test_zero_state(self):
        s = StateVector.zero(3)
        v = s.numpy()
        assert v[0] == 1.0 and np.allclose(v[1:], 0)

    def test_basis_batch(self):
        s = StateVector.basis(2, [0, 3])
        assert s.batch_shape == (2,)
        assert s.numpy()[0, 0] == 1.0 and s.numpy()[1, 3] == 1.0

    def test_basis_out_of_range(self):
        with pytest.raises(ValueError):
            StateVector.basis(2, 4)

    def test_normalization_enforced(self):
        with pytest.raises(ValueError):
            StateVector.from_amplitudes([1.0, 1.0])

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            StateVector(2, torch.ones(3, dtype=statevec.CDTYPE))


class TestGateMatrices:
    def test_u_special_cases(self):
        h = statevec.u_matrix(math.pi / 2, math.pi).numpy()
        assert np.allclose(h, [[RT2, RT2], [RT2, -RT2]])
        x = statevec.u_matrix(math.pi, math.pi).numpy()
        assert np.allclose(x, [[0, 1], [1, 0]])
        ident = statevec.u_matrix(0.0, 0.0).numpy()
        assert np.allclose(ident, np.eye(2))

    def test_u_is_ry_times_phase(self):
        th, ph = 0.7, -1.3
        ry = np.array([[math.cos(th / 2), -math.sin(th / 2)],
                       [math.sin(th / 2), math.cos(th / 2)]])
        phase = np.diag([1, np.exp(1j * ph)])
        assert np.allclose(statevec.u_matrix(th, ph).numpy(), ry @ phase)

    def test_matchgate_swap(self):
        m = statevec.matchgate_matrix(math.pi, math.pi, 0.0).numpy()
        swap = np.eye(4)[[0, 2, 1, 3]]
        assert np.allclose(m, swap)

    def test_matchgate_identity(self):
        assert np.allclose(statevec.matchgate_matrix(0, 0, 0).numpy(),
                           np.eye(4))

    def test_cry_block_structure(self):
        th = 0.9
        m = statevec.cry_matrix(th).numpy()
        assert np.allclose(m[:2, :2], np.eye(2))
        assert np.allclose(m[2:, 2:],
                           [[math.cos(th / 2), -math.sin(th / 2)],
                            [math.sin(th / 2), math.cos(th / 2)]])

    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
    @settings(max_examples=40, deadline=None)
    def test_matchgate_unitary(self, th, p1, p2):
        m = statevec.matchgate_matrix(th, p1, p2).numpy()
        assert np.allclose(m.conj().T @ m, np.eye(4), atol=1e-12)


class TestApply:
    def test_apply_preserves_norm(self):
        s = rand_state(4, seed=1)
        out = statevec.apply_u(s, 2, 0.3, 1.1)
        assert abs(np.linalg.norm(out.numpy()) - 1) < 1e-12

    def test_msb_convention(self):
        # X on qubit 0 of 3 qubits maps |000> to |100> = index 4
        s = statevec.apply_u(StateVector.zero(3), 0, math.pi, math.pi)
        assert abs(s.numpy()[4] - 1) < 1e-12

    def test_swap_via_matchgate(self):
        s = StateVector.basis(3, 0b011)
        out = statevec.apply_matchgate(s, 0, math.pi, math.pi, 0.0)
        # swaps qubits 0 and 1: 011 -> 101
        assert abs(out.numpy()[0b101] - 1) < 1e-12

    def test_cry_controls(self):
        s = statevec.apply_cry(StateVector.basis(2, 0b10), 0, 1, math.pi)
        assert abs(s.numpy()[0b11] - 1) < 1e-12
        s = statevec.apply_cry(StateVector.basis(2, 0b00), 0, 1, math.pi)
        assert abs(s.numpy()[0b00] - 1) < 1e-12

    def test_reversed_qubit_order(self):
        # CRY with control q1, target q0
        s = statevec.apply_cry(StateVector.basis(2, 0b01), 1, 0, math.pi)
        assert abs(s.numpy()[0b11] - 1) < 1e-12

    def test_batched_matches_loop(self):
        s = rand_state(3, seed=2, batch=4)
        out = statevec.apply_matchgate(s, 1, 0.5, 0.2, -0.7)
        for i in range(4):
            single = StateVector.from_amplitudes(s.numpy()[i])
            ref = statevec.apply_matchgate(single, 1, 0.5, 0.2, -0.7)
            assert np.allclose(out.numpy()[i], ref.numpy())

    def test_bad_qubit_rejected(self):
        with pytest.raises(ValueError):
            statevec.apply_u(StateVector.zero(2), 2, 0.0, 0.0)
        with pytest.raises(ValueError):
            statevec.apply_cry(StateVector.zero(2), 1, 1, 0.0)
        with pytest.raises(ValueError):
            statevec.apply_matchgate(StateVector.zero(2), 1, 0, 0, 0)


class TestOracle:
    def test_phase_flip(self):
        s = rand_state(3, seed=3)
        out = statevec.apply_phase_oracle(s, 5)
        v = s.numpy().copy()
        v[5] = -v[5]
        assert np.allclose(out.numpy(), v)

    def test_batched_oracle(self):
        s = StateVector.from_amplitudes(np.full((4, 4), 0.5))
        out = statevec.apply_batched_phase_oracle(s, [0, 1, 2, 3])
        for i in range(4):
            expect = np.full(4, 0.5)
            expect[i] = -0.5
            assert np.allclose(out.numpy()[i], expect)

    def test_batch_size_mismatch(self):
        s = StateVector.from_amplitudes(np.full((4, 4), 0.5))
        with pytest.raises(ValueError):
            statevec.apply_batched_phase_oracle(s, [0, 1])


class TestProbabilities:
    def test_full_distribution(self):
        s = rand_state(3, seed=4)
        p = statevec.probabilities(s, (0, 1, 2)).numpy()
        assert np.allclose(p, np.abs(s.numpy()) ** 2)

    def test_bell_marginals(self):
        bell = StateVector.from_amplitudes([RT2, 0, 0, RT2])
        assert np.allclose(statevec.probabilities(bell, (0,)).numpy(),
                           [0.5, 0.5])
        assert np.allclose(statevec.probabilities(bell, (0, 1)).numpy(),
                           [0.5, 0, 0, 0.5])

    def test_qubit_order_respected(self):
        s = StateVector.basis(2, 0b01)  # q0=0, q1=1
        assert np.allclose(statevec.probabilities(s, (1, 0)).numpy(),
                           [0, 0, 1, 0])

    @given(st.integers(0, 100))
    @settings(max_examples=20, deadline=None)
    def test_marginal_sums_to_one(self, seed):
        s = rand_state(4, seed=seed)
        p = statevec.probabilities(s, (1, 3)).numpy()
        assert abs(p.sum() - 1) < 1e-12


class TestOverlap:
    def test_self_overlap(self):
        s = rand_state(4, seed=5)
        assert abs(complex(statevec.overlap(s, s)) - 1) < 1e-12

    def test_orthogonal(self):
        a = StateVector.basis(2, 0)
        b = StateVector.basis(2, 3)
        assert abs(complex(statevec.overlap(a, b))) < 1e-15

    def test_conjugation_order(self):
        a = rand_state(2, seed=6)
        b = rand_state(2, seed=7)
        lhs = complex(statevec.overlap(a, b))
        rhs = complex(np.vdot(a.numpy(), b.numpy()))
        assert abs(lhs - rhs) < 1e-12
