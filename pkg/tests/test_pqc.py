"""Policy-circuit architecture: layers, evaluation, pruning, text format."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qagent import analysis, pqc, statevec
from qagent.statevec import StateVector


def rand_params(circuit, seed=0, scale=math.pi):
    rng = np.random.default_rng(seed)
    return rng.uniform(-scale, scale, circuit.n_params)


class TestGate:
    def test_validation(self):
        with pytest.raises(ValueError):
            pqc.Gate("u", (0, 1), (0, 1))
        with pytest.raises(ValueError):
            pqc.Gate("cry", (0, 1), (0, 1))
        with pytest.raises(ValueError):
            pqc.Gate("nope", (0,), (0,))

    def test_param_indices_skip_constants(self):
        g = pqc.Gate("m", (0, 1), (3, math.pi, 0.0))
        assert g.param_indices() == [3]


class TestArchitecture:
    def test_block_shape_n4(self):
        c = pqc.build_policy(4)
        assert c.n_params == 48
        assert len(c.gates) == 24
        assert pqc.gate_counts(c) == {"u": 12, "m": 6, "cry": 6}

    def test_param_count_formula(self):
        # 2n + (n-1) + [sum of rows: 2 + 3*(n-1-r)] + 2 + (n-1) + 2n
        for n in range(2, 7):
            c = pqc.build_policy(n)
            pyramid = sum(2 + 3 * (n - 1 - r) for r in range(n - 1)) + 2
            assert c.n_params == 2 * n + (n - 1) + pyramid + (n - 1) + 2 * n

    def test_zero_params_is_identity(self):
        c = pqc.build_policy(3)
        u = pqc.circuit_unitary(c, np.zeros(c.n_params))
        assert np.allclose(u, np.eye(8), atol=1e-12)

    def test_nearest_neighbor_enforced(self):
        with pytest.raises(ValueError):
            pqc.ParamCircuit(3, (pqc.Gate("cry", (0, 2), (0,)),), 1)

    def test_param_index_range_checked(self):
        with pytest.raises(ValueError):
            pqc.ParamCircuit(2, (pqc.Gate("u", (0,), (0, 5)),), 2)

    def test_swap_layer_needs_even_window(self):
        with pytest.raises(ValueError):
            pqc.build_policy(3, pqc.LAYER_KINDS)

    def test_swap_layer_exchanges_halves(self):
        c = pqc.build_policy(4, ("SwapLayer",))
        p = np.full(c.n_params, math.pi)
        s = pqc.apply(c, p, StateVector.basis(4, 0b0110))
        assert abs(s.numpy()[0b1001] - 1) < 1e-12

    def test_swap_diamond_pair_counts(self):
        # k*(k-1) + k transpositions for window 2k, columns 1,2,..,k,..,2,1
        for n in (2, 4, 6, 8):
            k = n // 2
            assert len(pqc.swap_diamond_pairs(n)) == k * k

    def test_cry_up_ladder_reversed(self):
        c = pqc.build_policy(3, ("CRYUpLadder",))
        assert [g.qubits for g in c.gates] == [(2, 1), (1, 0)]


class TestEvaluation:
    def test_unitarity(self):
        c = pqc.build_policy(3)
        u = pqc.circuit_unitary(c, rand_params(c, seed=1))
        assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-10)

    def test_window_mapping(self):
        inner = pqc.fixed_circuit(1, [("u", (0,), (math.pi, math.pi))],
                                  window=(2,))
        s = pqc.apply(inner, np.zeros(0), StateVector.zero(4))
        assert abs(s.numpy()[0b0010] - 1) < 1e-12

    def test_adjoint_inverts(self):
        c = pqc.build_policy(3)
        p = rand_params(c, seed=2)
        u = pqc.circuit_unitary(c, p)
        v = pqc.circuit_unitary(pqc.adjoint(c), p)
        assert np.allclose(v @ u, np.eye(8), atol=1e-10)

    def test_stack_params_independent(self):
        c = pqc.build_policy(2)
        s = pqc.stack(c, 3)
        assert s.n_params == 3 * c.n_params
        p = rand_params(s, seed=3)
        u = pqc.circuit_unitary(s, p)
        ref = np.eye(4, dtype=complex)
        for d in range(3):
            ref = pqc.circuit_unitary(
                c, p[d * c.n_params:(d + 1) * c.n_params]) @ ref
        assert np.allclose(u, ref, atol=1e-10)

    def test_param_length_checked(self):
        c = pqc.build_policy(2)
        with pytest.raises(ValueError):
            pqc.apply(c, np.zeros(c.n_params + 1), StateVector.zero(2))

    @given(st.integers(0, 50))
    @settings(max_examples=15, deadline=None)
    def test_unitary_columns_normalized(self, seed):
        c = pqc.build_policy(2, pqc.LAYER_KINDS)
        u = pqc.circuit_unitary(c, rand_params(c, seed=seed))
        assert np.allclose(np.linalg.norm(u, axis=0), 1.0, atol=1e-10)


class TestPrune:
    def test_removes_identity_gates(self):
        c = pqc.build_policy(3)
        p = np.zeros(c.n_params)
        pruned, pp = pqc.prune(c, p, tol=1e-3)
        assert len(pruned.gates) == 0
        assert len(pp) == 0

    def test_keeps_fidelity(self):
        c = pqc.build_policy(3)
        rng = np.random.default_rng(4)
        p = rng.uniform(-math.pi, math.pi, c.n_params)
        # zero out a few parameters almost exactly
        p[:5] = 1e-6
        tol = 1e-3
        pruned, pp = pqc.prune(c, p, tol)
        u = pqc.circuit_unitary(c, p)
        v = pqc.circuit_unitary(pruned, pp)
        assert analysis.phase_invariant_fidelity(u, v) >= 1 - 10 * tol

    def test_snaps_to_grid(self):
        c = pqc.fixed_circuit(1, [])
        c = pqc.ParamCircuit(1, (pqc.Gate("u", (0,), (0, 1)),), 2)
        p = np.array([math.pi / 2 + 1e-5, math.pi - 1e-5])
        pruned, pp = pqc.prune(c, p, tol=1e-3)
        assert np.allclose(pp, [math.pi / 2, math.pi], atol=1e-12)

    def test_param_reindexing_compact(self):
        c = pqc.build_policy(3)
        rng = np.random.default_rng(5)
        p = rng.uniform(-math.pi, math.pi, c.n_params)
        p[10:20] = 0.0
        pruned, pp = pqc.prune(c, p, tol=1e-4)
        assert pruned.n_params == len(pp)
        idx = sorted({a for g in pruned.gates for a in g.param_indices()})
        assert idx == list(range(pruned.n_params))


class TestSerialization:
    def test_roundtrip(self):
        c = pqc.build_policy(3)
        p = rand_params(c, seed=6)
        text = pqc.render(c, p)
        c2, p2 = pqc.parse(text)
        assert c2.gates == c.gates
        assert c2.n_qubits == c.n_qubits
        assert np.array_equal(p, p2)

    def test_roundtrip_window_and_dagger(self):
        c = pqc.adjoint(pqc.build_policy(2)).with_window((3, 4))
        p = rand_params(c, seed=7)
        c2, p2 = pqc.parse(pqc.render(c, p))
        assert c2.gates == c.gates
        assert c2.window == (3, 4)
        assert np.array_equal(p, p2)

    def test_parse_error_reports_line(self):
        with pytest.raises(pqc.ParseError) as err:
            pqc.parse("qubits 2\ngate zz 0 p0\n")
        assert "line 2" in str(err.value)

    def test_missing_qubits_line(self):
        with pytest.raises(pqc.ParseError):
            pqc.parse("params 1.0\n")
