import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fermilength.ansatz import (
    Circuit,
    Gate,
    UnrepresentableTarget,
    a_gate_matrix,
    build_full_ladder_circuit,
    build_ladder_circuit,
    decompose_a_full,
    gate_counts,
    solve_parameters,
    state_coefficients,
)
from fermilength.estimator import energy_statevector
from fermilength.pauli_model import build_hamiltonian, exact_gs_energy, single_particle_oracle
from fermilength.simulator import circuit_unitary, run_statevector

# a_gate_matrix orders its basis (|00>, |10>, |01>, |11>) with the upper qubit
# first; circuit_unitary indexes 2*upper + lower
_PERM = [0, 2, 1, 3]

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


def a_in_register_order(theta):
    A = a_gate_matrix(theta)
    P = np.zeros((4, 4))
    for i, j in enumerate(_PERM):
        P[j, i] = 1
    return P @ A @ P.T


def phase_distance(U, V):
    """min over global phases of max |U - e^{i phi} V|."""
    k = np.argmax(np.abs(V))
    phase = U.flat[k] / V.flat[k]
    phase /= abs(phase)
    return np.abs(U - phase * V).max()


def top_amplitudes(psi, L):
    return np.array([psi[1 << (L - 1 - k)] for k in range(L)])


class TestAGate:
    def test_zero_angle_is_swap_block(self):
        A = a_gate_matrix(0.0)
        np.testing.assert_array_equal(A[1:3, 1:3], [[0, 1], [1, 0]])

    def test_right_angle(self):
        np.testing.assert_allclose(a_gate_matrix(math.pi / 2), np.diag([1, 1, -1, 1]), atol=1e-15)

    @given(angles)
    def test_orthogonal_and_symmetric(self, theta):
        A = a_gate_matrix(theta)
        np.testing.assert_allclose(A @ A.T, np.eye(4), atol=1e-14)
        np.testing.assert_array_equal(A, A.T)


class TestFullDecomposition:
    @pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 2, -1.1])
    def test_matches_a_gate(self, theta):
        U = circuit_unitary(decompose_a_full(theta), 2)
        assert phase_distance(U, a_in_register_order(theta)) < 1e-12

    def test_gate_counts(self):
        frag = decompose_a_full(0.4)
        assert sum(g.kind == "CNOT" for g in frag) == 3
        assert sum(g.kind in ("RY", "RY_DAG") for g in frag) == 2

    def test_zero_angle_swaps_excitation(self):
        U = circuit_unitary(decompose_a_full(0.0), 2)
        out = U[:, 0b01]
        assert abs(abs(out[0b10]) - 1) < 1e-12

    def test_positive_angle_convention_would_flip_sign(self):
        # literal reading (rotation angle = +theta) realises A(-theta)
        theta = 0.7
        frag = [Gate(g.kind, g.qubits, None if g.angle is None else -g.angle) for g in decompose_a_full(theta)]
        U = circuit_unitary(frag, 2)
        assert phase_distance(U, a_in_register_order(-theta)) < 1e-12
        assert phase_distance(U, a_in_register_order(theta)) > 0.1


class TestLadder:
    @pytest.mark.parametrize("L", [2, 3, 4, 5, 8, 24])
    def test_counts(self, L):
        c = build_ladder_circuit(L, np.linspace(0.1, 1.0, L - 1))
        assert c.cnot_count == 2 * L - 3
        assert len(c.parameters) == L - 1
        assert c.count("X") == 1
        assert sum(g.kind in ("RY", "RY_DAG") for g in c.gates) == 2 * L - 2
        assert max(q for g in c.gates for q in g.qubits) == L - 1
        assert c.n_qubits == 2 * L
        assert gate_counts(L) == (c.cnot_count, len(c.parameters))

    def test_gate_count_examples(self):
        assert gate_counts(2) == (1, 1)
        assert gate_counts(4) == (5, 3)
        assert gate_counts(12) == (21, 11)
        with pytest.raises(ValueError):
            gate_counts(1)

    def test_wrong_parameter_count(self):
        with pytest.raises(ValueError):
            build_ladder_circuit(4, [0.1, 0.2])

    @pytest.mark.parametrize("L", [2, 3, 4, 5])
    def test_simplified_matches_full(self, L):
        rng = np.random.default_rng(100 + L)
        for _ in range(10):
            th = rng.uniform(-math.pi, math.pi, L - 1)
            a = run_statevector(build_ladder_circuit(L, th))
            b = run_statevector(build_full_ladder_circuit(L, th))
            assert phase_distance(a[:, None], b[:, None]) < 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 7).flatmap(lambda L: st.lists(angles, min_size=L - 1, max_size=L - 1)))
    def test_particle_number_and_reality(self, th):
        L = len(th) + 1
        psi = run_statevector(build_ladder_circuit(L, th))
        weight_one = [1 << (L - 1 - k) for k in range(L)]
        leak = np.delete(psi, weight_one)
        assert np.abs(leak).max(initial=0.0) < 1e-12
        assert np.abs(psi.imag).max() < 1e-12
        np.testing.assert_allclose(top_amplitudes(psi, L).real, state_coefficients(th), atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 6).flatmap(lambda L: st.lists(angles, min_size=L - 1, max_size=L - 1)))
    def test_variational_floor(self, th):
        L = len(th) + 1
        e = energy_statevector(build_hamiltonian(L), run_statevector(build_ladder_circuit(L, th)))
        assert e >= exact_gs_energy(L) - 1e-9


class TestCoefficients:
    def test_all_right_angles(self):
        np.testing.assert_allclose(state_coefficients([math.pi / 2] * 4), [1, 0, 0, 0, 0], atol=1e-15)

    def test_all_zero(self):
        np.testing.assert_array_equal(state_coefficients([0.0] * 3), [0, 0, 0, 1])

    def test_quarter_turn(self):
        np.testing.assert_allclose(state_coefficients([math.pi / 4]), [1 / math.sqrt(2)] * 2)

    @given(st.lists(angles, min_size=1, max_size=12))
    def test_normalized(self, th):
        assert np.linalg.norm(state_coefficients(th)) == pytest.approx(1.0, abs=1e-12)


class TestSolveParameters:
    def test_localized(self):
        np.testing.assert_allclose(solve_parameters([1, 0, 0, 0]), [math.pi / 2, 0, 0], atol=1e-15)

    def test_l2_uniform(self):
        np.testing.assert_allclose(solve_parameters([1 / math.sqrt(2)] * 2), [math.pi / 4], atol=1e-15)

    def test_oracle_l3_round_trip(self):
        target = [0.5, 1 / math.sqrt(2), 0.5]
        np.testing.assert_allclose(state_coefficients(solve_parameters(target)), target, atol=1e-10)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="normalized"):
            solve_parameters([1.0, 1.0])

    def test_negative_trailing_needs_sign_flip(self):
        target = np.array([0.6, -0.8])
        with pytest.raises(UnrepresentableTarget):
            solve_parameters(target)
        np.testing.assert_allclose(state_coefficients(solve_parameters(-target)), -target, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 9).flatmap(
        lambda L: st.lists(st.floats(-1, 1, allow_nan=False), min_size=L, max_size=L)))
    def test_round_trip_nonnegative_tail(self, raw):
        c = np.array(raw)
        if np.linalg.norm(c) < 1e-3:
            return
        c /= np.linalg.norm(c)
        if c[-1] < 0:
            c = -c
        np.testing.assert_allclose(state_coefficients(solve_parameters(c)), c, atol=1e-10)

    @pytest.mark.parametrize("L", range(2, 13))
    def test_ground_vector_gives_exact_energy(self, L):
        th = solve_parameters(single_particle_oracle(L).vector)
        e = energy_statevector(build_hamiltonian(L), run_statevector(build_ladder_circuit(L, th)))
        assert abs(e - exact_gs_energy(L)) < 1e-10


def test_circuit_validates_range():
    with pytest.raises(ValueError):
        Circuit(2, (Gate("CNOT", (0, 2)),))
    with pytest.raises(ValueError):
        Gate("RY", (0,))
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
