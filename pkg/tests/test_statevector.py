import numpy as np
import pytest

from qscopt import (CapacityError, ShotHistogram, Statevector, UnitaryMatrix,
                    apply_gate, collapse_measure, expectation_diag, make_rng,
                    marginal_distribution, new_zero_state, sample_measure)
from qscopt.gates import H, X


def bell_state():
    s = new_zero_state(2)
    s = apply_gate(s, H, (0,))
    return apply_gate(s, X, (1,), (0,))


def random_unitary(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng, n):
    a = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return Statevector(a / np.linalg.norm(a), n)


class TestZeroState:
    def test_two_qubits(self):
        assert np.array_equal(new_zero_state(2).amplitudes, [1, 0, 0, 0])

    def test_one_qubit(self):
        assert np.array_equal(new_zero_state(1).amplitudes, [1, 0])

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            new_zero_state(25)
        with pytest.raises(CapacityError):
            new_zero_state(0)


class TestApplyGate:
    def test_x_is_bit_flip_on_qubit0(self):
        out = apply_gate(new_zero_state(2), X, (0,))
        assert np.array_equal(out.amplitudes, [0, 1, 0, 0])

    def test_inactive_control_is_identity(self):
        s = apply_gate(new_zero_state(2), X, (1,), controls=(0,))
        assert np.array_equal(s.amplitudes, [1, 0, 0, 0])

    def test_hadamard(self):
        out = apply_gate(new_zero_state(1), H, (0,))
        assert np.allclose(out.amplitudes, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_endianness_contract(self, n):
        # X on qubit j maps basis index i to i XOR 2^j, exhaustively
        for j in range(n):
            for i in range(1 << n):
                a = np.zeros(1 << n, dtype=complex)
                a[i] = 1.0
                out = apply_gate(Statevector(a, n), X, (j,))
                assert out.amplitudes[i ^ (1 << j)] == 1.0

    def test_norm_preserved_over_random_gates(self):
        rng = make_rng(7)
        state = random_state(rng, 4)
        for _ in range(1000):
            k = int(rng.integers(1, 3))
            targets = tuple(rng.choice(4, size=k, replace=False).tolist())
            state = apply_gate(state, random_unitary(rng, 1 << k), targets)
            assert abs(np.linalg.norm(state.amplitudes) - 1.0) <= 1e-12

    def test_reversibility(self):
        rng = make_rng(11)
        for _ in range(50):
            state = random_state(rng, 4)
            u = random_unitary(rng, 4)
            targets = tuple(rng.choice(4, size=2, replace=False).tolist())
            back = apply_gate(apply_gate(state, u, targets), u.conj().T, targets)
            assert np.abs(back.amplitudes - state.amplitudes).max() <= 1e-12

    def test_argument_errors(self):
        s = new_zero_state(2)
        with pytest.raises(ValueError):
            apply_gate(s, X, (0,), controls=(0,))
        with pytest.raises(ValueError):
            apply_gate(s, X, (5,))
        with pytest.raises(ValueError):
            apply_gate(s, np.eye(4), (0,))


class TestUnitaryMatrix:
    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            UnitaryMatrix(np.array([[1, 0], [0, 2]], dtype=complex))

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            UnitaryMatrix(np.eye(3, dtype=complex))


class TestStatevectorInvariants:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            Statevector(np.array([1.0, 1.0], dtype=complex), 1)

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            Statevector(np.array([1.0, 0.0, 0.0], dtype=complex) , 2)

    def test_amplitudes_read_only(self):
        s = new_zero_state(2)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0.0


class TestExpectationDiag:
    def test_z_eigenstate(self):
        assert expectation_diag(new_zero_state(2), [2, 0, 0, -2]) == 2.0

    def test_bell_collective_z(self):
        assert abs(expectation_diag(bell_state(), [2, 0, 0, -2])) <= 1e-12

    def test_bell_z_squared(self):
        # direct sum over amplitudes: (1/2)*4 + (1/2)*4 = 4
        assert abs(expectation_diag(bell_state(), [4, 0, 0, 4]) - 4.0) <= 1e-12

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            expectation_diag(new_zero_state(2), [1.0, 2.0])


class TestSampling:
    def test_deterministic_outcome(self):
        hist = sample_measure(new_zero_state(1), (0,), shots=100, seed=5)
        assert hist.counts == {"0": 100}

    def test_plus_state_frequency(self):
        plus = apply_gate(new_zero_state(1), H, (0,))
        hist = sample_measure(plus, (0,), shots=100_000, seed=3)
        assert abs(hist.counts.get("1", 0) / 100_000 - 0.5) < 0.01

    def test_bell_outcomes(self):
        hist = sample_measure(bell_state(), (0, 1), shots=4096, seed=9)
        assert set(hist.counts) <= {"00", "11"}

    def test_tv_distance_median(self):
        state = random_state(make_rng(13), 4)
        exact = marginal_distribution(state, (0, 1, 2, 3))
        tvs = []
        for seed in range(20):
            hist = sample_measure(state, (0, 1, 2, 3), shots=100_000, seed=seed)
            emp = np.zeros(16)
            for key, c in hist.counts.items():
                emp[int(key, 2)] = c / 100_000
            tvs.append(0.5 * np.abs(emp - exact).sum())
        assert np.median(tvs) <= 0.01

    def test_same_seed_same_histogram(self):
        plus = apply_gate(new_zero_state(1), H, (0,))
        a = sample_measure(plus, (0,), shots=1000, seed=42)
        b = sample_measure(plus, (0,), shots=1000, seed=42)
        assert a.counts == b.counts

    def test_errors(self):
        with pytest.raises(ValueError):
            sample_measure(new_zero_state(1), (0,), shots=0, seed=1)
        with pytest.raises(ValueError):
            sample_measure(new_zero_state(1), (), shots=10, seed=1)


class TestCollapse:
    def test_eigenstate(self):
        one = apply_gate(new_zero_state(1), X, (0,))
        outcome, post = collapse_measure(one, (0,), seed=1)
        assert outcome == "1"
        assert np.array_equal(post.amplitudes, one.amplitudes)

    def test_bell_projection(self):
        outcome, post = collapse_measure(bell_state(), (0, 1), seed=2)
        assert outcome in ("00", "11")
        idx = int(outcome, 2)
        assert abs(abs(post.amplitudes[idx]) - 1.0) <= 1e-12

    def test_repeatability(self):
        plus = apply_gate(new_zero_state(1), H, (0,))
        outcome, post = collapse_measure(plus, (0,), seed=17)
        again, _ = collapse_measure(post, (0,), seed=99)
        assert again == outcome


class TestShotHistogram:
    def test_counts_must_sum(self):
        with pytest.raises(ValueError):
            ShotHistogram(counts={"0": 3}, total_shots=4, seed=0, n_measured=1)

    def test_key_width_checked(self):
        with pytest.raises(ValueError):
            ShotHistogram(counts={"00": 2, "1": 2}, total_shots=4, seed=0, n_measured=2)
