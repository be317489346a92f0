import math

import numpy as np
import pytest

from qscopt import (QfiValue, QscConfig, Statevector, apply_gate, build_qsc,
                    make_rng, marginal_distribution, measurement_layout,
                    new_zero_state, qfi_analytic, qfi_from_counts, qfi_sweep,
                    sample_measure)
from qscopt.gates import H, X, rotation
from qscopt.policies import (NOON_ALPHABET, SQUEEZE_FREE_ALPHABET,
                             enumerate_policies, exact_returns, policy_state)
from qscopt.statevector import ShotHistogram


def bell_state():
    s = apply_gate(new_zero_state(2), H, (0,))
    return apply_gate(s, X, (1,), (0,))


def plus_plus():
    s = apply_gate(new_zero_state(2), H, (0,))
    return apply_gate(s, H, (1,))


class TestAnalytic:
    def test_z_eigenstate_zero(self):
        assert qfi_analytic(new_zero_state(2)).normalized == 0.0

    def test_noon_state(self):
        q = qfi_analytic(bell_state())
        assert abs(q.normalized - 1.0) <= 1e-12
        assert abs(q.raw - 8.0) <= 1e-12

    def test_separable_ceiling_value(self):
        q = qfi_analytic(plus_plus())
        assert abs(q.normalized - 0.5) <= 1e-12
        assert abs(q.raw - 4.0) <= 1e-12

    def test_single_qubit_plus(self):
        plus = apply_gate(new_zero_state(1), H, (0,))
        assert abs(qfi_analytic(plus).normalized - 1.0) <= 1e-12

    def test_haar_bound(self):
        rng = make_rng(21)
        worst = -1.0
        for _ in range(10_000):
            a = rng.normal(size=4) + 1j * rng.normal(size=4)
            v = qfi_analytic(Statevector(a / np.linalg.norm(a), 2)).normalized
            assert 0.0 <= v <= 1.0 + 1e-9
            worst = max(worst, v)
        assert worst > 0.9  # the bound is approached from below

    def test_maximum_attained_near_noon(self):
        rng = make_rng(22)
        bell = bell_state().amplitudes
        best = 0.0
        for _ in range(200):
            noise = rng.normal(size=4) + 1j * rng.normal(size=4)
            a = bell + 0.01 * noise
            best = max(best, qfi_analytic(Statevector(a / np.linalg.norm(a), 2)).normalized)
        assert best >= 1.0 - 1e-3

    def test_collective_rz_invariance(self):
        rng = make_rng(23)
        state = bell_state()
        base = qfi_analytic(state).normalized
        for _ in range(100):
            alpha = float(rng.uniform(-2 * math.pi, 2 * math.pi))
            rotated = state
            for q in range(2):
                rotated = apply_gate(rotated, rotation("z", alpha), (q,))
            assert abs(qfi_analytic(rotated).normalized - base) <= 1e-12

    def test_global_phase_invariance(self):
        state = plus_plus()
        shifted = Statevector(state.amplitudes * np.exp(1j * 0.77), 2)
        a, b = qfi_analytic(state), qfi_analytic(shifted)
        assert a.raw == b.raw and a.normalized == b.normalized

    def test_qfivalue_consistency_enforced(self):
        with pytest.raises(ValueError):
            QfiValue(raw=8.0, normalized=0.5, n_qubits=2, method="analytic")


class TestQscConfig:
    def test_simplified_rejects_squeeze(self):
        with pytest.raises(ValueError):
            QscConfig(variant="simplified", squeeze_angle=0.3)

    def test_simplified_rz_range(self):
        with pytest.raises(ValueError):
            QscConfig(variant="simplified", squeeze_angle=None, rz_angle=0.2)

    def test_full_census_tracks_squeeze(self):
        with_s = build_qsc(QscConfig()).gate_counts()
        assert with_s.get("squeeze") == 2  # one per sensing pair
        plain = QscConfig(prep_actions=("rx", "ry"), squeeze_angle=None)
        assert "squeeze" not in build_qsc(plain).gate_counts()

    def test_simplified_episode_census(self):
        config = QscConfig(variant="simplified", squeeze_angle=None)
        census = build_qsc(config).gate_counts()
        # two episodes, each: one cnot, two cv, one cvinv, rx, ry, rz
        assert census == {"cnot": 2, "cv": 4, "cvinv": 2,
                          "rx": 2, "ry": 2, "rz": 2}


def exact_counts_qfi(config):
    circuit = build_qsc(config)
    state = circuit.apply(new_zero_state(circuit.n_qubits))
    out = []
    for layout in measurement_layout(config):
        probs = marginal_distribution(state, layout.measured_qubits)
        out.append(qfi_from_counts(probs, layout))
    return out


class TestCountsMethod:
    def test_all_zero_difference_is_zero(self):
        layout = measurement_layout(QscConfig())[0]
        hist = ShotHistogram(counts={"0000": 4096}, total_shots=4096, seed=0,
                             n_measured=4)
        assert qfi_from_counts(hist, layout).normalized == 0.0

    def test_noon_circuit_decodes_to_one(self):
        values = exact_counts_qfi(QscConfig())
        assert abs(values[0].normalized - 1.0) <= 1e-6
        # cross-check against the analytic value of the sensing-pair state
        pair = policy_state_n1()
        assert abs(qfi_analytic(pair, (0, 1)).normalized - 1.0) <= 1e-12

    def test_simplified_zero_angle_reads_zero(self):
        config = QscConfig(variant="simplified", squeeze_angle=None, rz_angle=0.0)
        for value in exact_counts_qfi(config):
            assert value.normalized == 0.0

    def test_counts_estimator_consistency(self):
        # exact-distribution value is a fixed point; sampling concentrates on it
        config = QscConfig()
        layout = measurement_layout(config)[0]
        circuit = build_qsc(config)
        state = circuit.apply(new_zero_state(6))
        exact = qfi_from_counts(
            marginal_distribution(state, layout.measured_qubits), layout).normalized
        errs = []
        for seed in range(20):
            hist = sample_measure(state, layout.measured_qubits, 100_000, seed)
            errs.append(abs(qfi_from_counts(hist, layout).normalized - exact))
        assert np.median(errs) <= 0.02

    def test_width_mismatch_rejected(self):
        layout = measurement_layout(QscConfig())[0]
        bad = ShotHistogram(counts={"000": 10}, total_shots=10, seed=0, n_measured=3)
        with pytest.raises(ValueError):
            qfi_from_counts(bad, layout)


def policy_state_n1():
    """The sensing-pair state prepared by the full-variant default prep."""
    config = QscConfig()
    circuit = build_qsc(config)
    prep_ops = [op for op in circuit.ops
                if set(op.targets) <= {0, 1} and set(op.controls) <= {0, 1}
                and op.name in ("rx", "ry", "rz", "squeeze")]
    from qscopt.circuit import Circuit
    state = Circuit(2, tuple(prep_ops)).apply(new_zero_state(2))
    return state


class TestSweep:
    def test_zero_grid(self):
        config = QscConfig(variant="simplified", squeeze_angle=None, rz_angle=0.0)
        trace = qfi_sweep(config, [0.0])
        assert trace[0][0] == 0.0
        assert all(v.normalized == 0.0 for v in trace[0][1])

    def test_first_episode_dominates(self):
        config = QscConfig(variant="simplified", squeeze_angle=None, rz_angle=0.0)
        grid = np.linspace(0.0, 0.1, 21)
        for _, (q1, q2) in qfi_sweep(config, grid):
            assert q1.normalized >= q2.normalized - 1e-12

    def test_endpoint_value(self):
        config = QscConfig(variant="simplified", squeeze_angle=None, rz_angle=0.0)
        trace = qfi_sweep(config, [0.0, 0.1])
        assert abs(trace[-1][1][0].normalized - 0.5) <= 0.05

    def test_sampled_sweep_deterministic(self):
        config = QscConfig(variant="simplified", squeeze_angle=None, rz_angle=0.0)
        a = qfi_sweep(config, [0.05, 0.1], shots=2048, seed=5)
        b = qfi_sweep(config, [0.05, 0.1], shots=2048, seed=5)
        assert [(g, [v.normalized for v in vs]) for g, vs in a] == \
               [(g, [v.normalized for v in vs]) for g, vs in b]

    def test_grid_validation(self):
        config = QscConfig(variant="simplified", squeeze_angle=None)
        with pytest.raises(ValueError):
            qfi_sweep(config, [])
        with pytest.raises(ValueError):
            qfi_sweep(config, [0.1, 0.05])
        with pytest.raises(ValueError):
            qfi_sweep(config, [0.0, 0.2])


class TestPolicySpaces:
    def test_enumeration_order_and_cap(self):
        pols = enumerate_policies(NOON_ALPHABET, 4, 64)
        assert len(pols) == 64
        assert pols[0].actions == ()
        assert pols[1].actions == ("rx",)
        lengths = [p.gate_count for p in pols]
        assert lengths == sorted(lengths)

    def test_noon_reachable(self):
        pols = enumerate_policies(NOON_ALPHABET, 4, 64)
        rets = exact_returns(pols)
        assert max(rets.values()) >= 1.0 - 1e-12

    def test_squeeze_free_ceiling(self):
        pols = enumerate_policies(SQUEEZE_FREE_ALPHABET, 4, 64)
        rets = exact_returns(pols)
        assert max(rets.values()) <= 0.5 + 1e-6
