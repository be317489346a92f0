import math

import numpy as np
import pytest

from qscopt import (Policy, ReturnBounds, RotationPlan, build_threshold_oracle,
                    decode_readout, enumerate_policies, exact_returns,
                    grover_iterate, improve_policy, make_rng,
                    prepare_search_space, rotation_count)
from qscopt.policies import NOON_ALPHABET


def toy_policies(values):
    """Policies whose ids map onto the given exact-representable values."""
    pols = tuple(Policy(id=i, actions=("rx",) * min(i, 4), horizon=4)
                 for i in range(len(values)))
    return pols, {i: v for i, v in enumerate(values)}


class TestRotationCount:
    def test_rule_example(self):
        assert rotation_count(1.0, 50.0, 0.0, 0.05) == 15

    def test_zero_drive(self):
        assert rotation_count(1.0, 0.0, 0.0, 0.05) == 0

    def test_cap_boundary(self):
        assert rotation_count(10.0, 5.0, 5.0, math.pi / 4) == 0

    def test_bad_theta(self):
        with pytest.raises(ValueError):
            rotation_count(1.0, 1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            rotation_count(1.0, 1.0, 1.0, -0.3)

    def test_cap_respected_on_sweep(self):
        rng = make_rng(5)
        for _ in range(1000):
            k = float(rng.uniform(0, 20))
            r = float(rng.uniform(0, 2))
            v = float(rng.uniform(0, 2))
            theta = float(rng.uniform(1e-3, math.pi / 2))
            L = rotation_count(k, r, v, theta)
            assert 0 <= L <= int(math.pi / (4 * theta) - 0.5)
            assert L == min(int(k * (r + v)), int(math.pi / (4 * theta) - 0.5))

    def test_plan_materializes_rule(self):
        plan = RotationPlan(k=1.0, r=50.0, v_next=0.0, theta=0.05)
        assert plan.L == 15


class TestSearchSpace:
    def test_uniform_marginals(self):
        pols, values = toy_policies([0.0, 0.5, 0.5, 1.0])
        space = prepare_search_space(pols, t=4, values=values)
        marg = space.policy_marginal(space.psi0)
        assert np.abs(marg - 0.25).max() <= 1e-9

    def test_single_policy_rejected(self):
        pols, values = toy_policies([1.0])
        with pytest.raises(ValueError):
            prepare_search_space(pols, t=4, values=values)

    def test_prep_adjoint_returns_zero_state(self):
        pols, values = toy_policies([0.0, 0.5, 1.0, 0.5, 0.0])
        space = prepare_search_space(pols, t=3, values=values)
        back = space.apply_prep_adjoint(space.psi0)
        want = np.zeros_like(back)
        want[0, 0, 0] = 1.0
        assert np.abs(back - want).max() <= 1e-9


class TestThresholdOracle:
    def test_top_threshold_flips_nothing(self):
        oracle = build_threshold_oracle(1.0, 4)
        assert not oracle.flips.any()

    def test_bottom_threshold_flips_all_positive(self):
        oracle = build_threshold_oracle(0.0, 4)
        assert set(np.flatnonzero(oracle.flips)) == set(range(1, 16))

    def test_strictness_at_grid_value(self):
        v = decode_readout(4, 4)  # exactly representable value 0.5
        oracle = build_threshold_oracle(v, 4)
        assert not oracle.flips[4] and not oracle.flips[12]
        assert oracle.flips[8]

    @pytest.mark.parametrize("t", [2, 3, 4, 5])
    def test_exhaustive_against_inequality(self, t):
        bounds = ReturnBounds(0.0, 2.0)
        for v_ref in (0.0, 0.3, 1.0, 1.7, 2.0):
            oracle = build_threshold_oracle(v_ref, t, bounds)
            for x in range(1 << t):
                want = bounds.value(decode_readout(x, t)) > v_ref
                assert bool(oracle.flips[x]) == want
                assert oracle.signs[x] == (-1.0 if want else 1.0)

    def test_out_of_bounds_rejected(self):
        with pytest.raises(ValueError):
            build_threshold_oracle(1.5, 4)


class TestGroverIterate:
    def test_zero_rotations_identity(self):
        pols, values = toy_policies([0.0, 1.0, 0.0, 0.0])
        space = prepare_search_space(pols, t=4, values=values)
        out = grover_iterate(space, build_threshold_oracle(0.5, 4), 0)
        assert np.abs(out - space.psi0).max() == 0.0

    def test_quarter_good_single_rotation(self):
        # p = 1/4 -> theta_a = pi/6 -> one rotation reaches certainty
        pols, values = toy_policies([0.0, 1.0, 0.0, 0.0])
        space = prepare_search_space(pols, t=4, values=values)
        oracle = build_threshold_oracle(0.5, 4)
        out = grover_iterate(space, oracle, 1)
        assert abs(space.good_probability(out, oracle) - 1.0) <= 1e-9

    def test_half_good_over_rotation(self):
        pols, values = toy_policies([0.0, 1.0, 1.0, 0.0])
        space = prepare_search_space(pols, t=4, values=values)
        oracle = build_threshold_oracle(0.5, 4)
        out = grover_iterate(space, oracle, 1)
        # sin^2(3 pi/4) = 1/2: over-rotation brings it back to 1/2
        assert abs(space.good_probability(out, oracle) - 0.5) <= 1e-9

    @pytest.mark.parametrize("n_policies", [4, 5, 8, 16, 37, 64])
    def test_closed_form_agreement(self, n_policies):
        rng = make_rng(100 + n_policies)
        for good_count in sorted({1, 2, n_policies // 2, n_policies - 1, n_policies}):
            if good_count < 1:
                continue
            values = [1.0] * good_count + [0.0] * (n_policies - good_count)
            pols, vmap = toy_policies(values)
            space = prepare_search_space(pols, t=3, values=vmap)
            oracle = build_threshold_oracle(0.5, 3)
            theta = math.asin(math.sqrt(good_count / n_policies))
            state = space.psi0
            for L in range(1, 21):
                state = grover_iterate(space, oracle, 1, state=state)
                want = math.sin((2 * L + 1) * theta) ** 2
                assert abs(space.good_probability(state, oracle) - want) <= 1e-9

    def test_all_pass_oracle_reflection_identity(self):
        # oracle flipping everything composed with the state reflection acts
        # as -identity on the prepared state
        pols, values = toy_policies([0.0, 0.5, 1.0, 0.25])
        space = prepare_search_space(pols, t=4, values=values)
        v = space.psi0.copy()
        v = -v  # all-pass oracle
        overlap = np.vdot(space.psi0, v)
        v = 2.0 * overlap * space.psi0 - v
        assert np.abs(v - (-space.psi0)).max() <= 1e-9


class TestImprovePolicy:
    def test_degenerate_landscape_uniform(self):
        pols, values = toy_policies([0.5] * 8)
        space = prepare_search_space(pols, t=4, values=values)
        measured = {improve_policy(space, 0.5, 3, seed=s)[0].id for s in range(24)}
        assert len(measured) >= 5  # effectively uniform over 8 slots

    def test_unique_best_found_with_certainty(self):
        pols, values = toy_policies([0.0, 0.0, 1.0, 0.0])
        space = prepare_search_space(pols, t=4, values=values)
        for seed in range(10):
            measured, trace = improve_policy(space, 0.5, 1, seed=seed)
            assert measured.id == 2
            assert abs(trace[-1] - 1.0) <= 1e-9

    def test_fixed_fifty_rotation_trace(self):
        # over-rotating oscillates; the trace maximum matches the closed form
        # for the good set identified by exhaustive classical scoring
        policies = enumerate_policies(NOON_ALPHABET, 4, 64)
        returns = exact_returns(policies)
        threshold = 0.75
        space = prepare_search_space(policies, t=4, values=returns)
        oracle = build_threshold_oracle(threshold, 4)
        theta = space.grover_angle(oracle)
        _, trace = improve_policy(space, threshold, 50, seed=3)
        best_reachable = max(math.sin((2 * L + 1) * theta) ** 2 for L in range(1, 51))
        assert abs(max(trace) - best_reachable) <= 1e-9
        # the flipped mass is carried by the max-QFI policies found classically
        good_fraction = sum(1 for v in returns.values() if v > threshold) / len(policies)
        assert abs(theta - math.asin(math.sqrt(good_fraction))) <= 1e-3
        assert max(returns.values()) > threshold
