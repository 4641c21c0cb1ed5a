import math

import numpy as np
import pytest

from cavityparity import cluster as cl
from cavityparity.errors import CapacityError
from cavityparity.trajectory import trajectory_rng


class TestLinearCluster:
    def test_single_qubit(self):
        c = cl.linear_cluster(1)
        assert np.allclose(c.amps, [1 / math.sqrt(2)] * 2)

    def test_two_qubit_amplitude_table(self):
        """Product form (|0>+|1>)(|0> + sigma_z^(1) |1>) expanded by hand
        with sigma_z = |1><1| - |0><0|."""
        c = cl.linear_cluster(2)
        assert np.allclose(2 * c.amps, [1, -1, 1, 1])

    def test_three_qubit_amplitude_signs(self):
        c = cl.linear_cluster(3)
        amps = c.amps * 2 ** 1.5
        # sign = (-1)^(number of 01 patterns in adjacent pairs)
        for idx in range(8):
            bits = [(idx >> (2 - i)) & 1 for i in range(3)]
            sign = 1
            for i in range(1, 3):
                if bits[i] == 1 and bits[i - 1] == 0:
                    sign = -sign
            assert amps[idx] == pytest.approx(sign)

    def test_normalised_at_8(self):
        assert cl.linear_cluster(8).norm() == pytest.approx(1.0)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            cl.linear_cluster(17)


class TestParityProject:
    def test_product_state_l_outcome(self):
        """Two independent |+> qubits project onto the odd sector with
        probability one half, leaving the maximally entangled state."""
        plus = cl.ClusterState(2, np.full(4, 0.5, dtype=complex))
        state, prob = cl.parity_project(plus, 1, 2, cl.OUTCOME_L)
        assert prob == pytest.approx(0.5)
        assert abs(state.amps[0b01]) == pytest.approx(1 / math.sqrt(2))
        assert abs(state.amps[0b10]) == pytest.approx(1 / math.sqrt(2))

    def test_two_bell_pairs_project_to_ghz(self):
        bell = np.zeros(4, dtype=complex)
        bell[0b01] = bell[0b10] = 1 / math.sqrt(2)
        pairs = cl.ClusterState(4, np.kron(bell, bell))
        state, prob = cl.parity_project(pairs, 2, 3, cl.OUTCOME_L)
        assert prob == pytest.approx(0.5)
        ghz = np.zeros(16, dtype=complex)
        ghz[0b0101] = ghz[0b1010] = 1 / math.sqrt(2)
        assert abs(np.vdot(ghz, state.amps)) == pytest.approx(1.0)

    def test_completeness(self):
        c = cl.linear_cluster(4)
        probs = cl.outcome_probabilities(c, 2, 3)
        assert sum(probs.values()) == pytest.approx(1.0)

    def test_impossible_branch_raises(self):
        e = np.zeros(4, dtype=complex)
        e[0b00] = 1.0
        state = cl.ClusterState(2, e)
        with pytest.raises(ValueError):
            cl.parity_project(state, 1, 2, cl.OUTCOME_H)


class TestFuseLinear:
    def test_all_pairs_both_branches(self):
        """L-outcome fusion of any two chains with at most ten qubits total
        reproduces the canonical chain exactly, whichever readout the
        removed qubit gives."""
        for n in range(1, 10):
            for m in range(1, 10):
                if n + m > 10:
                    continue
                seen = set()
                for seed in range(40):
                    rng = trajectory_rng(1000 + 17 * n + m, seed)
                    res = cl.fuse_linear(cl.linear_cluster(n),
                                         cl.linear_cluster(m), rng)
                    if res.outcome != cl.OUTCOME_L:
                        continue
                    seen.add(res.measurement)
                    ov = cl.overlap(res.states[0],
                                    cl.linear_cluster(n + m - 1))
                    assert abs(ov - 1.0) < 1e-12, (n, m, res.measurement)
                    if seen == {0, 1}:
                        break

    def test_l_probability_is_half(self):
        joint = cl.tensor(cl.linear_cluster(3), cl.linear_cluster(4))
        probs = cl.outcome_probabilities(joint, 4, 3)
        assert probs[cl.OUTCOME_L] == pytest.approx(0.5)

    def test_empirical_l_frequency(self):
        hits = 0
        n_runs = 600
        for seed in range(n_runs):
            rng = trajectory_rng(8, seed)
            res = cl.fuse_linear(cl.linear_cluster(2), cl.linear_cluster(2),
                                 rng)
            hits += res.outcome == cl.OUTCOME_L
        p = hits / n_runs
        assert abs(p - 0.5) < 3 * math.sqrt(0.25 / n_runs)

    def test_failure_splits_chains(self):
        found = set()
        for seed in range(200):
            rng = trajectory_rng(9, seed)
            res = cl.fuse_linear(cl.linear_cluster(3), cl.linear_cluster(3),
                                 rng)
            if res.outcome == cl.OUTCOME_L or res.outcome in found:
                continue
            found.add(res.outcome)
            sizes = sorted(s.n_qubits for s in res.states)
            assert sizes == [2, 2]
            for piece in res.states:
                ov = cl.overlap(piece, cl.linear_cluster(piece.n_qubits))
                assert abs(ov - 1.0) < 1e-12
            assert len(res.decoupled) == 2
        assert found == {cl.OUTCOME_D, cl.OUTCOME_H}

    def test_nielsen_variant_keeps_redundant_qubit(self):
        for seed in range(60):
            rng = trajectory_rng(10, seed)
            res = cl.fuse_linear(cl.linear_cluster(2), cl.linear_cluster(2),
                                 rng, keep_redundant=True)
            if res.outcome == cl.OUTCOME_L:
                assert res.redundant is not None
                assert res.states[0].n_qubits == 4
                return
        pytest.fail("no successful fusion observed")


class TestFuse2d:
    def test_cross_matches_direct_construction(self):
        """Joining two 3-chains at their centres and removing the second
        link atom leaves the 5-qubit cross: the middle of chain a bonds to
        both neighbours of the removed atom."""
        oracle = cl.graph_state(5, [(2, 1), (3, 2), (2, 4), (5, 2)])
        seen = set()
        for seed in range(300):
            rng = trajectory_rng(11, seed)
            res = cl.fuse_2d(cl.linear_cluster(3), cl.linear_cluster(3),
                             2, 2, rng)
            if res.outcome != cl.OUTCOME_L:
                continue
            seen.add(res.measurement)
            assert abs(cl.overlap(res.states[0], oracle) - 1.0) < 1e-12
            if seen == {0, 1}:
                break
        assert seen == {0, 1}

    def test_failure_splits_into_four(self):
        for seed in range(300):
            rng = trajectory_rng(12, seed)
            res = cl.fuse_2d(cl.linear_cluster(4), cl.linear_cluster(3),
                             2, 2, rng)
            if res.outcome == cl.OUTCOME_L:
                continue
            sizes = sorted(s.n_qubits for s in res.states)
            assert sizes == [1, 1, 1, 2]
            return
        pytest.fail("no failed fusion observed")

    def test_requires_interior_atoms(self):
        rng = trajectory_rng(13, 0)
        with pytest.raises(ValueError):
            cl.fuse_2d(cl.linear_cluster(3), cl.linear_cluster(3), 1, 2, rng)


class TestGrowth:
    def test_deterministic_calibration(self):
        rng = trajectory_rng(14, 0)
        stats = cl.growth_monte_carlo(1.0, 10, cl.GrowthStrategy(2), rng)
        assert stats.attempts == 9
        assert stats.qubits_consumed == 18
        assert stats.reached_target

    def test_zero_probability_never_grows(self):
        rng = trajectory_rng(15, 0)
        strategy = cl.GrowthStrategy(fresh_size=2, max_attempts=500)
        stats = cl.growth_monte_carlo(0.0, 5, strategy, rng)
        assert not stats.reached_target
        assert max(stats.final_sizes) < 5

    def test_mean_cost_matches_expectation(self):
        strategy = cl.GrowthStrategy(fresh_size=2)
        expected = cl.expected_growth_cost(0.5, 8, strategy)
        costs = []
        for i in range(20000):
            rng = trajectory_rng(16, i)
            costs.append(cl.growth_monte_carlo(0.5, 8, strategy,
                                               rng).qubits_consumed)
        costs = np.array(costs, dtype=float)
        err = costs.std() / math.sqrt(len(costs))
        assert abs(costs.mean() - expected) < 3 * err

    def test_nielsen_growth_flags_redundancy(self):
        rng = trajectory_rng(17, 0)
        strategy = cl.GrowthStrategy(fresh_size=2, nielsen=True)
        stats = cl.growth_monte_carlo(1.0, 10, strategy, rng)
        assert stats.redundant_qubits == stats.attempts

    def test_consumed_bounds_final_size(self):
        for i in range(50):
            rng = trajectory_rng(18, i)
            stats = cl.growth_monte_carlo(0.4, 6, cl.GrowthStrategy(3), rng)
            assert stats.qubits_consumed >= max(stats.final_sizes)
