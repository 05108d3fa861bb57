"""Long Monte Carlo runs checking that agents close in on their targets.

These take minutes; run with ``pytest -m slow``.
"""

import numpy as np
import pytest

from src.manager import preset_manager, simulation_manager
from src.model.config import ScenarioConfig
from src.model.preset import get_preset

pytestmark = pytest.mark.slow


def _ratio(m_k, head=100, tail=500):
    """Terminal over initial closest-agent distance."""
    return float(np.mean(m_k[-tail:]) / np.mean(m_k[:head]))


class TestConvergence:
    """Closest-agent distance falls over a run."""

    def test_certain_detection_single_agent(self):
        """Should shrink the smoothed distance with near-perfect measurements."""
        cfg = ScenarioConfig(n_agents=1, n_targets=1, n_steps=400, detect_scale=1e9,
                             sigmas=[1e-3, 1e-3, 1e-3])
        result = simulation_manager.run_replication(cfg, seed=0)
        d = result.min_distance_matrix()[:, 0]
        smoothed = np.convolve(d, np.ones(50) / 50, mode="valid")
        assert smoothed[-1] < smoothed[0]
        assert np.mean(d[-50:]) < 0.5 * np.mean(d[:10])

    def test_two_agents_halve_median_distance(self):
        runs = simulation_manager.run_replications(ScenarioConfig(), 100, 0, parallelism=8)
        assert _ratio(simulation_manager.median_min_distance(runs)) <= 0.5

    def test_eight_groups_of_four_halve_median_distance(self):
        outcomes = preset_manager.run_variants(ScenarioConfig(), get_preset("median-T4-8x4").variants,
                                               100, 0, parallelism=8)
        assert _ratio(outcomes[0].m_k) <= 0.5


class TestCommunicationReliability:
    """More reliable links track more closely."""

    def test_reliable_links_win_sign_test(self):
        outcomes = preset_manager.run_variants(ScenarioConfig(), get_preset("commcompare").variants,
                                               100, 0, parallelism=8)
        result = preset_manager.sign_test(outcomes[0], outcomes[1])
        assert result["candidate_better"]


class TestAgentCountOrdering:
    """Terminal median distance over the two-target agent-count variants."""

    def test_groups_then_large_teams_then_pairs(self):
        """Should order G5x2 <= A5 ~ A10 <= A2 within 10%."""
        outcomes = preset_manager.run_variants(ScenarioConfig(), get_preset("median-T2").variants,
                                               100, 0, parallelism=8)
        terminal = {o.variant.name: o.terminal_m_k for o in outcomes}
        assert terminal["G5x2"] <= 1.1 * terminal["A5"]
        assert abs(terminal["A5"] - terminal["A10"]) <= 0.1 * max(terminal["A5"], terminal["A10"])
        assert terminal["A5"] <= 1.1 * terminal["A2"]
        assert terminal["A10"] <= 1.1 * terminal["A2"]


class TestTimingScaling:
    """Shape of simulation and agent processing time over the timing grid."""

    def test_st_quadratic_in_agents_apt_linear(self):
        """Should fit ST better with a quadratic in A and APT well with a line in A and T."""
        preset = get_preset("timing-table")
        outcomes = preset_manager.run_variants(ScenarioConfig(n_steps=500), preset.variants,
                                               preset.n_reps, 0, parallelism=1)
        fits = preset_manager.scaling_fits(outcomes)
        assert fits["st_vs_agents"]["quadratic_gain"] > 0.05
        assert fits["apt_vs_agents"]["linear_r2"] >= 0.8
        assert fits["apt_vs_targets"]["linear_r2"] >= 0.8
