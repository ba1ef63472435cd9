import numpy as np
import pytest
from scipy import stats

from contestlab import (CostModel, NonstrategicPool, Perfect, RewardScheme, ScenarioConfig, SoftmaxNoise,
                        StrategyProfile, Uniform, estimate_action_utility, simulate_contest,
                        verify_equilibrium)
from contestlab.model import Contribute, NotParticipate, Rate
from contestlab.simulation import participation_counts
from contestlab.streams import SimulationPlan, substream


def test_empty_contest_pays_raters_nothing():
    sc = ScenarioConfig(3, Uniform(), RewardScheme(1.0, 0.0, 0.2), CostModel(0.1, 0.0), Perfect())
    prof = StrategyProfile.symmetric(3, 1.0)
    for t in range(50):
        out = simulate_contest(prof, sc, substream(0, "c", t))
        assert out.m == 0 and out.winner is None
        assert all(isinstance(r.action, Rate) and r.points == 0.0 for r in out.records)


def test_replay(base_scenario):
    prof = StrategyProfile.symmetric(2, 0.1)
    a = simulate_contest(prof, base_scenario, substream(8, "r"))
    b = simulate_contest(prof, base_scenario, substream(8, "r"))
    assert a == b


def test_pool_members_recorded():
    sc = ScenarioConfig(2, Uniform(), RewardScheme(1.0), CostModel(0.1), Perfect(), pool=NonstrategicPool(2))
    out = simulate_contest(StrategyProfile.symmetric(2, 1.0), sc, substream(1, "p"))
    assert out.m == 2 and sum(r.nonstrategic for r in out.records) == 2


def test_contributor_count_is_binomial():
    n, a = 3, 0.4
    sc = ScenarioConfig(n, Uniform(), RewardScheme(1.0), CostModel(0.1), SoftmaxNoise(1.0))
    prof = StrategyProfile.symmetric(n, a)
    rng = substream(2, "chi")
    m = np.array([simulate_contest(prof, sc, rng).m for _ in range(100_000)])
    observed = np.bincount(m, minlength=n + 1)
    expected = stats.binom.pmf(np.arange(n + 1), n, 1 - a) * len(m)
    assert stats.chisquare(observed, expected).pvalue > 0.01


def test_participation_counts_mean(base_scenario):
    counts = participation_counts(StrategyProfile.symmetric(2, 0.3), base_scenario, SimulationPlan(50_000, 1))
    assert counts.mean() == pytest.approx(1.4, abs=0.02)


def test_action_utilities(base_scenario):
    prof = StrategyProfile.symmetric(2, 0.1)
    plan = SimulationPlan(100_000, 5)
    c_mean, c_se = estimate_action_utility(0, 0.1, Contribute(), prof, base_scenario, plan)
    r_mean, r_se = estimate_action_utility(0, 0.1, Rate(), prof, base_scenario, plan)
    assert abs(c_mean - r_mean) <= 3 * np.hypot(c_se, r_se)
    mean, se = estimate_action_utility(0, 1.0, Contribute(), prof, base_scenario, plan)
    assert abs(mean - 0.9) <= 3 * se + 1e-12
    assert estimate_action_utility(0, 0.5, NotParticipate(), prof, base_scenario, plan) == (0.0, 0.0)


def test_verification(base_scenario):
    grid = np.linspace(0, 1, 21)
    ok = verify_equilibrium(StrategyProfile.symmetric(2, 0.1), base_scenario, grid)
    assert ok.verified and ok.witness is None
    bad = verify_equilibrium(StrategyProfile.symmetric(2, 0.2), base_scenario, grid)
    assert not bad.verified
    # everyone below 0.2 wins with probability 0.2 > c_C by entering
    assert bad.witness.ability < 0.2
    assert bad.witness.best_alternative == "contribute(e=0)"


def test_results_do_not_depend_on_workers(monkeypatch, base_scenario):
    prof = StrategyProfile.symmetric(2, 0.1)
    plan = SimulationPlan(30_000, 3)
    monkeypatch.setenv("CONTESTLAB_WORKERS", "1")
    one = estimate_action_utility(0, 0.4, Contribute(), prof, base_scenario, plan)
    monkeypatch.setenv("CONTESTLAB_WORKERS", "4")
    four = estimate_action_utility(0, 0.4, Contribute(), prof, base_scenario, plan)
    assert one == four
