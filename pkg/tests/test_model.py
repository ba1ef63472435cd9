import numpy as np
import pytest

from contestlab import (CobbDouglas, Contribute, CostModel, EffortCostFunction, EffortPolicy, LinearMix,
                        MaxQuality, MixedParticipationStrategy, NotParticipate, RankPrizes, Rate,
                        RewardScheme, ScenarioConfig, StrategyProfile, SumMinusSearchCost, SumQuality,
                        Tabulated, TopK, Uniform, Perfect)
from contestlab.errors import ContractError
from contestlab.model import evaluate_designer_utility, realized_payoff


def test_designer_utilities():
    assert evaluate_designer_utility(MaxQuality(), 0, ()) == 0.0
    assert evaluate_designer_utility(SumMinusSearchCost(0.5), 2, (0.9, 0.6)) == pytest.approx(0.5)
    assert evaluate_designer_utility(TopK(1), 3, (0.8, 0.7, 0.2)) == pytest.approx(0.8)
    assert SumQuality()(2, (0.5, 0.25)) == pytest.approx(0.75)
    assert Tabulated(lambda m, q: m * 10.0)(2, (0.5, 0.1)) == 20.0


def test_designer_utility_rejects_unsorted():
    with pytest.raises(ContractError):
        MaxQuality()(2, (0.1, 0.9))
    with pytest.raises(ContractError):
        MaxQuality()(3, (0.9, 0.1))


def test_realized_payoff():
    costs = CostModel(0.1, 0.02)
    assert realized_payoff(NotParticipate(), 0.0, costs) == 0.0
    assert realized_payoff(Contribute(), 1.0, costs) == pytest.approx(0.9)
    assert realized_payoff(Rate(), 0.3, costs) == pytest.approx(0.28)
    c = EffortCostFunction(0.05, 0.01)
    assert realized_payoff(Contribute(1.0), 0.5, costs, c) == pytest.approx(0.44)


def test_reward_invariants():
    with pytest.raises(ContractError):
        RewardScheme(0.1, 0.1)
    with pytest.raises(ContractError):
        RankPrizes((0.5, 0.5))
    with pytest.raises(ContractError):
        RankPrizes((0.2, 0.5))
    with pytest.raises(ContractError):
        CostModel(0.6, 0.0, c_bar=0.5)
    with pytest.raises(ContractError):
        Contribute(1.5)


def test_quality_models():
    lm = LinearMix(0.5)
    assert lm(0.2, 1.0) == pytest.approx(0.6)
    assert lm.d_effort(0.3, 0.4) == pytest.approx(0.5)
    cd = CobbDouglas(0.5)
    assert cd(0.25, 0.0) == pytest.approx(cd(0.25, 0.05))
    h = 1e-6
    fd = (cd(0.4, 0.5 + h) - cd(0.4, 0.5 - h)) / (2 * h)
    assert cd.d_effort(0.4, 0.5) == pytest.approx(fd, rel=1e-6)


def test_effort_cost_derivative():
    c = EffortCostFunction(0.05, 0.2, 2.0)
    h = 1e-6
    assert c.derivative(0.3) == pytest.approx((c(0.3 + h) - c(0.3 - h)) / (2 * h), rel=1e-6)


def test_strategies():
    pol = EffortPolicy((0.0, 0.5), (0.2, 0.9))
    np.testing.assert_allclose(pol(np.array([0.1, 0.5, 1.0])), [0.2, 0.9, 0.9])
    prof = StrategyProfile.symmetric(3, 0.4, 1.0)
    assert prof.n == 3 and prof.is_symmetric
    sigma = MixedParticipationStrategy((0.0, 0.5, 1.0), (0.2, 0.6))
    assert sigma.participation_rate(Uniform()) == pytest.approx(0.4)
    with pytest.raises(ContractError):
        StrategyProfile((0.2, 1.2), (EffortPolicy.constant(0.0),) * 2)


def test_scenario_invariants():
    with pytest.raises(ContractError):
        ScenarioConfig(1, Uniform(), RewardScheme(1.0), CostModel(0.1), Perfect())
    with pytest.raises(ContractError):
        ScenarioConfig(3, Uniform(), RankPrizes((1.0, 0.0)), CostModel(0.1), Perfect())
