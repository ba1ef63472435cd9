import numpy as np
import pytest

from contestlab import (BetaMixture, CostModel, InfeasibleError, MaxQuality, MixedParticipationStrategy,
                        Perfect, Proportional, SumMinusSearchCost, SumQuality, TopK, Uniform,
                        calibrate_general_scale, calibrate_rewards, equivalent_threshold,
                        expected_designer_utility, optimal_threshold, reward_schedule_vs_n,
                        solve_symmetric_threshold)
from contestlab.design import mixed_utility_samples, utility_samples, _draws
from contestlab.equilibrium import solve_general_threshold
from contestlab.errors import ContractError
from contestlab.ranking import Scaled

U = Uniform()
COSTS = CostModel(0.1, 0.0)


def test_expected_utility_oracles():
    mean, se = expected_designer_utility(0.0, 2, U, MaxQuality(), reps=50_000)
    assert abs(mean - 2 / 3) <= 3 * se
    mean, se = expected_designer_utility(0.5, 4, U, SumMinusSearchCost(0.5), reps=50_000)
    assert abs(mean - 4 * 0.5 * 0.5 / 2) <= 3 * se
    for v in (MaxQuality(), SumQuality(), TopK(2), SumMinusSearchCost(0.3)):
        assert expected_designer_utility(1.0, 3, U, v, reps=1000) == (0.0, 0.0)


def test_optimal_threshold():
    assert optimal_threshold(4, U, SumMinusSearchCost(0.5), reps=20_000).a_hat == pytest.approx(0.5, abs=0.02)
    assert optimal_threshold(3, U, SumQuality(), reps=5000).a_hat == 0.0
    assert optimal_threshold(2, U, MaxQuality(), reps=5000).a_hat == 0.0


def test_threshold_beats_equivalent_mixed_strategy():
    sigma = MixedParticipationStrategy((0.0, 0.3, 0.7, 1.0), (0.6, 0.2, 0.9))
    a_hat = equivalent_threshold(sigma, U)
    assert 1 - a_hat == pytest.approx(sigma.participation_rate(U))
    draws = _draws(3, U, 50_000, 4, None)
    diff = (utility_samples(a_hat, 3, U, SumQuality(), draws=draws)
            - mixed_utility_samples(sigma, 3, U, SumQuality(), draws=draws))
    assert diff.mean() > 0


def test_calibration_closed_forms():
    cal = calibrate_rewards(0.1, 10, 0.0, COSTS, 2, U, Perfect())
    assert cal.p_C == pytest.approx(1 / 19, abs=1e-9) and cal.p_B == pytest.approx(10 / 19, abs=1e-9)
    cal = calibrate_rewards(0.5, 10, 0.0, COSTS, 2, U, Perfect())
    assert cal.p_C == pytest.approx(1 / 55, abs=1e-9) and cal.p_B == pytest.approx(2 / 11, abs=1e-9)


@pytest.mark.parametrize("ranking", [Perfect(), BetaMixture(0.5)])
def test_calibration_round_trip(ranking):
    for a_hat in np.linspace(0.1, 0.9, 9):
        cal = calibrate_rewards(a_hat, 2.0, 0.05, CostModel(0.1, 0.02), 3, U, ranking)
        rep = solve_symmetric_threshold(cal.rewards, CostModel(0.1, 0.02), 3, U, ranking)
        assert abs(rep.threshold - a_hat) <= 1e-6


def test_calibration_infeasible_regime():
    # rating is so costly that contributing always beats it
    with pytest.raises(InfeasibleError, match="regime"):
        calibrate_rewards(0.5, 10, 0.0, CostModel(0.0, 0.0), 2, U, Perfect())


def test_schedule():
    rows = reward_schedule_vs_n(0.5, 10, 0.0, COSTS, U, Perfect(), range(2, 11))
    assert rows[0][2] == pytest.approx(1 / 55, abs=1e-9)
    assert rows[1][2] == pytest.approx(0.1 / 3.25, abs=1e-9)
    p_b = np.array([r[1] for r in rows])
    p_c = np.array([r[2] for r in rows])
    assert np.all(np.diff(p_b) > 0) and np.all(np.diff(p_c) > 0)
    with pytest.raises(ContractError):
        reward_schedule_vs_n(0.0, 10, 0.0, COSTS, U, Perfect(), range(2, 4))


def test_proportional_scale():
    res = calibrate_general_scale(Proportional(1.0), 0.5, 0.0, COSTS, 2, U)
    # k (a + a ln((1 + a) / (2a))) = c_C at a = 0.5
    oracle = 0.1 / (0.5 + 0.5 * np.log(1.5))
    assert res.k == pytest.approx(oracle, abs=1e-6)
    assert res.residual <= 1e-6
    tiny = solve_general_threshold(Scaled(Proportional(1.0), 1e-4), 0.0, 0.0, 0.1, 2, U)
    huge = solve_general_threshold(Scaled(Proportional(1.0), 1e3), 0.0, 0.0, 0.1, 2, U)
    # a zero-quality entry earns nothing, so a* only tends to 0 as k grows
    assert tiny.threshold == 1.0 and huge.threshold < 1e-4
