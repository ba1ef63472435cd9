import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contestlab import (BestContribution, BetaMixture, Perfect, Proportional, RankOrder, RankPrizes,
                        RewardScheme, Scaled, SoftmaxNoise, validate_ranking_assumptions,
                        winner_probabilities)
from contestlab.errors import ContractError
from contestlab.ranking import RankingModel, expected_points, mechanism_from_dict, ranking_from_dict
from contestlab.streams import substream


def test_winner_probability_spot_values():
    np.testing.assert_allclose(winner_probabilities(Perfect(), [0.9, 0.4]), [1.0, 0.0])
    np.testing.assert_allclose(winner_probabilities(BetaMixture(0.5), [0.9, 0.4]), [0.75, 0.25])
    np.testing.assert_allclose(winner_probabilities(SoftmaxNoise(1.0), [0.3, 0.3]), [0.5, 0.5])
    with pytest.raises(ContractError):
        winner_probabilities(Perfect(), [])


def test_perfect_ties_split_evenly():
    np.testing.assert_allclose(winner_probabilities(Perfect(), [0.5, 0.5, 0.1]), [0.5, 0.5, 0.0])


@pytest.mark.parametrize("ranking", [BetaMixture(0.5), SoftmaxNoise(0.4), Perfect()])
def test_sampled_winners_match_probabilities(ranking):
    q = np.array([0.9, 0.4, 0.7])
    rng = substream(5, "winners")
    reps = 40_000
    counts = np.bincount([ranking.sample_winner(q, rng) for _ in range(reps)], minlength=3)
    p = winner_probabilities(ranking, q)
    se = np.sqrt(p * (1 - p) / reps)
    assert np.all(np.abs(counts / reps - p) <= 3 * se + 1e-12)


def test_rank_order_random_permutation_by_enumeration():
    prizes = (1.0, 0.5, 0.0)
    mech = RankOrder(RankPrizes(prizes), beta=0.0)
    # own contribution sits at each rank in 2 of the 6 orderings
    oracle = np.mean([prizes[perm.index(0)] for perm in itertools.permutations(range(3))])
    assert expected_points(mech, 0.3, [0.9, 0.1]) == pytest.approx(oracle)
    assert oracle == pytest.approx(0.5)


def test_rank_order_exact_and_ties():
    mech = RankOrder(RankPrizes((1.0, 0.5, 0.0)), beta=1.0)
    assert expected_points(mech, 0.3, [0.9, 0.1]) == pytest.approx(0.5)
    assert expected_points(mech, 0.9, [0.9, 0.1]) == pytest.approx(0.75)


def test_best_contribution_and_proportional():
    best = BestContribution(RewardScheme(1.0, 0.0), Perfect())
    assert expected_points(best, 0.9, [0.4]) == pytest.approx(1.0)
    assert expected_points(Proportional(1.0), 0.5, [0.5]) == pytest.approx(0.5)
    assert expected_points(Proportional(1.0), 0.0, [0.0, 0.0]) == pytest.approx(1 / 3)
    assert expected_points(Scaled(Proportional(1.0), 2.0), 0.5, [0.5]) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0), st.lists(st.floats(0.0, 1.0), min_size=1, max_size=4), st.floats(0.1, 3.0))
def test_softmax_derivative_finite_difference(q, others, eta):
    r = SoftmaxNoise(eta)
    h = 1e-6
    o = np.array([others])
    up = r.batch_win_prob(np.array([q + h]), o)[0]
    down = r.batch_win_prob(np.array([q - h]), o)[0]
    assert r.d_win_prob(np.array([q]), o)[0] == pytest.approx((up - down) / (2 * h), abs=1e-7)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6), st.floats(0.0, 1.0))
def test_beta_probabilities_sum_to_one(q, beta):
    assert winner_probabilities(BetaMixture(beta), q).sum() == pytest.approx(1.0)


class _Inverted(RankingModel):
    def batch_win_prob(self, q_self, others):
        return 1.0 - SoftmaxNoise(1.0).batch_win_prob(q_self, others)


def test_ranking_assumption_checks():
    assert validate_ranking_assumptions(SoftmaxNoise(1.0)).passed
    rep = validate_ranking_assumptions(BetaMixture(1.0))
    assert rep.passed and "weak monotonicity off ties" in rep.note
    bad = validate_ranking_assumptions(_Inverted())
    assert not bad.passed and "q 0 -> 0.05" in bad.violation


def test_from_dict():
    assert ranking_from_dict({"kind": "softmax", "eta": 0.5}) == SoftmaxNoise(0.5)
    with pytest.raises(ContractError):
        ranking_from_dict({"kind": "beta", "beta": 0.5, "eta": 1})
    mech = mechanism_from_dict({"kind": "scaled", "k": 2.0, "base": {"kind": "proportional"}})
    assert mech == Scaled(Proportional(1.0), 2.0)
