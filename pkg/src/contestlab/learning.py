"""Recovering unknown contribution (and rating) costs from observed participation.

The designer runs a series of contests with fixed rewards, measures the
fraction of agents who contribute, turns it into the threshold agents must
be using, and inverts the strictly increasing map from contribution cost to
equilibrium threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import AbilityDistribution
from .equilibrium import (DEFAULT_MC, MCSettings, bisect_decreasing, prob_any_other_contribution,
                          solve_symmetric_threshold, win_probability)
from .errors import ContractError, DegenerateError
from .model import CostModel, RewardScheme, ScenarioConfig, StrategyProfile
from .ranking import RankingModel
from .simulation import participation_counts
from .streams import SimulationPlan


@dataclass
class ContestSeriesResult:
    T: int
    n: int
    counts: np.ndarray
    threshold: float

    @property
    def f_hat(self) -> float:
        return float(self.counts.sum() / (self.T * self.n))

    @property
    def stderr_proxy(self) -> float:
        f = self.f_hat
        return float(np.sqrt(f * (1.0 - f) / (self.T * self.n)))


def run_contest_series(rewards: RewardScheme, true_costs: CostModel, n: int, d: AbilityDistribution,
                       ranking: RankingModel, T: int, seed: int = 0,
                       mc: MCSettings = DEFAULT_MC) -> ContestSeriesResult:
    """Simulate ``T`` independent contests at the true equilibrium and count contributors."""
    if T < 1:
        raise ContractError("T must be at least 1")
    a_star = solve_symmetric_threshold(rewards, true_costs, n, d, ranking, mc=mc).threshold
    scenario = ScenarioConfig(n, d, rewards, true_costs, ranking, seed=seed)
    counts = participation_counts(StrategyProfile.symmetric(n, a_star), scenario,
                                  SimulationPlan(T, seed))
    return ContestSeriesResult(T, n, counts, a_star)


def observed_threshold(f_hat: float, d: AbilityDistribution) -> float:
    if not 0 < f_hat < 1:
        raise DegenerateError(
            f"participation frequency {f_hat} is a corner; the threshold (and cost) is not identified")
    return float(d.inverse_cdf(1.0 - f_hat))


def estimate_contribution_cost(f_hat: float, rewards: RewardScheme, c_R: float, n: int,
                               d: AbilityDistribution, ranking: RankingModel, c_bar: float,
                               mc: MCSettings = DEFAULT_MC) -> float:
    """Contribution cost whose equilibrium threshold reproduces the observed frequency.

    Requires ``p_C = 0`` and ``p_B > p_R + c_bar`` so that every cost in
    ``(0, c_bar)`` yields an interior threshold.
    """
    if rewards.p_C != 0:
        raise ContractError("cost learning needs p_C = 0")
    if not rewards.p_B > rewards.p_R + c_bar:
        raise ContractError("cost learning needs p_B > p_R + c_bar")
    target = observed_threshold(f_hat, d)

    def threshold_at(c):
        return solve_symmetric_threshold(rewards, CostModel(c, c_R), n, d, ranking, mc=mc).threshold

    # threshold is strictly increasing in the cost: bisect on target - a*(c)
    lo_gap = target - threshold_at(0.0)
    hi_gap = target - threshold_at(c_bar)
    if lo_gap <= 0 or hi_gap >= 0:
        raise DegenerateError("observed threshold is not reachable by any cost in (0, c_bar)")
    c, _, _ = bisect_decreasing(lambda c: target - threshold_at(c), 0.0, c_bar, lo_gap, hi_gap,
                                xtol=1e-15)
    return float(c)


def estimate_both_costs(exp1, exp2, p_R: float, n: int, d: AbilityDistribution,
                        ranking: RankingModel, mc: MCSettings = DEFAULT_MC):
    """Joint ``(c_C, c_R)`` from two experiments ``(p_B, observed threshold)`` with ``p_C = 0``.

    Each indifference condition reads
    ``c_C - c_R * Pr(C>0|a) = p_B * Pr(W|a) - p_R * Pr(C>0|a)``.
    """
    (p_b1, a1), (p_b2, a2) = exp1, exp2
    if p_b1 == p_b2:
        raise DegenerateError("the two experiments must use different winner rewards")
    for a in (a1, a2):
        if not 0 < a < 1:
            raise ContractError("observed thresholds must be interior")
    rows, rhs = [], []
    for p_b, a in ((p_b1, a1), (p_b2, a2)):
        content = prob_any_other_contribution(a, n, d)
        win = win_probability(a, a, n, d, ranking, mc=mc)
        rows.append([1.0, -content])
        rhs.append(p_b * win - p_R * content)
    matrix = np.array(rows)
    if abs(np.linalg.det(matrix)) < 1e-12:
        raise DegenerateError("the two experiments give the same content probability; system is singular")
    c_c, c_r = np.linalg.solve(matrix, np.array(rhs))
    return float(c_c), float(c_r)
