"""Designer-side computations: expected designer utility under threshold and
mixed participation, the optimal threshold, and calibration of rewards (or of
a mechanism scale) so that the equilibrium threshold hits a target."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .distributions import AbilityDistribution
from .equilibrium import (DEFAULT_MC, MCSettings, bisect_decreasing, contribution_points,
                          outside_value, prob_any_other_contribution, solve_general_threshold,
                          win_probability)
from .errors import ContractError, InfeasibleError
from .model import CostModel, DesignerUtility, MixedParticipationStrategy, NonstrategicPool, RewardScheme
from .ranking import BestContribution, GeneralMechanism, RankingModel, Scaled
from .streams import SimulationPlan, standard_error

DEFAULT_REPS = 20_000


def _identity(a):
    return a


# ---------------------------------------------------------------------------
# expected designer utility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Draws:
    abilities: np.ndarray
    pool_q: np.ndarray
    coins: np.ndarray


def _draws(n, d, reps, seed, pool) -> _Draws:
    plan = SimulationPlan(reps, seed)
    abilities = d.inverse_cdf(plan.uniforms("abilities", n))
    k0 = 0 if pool is None else pool.count
    pool_q = pool.quality_dist.inverse_cdf(plan.uniforms("pool", k0)) if k0 else np.empty((reps, 0))
    coins = plan.uniforms("participation", n)
    return _Draws(abilities, pool_q, coins)


def _values(utility: DesignerUtility, contributes, qualities, pool_q) -> np.ndarray:
    q = np.where(contributes, qualities, np.nan)
    q = np.concatenate([q, pool_q], axis=1)
    return utility.batch(-np.sort(-q, axis=1))


def utility_samples(a_hat: float, n: int, d: AbilityDistribution, utility: DesignerUtility,
                    reps: int = DEFAULT_REPS, seed: int = 0, pool: Optional[NonstrategicPool] = None,
                    quality: Callable = _identity, draws: Optional[_Draws] = None) -> np.ndarray:
    """Per-replication V when every agent contributes iff ability >= a_hat."""
    draws = draws or _draws(n, d, reps, seed, pool)
    a = draws.abilities
    return _values(utility, a >= a_hat, quality(a), draws.pool_q)


def mixed_utility_samples(sigma: MixedParticipationStrategy, n: int, d: AbilityDistribution,
                          utility: DesignerUtility, reps: int = DEFAULT_REPS, seed: int = 0,
                          pool: Optional[NonstrategicPool] = None, quality: Callable = _identity,
                          draws: Optional[_Draws] = None) -> np.ndarray:
    """Per-replication V when each agent contributes with probability sigma(a)."""
    draws = draws or _draws(n, d, reps, seed, pool)
    a = draws.abilities
    return _values(utility, draws.coins < sigma(a), quality(a), draws.pool_q)


def expected_designer_utility(a_hat: float, n: int, d: AbilityDistribution, utility: DesignerUtility,
                              reps: int = DEFAULT_REPS, seed: int = 0,
                              pool: Optional[NonstrategicPool] = None,
                              quality: Callable = _identity):
    """Monte Carlo (mean, standard error) of V under a common threshold."""
    if not 0 <= a_hat <= 1:
        raise ContractError("threshold must lie in [0, 1]")
    if reps < 1:
        raise ContractError("reps must be at least 1")
    v = utility_samples(a_hat, n, d, utility, reps, seed, pool, quality)
    return float(np.mean(v)), standard_error(v)


def equivalent_threshold(sigma: MixedParticipationStrategy, d: AbilityDistribution) -> float:
    """Threshold with the same participation probability as ``sigma``."""
    lam = min(max(sigma.participation_rate(d), 0.0), 1.0)
    return float(d.inverse_cdf(1.0 - lam))


@dataclass
class ThresholdSearch:
    a_hat: float
    value: float
    stderr: float
    table: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def optimal_threshold(n: int, d: AbilityDistribution, utility: DesignerUtility, grid: int = 101,
                      reps: int = DEFAULT_REPS, seed: int = 0, pool: Optional[NonstrategicPool] = None,
                      quality: Callable = _identity, tol: float = 1e-4) -> ThresholdSearch:
    """Grid sweep of E[V] over thresholds, then golden-section refinement
    inside the bracket around the best grid point.

    All thresholds share the same ability draws, so differences between
    thresholds carry no independent sampling noise.  Ties go to the smallest
    threshold.
    """
    if grid < 11:
        raise ContractError("grid must have at least 11 points")
    draws = _draws(n, d, reps, seed, pool)

    def ev(t):
        v = utility_samples(t, n, d, utility, pool=pool, quality=quality, draws=draws)
        return float(np.mean(v)), standard_error(v)

    xs = np.linspace(0.0, 1.0, grid)
    table = [(float(x), *ev(x)) for x in xs]
    means = np.array([row[1] for row in table])
    k = int(np.argmax(means))
    notes = []
    if np.sum(means == means[k]) > 1:
        notes.append("several grid thresholds tie for the maximum; smallest returned")
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, grid - 1)]
    best_x, best_v = float(xs[k]), means[k]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, e = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    fc, fe = ev(c)[0], ev(e)[0]
    while hi - lo > tol:
        if fc >= fe:
            hi, e, fe = e, c, fc
            c = hi - invphi * (hi - lo)
            fc = ev(c)[0]
        else:
            lo, c, fc = c, e, fe
            e = lo + invphi * (hi - lo)
            fe = ev(e)[0]
        for x, fx in ((c, fc), (e, fe)):
            if fx > best_v or (fx == best_v and x < best_x):
                best_x, best_v = float(x), fx
    mean, se = ev(best_x)
    return ThresholdSearch(best_x, mean, se, table, notes)


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------


@dataclass
class CalibrationResult:
    p_B: float
    p_C: float
    p_R: float
    target: float
    achieved: float
    residual: float
    iterations: int
    corner: str = "interior"

    @property
    def rewards(self) -> RewardScheme:
        return RewardScheme(self.p_B, self.p_C, self.p_R)

    def to_dict(self):
        return {"p_B": self.p_B, "p_C": self.p_C, "p_R": self.p_R, "target": self.target,
                "achieved": self.achieved, "residual": self.residual,
                "iterations": self.iterations, "corner": self.corner}


def _solve_scale(gap_at_zero: float, slope: float, what: str):
    """Bisection for the scale s > 0 with gap_at_zero - s * slope = 0."""
    if slope <= 0:
        raise InfeasibleError(f"{what}: expected points do not grow with the scale")
    if gap_at_zero <= 0:
        raise InfeasibleError(
            f"{what}: contributing is weakly preferred at every positive scale "
            "(the regime p_C - c_C >= p_R - c_R holds for all rewards), so the target "
            "threshold cannot be reached")

    def gap(s):
        return gap_at_zero - s * slope

    hi = 1.0
    while gap(hi) >= 0:
        hi *= 2.0
    s, _, it = bisect_decreasing(gap, 0.0, hi, gap_at_zero, gap(hi), max_iter=400, xtol=0.0)
    return s, it


def calibrate_rewards(a_hat: float, ratio: float, p_R: float, costs: CostModel, n: int,
                      d: AbilityDistribution, ranking: RankingModel,
                      pool: Optional[NonstrategicPool] = None, quality: Callable = _identity,
                      contribution_cost: Optional[float] = None,
                      mc: MCSettings = DEFAULT_MC) -> CalibrationResult:
    """Rewards ``p_C = s``, ``p_B = ratio * s`` whose symmetric equilibrium threshold is ``a_hat``.

    The indifference gap at the target threshold falls linearly in ``s``
    (the win probability does not depend on the rewards), so the scale is
    found by bisection on that gap and then checked by re-solving.
    """
    if not 0 <= a_hat <= 1:
        raise ContractError("target threshold must lie in [0, 1]")
    if not ratio > 1:
        raise ContractError("reward ratio p_B/p_C must exceed 1")
    cost = costs.c_C if contribution_cost is None else float(contribution_cost)
    win = win_probability(a_hat, a_hat, n, d, ranking, pool, quality, mc)
    rate = outside_value(p_R, costs.c_R) * prob_any_other_contribution(a_hat, n, d, pool)
    s, it = _solve_scale(rate + cost, 1.0 + (ratio - 1.0) * win, "reward calibration")
    rewards = RewardScheme(ratio * s, s, p_R)
    report = solve_general_threshold(BestContribution(rewards, ranking), p_R, costs.c_R, cost,
                                     n, d, pool, quality, mc)
    return CalibrationResult(rewards.p_B, rewards.p_C, p_R, a_hat, report.threshold,
                             abs(report.threshold - a_hat), it, report.corner)


def reward_schedule_vs_n(a_hat: float, ratio: float, p_R: float, costs: CostModel,
                         d: AbilityDistribution, ranking: RankingModel, n_range,
                         mc: MCSettings = DEFAULT_MC) -> list:
    """Calibrated ``(n, p_B, p_C, residual)`` rows for a threshold held fixed across n."""
    if not 0 < a_hat < 1:
        raise ContractError("the schedule needs an interior target threshold")
    rows = []
    for n in n_range:
        cal = calibrate_rewards(a_hat, ratio, p_R, costs, int(n), d, ranking, mc=mc)
        rows.append((int(n), cal.p_B, cal.p_C, cal.residual))
    return rows


@dataclass
class ScaleResult:
    k: float
    target: float
    achieved: float
    residual: float
    iterations: int

    def to_dict(self):
        return {"k": self.k, "target": self.target, "achieved": self.achieved,
                "residual": self.residual, "iterations": self.iterations}


def calibrate_general_scale(mech: GeneralMechanism, a_hat: float, p_R: float, costs: CostModel,
                            n: int, d: AbilityDistribution, pool: Optional[NonstrategicPool] = None,
                            quality: Callable = _identity, mc: MCSettings = DEFAULT_MC) -> ScaleResult:
    """Scale ``k`` such that paying ``k * p(q_i, q_-i, m)`` yields threshold ``a_hat``."""
    if not 0 < a_hat < 1:
        raise ContractError("scale calibration needs an interior target threshold")
    points = contribution_points(mech, a_hat, a_hat, n, d, pool, quality, mc)
    rate = outside_value(p_R, costs.c_R) * prob_any_other_contribution(a_hat, n, d, pool)
    k, it = _solve_scale(rate + costs.c_C, points, "scale calibration")
    report = solve_general_threshold(Scaled(mech, k), p_R, costs.c_R, costs.c_C, n, d, pool,
                                     quality, mc)
    return ScaleResult(k, a_hat, report.threshold, abs(report.threshold - a_hat), it)
