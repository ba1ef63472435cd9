"""Symmetric threshold equilibria in the homogeneous-effort model.

Agents contribute iff their ability is at least a common threshold ``a``.
At the threshold an agent must be indifferent between contributing and its
outside option; the indifference gap

    gap(a) = outside * Pr(C>0 | a) - (points(a) - cost)

is strictly decreasing in ``a`` so the equilibrium is either a corner or
the unique root, found by bisection.

Win probabilities for exact and beta-mixed rankings are closed form.  For
softmax rankings and quality-dependent mechanisms the expected points are
estimated by conditional Monte Carlo: the number of rival contributors is
summed exactly over its binomial law and only the qualities of present
rivals are sampled, from fixed uniforms that are reused at every candidate
threshold.  The estimate is therefore continuous and monotone in ``a``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import stats
from scipy.stats import qmc

from .distributions import AbilityDistribution
from .errors import ContractError
from .model import CostModel, NonstrategicPool, RewardScheme
from .ranking import (BestContribution, BetaMixture, GeneralMechanism, Perfect, RankingModel,
                      RankOrder, Scaled)
from .streams import substream

MAX_ITER = 200
RESIDUAL_TOL = 1e-9
MC_SAMPLES = 2 ** 14
MC_SEED = 0


@dataclass(frozen=True)
class MCSettings:
    """Sample budget for Monte Carlo estimated gaps (softmax, proportional)."""

    samples: int = MC_SAMPLES
    seed: int = MC_SEED


DEFAULT_MC = MCSettings()


@dataclass
class EquilibriumReport:
    threshold: float
    residual: float
    corner: str
    regime: str
    tie: bool = False
    iterations: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {"a_star": self.threshold, "residual": self.residual, "corner": self.corner,
                "regime": self.regime, "tie": self.tie, "iterations": self.iterations,
                "notes": list(self.notes)}


def _pool_count(pool: Optional[NonstrategicPool]) -> int:
    return 0 if pool is None else pool.count


def _identity(a):
    return a


def prob_any_other_contribution(a: float, n: int, d: AbilityDistribution,
                                pool: Optional[NonstrategicPool] = None) -> float:
    """Probability that at least one rival (or pool member) contributes."""
    if n < 2:
        raise ContractError("n must be at least 2")
    if _pool_count(pool) >= 1:
        return 1.0
    return 1.0 - d.cdf(a) ** (n - 1)


def _expected_inverse_count(n_rivals: int, p: float, extra: int) -> float:
    """E[1 / (M + 1 + extra)] for M ~ Binomial(n_rivals, p), by exact summation."""
    m = np.arange(n_rivals + 1)
    return float(np.sum(stats.binom.pmf(m, n_rivals, p) / (m + 1 + extra)))


@lru_cache(maxsize=64)
def _fixed_uniforms(samples: int, seed: int, stream: str, width: int) -> np.ndarray:
    # Scrambled Sobol points: deterministic, reused across thresholds.
    if width == 0:
        return np.empty((samples, 0))
    sobol = qmc.Sobol(d=width, scramble=True, seed=substream(seed, stream))
    u = sobol.random(samples)
    u.setflags(write=False)
    return u


def _conditional_points(mech: GeneralMechanism, a, a_star, n, d, pool, quality, mc: MCSettings):
    """Expected points of a contributor at ability ``a`` against rivals using ``a_star``."""
    n_rivals = n - 1
    k0 = _pool_count(pool)
    f_star = d.cdf(a_star)
    u = _fixed_uniforms(mc.samples, mc.seed, "rival-qualities", n_rivals)
    rival_abilities = d.inverse_cdf(np.clip(f_star + u * (1.0 - f_star), 0.0, 1.0))
    rival_q = quality(rival_abilities)
    if k0:
        v = _fixed_uniforms(mc.samples, mc.seed, "pool-qualities", k0)
        pool_q = pool.quality_dist.inverse_cdf(v)
    else:
        pool_q = np.empty((mc.samples, 0))
    q_self = np.full(mc.samples, float(quality(a)))
    weights = stats.binom.pmf(np.arange(n_rivals + 1), n_rivals, 1.0 - f_star)
    total = 0.0
    for m, w in enumerate(weights):
        if w == 0.0:
            continue
        others = np.concatenate([rival_q[:, :m], pool_q], axis=1)
        total += w * float(np.mean(mech.batch_points(q_self, others)))
    return total


def win_probability(a: float, a_star: float, n: int, d: AbilityDistribution,
                    ranking: RankingModel, pool: Optional[NonstrategicPool] = None,
                    quality: Callable = _identity, mc: MCSettings = DEFAULT_MC) -> float:
    """Probability that a contributor with ability ``a`` is picked as best when
    the other ``n - 1`` agents contribute iff their ability is at least ``a_star``.

    ``quality`` maps ability to contribution quality; it must be increasing.
    """
    for x in (a, a_star):
        if not 0 <= x <= 1:
            raise ContractError("abilities and thresholds must lie in [0, 1]")
    k0 = _pool_count(pool)
    if isinstance(ranking, (Perfect, BetaMixture)):
        beat_rivals = d.cdf(max(a, a_star)) ** (n - 1)
        beat_pool = pool.quality_dist.cdf(float(quality(a))) ** k0 if k0 else 1.0
        ordered = beat_rivals * beat_pool
        if isinstance(ranking, Perfect):
            return float(ordered)
        shuffled = _expected_inverse_count(n - 1, 1.0 - d.cdf(a_star), k0)
        return float(ranking.beta * ordered + (1.0 - ranking.beta) * shuffled)
    mech = BestContribution(RewardScheme(1.0, 0.0), ranking)
    return _conditional_points(mech, a, a_star, n, d, pool, quality, mc)


def _rank_order_points(mech: RankOrder, a, a_star, n, d, pool, quality):
    """Exact expected prize: rival ranks are independent Bernoulli events."""
    k0 = _pool_count(pool)
    n_rivals = n - 1
    prizes = np.zeros(n + k0)
    prizes[: len(mech.prizes.prizes)] = mech.prizes.prizes
    p_ahead = 1.0 - d.cdf(max(a, a_star))
    pmf = stats.binom.pmf(np.arange(n_rivals + 1), n_rivals, p_ahead)
    if k0:
        g = pool.quality_dist.cdf(float(quality(a)))
        pmf = np.convolve(pmf, stats.binom.pmf(np.arange(k0 + 1), k0, 1.0 - g))
    ordered = float(np.dot(pmf, prizes[: len(pmf)]))
    present = stats.binom.pmf(np.arange(n_rivals + 1), n_rivals, 1.0 - d.cdf(a_star))
    cum = np.cumsum(prizes)
    sizes = np.arange(n_rivals + 1) + 1 + k0
    shuffled = float(np.dot(present, cum[sizes - 1] / sizes))
    return mech.beta * ordered + (1.0 - mech.beta) * shuffled


def contribution_points(mech: GeneralMechanism, a: float, a_star: float, n: int,
                        d: AbilityDistribution, pool: Optional[NonstrategicPool] = None,
                        quality: Callable = _identity, mc: MCSettings = DEFAULT_MC) -> float:
    """Expected points from contributing at ability ``a`` against symmetric rivals."""
    if isinstance(mech, BestContribution):
        pi = win_probability(a, a_star, n, d, mech.ranking, pool, quality, mc)
        return mech.rewards.p_C + (mech.rewards.p_B - mech.rewards.p_C) * pi
    if isinstance(mech, RankOrder):
        return _rank_order_points(mech, a, a_star, n, d, pool, quality)
    if isinstance(mech, Scaled):
        return mech.k * contribution_points(mech.base, a, a_star, n, d, pool, quality, mc)
    return _conditional_points(mech, a, a_star, n, d, pool, quality, mc)


def outside_value(p_R: float, c_R: float) -> float:
    """Per-contest value of the best non-contributing action when content exists.

    Rating pays ``p_R - c_R`` when at least one contribution exists; abstaining
    pays 0, so the outside option is the larger of the two.
    """
    return max(p_R - c_R, 0.0)


def general_gap(mech: GeneralMechanism, a: float, p_R: float, c_R: float, contribution_cost: float,
                n: int, d: AbilityDistribution, pool: Optional[NonstrategicPool] = None,
                quality: Callable = _identity, mc: MCSettings = DEFAULT_MC) -> float:
    """Outside-option value minus contribution value at the threshold ability ``a``."""
    rate = outside_value(p_R, c_R) * prob_any_other_contribution(a, n, d, pool)
    contribute = contribution_points(mech, a, a, n, d, pool, quality, mc) - contribution_cost
    return rate - contribute


def utility_gap(a: float, rewards: RewardScheme, costs: CostModel, n: int, d: AbilityDistribution,
                ranking: RankingModel, pool: Optional[NonstrategicPool] = None,
                mc: MCSettings = DEFAULT_MC) -> float:
    """Indifference gap for the best-contribution mechanism."""
    mech = BestContribution(rewards, ranking)
    return general_gap(mech, a, rewards.p_R, costs.c_R, costs.c_C, n, d, pool, mc=mc)


def classify_regime(rewards: RewardScheme, costs: CostModel) -> str:
    outside = rewards.p_R - costs.c_R
    if rewards.p_C - costs.c_C > outside:
        return "contribute_dominant"
    if rewards.p_B - costs.c_C < 0:
        return "abstain_dominant"
    if rewards.p_C - costs.c_C < outside < rewards.p_B - costs.c_C:
        return "intermediate"
    return "boundary"


def bisect_decreasing(fn: Callable[[float], float], lo: float = 0.0, hi: float = 1.0,
                      f_lo: Optional[float] = None, f_hi: Optional[float] = None,
                      max_iter: int = MAX_ITER, xtol: float = 4e-16):
    """Root of a decreasing function with ``fn(lo) > 0 > fn(hi)``.

    Returns ``(x, |fn(x)|, iterations)``.
    """
    f_lo = fn(lo) if f_lo is None else f_lo
    f_hi = fn(hi) if f_hi is None else f_hi
    best = (lo, abs(f_lo)) if abs(f_lo) <= abs(f_hi) else (hi, abs(f_hi))
    it = 0
    while it < max_iter and hi - lo > xtol:
        it += 1
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = fn(mid)
        if abs(f_mid) < best[1]:
            best = (mid, abs(f_mid))
        if f_mid == 0.0:
            break
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
    return best[0], best[1], it


def solve_general_threshold(mech: GeneralMechanism, p_R: float, c_R: float, contribution_cost: float,
                            n: int, d: AbilityDistribution, pool: Optional[NonstrategicPool] = None,
                            quality: Callable = _identity, mc: MCSettings = DEFAULT_MC,
                            regime: str = "general") -> EquilibriumReport:
    """Unique symmetric threshold for any mechanism with monotone expected points."""
    def gap(a):
        return general_gap(mech, a, p_R, c_R, contribution_cost, n, d, pool, quality, mc)

    g0 = gap(0.0)
    if g0 <= 0:
        report = EquilibriumReport(0.0, 0.0, "all_contribute", regime, tie=bool(g0 == 0))
        if g0 == 0:
            report.notes.append("indifferent at ability 0; reported as all-contribute")
        return report
    g1 = gap(1.0)
    if g1 >= 0:
        report = EquilibriumReport(1.0, 0.0, "all_rate", regime, tie=bool(g1 == 0))
        if g1 == 0:
            report.notes.append("indifferent at ability 1; reported as all-rate")
        return report
    a, residual, it = bisect_decreasing(gap, 0.0, 1.0, g0, g1)
    return EquilibriumReport(float(a), float(residual), "interior", regime, iterations=it)


def solve_symmetric_threshold(rewards: RewardScheme, costs: CostModel, n: int, d: AbilityDistribution,
                              ranking: RankingModel, pool: Optional[NonstrategicPool] = None,
                              mc: MCSettings = DEFAULT_MC) -> EquilibriumReport:
    if not isinstance(rewards, RewardScheme):
        raise ContractError("solve_symmetric_threshold needs a RewardScheme")
    if not rewards.p_B > rewards.p_C:
        raise ContractError("need p_B > p_C")
    mech = BestContribution(rewards, ranking)
    return solve_general_threshold(mech, rewards.p_R, costs.c_R, costs.c_C, n, d, pool,
                                   mc=mc, regime=classify_regime(rewards, costs))
