"""Asymmetric equilibria of rank-order mechanisms with beta-accurate ranking.

Agent 1 (index 0) always contributes; agents 2..n share a threshold ``a*``
at which they are indifferent between contributing and rating.  Payoffs are
computed exactly: given the thresholds, each rival independently is absent,
present and ranked behind, or present and ranked ahead, so rank
distributions are convolutions of binomials.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .distributions import AbilityDistribution
from .equilibrium import bisect_decreasing, contribution_points, outside_value
from .errors import ContractError, VerificationError
from .model import CostModel, EffortPolicy, RankPrizes, StrategyProfile
from .ranking import RankOrder


@dataclass
class AsymmetricProfile:
    a_star: float
    residual: float
    agent1_contribute: float
    agent1_rate: float
    others_rate: float
    corner: str = "interior"
    notes: list = field(default_factory=list)

    @property
    def agent1_margin(self) -> float:
        return self.agent1_contribute - max(self.agent1_rate, 0.0)

    def strategy_profile(self, n: int) -> StrategyProfile:
        policy = EffortPolicy.constant(0.0)
        return StrategyProfile((0.0,) + (self.a_star,) * (n - 1), (policy,) * n)

    def to_dict(self):
        return {"a_star": self.a_star, "residual": self.residual, "corner": self.corner,
                "agent1_contribute": self.agent1_contribute, "agent1_rate": self.agent1_rate,
                "others_rate": self.others_rate, "agent1_margin": self.agent1_margin,
                "notes": list(self.notes)}


def rating_payoffs(a_star: float, n: int, d: AbilityDistribution, p_R: float, c_R: float):
    """Rating payoffs ``(agent 1, agents 2..n)`` under thresholds ``(0, a*, ..., a*)``.

    Agent 1 only finds content when some other agent contributes; everyone
    else always has agent 1's contribution to rate.
    """
    if not 0 <= a_star <= 1:
        raise ContractError("threshold must lie in [0, 1]")
    net = p_R - c_R
    return float((1.0 - d.cdf(a_star)) ** (n - 1) * net), float(net)


def _prize_table(prizes: RankPrizes, width: int) -> np.ndarray:
    table = np.zeros(width)
    k = min(width, len(prizes.prizes))
    table[:k] = prizes.prizes[:k]
    return table


def rank_order_contribution_payoff(agent_index: int, a: float, a_star: float, prizes: RankPrizes,
                                   beta: float, n: int, d: AbilityDistribution, c_C: float) -> float:
    """Expected prize minus cost for contributing at ability ``a`` under
    thresholds ``(0, a*, ..., a*)``."""
    if not 0 <= a <= 1:
        raise ContractError("ability must lie in [0, 1]")
    table = _prize_table(prizes, n)
    cum = np.concatenate([[0.0], np.cumsum(table)])
    f_star = d.cdf(a_star)
    f_beat = d.cdf(max(a, a_star))
    if agent_index == 0:
        ahead = stats.binom.pmf(np.arange(n), n - 1, 1.0 - f_beat)
        present = stats.binom.pmf(np.arange(n), n - 1, 1.0 - f_star)
        sizes = 1 + np.arange(n)
    else:
        # agent 1 is always present and ahead iff its ability exceeds a
        leader = np.array([d.cdf(a), 1.0 - d.cdf(a)])
        ahead = np.convolve(leader, stats.binom.pmf(np.arange(n - 1), n - 2, 1.0 - f_beat))
        present = stats.binom.pmf(np.arange(n - 1), n - 2, 1.0 - f_star)
        sizes = 2 + np.arange(n - 1)
    ordered = float(np.dot(ahead, table[: len(ahead)]))
    shuffled = float(np.dot(present, cum[sizes] / sizes))
    return beta * ordered + (1.0 - beta) * shuffled - c_C


def trivial_equilibria(prizes: RankPrizes, beta: float, costs: CostModel, p_R: float, n: int,
                       d: AbilityDistribution) -> list:
    """Names of the symmetric corner profiles that are equilibria of the rank-order game."""
    found = []
    if prizes.prizes[0] - costs.c_C <= 0:
        found.append("all agents rate")
    worst = contribution_points(RankOrder(prizes, beta), 0.0, 0.0, n, d) - costs.c_C
    if worst >= outside_value(p_R, costs.c_R):
        found.append("all agents contribute")
    return found


def find_asymmetric_equilibrium(prizes: RankPrizes, beta: float, costs: CostModel, p_R: float, n: int,
                                d: AbilityDistribution) -> AsymmetricProfile:
    """Construct the equilibrium where agent 1 always contributes."""
    if len(prizes.prizes) != n:
        raise ContractError("prize list must have length n")
    trivial = trivial_equilibria(prizes, beta, costs, p_R, n, d)
    if trivial:
        raise ContractError("construction needs neither corner to be an equilibrium, but "
                            + " and ".join(trivial) + " is an equilibrium")
    outside = outside_value(p_R, costs.c_R)

    def w_gap(t):
        return outside - rank_order_contribution_payoff(1, t, t, prizes, beta, n, d, costs.c_C)

    w0, w1 = w_gap(0.0), w_gap(1.0)
    notes = []
    if w1 >= 0:
        a_star, residual, corner = 1.0, 0.0, "others_never_contribute"
        notes.append("agents 2..n weakly prefer rating even when only agent 1 contributes")
    else:
        a_star, residual, _ = bisect_decreasing(w_gap, 0.0, 1.0, w0, w1)
        corner = "interior"
    u1_rate, ui_rate = rating_payoffs(a_star, n, d, p_R, costs.c_R)
    profile = AsymmetricProfile(float(a_star), float(residual),
                                rank_order_contribution_payoff(0, 0.0, a_star, prizes, beta, n, d, costs.c_C),
                                u1_rate, ui_rate, corner, notes)
    for a in np.linspace(0.0, 1.0, 11):
        u = rank_order_contribution_payoff(0, float(a), a_star, prizes, beta, n, d, costs.c_C)
        if u < max(u1_rate, 0.0) - 1e-12:
            raise VerificationError(f"agent 1 prefers not to contribute at ability {a:g}")
    if profile.agent1_margin <= 1e-12:
        profile.notes.append("agent 1 is only weakly willing to contribute at ability 0")
    return profile
