"""Seeded contest simulation and best-response regret verification.

This module is the independent check on every closed form elsewhere in the
package: it draws abilities, applies the strategy profile, and either
samples winners from the ranking's generative story or averages exact
expected points over simulated rival qualities.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distributions import AbilityDistribution
from .model import (AgentRecord, Contribute, ContestOutcome, NotParticipate, Rate, RankPrizes,
                    ScenarioConfig, StrategyProfile, action_name)
from .ranking import (BestContribution, BetaMixture, GeneralMechanism, Perfect, RankingModel,
                      RankOrder, SoftmaxNoise, scenario_mechanism)
from .streams import SimulationPlan, standard_error

DEFAULT_TOLERANCE = 3.0


def outside_action(scenario: ScenarioConfig):
    """Action prescribed to agents below their threshold."""
    return Rate() if scenario.p_R >= scenario.costs.c_R else NotParticipate()


def _contributes(profile: StrategyProfile, i: int, a: float) -> bool:
    return a >= profile.thresholds[i]


# ---------------------------------------------------------------------------
# single contests
# ---------------------------------------------------------------------------


def _rank_points(prizes: RankPrizes, beta: float, qualities, rng) -> np.ndarray:
    q = np.asarray(qualities, dtype=float)
    m = len(q)
    if rng.random() < beta:
        order = np.lexsort((rng.random(m), -q))
    else:
        order = rng.permutation(m)
    table = np.zeros(m)
    k = min(m, len(prizes.prizes))
    table[:k] = prizes.prizes[:k]
    points = np.empty(m)
    points[order] = table
    return points


def _award(mech: GeneralMechanism, qualities, rng):
    """Sampled points for each contributor and the winner index (if defined)."""
    q = np.asarray(qualities, dtype=float)
    if isinstance(mech, BestContribution):
        w = mech.ranking.sample_winner(q, rng)
        points = np.full(len(q), mech.rewards.p_C)
        points[w] = mech.rewards.p_B
        return points, w
    if isinstance(mech, RankOrder):
        points = _rank_points(mech.prizes, mech.beta, q, rng)
        return points, int(np.argmax(points))
    points = np.array([mech.batch_points(q[i:i + 1], np.delete(q, i)[None, :])[0]
                       for i in range(len(q))])
    return points, None


def simulate_contest(profile: StrategyProfile, scenario: ScenarioConfig,
                     rng: np.random.Generator) -> ContestOutcome:
    """Play one contest: draw abilities, act, rank, pay."""
    if profile.n != scenario.n:
        raise ValueError("profile arity does not match the scenario")
    abilities = scenario.dist.sample(rng, scenario.n)
    pool = scenario.pool
    pool_q = pool.quality_dist.sample(rng, pool.count) if pool is not None and pool.count else []
    fallback = outside_action(scenario)
    actions, quals = [], []
    for i, a in enumerate(abilities):
        if _contributes(profile, i, a):
            e = float(profile.efforts[i](a)) if scenario.endogenous else 0.0
            actions.append(Contribute(e))
            quals.append(float(scenario.quality(a, e)))
        else:
            actions.append(fallback)
            quals.append(None)
    contributors = [i for i, q in enumerate(quals) if q is not None]
    all_q = [quals[i] for i in contributors] + [float(x) for x in pool_q]
    m = len(all_q)
    points = np.zeros(scenario.n + len(pool_q))
    winner = None
    if m:
        awarded, w = _award(scenario_mechanism(scenario), all_q, rng)
        slots = contributors + list(range(scenario.n, scenario.n + len(pool_q)))
        points[slots] = awarded
        winner = None if w is None else slots[w]
    records = []
    for i, action in enumerate(actions):
        if isinstance(action, Rate):
            points[i] = scenario.p_R if m else 0.0
            payoff = points[i] - scenario.costs.c_R
        elif isinstance(action, NotParticipate):
            payoff = 0.0
        else:
            payoff = points[i] - float(scenario.contribution_cost(action.effort))
        records.append(AgentRecord(action, float(abilities[i]), quals[i], float(points[i]), float(payoff)))
    for j, q in enumerate(pool_q):
        pts = float(points[scenario.n + j])
        records.append(AgentRecord(Contribute(), None, float(q), pts, pts, nonstrategic=True))
    ordered = tuple(sorted(all_q, reverse=True))
    return ContestOutcome(tuple(records), m, ordered, winner)


def participation_counts(profile: StrategyProfile, scenario: ScenarioConfig,
                         plan: SimulationPlan) -> np.ndarray:
    """Number of strategic contributors in each of ``plan.reps`` independent contests."""
    a = scenario.dist.inverse_cdf(plan.uniforms("contest-abilities", scenario.n))
    return np.sum(a >= np.asarray(profile.thresholds)[None, :], axis=1)


def simulate_win_frequency(a: float, a_star: float, n: int, d: AbilityDistribution,
                           ranking: RankingModel, plan: SimulationPlan):
    """Frequency with which a contributor at ability ``a`` is drawn as winner
    against rivals using threshold ``a_star``; winners are sampled, not averaged.
    """
    reps = plan.reps
    rivals = d.inverse_cdf(plan.uniforms("winner-rivals", n - 1))
    present = rivals >= a_star
    if isinstance(ranking, SoftmaxNoise):
        g = plan.generator("winner-gumbel").gumbel(size=(reps, n))
        own = a / ranking.eta + g[:, 0]
        other = np.where(present, rivals / ranking.eta + g[:, 1:], -np.inf)
        wins = own > other.max(axis=1, initial=-np.inf)
    else:
        beta = 1.0 if isinstance(ranking, Perfect) else ranking.beta
        ordered = ~np.any(present & (rivals > a), axis=1)
        coin = plan.uniforms("winner-coin", 2)
        m = 1 + present.sum(axis=1)
        pick = np.floor(coin[:, 1] * m).astype(int)
        wins = np.where(coin[:, 0] < beta, ordered, pick == 0)
    wins = wins.astype(float)
    return float(np.mean(wins)), standard_error(wins)


# ---------------------------------------------------------------------------
# action utilities
# ---------------------------------------------------------------------------


@dataclass
class _RivalState:
    others: np.ndarray      # (reps, n - 1 + pool) qualities, NaN when absent
    content: np.ndarray     # bool (reps,), at least one rival contribution


def _rival_state(slot: int, profile: StrategyProfile, scenario: ScenarioConfig,
                 plan: SimulationPlan) -> _RivalState:
    n = scenario.n
    a = scenario.dist.inverse_cdf(plan.uniforms("abilities", n))
    cols = []
    for j in range(n):
        if j == slot:
            continue
        aj = a[:, j]
        present = aj >= profile.thresholds[j]
        e = profile.efforts[j](aj) if scenario.endogenous else np.zeros_like(aj)
        cols.append(np.where(present, scenario.quality(aj, e), np.nan))
    pool = scenario.pool
    if pool is not None and pool.count:
        pool_q = pool.quality_dist.inverse_cdf(plan.uniforms("pool", pool.count))
        cols.extend(pool_q.T)
    others = np.column_stack(cols) if cols else np.empty((plan.reps, 0))
    return _RivalState(others, np.any(~np.isnan(others), axis=1))


def _action_samples(state: _RivalState, ability: float, action, scenario: ScenarioConfig,
                    mech: GeneralMechanism) -> np.ndarray:
    reps = len(state.content)
    if isinstance(action, NotParticipate):
        return np.zeros(reps)
    if isinstance(action, Rate):
        return (scenario.p_R - scenario.costs.c_R) * state.content
    e = action.effort if scenario.endogenous else 0.0
    q_self = np.full(reps, float(scenario.quality(ability, e)))
    return mech.batch_points(q_self, state.others) - float(scenario.contribution_cost(e))


def estimate_action_utility(slot: int, ability: float, action, profile: StrategyProfile,
                            scenario: ScenarioConfig, plan: SimulationPlan):
    """(mean, standard error) payoff of ``action`` for agent ``slot`` at ``ability``
    when everybody else follows ``profile``.  Rival draws depend only on the
    plan, so different actions are compared on common random numbers."""
    state = _rival_state(slot, profile, scenario, plan)
    x = _action_samples(state, ability, action, scenario, scenario_mechanism(scenario))
    return float(np.mean(x)), standard_error(x)


# ---------------------------------------------------------------------------
# regret verification
# ---------------------------------------------------------------------------


@dataclass
class RegretRecord:
    agent: int
    ability: float
    prescribed: str
    best_alternative: str
    regret: float
    stderr: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class RegretReport:
    records: list = field(default_factory=list)
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def max_record(self) -> Optional[RegretRecord]:
        return max(self.records, key=lambda r: r.regret) if self.records else None

    @property
    def max_regret(self) -> float:
        rec = self.max_record
        return rec.regret if rec else 0.0

    def violations(self) -> list:
        return [r for r in self.records if r.regret > self.tolerance * r.stderr + 1e-12]

    @property
    def verified(self) -> bool:
        return not self.violations()

    @property
    def witness(self) -> Optional[RegretRecord]:
        bad = self.violations()
        if not bad:
            return None
        return max(bad, key=lambda r: r.regret - self.tolerance * r.stderr)

    def to_dict(self):
        w = self.witness
        return {"verified": self.verified, "max_regret": self.max_regret,
                "tolerance_stderr": self.tolerance,
                "witness": None if w is None else w.to_dict(),
                "records": [r.to_dict() for r in self.records]}


def _roles(profile: StrategyProfile, agents: Optional[Sequence[int]]):
    if agents is not None:
        return list(agents)
    seen, roles = set(), []
    for i, (t, pol) in enumerate(zip(profile.thresholds, profile.efforts)):
        if (t, pol) not in seen:
            seen.add((t, pol))
            roles.append(i)
    return roles


def verify_equilibrium(profile: StrategyProfile, scenario: ScenarioConfig, ability_grid,
                       effort_grid=None, plan: Optional[SimulationPlan] = None,
                       tolerance: float = DEFAULT_TOLERANCE,
                       agents: Optional[Sequence[int]] = None) -> RegretReport:
    """Best-response check of ``profile`` on a grid of abilities.

    For each agent role and grid ability, the prescribed action's payoff is
    compared with rating, abstaining and contributing at every grid effort,
    all on common random numbers.  Regret is best-alternative minus
    prescribed; a point passes when regret <= tolerance * stderr of the
    paired difference.
    """
    ability_grid = list(ability_grid)
    if not ability_grid:
        raise ValueError("ability grid is empty")
    plan = plan or SimulationPlan(100_000, scenario.seed)
    if scenario.endogenous:
        efforts = list(effort_grid) if effort_grid is not None else list(np.linspace(0, 1, 21))
        if not efforts:
            raise ValueError("effort grid is empty")
    else:
        efforts = [0.0]
    mech = scenario_mechanism(scenario)
    fallback = outside_action(scenario)
    report = RegretReport(tolerance=tolerance)
    for slot in _roles(profile, agents):
        state = _rival_state(slot, profile, scenario, plan)
        policy = profile.efforts[slot]
        for a in ability_grid:
            a = float(a)
            if a >= profile.thresholds[slot]:
                prescribed = Contribute(float(policy(a)) if scenario.endogenous else 0.0)
            else:
                prescribed = fallback
            base = _action_samples(state, a, prescribed, scenario, mech)
            alternatives = [Rate(), NotParticipate()] + [Contribute(float(e)) for e in efforts]
            best = None
            for alt in alternatives:
                if alt == prescribed:
                    continue
                diff = _action_samples(state, a, alt, scenario, mech) - base
                mean = float(np.mean(diff))
                if best is None or mean > best[1]:
                    best = (alt, mean, standard_error(diff))
            report.records.append(RegretRecord(slot, a, action_name(prescribed),
                                               action_name(best[0]), best[1], best[2]))
    return report
