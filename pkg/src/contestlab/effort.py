"""Endogenous effort: best responses, the failure of effort incentives under
perfect ranking, the sufficient condition under softmax noise, and reward
calibration that implements the (threshold, full effort) profile."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .design import CalibrationResult, ThresholdSearch, calibrate_rewards, optimal_threshold
from .distributions import AbilityDistribution
from .equilibrium import DEFAULT_MC, MCSettings, outside_value
from .errors import ContractError, VerificationError
from .model import (Contribute, DesignerUtility, NonstrategicPool, QualityModel, RewardScheme,
                    ScenarioConfig, StrategyProfile)
from .ranking import Perfect, SoftmaxNoise, scenario_mechanism
from .simulation import (RegretReport, _action_samples, _rival_state, estimate_action_utility,
                         verify_equilibrium)
from .streams import SimulationPlan, standard_error

DEFAULT_EFFORT_GRID = 21


def _effort_grid(scenario: ScenarioConfig, effort_grid=None) -> np.ndarray:
    if effort_grid is not None:
        grid = np.asarray(effort_grid, dtype=float)
        if grid.size == 0 or np.any((grid < 0) | (grid > 1)):
            raise ContractError("effort grid must be a nonempty subset of [0, 1]")
        return grid
    return np.linspace(0.0, 1.0, DEFAULT_EFFORT_GRID)


def _require_endogenous(scenario: ScenarioConfig):
    if not scenario.endogenous:
        raise ContractError("scenario has no effort cost function")
    if not isinstance(scenario.rewards, RewardScheme):
        raise ContractError("effort analysis uses best-contribution rewards")


def optimal_endogenous_strategy(n: int, d: AbilityDistribution, quality: QualityModel,
                                utility: DesignerUtility, grid: int = 101, reps: int = 20_000,
                                seed: int = 0, pool: Optional[NonstrategicPool] = None):
    """Designer-optimal ``(threshold search, effort)``: effort is always 1."""
    search: ThresholdSearch = optimal_threshold(n, d, utility, grid=grid, reps=reps, seed=seed,
                                                pool=pool, quality=quality.at_full_effort)
    return search, 1.0


def best_response_effort(a: float, profile: StrategyProfile, scenario: ScenarioConfig,
                         effort_grid=None, plan: Optional[SimulationPlan] = None,
                         slot: int = 0) -> float:
    """Payoff-maximizing grid effort for a contributor at ability ``a``; smallest on ties."""
    _require_endogenous(scenario)
    if a < profile.thresholds[slot]:
        raise ContractError("ability is below the agent's threshold; it does not contribute")
    plan = plan or SimulationPlan(20_000, scenario.seed)
    state = _rival_state(slot, profile, scenario, plan)
    mech = scenario_mechanism(scenario)
    grid = _effort_grid(scenario, effort_grid)
    values = [float(np.mean(_action_samples(state, a, Contribute(float(e)), scenario, mech)))
              for e in grid]
    return float(grid[int(np.argmax(values))])


def effort_response_curve(abilities, profile: StrategyProfile, scenario: ScenarioConfig,
                          effort_grid=None, plan: Optional[SimulationPlan] = None) -> list:
    """Rows ``(a, best effort)`` for abilities at or above agent 0's threshold."""
    return [(float(a), best_response_effort(float(a), profile, scenario, effort_grid, plan))
            for a in abilities if a >= profile.thresholds[0]]


# ---------------------------------------------------------------------------
# perfect ranking
# ---------------------------------------------------------------------------


@dataclass
class DeviationReport:
    a_hat: float
    gain: float
    gain_mc: float
    stderr: float
    near_ability: float
    near_gain: float
    near_stderr: float
    witnessed: bool
    notes: list = field(default_factory=list)

    def to_dict(self):
        return dataclasses.asdict(self)


def perfect_ranking_undermines_effort(scenario: ScenarioConfig, a_hat: float,
                                      plan: Optional[SimulationPlan] = None,
                                      near: float = 0.01) -> DeviationReport:
    """Gain to the threshold agent from dropping effort 1 to 0 when everyone
    else plays ``(a_hat, effort 1)`` under perfect ranking.

    At the threshold the agent wins only when nobody else contributes,
    whatever its effort, so the gain is exactly ``c(1) - c(0)``.
    """
    _require_endogenous(scenario)
    if not isinstance(scenario.ranking, Perfect):
        raise ContractError("the impossibility check needs perfect ranking")
    if not 0 <= a_hat <= 1:
        raise ContractError("threshold must lie in [0, 1]")
    plan = plan or SimulationPlan(100_000, scenario.seed)
    profile = StrategyProfile.symmetric(scenario.n, a_hat, effort=1.0)
    state = _rival_state(0, profile, scenario, plan)
    mech = scenario_mechanism(scenario)

    def paired(a):
        diff = (_action_samples(state, a, Contribute(0.0), scenario, mech)
                - _action_samples(state, a, Contribute(1.0), scenario, mech))
        return float(np.mean(diff)), standard_error(diff)

    gain = float(scenario.effort_cost(1.0) - scenario.effort_cost(0.0))
    gain_mc, se = paired(a_hat)
    near_a = min(a_hat + near, 1.0)
    near_gain, near_se = paired(near_a)
    notes = []
    if gain <= 0:
        notes.append("flat effort cost: dropping effort saves nothing, so no deviation is witnessed")
    witnessed = gain > 0 and gain_mc > 3.0 * se
    return DeviationReport(a_hat, gain, gain_mc, se, near_a, near_gain, near_se, witnessed, notes)


# ---------------------------------------------------------------------------
# sufficient condition under softmax noise
# ---------------------------------------------------------------------------


@dataclass
class EffortConditionReport:
    holds: bool
    margin: float
    witness: dict
    p_B: float
    p_C: float
    notes: list = field(default_factory=list)

    def to_dict(self):
        return dataclasses.asdict(self)


def _min_win_spread(q_own: np.ndarray, q_lo: float, q_hi: float, n: int, eta: float) -> tuple:
    """Smallest pi(1 - pi) per own quality over m = 2..n and extreme rival profiles."""
    best = np.full(q_own.shape, np.inf)
    arg_m = np.zeros(q_own.shape, dtype=int)
    for m in range(2, n + 1):
        for k in range(m):
            # k rivals at the top quality, m - 1 - k at the bottom
            z = k * np.exp((q_hi - q_own) / eta) + (m - 1 - k) * np.exp((q_lo - q_own) / eta)
            pi = 1.0 / (1.0 + z)
            spread = pi * (1.0 - pi)
            better = spread < best
            best = np.where(better, spread, best)
            arg_m = np.where(better, m, arg_m)
    return best, arg_m


def effort_condition_holds(scenario: ScenarioConfig, a_hat: float, ratio: float, effort_grid=None,
                           ability_grid: int = 21, weak: bool = False) -> EffortConditionReport:
    """Conservative grid check that the marginal benefit of effort covers its
    marginal cost when ``p_B = c(0)`` (or ``c(0) + max(p_R - c_R, 0)`` if ``weak``)
    and ``p_C = p_B / ratio``."""
    _require_endogenous(scenario)
    if not 0 <= a_hat < 1:
        raise ContractError("threshold must lie in [0, 1)")
    if not ratio > 1:
        raise ContractError("reward ratio must exceed 1")
    c = scenario.effort_cost
    p_b = float(c(0.0))
    if weak:
        p_b += outside_value(scenario.p_R, scenario.costs.c_R)
    p_c = p_b / ratio
    e = _effort_grid(scenario, effort_grid)
    a = np.linspace(a_hat, 1.0, ability_grid)
    ee, aa = np.meshgrid(e, a, indexing="ij")
    q = scenario.quality
    notes = []
    participation = 1.0 - scenario.dist.cdf(a_hat) ** (scenario.n - 1)
    if isinstance(scenario.ranking, SoftmaxNoise):
        full = np.linspace(0.0, 1.0, 101)
        span = q(*np.meshgrid(full, full))
        spread, arg_m = _min_win_spread(q(aa, ee), float(span.min()), float(span.max()),
                                        scenario.n, scenario.ranking.eta)
        dpi = spread / scenario.ranking.eta
    else:
        dpi = np.zeros_like(aa)
        arg_m = np.full(aa.shape, 2)
        notes.append("win probability is locally flat in own quality under this ranking")
    rhs = q.d_effort(aa, ee) * dpi * (p_b - p_c) * participation
    slack = rhs - c.derivative(ee)
    i, j = np.unravel_index(int(np.argmin(slack)), slack.shape)
    margin = float(slack[i, j])
    witness = {"effort": float(ee[i, j]), "ability": float(aa[i, j]), "m": int(arg_m[i, j]),
               "rhs": float(rhs[i, j]), "marginal_cost": float(c.derivative(ee[i, j]))}
    return EffortConditionReport(margin >= 0, margin, witness, p_b, p_c, notes)


@dataclass
class EndogenousCalibration:
    calibration: CalibrationResult
    condition: EffortConditionReport
    verification: RegretReport
    notes: list = field(default_factory=list)

    def to_dict(self):
        out = {"calibration": self.calibration.to_dict(), "condition": self.condition.to_dict(),
               "verification": self.verification.to_dict(), "notes": list(self.notes)}
        out["verification"].pop("records")
        return out


def verification_abilities(a_hat: float, above: int = 21, below: int = 5) -> np.ndarray:
    low = np.linspace(0.0, a_hat, below, endpoint=False) if a_hat > 0 else np.empty(0)
    return np.concatenate([low, np.linspace(a_hat, 1.0, above)])


def calibrate_endogenous_rewards(a_hat: float, ratio: float, scenario: ScenarioConfig,
                                 plan: Optional[SimulationPlan] = None, effort_grid=None,
                                 weak: bool = False, mc: MCSettings = DEFAULT_MC) -> EndogenousCalibration:
    """Rewards implementing ``(a_hat, effort 1)`` under softmax noise, checked by simulation."""
    _require_endogenous(scenario)
    if not isinstance(scenario.ranking, SoftmaxNoise):
        raise ContractError("endogenous calibration needs softmax-noise ranking")
    condition = effort_condition_holds(scenario, a_hat, ratio, effort_grid, weak=weak)
    if not condition.holds:
        raise ContractError(f"effort condition fails (margin {condition.margin:.6g} at "
                            f"effort {condition.witness['effort']:g}, ability {condition.witness['ability']:g})")
    cal = calibrate_rewards(a_hat, ratio, scenario.p_R, scenario.costs, scenario.n, scenario.dist,
                            scenario.ranking, scenario.pool, scenario.quality.at_full_effort,
                            contribution_cost=float(scenario.effort_cost(1.0)), mc=mc)
    calibrated = dataclasses.replace(scenario, rewards=cal.rewards)
    profile = StrategyProfile.symmetric(scenario.n, a_hat, effort=1.0)
    report = verify_equilibrium(profile, calibrated, verification_abilities(a_hat),
                                _effort_grid(scenario, effort_grid), plan=plan)
    if not report.verified:
        w = report.witness
        raise VerificationError(f"calibrated profile has regret {w.regret:.4g} at ability {w.ability:g} "
                                f"(best alternative {w.best_alternative})", report)
    notes = []
    if not cal.p_B > float(scenario.effort_cost(0.0)):
        notes.append("calibrated p_B does not exceed c(0)")
    return EndogenousCalibration(cal, condition, report, notes)


def estimate_effort_payoff(a: float, effort: float, profile: StrategyProfile, scenario: ScenarioConfig,
                           plan: Optional[SimulationPlan] = None):
    """(mean, stderr) payoff of contributing with ``effort`` at ability ``a``."""
    plan = plan or SimulationPlan(20_000, scenario.seed)
    return estimate_action_utility(0, a, Contribute(effort), profile, scenario, plan)
