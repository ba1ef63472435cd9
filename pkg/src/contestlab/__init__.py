"""Equilibrium solving, reward design and simulation for best-contribution contests."""
from .asymmetric import AsymmetricProfile, find_asymmetric_equilibrium, rank_order_contribution_payoff, rating_payoffs
from .config import ConfigError, load_scenario, scenario_from_dict, scenario_to_dict
from .design import (CalibrationResult, calibrate_general_scale, calibrate_rewards, equivalent_threshold,
                     expected_designer_utility, optimal_threshold, reward_schedule_vs_n)
from .distributions import AbilityDistribution, Beta, PiecewiseLinear, Uniform
from .effort import (EffortConditionReport, best_response_effort, calibrate_endogenous_rewards,
                     effort_condition_holds, optimal_endogenous_strategy, perfect_ranking_undermines_effort)
from .equilibrium import (EquilibriumReport, MCSettings, classify_regime, prob_any_other_contribution,
                          solve_general_threshold, solve_symmetric_threshold, utility_gap, win_probability)
from .errors import (ContestError, ContractError, DegenerateError, DomainError, InfeasibleError,
                     VerificationError)
from .learning import estimate_both_costs, estimate_contribution_cost, run_contest_series
from .model import (CobbDouglas, Contribute, CostModel, EffortCostFunction, EffortPolicy, Homogeneous,
                    LinearMix, MaxQuality, MixedParticipationStrategy, NonstrategicPool, NotParticipate,
                    RankPrizes, Rate, RewardScheme, ScenarioConfig, StrategyProfile, SumMinusSearchCost,
                    SumQuality, Tabulated, TopK)
from .ranking import (BestContribution, BetaMixture, Perfect, Proportional, RankOrder, Scaled,
                      SoftmaxNoise, validate_ranking_assumptions, winner_probabilities)
from .simulation import RegretReport, estimate_action_utility, simulate_contest, verify_equilibrium
from .streams import SimulationPlan

__version__ = "0.1.0"
