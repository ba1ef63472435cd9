"""Shared vocabulary: rewards, costs, actions, quality and designer-utility
models, strategy profiles, contest outcomes and the scenario bundle."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional, Union

import numpy as np

from .distributions import AbilityDistribution, Uniform
from .errors import ContractError

if TYPE_CHECKING:
    from .ranking import RankingModel


# ---------------------------------------------------------------------------
# rewards and costs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RewardScheme:
    """Points for the winner, for other contributors and for raters."""

    p_B: float
    p_C: float = 0.0
    p_R: float = 0.0

    def __post_init__(self):
        if self.p_C < 0 or self.p_R < 0:
            raise ContractError("rewards must be nonnegative")
        if not self.p_B > self.p_C:
            raise ContractError(f"need p_B > p_C, got p_B={self.p_B}, p_C={self.p_C}")


@dataclass(frozen=True)
class RankPrizes:
    """Rank-order prizes ``p_1 >= p_2 >= ... >= p_n`` plus the rating reward."""

    prizes: tuple
    p_R: float = 0.0

    def __post_init__(self):
        prizes = tuple(float(p) for p in self.prizes)
        if not prizes:
            raise ContractError("prize list is empty")
        diffs = np.diff(prizes)
        if prizes[-1] < 0 or np.any(diffs > 0):
            raise ContractError("prizes must be nonincreasing and nonnegative")
        if len(prizes) > 1 and not np.any(diffs < 0):
            raise ContractError("at least one consecutive prize gap must be strict")
        if self.p_R < 0:
            raise ContractError("p_R must be nonnegative")
        object.__setattr__(self, "prizes", prizes)


@dataclass(frozen=True)
class CostModel:
    c_C: float
    c_R: float = 0.0
    c_bar: Optional[float] = None

    def __post_init__(self):
        if self.c_C < 0 or self.c_R < 0:
            raise ContractError("costs must be nonnegative")
        if self.c_bar is not None and not (0 < self.c_C < self.c_bar):
            raise ContractError("learning experiments need 0 < c_C < c_bar")


@dataclass(frozen=True)
class EffortCostFunction:
    """``c(e) = c0 + kappa * e**p_exp`` on [0, 1]."""

    c0: float
    kappa: float
    p_exp: float = 1.0

    def __post_init__(self):
        if self.c0 < 0 or self.kappa < 0 or self.p_exp < 1:
            raise ContractError("need c0 >= 0, kappa >= 0 and p_exp >= 1")

    def __call__(self, e):
        return self.c0 + self.kappa * np.power(e, self.p_exp)

    def derivative(self, e):
        if self.p_exp == 1.0:
            return self.kappa + 0.0 * np.asarray(e, dtype=float)
        return self.kappa * self.p_exp * np.power(e, self.p_exp - 1.0)


# ---------------------------------------------------------------------------
# quality models
# ---------------------------------------------------------------------------


class QualityModel:
    """Maps (ability, effort) to a contribution quality in [0, 1]."""

    effort_range = (0.0, 1.0)

    def __call__(self, a, e):
        raise NotImplementedError

    def d_effort(self, a, e):
        raise NotImplementedError

    def at_full_effort(self, a):
        return self(a, 1.0)


@dataclass(frozen=True)
class Homogeneous(QualityModel):
    def __call__(self, a, e=0.0):
        return np.asarray(a, dtype=float) + 0.0 * np.asarray(e, dtype=float)

    def d_effort(self, a, e):
        return 0.0 * (np.asarray(a, dtype=float) + np.asarray(e, dtype=float))


@dataclass(frozen=True)
class LinearMix(QualityModel):
    """``q = gamma * a + (1 - gamma) * e``."""

    gamma: float

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ContractError("LinearMix gamma must lie in (0, 1]")

    def __call__(self, a, e):
        return self.gamma * np.asarray(a, dtype=float) + (1.0 - self.gamma) * np.asarray(e, dtype=float)

    def d_effort(self, a, e):
        return (1.0 - self.gamma) + 0.0 * (np.asarray(a, dtype=float) + np.asarray(e, dtype=float))


@dataclass(frozen=True)
class CobbDouglas(QualityModel):
    """``q = a**theta * e**(1 - theta)`` with effort clamped to ``[e_min, 1]``."""

    theta: float
    e_min: float = 0.05

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ContractError("CobbDouglas theta must lie in (0, 1)")
        if not 0 < self.e_min <= 1:
            raise ContractError("e_min must lie in (0, 1]")

    @property
    def effort_range(self):
        return (self.e_min, 1.0)

    def __call__(self, a, e):
        e = np.clip(e, self.e_min, 1.0)
        return np.power(a, self.theta) * np.power(e, 1.0 - self.theta)

    def d_effort(self, a, e):
        e = np.asarray(e, dtype=float)
        ec = np.clip(e, self.e_min, 1.0)
        slope = (1.0 - self.theta) * np.power(a, self.theta) * np.power(ec, -self.theta)
        return np.where(e < self.e_min, 0.0, slope)


# ---------------------------------------------------------------------------
# designer utilities
# ---------------------------------------------------------------------------


def _check_sorted(m, qualities):
    q = np.asarray(qualities, dtype=float)
    if q.ndim != 1 or len(q) != m:
        raise ContractError(f"expected {m} qualities, got {len(q)}")
    if np.any(np.diff(q) > 0):
        raise ContractError("qualities must be sorted nonincreasing")
    return q


class DesignerUtility:
    """``V(m, q^1, ..., q^m)``; :meth:`batch` takes rows sorted descending, NaN-padded."""

    def __call__(self, m: int, qualities) -> float:
        q = _check_sorted(m, qualities)
        row = np.full((1, max(m, 1)), np.nan)
        row[0, :m] = q
        return float(self.batch(row)[0])

    def batch(self, sorted_q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class MaxQuality(DesignerUtility):
    def batch(self, sorted_q):
        return np.nan_to_num(sorted_q[:, 0], nan=0.0)

    def to_dict(self):
        return {"kind": "max"}


@dataclass(frozen=True)
class SumQuality(DesignerUtility):
    def batch(self, sorted_q):
        return np.nansum(sorted_q, axis=1)

    def to_dict(self):
        return {"kind": "sum"}


@dataclass(frozen=True)
class TopK(DesignerUtility):
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ContractError("TopK needs k >= 1")

    def batch(self, sorted_q):
        return np.nansum(sorted_q[:, : self.k], axis=1)

    def to_dict(self):
        return {"kind": "top_k", "k": self.k}


@dataclass(frozen=True)
class SumMinusSearchCost(DesignerUtility):
    """Total quality minus ``gamma_search`` per received contribution."""

    gamma_search: float

    def __post_init__(self):
        if self.gamma_search < 0:
            raise ContractError("search cost must be nonnegative")

    def batch(self, sorted_q):
        m = np.sum(~np.isnan(sorted_q), axis=1)
        return np.nansum(sorted_q, axis=1) - self.gamma_search * m

    def to_dict(self):
        return {"kind": "search_cost", "gamma": self.gamma_search}


@dataclass(frozen=True)
class Tabulated(DesignerUtility):
    """Caller-supplied ``fn(m, qualities_tuple) -> float``."""

    fn: Callable

    def batch(self, sorted_q):
        out = np.empty(len(sorted_q))
        for i, row in enumerate(sorted_q):
            q = row[~np.isnan(row)]
            out[i] = self.fn(len(q), tuple(q))
        return out

    def to_dict(self):
        raise ContractError("tabulated utilities cannot be serialized")


def evaluate_designer_utility(utility: DesignerUtility, m: int, qualities) -> float:
    return utility(m, qualities)


# ---------------------------------------------------------------------------
# actions and payoffs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Contribute:
    effort: float = 0.0

    def __post_init__(self):
        if not 0 <= self.effort <= 1:
            raise ContractError("effort must lie in [0, 1]")


@dataclass(frozen=True)
class Rate:
    pass


@dataclass(frozen=True)
class NotParticipate:
    pass


Action = Union[Contribute, Rate, NotParticipate]


def action_name(action) -> str:
    if isinstance(action, Contribute):
        return f"contribute(e={action.effort:g})"
    return "rate" if isinstance(action, Rate) else "not_participate"


def realized_payoff(action, points: float, costs: CostModel,
                    effort_cost: Optional[EffortCostFunction] = None) -> float:
    if points < 0:
        raise ContractError("points must be nonnegative")
    if isinstance(action, NotParticipate):
        return 0.0
    if isinstance(action, Rate):
        return points - costs.c_R
    if effort_cost is None:
        return points - costs.c_C
    return points - float(effort_cost(action.effort))


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EffortPolicy:
    """Piecewise-constant effort ``e(a)``: ``values[k]`` applies on ``[grid[k], grid[k+1])``."""

    grid: tuple
    values: tuple

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        values = tuple(float(v) for v in self.values)
        if len(grid) != len(values) or not grid:
            raise ContractError("policy grid and values must have equal nonzero length")
        if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise ContractError("policy grid must start at 0 and increase strictly")
        if min(values) < 0 or max(values) > 1:
            raise ContractError("efforts must lie in [0, 1]")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, effort: float, points: int = 101) -> "EffortPolicy":
        return cls(tuple(np.linspace(0.0, 1.0, points)), (effort,) * points)

    def __call__(self, a):
        idx = np.searchsorted(self.grid, a, side="right") - 1
        out = np.asarray(self.values)[np.clip(idx, 0, len(self.values) - 1)]
        return float(out) if np.ndim(a) == 0 else out


@dataclass(frozen=True)
class StrategyProfile:
    """Per-agent participation thresholds and effort policies."""

    thresholds: tuple
    efforts: tuple

    def __post_init__(self):
        thresholds = tuple(float(t) for t in self.thresholds)
        if len(thresholds) != len(self.efforts):
            raise ContractError("one effort policy per agent is required")
        if any(not 0 <= t <= 1 for t in thresholds):
            raise ContractError("thresholds must lie in [0, 1]")
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "efforts", tuple(self.efforts))

    @classmethod
    def symmetric(cls, n: int, threshold: float, effort: float = 0.0) -> "StrategyProfile":
        policy = EffortPolicy.constant(effort)
        return cls((threshold,) * n, (policy,) * n)

    @property
    def n(self) -> int:
        return len(self.thresholds)

    @property
    def is_symmetric(self) -> bool:
        return len(set(self.thresholds)) == 1 and len(set(self.efforts)) == 1


@dataclass(frozen=True)
class MixedParticipationStrategy:
    """Contribution probability ``sigma(a)``, constant on each bin ``[edges[k], edges[k+1])``."""

    edges: tuple
    probs: tuple

    def __post_init__(self):
        edges = tuple(float(x) for x in self.edges)
        probs = tuple(float(p) for p in self.probs)
        if len(edges) != len(probs) + 1 or edges[0] != 0.0 or edges[-1] != 1.0:
            raise ContractError("edges must span [0, 1] with one more entry than probs")
        if np.any(np.diff(edges) <= 0):
            raise ContractError("edges must increase strictly")
        if min(probs) < 0 or max(probs) > 1:
            raise ContractError("participation probabilities must lie in [0, 1]")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "probs", probs)

    def __call__(self, a):
        idx = np.clip(np.searchsorted(self.edges, a, side="right") - 1, 0, len(self.probs) - 1)
        out = np.asarray(self.probs)[idx]
        return float(out) if np.ndim(a) == 0 else out

    def participation_rate(self, dist: AbilityDistribution) -> float:
        mass = np.diff(dist.cdf(np.asarray(self.edges)))
        return float(np.dot(mass, self.probs))


@dataclass(frozen=True)
class NonstrategicPool:
    count: int
    quality_dist: AbilityDistribution = field(default_factory=Uniform)

    def __post_init__(self):
        if self.count < 0:
            raise ContractError("pool count must be nonnegative")


# ---------------------------------------------------------------------------
# outcomes and scenario
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AgentRecord:
    action: object
    ability: Optional[float]
    quality: Optional[float]
    points: float
    payoff: float
    nonstrategic: bool = False


@dataclass(frozen=True)
class ContestOutcome:
    records: tuple
    m: int
    qualities: tuple
    winner: Optional[int]

    @property
    def total_points(self) -> float:
        return sum(r.points for r in self.records)

    @property
    def raters(self) -> int:
        return sum(isinstance(r.action, Rate) for r in self.records)


@dataclass(frozen=True)
class ScenarioConfig:
    """One complete contest scenario."""

    n: int
    dist: AbilityDistribution
    rewards: Union[RewardScheme, RankPrizes]
    costs: CostModel
    ranking: "RankingModel"
    utility: DesignerUtility = field(default_factory=MaxQuality)
    quality: QualityModel = field(default_factory=Homogeneous)
    effort_cost: Optional[EffortCostFunction] = None
    pool: Optional[NonstrategicPool] = None
    mechanism: Optional[object] = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ContractError("a contest needs n >= 2 agents")
        if isinstance(self.rewards, RankPrizes) and len(self.rewards.prizes) != self.n:
            raise ContractError("rank-order prize list must have length n")
        if not 0 <= self.seed < 2**64:
            raise ContractError("seed must be an unsigned 64-bit integer")

    @property
    def p_R(self) -> float:
        return self.rewards.p_R

    @property
    def endogenous(self) -> bool:
        return self.effort_cost is not None

    def contribution_cost(self, effort=0.0):
        if self.effort_cost is None:
            return self.costs.c_C
        return self.effort_cost(effort)
