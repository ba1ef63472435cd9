"""Winner-selection models and general expected-points mechanisms.

Batch helpers take the focal contributor's quality as a vector ``q_self``
of shape (R,) and the other agents' qualities as a matrix of shape (R, K)
with NaN marking agents that did not contribute.  They return expected
points conditional on the realised qualities, i.e. the ranking randomness
is integrated out exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .model import RankPrizes, RewardScheme

# ---------------------------------------------------------------------------
# ranking models
# ---------------------------------------------------------------------------


def _as_batch(q_self, others):
    q_self = np.atleast_1d(np.asarray(q_self, dtype=float))
    others = np.asarray(others, dtype=float)
    if others.ndim == 1:
        others = others.reshape(len(q_self), -1) if others.size else np.empty((len(q_self), 0))
    return q_self, others


def _perfect_share(q_self, others):
    """Probability of being ranked first under exact ordering with random tie-breaks."""
    present = ~np.isnan(others)
    higher = np.sum(present & (others > q_self[:, None]), axis=1)
    ties = np.sum(present & (others == q_self[:, None]), axis=1)
    return np.where(higher > 0, 0.0, 1.0 / (1.0 + ties))


class RankingModel:
    """How a winner is drawn from contributor qualities."""

    #: probability of ranking by exact quality order (rank-order mechanisms)
    accuracy = 1.0

    def winner_probs(self, qualities: np.ndarray) -> np.ndarray:
        q = np.asarray(qualities, dtype=float)
        out = np.empty(len(q))
        for i in range(len(q)):
            out[i] = self.batch_win_prob(q[i:i + 1], np.delete(q, i)[None, :])[0]
        return out

    def batch_win_prob(self, q_self, others) -> np.ndarray:
        raise NotImplementedError

    def sample_winner(self, qualities, rng: np.random.Generator) -> int:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Perfect(RankingModel):
    def batch_win_prob(self, q_self, others):
        return _perfect_share(*_as_batch(q_self, others))

    def winner_probs(self, qualities):
        q = np.asarray(qualities, dtype=float)
        top = q == q.max()
        return top / top.sum()

    def sample_winner(self, qualities, rng):
        q = np.asarray(qualities, dtype=float)
        tied = np.flatnonzero(q == q.max())
        return int(tied[rng.integers(len(tied))]) if len(tied) > 1 else int(tied[0])

    def to_dict(self):
        return {"kind": "perfect"}


@dataclass(frozen=True)
class BetaMixture(RankingModel):
    """Exact order with probability ``beta``, a uniformly random order otherwise."""

    beta: float

    def __post_init__(self):
        if not 0 <= self.beta <= 1:
            raise ContractError("beta must lie in [0, 1]")

    @property
    def accuracy(self):
        return self.beta

    def batch_win_prob(self, q_self, others):
        q_self, others = _as_batch(q_self, others)
        m = 1 + np.sum(~np.isnan(others), axis=1)
        return self.beta * _perfect_share(q_self, others) + (1.0 - self.beta) / m

    def winner_probs(self, qualities):
        q = np.asarray(qualities, dtype=float)
        return self.beta * Perfect().winner_probs(q) + (1.0 - self.beta) / len(q)

    def sample_winner(self, qualities, rng):
        q = np.asarray(qualities, dtype=float)
        if rng.random() < self.beta:
            return Perfect().sample_winner(q, rng)
        return int(rng.integers(len(q)))

    def to_dict(self):
        return {"kind": "beta", "beta": self.beta}


@dataclass(frozen=True)
class SoftmaxNoise(RankingModel):
    """Winner is the argmax of ``q_i / eta + Gumbel noise``; closed form is a softmax."""

    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ContractError("eta must be positive")

    accuracy = 0.0

    def batch_win_prob(self, q_self, others):
        q_self, others = _as_batch(q_self, others)
        shift = np.fmax(q_self, np.nanmax(np.column_stack([q_self, others]), axis=1))
        own = np.exp((q_self - shift) / self.eta)
        rest = np.nansum(np.exp((others - shift[:, None]) / self.eta), axis=1)
        return own / (own + rest)

    def winner_probs(self, qualities):
        z = np.asarray(qualities, dtype=float) / self.eta
        w = np.exp(z - z.max())
        return w / w.sum()

    def d_win_prob(self, q_self, others):
        """Partial derivative of the win probability in own quality."""
        p = self.batch_win_prob(q_self, others)
        return p * (1.0 - p) / self.eta

    def sample_winner(self, qualities, rng):
        z = np.asarray(qualities, dtype=float) / self.eta
        return int(np.argmax(z + rng.gumbel(size=len(z))))

    def to_dict(self):
        return {"kind": "softmax", "eta": self.eta}


def winner_probabilities(ranking: RankingModel, qualities) -> np.ndarray:
    q = np.asarray(qualities, dtype=float)
    if q.ndim != 1 or len(q) == 0:
        raise ContractError("winner_probabilities needs at least one contributor")
    return ranking.winner_probs(q)


def ranking_from_dict(spec: dict) -> RankingModel:
    kind = spec.get("kind")
    allowed = {"perfect": {"kind"}, "beta": {"kind", "beta"}, "softmax": {"kind", "eta"}}
    if kind not in allowed:
        raise ContractError(f"unknown ranking kind {kind!r}")
    extra = set(spec) - allowed[kind]
    if extra:
        raise ContractError(f"unknown ranking keys: {sorted(extra)}")
    if kind == "perfect":
        return Perfect()
    if kind == "beta":
        return BetaMixture(float(spec["beta"]))
    return SoftmaxNoise(float(spec["eta"]))


# ---------------------------------------------------------------------------
# general mechanisms
# ---------------------------------------------------------------------------


class GeneralMechanism:
    """Expected points ``p(q_i, q_-i, m)`` for a contributor."""

    def batch_points(self, q_self, others) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class BestContribution(GeneralMechanism):
    rewards: RewardScheme
    ranking: RankingModel = field(default_factory=Perfect)

    def batch_points(self, q_self, others):
        pi = self.ranking.batch_win_prob(q_self, others)
        return self.rewards.p_C + (self.rewards.p_B - self.rewards.p_C) * pi

    def to_dict(self):
        return {"kind": "best"}


@dataclass(frozen=True)
class RankOrder(GeneralMechanism):
    """Prize ``p_k`` for rank k; exact order with probability ``beta``, random otherwise."""

    prizes: RankPrizes
    beta: float = 1.0

    def __post_init__(self):
        if not 0 <= self.beta <= 1:
            raise ContractError("beta must lie in [0, 1]")

    def _cumulative(self, width):
        p = np.zeros(width)
        k = min(width, len(self.prizes.prizes))
        p[:k] = self.prizes.prizes[:k]
        return np.concatenate([[0.0], np.cumsum(p)])

    def batch_points(self, q_self, others):
        q_self, others = _as_batch(q_self, others)
        present = ~np.isnan(others)
        m = 1 + present.sum(axis=1)
        cum = self._cumulative(others.shape[1] + 1)
        higher = np.sum(present & (others > q_self[:, None]), axis=1)
        ties = np.sum(present & (others == q_self[:, None]), axis=1)
        ordered = (cum[higher + ties + 1] - cum[higher]) / (ties + 1)
        shuffled = cum[m] / m
        return self.beta * ordered + (1.0 - self.beta) * shuffled

    def to_dict(self):
        return {"kind": "rank_order", "beta": self.beta}


@dataclass(frozen=True)
class Proportional(GeneralMechanism):
    """``k * q_i / sum_j q_j``; an all-zero profile splits ``k`` evenly."""

    k: float = 1.0

    def __post_init__(self):
        if not self.k > 0:
            raise ContractError("proportional scale must be positive")

    def batch_points(self, q_self, others):
        q_self, others = _as_batch(q_self, others)
        total = q_self + np.nansum(others, axis=1)
        m = 1 + np.sum(~np.isnan(others), axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            share = np.where(total > 0, q_self / np.where(total > 0, total, 1.0), 1.0 / m)
        return self.k * share

    def to_dict(self):
        return {"kind": "proportional", "k": self.k}


@dataclass(frozen=True)
class Scaled(GeneralMechanism):
    base: GeneralMechanism
    k: float = 1.0

    def __post_init__(self):
        if not self.k > 0:
            raise ContractError("scale must be positive")

    def batch_points(self, q_self, others):
        return self.k * self.base.batch_points(q_self, others)

    def to_dict(self):
        return {"kind": "scaled", "k": self.k, "base": self.base.to_dict()}


def expected_points(mech: GeneralMechanism, own_quality: float, others) -> float:
    others = np.asarray(others, dtype=float).reshape(1, -1)
    qs = np.concatenate([[own_quality], others[0]])
    if np.any(qs < 0) or np.any(qs > 1):
        raise ContractError("qualities must lie in [0, 1]")
    return float(mech.batch_points(np.array([own_quality]), others)[0])


def scenario_mechanism(scenario) -> GeneralMechanism:
    """Mechanism implied by a scenario's rewards, ranking and optional override."""
    if scenario.mechanism is not None:
        return scenario.mechanism
    if isinstance(scenario.rewards, RankPrizes):
        return RankOrder(scenario.rewards, scenario.ranking.accuracy)
    return BestContribution(scenario.rewards, scenario.ranking)


def mechanism_from_dict(spec: dict, rewards=None, ranking=None) -> GeneralMechanism:
    kind = spec.get("kind")
    if kind == "best":
        _reject_extra(spec, {"kind"})
        if not isinstance(rewards, RewardScheme):
            raise ContractError("best-contribution mechanism needs p_B/p_C rewards")
        return BestContribution(rewards, ranking or Perfect())
    if kind == "rank_order":
        _reject_extra(spec, {"kind", "beta"})
        if not isinstance(rewards, RankPrizes):
            raise ContractError("rank-order mechanism needs a prize list")
        default = ranking.accuracy if ranking is not None else 1.0
        return RankOrder(rewards, float(spec.get("beta", default)))
    if kind == "proportional":
        _reject_extra(spec, {"kind", "k"})
        return Proportional(float(spec.get("k", 1.0)))
    if kind == "scaled":
        _reject_extra(spec, {"kind", "k", "base"})
        return Scaled(mechanism_from_dict(spec["base"], rewards, ranking), float(spec["k"]))
    raise ContractError(f"unknown mechanism kind {kind!r}")


def _reject_extra(spec, allowed):
    extra = set(spec) - allowed
    if extra:
        raise ContractError(f"unknown mechanism keys: {sorted(extra)}")


# ---------------------------------------------------------------------------
# assumption checks
# ---------------------------------------------------------------------------


@dataclass
class RankingReport:
    passed: bool
    violation: str = ""
    note: str = ""


def validate_ranking_assumptions(ranking, grid: int = 21, max_others: int = 4) -> RankingReport:
    """Grid check that the win probability rises with own quality and falls
    as more contributors join.

    Strict increase is demanded only of models with a smooth win probability
    (softmax); exact and beta-mixed orderings are step functions of own
    quality and are held to weak monotonicity.
    """
    qs = np.linspace(0.0, 1.0, grid)
    strict = isinstance(ranking, SoftmaxNoise)
    note = "" if strict else "weak monotonicity off ties"
    levels = (qs[0], qs[grid // 2], qs[-1])
    for k in range(1, max_others + 1):
        for level in levels:
            others = np.full((grid, k), level)
            pi = ranking.batch_win_prob(qs, others)
            steps = np.diff(pi)
            bad = np.flatnonzero(steps <= 0 if strict else steps < -1e-12)
            if len(bad):
                i = bad[0]
                return RankingReport(False, f"win probability not increasing in own quality: "
                                     f"m={k + 1}, others at {level:g}, q {qs[i]:g} -> {qs[i + 1]:g}")
        for level in levels:
            fewer = np.full((grid, k - 1), level) if k > 1 else np.empty((grid, 0))
            more = np.full((grid, k), level)
            rise = ranking.batch_win_prob(qs, more) - ranking.batch_win_prob(qs, fewer)
            bad = np.flatnonzero(rise > 1e-12)
            if len(bad):
                i = bad[0]
                return RankingReport(False, f"win probability increased when a contributor joined: "
                                     f"m {k} -> {k + 1}, own q {qs[i]:g}")
    return RankingReport(True, note=note)
