"""Strict JSON schema for scenario files.

Required keys: ``n``, ``dist``, ``rewards``, ``costs``, ``ranking``.
Optional keys: ``utility``, ``quality``, ``effort_cost``, ``pool``,
``mechanism``, ``seed``.  Unknown keys anywhere are rejected.
"""
from __future__ import annotations

import json
from pathlib import Path

from . import distributions
from .errors import ContractError, DomainError
from .model import (CobbDouglas, CostModel, EffortCostFunction, Homogeneous, LinearMix, MaxQuality,
                    NonstrategicPool, RankPrizes, RewardScheme, ScenarioConfig, SumMinusSearchCost,
                    SumQuality, TopK)
from .ranking import mechanism_from_dict, ranking_from_dict

REQUIRED = {"n", "dist", "rewards", "costs", "ranking"}
OPTIONAL = {"utility", "quality", "effort_cost", "pool", "mechanism", "seed"}


class ConfigError(ValueError):
    """A scenario file does not match the schema."""


def _keys(spec, allowed, where, required=()):
    if not isinstance(spec, dict):
        raise ConfigError(f"{where} must be a JSON object")
    extra = set(spec) - set(allowed)
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")
    missing = set(required) - set(spec)
    if missing:
        raise ConfigError(f"missing keys in {where}: {sorted(missing)}")


def _rewards(spec):
    if "prizes" in spec:
        _keys(spec, {"prizes", "p_R"}, "rewards", {"prizes"})
        return RankPrizes(tuple(spec["prizes"]), float(spec.get("p_R", 0.0)))
    _keys(spec, {"p_B", "p_C", "p_R"}, "rewards", {"p_B"})
    return RewardScheme(float(spec["p_B"]), float(spec.get("p_C", 0.0)), float(spec.get("p_R", 0.0)))


def _costs(spec):
    _keys(spec, {"c_C", "c_R", "c_bar"}, "costs", {"c_C"})
    c_bar = spec.get("c_bar")
    return CostModel(float(spec["c_C"]), float(spec.get("c_R", 0.0)),
                     None if c_bar is None else float(c_bar))


def _quality(spec):
    kind = spec.get("kind") if isinstance(spec, dict) else None
    if kind == "homogeneous":
        _keys(spec, {"kind"}, "quality")
        return Homogeneous()
    if kind == "linear":
        _keys(spec, {"kind", "gamma"}, "quality", {"gamma"})
        return LinearMix(float(spec["gamma"]))
    if kind == "cobb_douglas":
        _keys(spec, {"kind", "theta", "e_min"}, "quality", {"theta"})
        return CobbDouglas(float(spec["theta"]), float(spec.get("e_min", 0.05)))
    raise ConfigError(f"unknown quality kind {kind!r}")


def _quality_dict(q):
    if isinstance(q, LinearMix):
        return {"kind": "linear", "gamma": q.gamma}
    if isinstance(q, CobbDouglas):
        return {"kind": "cobb_douglas", "theta": q.theta, "e_min": q.e_min}
    return {"kind": "homogeneous"}


def _utility(spec):
    kind = spec.get("kind") if isinstance(spec, dict) else None
    if kind == "max":
        _keys(spec, {"kind"}, "utility")
        return MaxQuality()
    if kind == "sum":
        _keys(spec, {"kind"}, "utility")
        return SumQuality()
    if kind == "top_k":
        _keys(spec, {"kind", "k"}, "utility", {"k"})
        return TopK(int(spec["k"]))
    if kind == "search_cost":
        _keys(spec, {"kind", "gamma"}, "utility", {"gamma"})
        return SumMinusSearchCost(float(spec["gamma"]))
    raise ConfigError(f"unknown utility kind {kind!r}")


def _effort_cost(spec):
    _keys(spec, {"c0", "kappa", "p_exp"}, "effort_cost", {"c0", "kappa"})
    return EffortCostFunction(float(spec["c0"]), float(spec["kappa"]), float(spec.get("p_exp", 1.0)))


def _pool(spec):
    _keys(spec, {"count", "dist"}, "pool", {"count"})
    dist = distributions.from_dict(spec.get("dist", {"kind": "uniform"}))
    return NonstrategicPool(int(spec["count"]), dist)


def scenario_from_dict(spec: dict) -> ScenarioConfig:
    """Build a scenario; any schema or invariant violation raises ConfigError."""
    try:
        _keys(spec, REQUIRED | OPTIONAL, "scenario", REQUIRED)
        n = spec["n"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise ConfigError("n must be an integer")
        seed = spec.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("seed must be an integer")
        rewards = _rewards(spec["rewards"])
        ranking = ranking_from_dict(spec["ranking"])
        opt = {k: spec.get(k) for k in OPTIONAL}
        return ScenarioConfig(
            n=n,
            dist=distributions.from_dict(spec["dist"]),
            rewards=rewards,
            costs=_costs(spec["costs"]),
            ranking=ranking,
            utility=MaxQuality() if opt["utility"] is None else _utility(opt["utility"]),
            quality=Homogeneous() if opt["quality"] is None else _quality(opt["quality"]),
            effort_cost=None if opt["effort_cost"] is None else _effort_cost(opt["effort_cost"]),
            pool=None if opt["pool"] is None else _pool(opt["pool"]),
            mechanism=(None if opt["mechanism"] is None
                       else mechanism_from_dict(opt["mechanism"], rewards, ranking)),
            seed=seed,
        )
    except ConfigError:
        raise
    except (ContractError, DomainError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def scenario_to_dict(scenario: ScenarioConfig) -> dict:
    """Fully resolved echo of a scenario (optional sections as null when absent)."""
    r = scenario.rewards
    if isinstance(r, RankPrizes):
        rewards = {"prizes": list(r.prizes), "p_R": r.p_R}
    else:
        rewards = {"p_B": r.p_B, "p_C": r.p_C, "p_R": r.p_R}
    c = scenario.costs
    ec = scenario.effort_cost
    pool = scenario.pool
    return {
        "n": scenario.n,
        "dist": scenario.dist.to_dict(),
        "rewards": rewards,
        "costs": {"c_C": c.c_C, "c_R": c.c_R, "c_bar": c.c_bar},
        "ranking": scenario.ranking.to_dict(),
        "utility": scenario.utility.to_dict(),
        "quality": _quality_dict(scenario.quality),
        "effort_cost": None if ec is None else {"c0": ec.c0, "kappa": ec.kappa, "p_exp": ec.p_exp},
        "pool": None if pool is None else {"count": pool.count, "dist": pool.quality_dist.to_dict()},
        "mechanism": None if scenario.mechanism is None else scenario.mechanism.to_dict(),
        "seed": scenario.seed,
    }


def load_scenario(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(spec)


def dump_scenario(scenario: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2, sort_keys=True) + "\n")
