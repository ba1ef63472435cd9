"""Command-line entry point.

Each subcommand loads one scenario file, runs one computation and writes a
single artifact (``<out>/<command>.json`` or ``<out>/<command>.csv``).  A
JSON summary is also printed.  Exit codes: 0 success, 1 domain failure
(``<out>/error.json`` is written), 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .asymmetric import find_asymmetric_equilibrium
from .config import ConfigError, load_scenario, scenario_to_dict
from .design import (calibrate_general_scale, calibrate_rewards, optimal_threshold,
                     reward_schedule_vs_n)
from .effort import (calibrate_endogenous_rewards, effort_condition_holds, effort_response_curve,
                     perfect_ranking_undermines_effort)
from .equilibrium import general_gap, solve_general_threshold
from .errors import ContestError, ContractError, DomainError, VerificationError
from .learning import (estimate_both_costs, estimate_contribution_cost, observed_threshold,
                       run_contest_series)
from .model import RankPrizes, RewardScheme, StrategyProfile
from .ranking import BestContribution, Perfect, scenario_mechanism
from .simulation import simulate_contest, verify_equilibrium
from .streams import SimulationPlan, substream

COMMANDS = ("solve", "design", "calibrate", "learn", "learn2", "asymmetric", "endogenous-check",
            "endogenous-calibrate", "simulate", "verify", "schedule")


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _unit(text):
    v = float(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"{text} is outside [0, 1]")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _n_range(text):
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO:HI") from None
    if not 2 <= lo <= hi:
        raise argparse.ArgumentTypeError("need 2 <= LO <= HI")
    return range(lo, hi + 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contestlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--seed", type=_seed, default=None, help="overrides the scenario seed")
        p.add_argument("--reps", type=_positive_int, default=None)
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        if name in ("calibrate", "schedule", "endogenous-check", "endogenous-calibrate"):
            p.add_argument("--target", type=_unit, required=True, help="target threshold")
            p.add_argument("--ratio", type=float, default=10.0, help="p_B / p_C")
        if name in ("simulate", "verify"):
            p.add_argument("--target", type=_unit, default=None,
                           help="threshold to play (default: the solved equilibrium)")
        if name == "schedule":
            p.add_argument("--n-range", type=_n_range, default=range(2, 11), help="LO:HI")
        if name == "learn2":
            p.add_argument("--p-b2", type=float, required=True, help="winner reward of the second experiment")
        if name in ("endogenous-check", "endogenous-calibrate"):
            p.add_argument("--weak", action="store_true", help="use p_B = c(0) + max(p_R - c_R, 0)")
        if name in ("design", "verify"):
            p.add_argument("--grid", type=_positive_int, default=101 if name == "design" else 21)
    return parser


# ---------------------------------------------------------------------------
# subcommands; each returns (summary dict, csv header, csv rows)
# ---------------------------------------------------------------------------


def _reward_scheme(sc):
    if not isinstance(sc.rewards, RewardScheme):
        raise UsageError("this command needs p_B/p_C rewards, not a prize list")
    return sc.rewards


def _solve(sc):
    mech = scenario_mechanism(sc)
    return solve_general_threshold(mech, sc.p_R, sc.costs.c_R, sc.costs.c_C, sc.n, sc.dist, sc.pool)


def cmd_solve(sc, args):
    rep = _solve(sc)
    mech = scenario_mechanism(sc)
    rows = [(float(a), general_gap(mech, float(a), sc.p_R, sc.costs.c_R, sc.costs.c_C, sc.n, sc.dist, sc.pool))
            for a in np.linspace(0.0, 1.0, 101)]
    return {"a_star": rep.threshold, **rep.to_dict()}, ("a", "gap"), rows


def cmd_design(sc, args):
    res = optimal_threshold(sc.n, sc.dist, sc.utility, grid=max(args.grid, 11), reps=args.reps or 20_000,
                            seed=sc.seed, pool=sc.pool, quality=sc.quality.at_full_effort)
    out = {"a_hat": res.a_hat, "value": res.value, "stderr": res.stderr, "notes": res.notes}
    return out, ("threshold", "value", "stderr"), res.table


def cmd_calibrate(sc, args):
    if sc.mechanism is not None and not isinstance(sc.mechanism, BestContribution):
        res = calibrate_general_scale(sc.mechanism, args.target, sc.p_R, sc.costs, sc.n, sc.dist, sc.pool)
        d = res.to_dict()
        return d, tuple(d), [tuple(d.values())]
    _reward_scheme(sc)
    res = calibrate_rewards(args.target, args.ratio, sc.p_R, sc.costs, sc.n, sc.dist, sc.ranking, sc.pool)
    d = res.to_dict()
    return d, tuple(d), [tuple(d.values())]


def cmd_schedule(sc, args):
    rows = reward_schedule_vs_n(args.target, args.ratio, sc.p_R, sc.costs, sc.dist, sc.ranking, args.n_range)
    return {"rows": [dict(zip(("n", "p_B", "p_C", "residual"), r)) for r in rows]}, \
        ("n", "p_B", "p_C", "residual"), rows


def _learning_inputs(sc):
    rewards = _reward_scheme(sc)
    if sc.costs.c_bar is None:
        raise UsageError("learning needs costs.c_bar in the config")
    return rewards


def cmd_learn(sc, args):
    rewards = _learning_inputs(sc)
    series = run_contest_series(rewards, sc.costs, sc.n, sc.dist, sc.ranking, args.reps or 10_000, sc.seed)
    c_hat = estimate_contribution_cost(series.f_hat, rewards, sc.costs.c_R, sc.n, sc.dist, sc.ranking,
                                       sc.costs.c_bar)
    out = {"T": series.T, "f_hat": series.f_hat, "stderr_proxy": series.stderr_proxy,
           "true_threshold": series.threshold, "observed_threshold": observed_threshold(series.f_hat, sc.dist),
           "c_hat": c_hat, "c_true": sc.costs.c_C}
    rows = [(t, int(c)) for t, c in enumerate(series.counts)]
    return out, ("contest", "contributors"), rows


LEARN2_COLUMNS = ("experiment", "p_B", "f_hat", "f_stderr", "threshold")


def cmd_learn2(sc, args):
    rewards = _reward_scheme(sc)
    T = args.reps or 10_000
    experiments, rows = [], []
    for k, p_b in enumerate((rewards.p_B, args.p_b2)):
        r = dataclasses.replace(rewards, p_B=p_b, p_C=0.0)
        series = run_contest_series(r, sc.costs, sc.n, sc.dist, sc.ranking, T, substream_seed(sc.seed, k))
        a = observed_threshold(series.f_hat, sc.dist)
        experiments.append((p_b, a))
        rows.append((k + 1, p_b, series.f_hat, series.stderr_proxy, a))
    c_c, c_r = estimate_both_costs(experiments[0], experiments[1], rewards.p_R, sc.n, sc.dist, sc.ranking)
    out = {"c_C_hat": c_c, "c_R_hat": c_r, "c_C_true": sc.costs.c_C, "c_R_true": sc.costs.c_R,
           "experiments": [dict(zip(LEARN2_COLUMNS, r)) for r in rows]}
    return out, LEARN2_COLUMNS, rows


def substream_seed(seed, k):
    """Independent 64-bit seed for the k-th experiment of a run."""
    return int(substream(seed, "experiment", k).integers(0, 2**63))


def cmd_asymmetric(sc, args):
    if not isinstance(sc.rewards, RankPrizes):
        raise UsageError("asymmetric needs a rank-order prize list")
    beta = sc.ranking.accuracy
    prof = find_asymmetric_equilibrium(sc.rewards, beta, sc.costs, sc.p_R, sc.n, sc.dist)
    report = verify_equilibrium(prof.strategy_profile(sc.n), sc, np.linspace(0.0, 1.0, 21),
                                plan=SimulationPlan(args.reps or 100_000, sc.seed))
    out = {**prof.to_dict(), "verified": report.verified, "verified_regret": report.max_regret}
    rows = [(i + 1, t) for i, t in enumerate(prof.strategy_profile(sc.n).thresholds)]
    return out, ("agent", "threshold"), rows


def cmd_endogenous_check(sc, args):
    if not sc.endogenous:
        raise UsageError("endogenous commands need effort_cost in the config")
    _reward_scheme(sc)
    out = {"condition": effort_condition_holds(sc, args.target, args.ratio, weak=args.weak).to_dict()}
    plan = SimulationPlan(args.reps or 20_000, sc.seed)
    if isinstance(sc.ranking, Perfect):
        out["deviation"] = perfect_ranking_undermines_effort(sc, args.target, plan).to_dict()
    profile = StrategyProfile.symmetric(sc.n, args.target, effort=1.0)
    rows = effort_response_curve(np.linspace(args.target, 1.0, 11), profile, sc, plan=plan)
    return out, ("a", "effort"), rows


def cmd_endogenous_calibrate(sc, args):
    if not sc.endogenous:
        raise UsageError("endogenous commands need effort_cost in the config")
    _reward_scheme(sc)
    res = calibrate_endogenous_rewards(args.target, args.ratio, sc,
                                       plan=SimulationPlan(args.reps or 100_000, sc.seed), weak=args.weak)
    d = res.calibration.to_dict()
    return res.to_dict(), tuple(d), [tuple(d.values())]


def _played_threshold(sc, args):
    return args.target if args.target is not None else _solve(sc).threshold


def cmd_simulate(sc, args):
    a_star = _played_threshold(sc, args)
    profile = StrategyProfile.symmetric(sc.n, a_star, effort=1.0 if sc.endogenous else 0.0)
    reps = args.reps or 1_000
    rows = []
    for t in range(reps):
        outcome = simulate_contest(profile, sc, substream(sc.seed, "contest", t))
        value = float(sc.utility(outcome.m, outcome.qualities))
        rows.append((t, outcome.m, -1 if outcome.winner is None else outcome.winner, value,
                     outcome.total_points))
    arr = np.array([r[1:] for r in rows], dtype=float)
    out = {"threshold": a_star, "contests": reps, "mean_contributions": float(arr[:, 0].mean()),
           "mean_designer_utility": float(arr[:, 2].mean()), "mean_total_points": float(arr[:, 3].mean())}
    return out, ("contest", "m", "winner", "designer_utility", "total_points"), rows


def cmd_verify(sc, args):
    a_star = _played_threshold(sc, args)
    profile = StrategyProfile.symmetric(sc.n, a_star, effort=1.0 if sc.endogenous else 0.0)
    report = verify_equilibrium(profile, sc, np.linspace(0.0, 1.0, args.grid),
                                plan=SimulationPlan(args.reps or 100_000, sc.seed))
    out = {"threshold": a_star, **report.to_dict()}
    out.pop("records")
    header = ("agent", "ability", "prescribed", "best_alternative", "regret", "stderr")
    rows = [tuple(r.to_dict()[h] for h in header) for r in report.records]
    return out, header, rows


HANDLERS = {"solve": cmd_solve, "design": cmd_design, "calibrate": cmd_calibrate, "schedule": cmd_schedule,
            "learn": cmd_learn, "learn2": cmd_learn2, "asymmetric": cmd_asymmetric,
            "endogenous-check": cmd_endogenous_check, "endogenous-calibrate": cmd_endogenous_calibrate,
            "simulate": cmd_simulate, "verify": cmd_verify}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def _options(args) -> dict:
    skip = {"config", "out", "format", "command"}
    opts = {}
    for k, v in vars(args).items():
        if k in skip:
            continue
        opts[k] = f"{v.start}:{v.stop - 1}" if isinstance(v, range) else v
    return opts


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out_dir = Path(args.out)
    try:
        sc = load_scenario(args.config)
        if args.seed is not None:
            sc = dataclasses.replace(sc, seed=args.seed)
    except ConfigError as exc:
        print(f"contestlab: config error: {exc}", file=sys.stderr)
        return 2
    header = {"command": args.command, "seed": sc.seed, "options": _options(args),
              "scenario": scenario_to_dict(sc)}
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        summary, columns, rows = HANDLERS[args.command](sc, args)
    except UsageError as exc:
        print(f"contestlab: {exc}", file=sys.stderr)
        return 2
    except (ContestError, ContractError, DomainError) as exc:
        err = {**header, "error": {"type": type(exc).__name__, "message": str(exc)}}
        if isinstance(exc, VerificationError) and exc.report is not None:
            w = exc.report.witness
            err["error"]["witness"] = None if w is None else w.to_dict()
        (out_dir / "error.json").write_text(_dumps(err))
        sys.stdout.write(_dumps(err["error"]))
        return 1
    if args.format == "csv":
        _write_csv(out_dir / f"{args.command}.csv", columns, rows)
    else:
        (out_dir / f"{args.command}.json").write_text(_dumps({**header, "result": summary}))
    sys.stdout.write(_dumps(summary))
    return 0


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
