"""Ability distributions on [0, 1].

Every distribution is atomless with a strictly increasing CDF, so the
inverse is well defined and sampling is done by inverse transform from a
uniform stream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ContractError, DomainError

_BISECT_STEPS = 64


def _check_unit(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return arr


def _unwrap(arr, like):
    if np.ndim(like) == 0:
        return float(arr)
    return arr


def _bisect_inverse(cdf, u):
    # Vectorised bracketed root finding on a monotone CDF over [0, 1].
    lo = np.zeros_like(u)
    hi = np.ones_like(u)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        below = cdf(mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


class AbilityDistribution:
    """Common-knowledge ability CDF on [0, 1]."""

    kind = "abstract"

    def _cdf(self, a):
        raise NotImplementedError

    def _inverse(self, u):
        return _bisect_inverse(self._cdf, u)

    def cdf(self, a):
        arr = _check_unit(a, "ability")
        return _unwrap(np.clip(self._cdf(arr), 0.0, 1.0), a)

    def inverse_cdf(self, u):
        arr = _check_unit(u, "probability")
        return _unwrap(np.clip(self._inverse(arr), 0.0, 1.0), u)

    def sample(self, stream: np.random.Generator, count: int) -> np.ndarray:
        if count < 0:
            raise ContractError("count must be nonnegative")
        return self.inverse_cdf(stream.random(count))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(AbilityDistribution):
    kind = "uniform"

    def _cdf(self, a):
        return np.asarray(a, dtype=float)

    def _inverse(self, u):
        return np.asarray(u, dtype=float)

    def to_dict(self):
        return {"kind": "uniform"}


@dataclass(frozen=True)
class Beta(AbilityDistribution):
    """Beta(alpha, beta) abilities; CDF via the regularized incomplete beta."""

    alpha: float
    beta: float
    kind = "beta"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ContractError("Beta shape parameters must be positive")

    def _cdf(self, a):
        return special.betainc(self.alpha, self.beta, a)

    def _inverse(self, u):
        x = np.atleast_1d(special.betaincinv(self.alpha, self.beta, u))
        bad = ~np.isfinite(x)
        if bad.any():
            # betaincinv gives NaN far in the tails
            x[bad] = _bisect_inverse(self._cdf, np.atleast_1d(u)[bad])
        x = x.reshape(np.shape(u))
        return np.where(u <= 0, 0.0, np.where(u >= 1, 1.0, x))

    def to_dict(self):
        return {"kind": "beta", "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class PiecewiseLinear(AbilityDistribution):
    """CDF interpolated linearly between knots ``(x_k, F_k)``.

    Knots must run from (0, 0) to (1, 1) with both coordinates strictly
    increasing.
    """

    knots: tuple
    kind = "piecewise"

    def __post_init__(self):
        knots = tuple((float(x), float(f)) for x, f in self.knots)
        if len(knots) < 2:
            raise ContractError("need at least two knots")
        xs = np.array([k[0] for k in knots])
        fs = np.array([k[1] for k in knots])
        if xs[0] != 0.0 or xs[-1] != 1.0 or fs[0] != 0.0 or fs[-1] != 1.0:
            raise ContractError("knots must start at (0, 0) and end at (1, 1)")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(fs) <= 0):
            raise ContractError("knot abscissae and CDF values must be strictly increasing")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_fs", fs)

    def _cdf(self, a):
        return np.interp(a, self._xs, self._fs)

    def _inverse(self, u):
        return np.interp(u, self._fs, self._xs)

    def to_dict(self):
        return {"kind": "piecewise", "knots": [list(k) for k in self.knots]}


def cdf(d: AbilityDistribution, a):
    return d.cdf(a)


def inverse_cdf(d: AbilityDistribution, u):
    return d.inverse_cdf(u)


def sample(d: AbilityDistribution, stream: np.random.Generator, count: int) -> np.ndarray:
    return d.sample(stream, count)


def from_dict(spec: dict) -> AbilityDistribution:
    kind = spec.get("kind")
    allowed = {"uniform": {"kind"}, "beta": {"kind", "alpha", "beta"},
               "piecewise": {"kind", "knots"}}
    if kind not in allowed:
        raise ContractError(f"unknown distribution kind {kind!r}")
    extra = set(spec) - allowed[kind]
    if extra:
        raise ContractError(f"unknown distribution keys: {sorted(extra)}")
    if kind == "uniform":
        return Uniform()
    if kind == "beta":
        return Beta(float(spec["alpha"]), float(spec["beta"]))
    return PiecewiseLinear(tuple(tuple(k) for k in spec["knots"]))
