"""Bounded value distributions on [0, 1] with closed-form moments.

Samplers consume uniforms through a ``draw(round, active)`` callback, which
returns one uniform per still-unfinished variate.  Inverse-CDF kinds use a
single round; rejection kinds keep drawing until every variate is accepted.
The same sampler thus runs on per-cell hash streams or on a numpy Generator.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import erfc

Draw = Callable[[int, np.ndarray], np.ndarray]
MAX_REJECTION_ROUNDS = 200_000


def norm_cdf(x):
    return 0.5 * erfc(-np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def _norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


class DistributionSpec:
    kind: str

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def std(self) -> float:
        return math.sqrt(self.variance())

    def third_abs_central_moment(self) -> float:
        """E|X - mean|^3."""
        raise NotImplementedError

    def sample(self, draw: Draw, size: int) -> np.ndarray:
        raise NotImplementedError

    def sample_rng(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.sample(lambda k, active: rng.random(active.size), size)

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def _pdf(self, x: float) -> float:
        raise NotImplementedError

    def _moment_by_quadrature(self) -> float:
        mu = self.mean()
        f = lambda x: abs(x - mu) ** 3 * self._pdf(x)
        lo, _ = integrate.quad(f, 0.0, mu, epsabs=1e-10, epsrel=1e-10, limit=200)
        hi, _ = integrate.quad(f, mu, 1.0, epsabs=1e-10, epsrel=1e-10, limit=200)
        return lo + hi


def _rejection(size: int, draws_per_round: int, draw: Draw, propose) -> np.ndarray:
    """Generic rejection loop: ``propose(us)`` returns (candidates, accepted)."""
    out = np.empty(size)
    active = np.arange(size)
    k = 0
    while active.size:
        if k >= MAX_REJECTION_ROUNDS * draws_per_round:
            raise RuntimeError("rejection sampler exceeded its round limit")
        us = [draw(k + r, active) for r in range(draws_per_round)]
        k += draws_per_round
        cand, ok = propose(us)
        out[active[ok]] = cand[ok]
        active = active[~ok]
    return out


@dataclass(frozen=True)
class Uniform(DistributionSpec):
    lo: float = 0.0
    hi: float = 1.0
    kind = "uniform"

    def __post_init__(self):
        if not 0.0 <= self.lo < self.hi <= 1.0:
            raise ValueError(f"uniform needs 0 <= lo < hi <= 1, got lo={self.lo}, hi={self.hi}")

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def variance(self):
        return (self.hi - self.lo) ** 2 / 12.0

    def third_abs_central_moment(self):
        return (self.hi - self.lo) ** 3 / 32.0

    def sample(self, draw, size):
        return self.lo + (self.hi - self.lo) * draw(0, np.arange(size))

    def to_dict(self):
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Beta(DistributionSpec):
    alpha: float
    beta: float
    kind = "beta"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"beta needs alpha > 0 and beta > 0, got alpha={self.alpha}, beta={self.beta}")

    def mean(self):
        return self.alpha / (self.alpha + self.beta)

    def variance(self):
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1))

    def _log_norm(self):
        return math.lgamma(self.alpha + self.beta) - math.lgamma(self.alpha) - math.lgamma(self.beta)

    def _pdf(self, x):
        if x <= 0.0 or x >= 1.0:
            return 0.0
        return math.exp(self._log_norm() + (self.alpha - 1) * math.log(x) + (self.beta - 1) * math.log1p(-x))

    def third_abs_central_moment(self):
        return self._moment_by_quadrature()

    def sample(self, draw, size):
        a, b = self.alpha, self.beta
        if a >= 1 and b >= 1:
            # uniform envelope under the density peak
            mode = 0.5 if a == b == 1 else (a - 1) / (a + b - 2)
            log_peak = self._log_norm() + (
                (a - 1) * math.log(mode) if a > 1 else 0.0) + ((b - 1) * math.log1p(-mode) if b > 1 else 0.0)
            log_norm = self._log_norm()

            def propose(us):
                x, u = us
                log_f = np.full(x.shape, log_norm)
                with np.errstate(divide="ignore"):
                    if a > 1:
                        log_f += (a - 1) * np.log(x)
                    if b > 1:
                        log_f += (b - 1) * np.log1p(-x)
                return x, np.log(1.0 - u) + log_peak <= log_f
        else:
            # Johnk's method
            def propose(us):
                x = (1.0 - us[0]) ** (1.0 / a)
                y = (1.0 - us[1]) ** (1.0 / b)
                s = x + y
                ok = (s <= 1.0) & (s > 0.0)
                with np.errstate(invalid="ignore", divide="ignore"):
                    return np.where(ok, x / s, 0.0), ok
        return _rejection(size, 2, draw, propose)

    def to_dict(self):
        return {"kind": "beta", "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class Discrete(DistributionSpec):
    points: tuple
    probs: tuple
    kind = "discrete"

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(float(p) for p in self.points))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if not self.points or len(self.points) != len(self.probs):
            raise ValueError("discrete needs equally many points and probs")
        if any(not 0.0 <= p <= 1.0 for p in self.points):
            raise ValueError("discrete points must lie in [0, 1]")
        if any(p < 0 for p in self.probs):
            raise ValueError("discrete probs must be non-negative")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError(f"discrete probs must sum to 1, got {math.fsum(self.probs)!r}")

    def mean(self):
        return math.fsum(x * p for x, p in zip(self.points, self.probs))

    def variance(self):
        mu = self.mean()
        return math.fsum(p * (x - mu) ** 2 for x, p in zip(self.points, self.probs))

    def third_abs_central_moment(self):
        mu = self.mean()
        return math.fsum(p * abs(x - mu) ** 3 for x, p in zip(self.points, self.probs))

    def sample(self, draw, size):
        cdf = np.cumsum(self.probs)
        idx = np.searchsorted(cdf, draw(0, np.arange(size)), side="right")
        return np.asarray(self.points)[np.minimum(idx, len(self.points) - 1)]

    def to_dict(self):
        return {"kind": "discrete", "points": list(self.points), "probs": list(self.probs)}


@dataclass(frozen=True)
class TruncatedNormal(DistributionSpec):
    """Normal(center, spread^2) conditioned on [0, 1]."""

    center: float
    spread: float
    kind = "truncnormal"

    def __post_init__(self):
        if not self.spread >= 1e-3:
            raise ValueError(f"truncnormal spread must be >= 1e-3, got {self.spread}")
        if not math.isfinite(self.center):
            raise ValueError("truncnormal center must be finite")
        if self._mass() < 1e-12:
            raise ValueError("truncnormal puts negligible mass on [0, 1]")

    def _ab(self):
        return (0.0 - self.center) / self.spread, (1.0 - self.center) / self.spread

    def _mass(self):
        a, b = self._ab()
        return float(norm_cdf(b) - norm_cdf(a))

    def mean(self):
        a, b = self._ab()
        return self.center + self.spread * (_norm_pdf(a) - _norm_pdf(b)) / self._mass()

    def variance(self):
        a, b = self._ab()
        z = self._mass()
        r = (_norm_pdf(a) - _norm_pdf(b)) / z
        return self.spread ** 2 * (1.0 + (a * _norm_pdf(a) - b * _norm_pdf(b)) / z - r * r)

    def _pdf(self, x):
        if x < 0.0 or x > 1.0:
            return 0.0
        return _norm_pdf((x - self.center) / self.spread) / (self.spread * self._mass())

    def third_abs_central_moment(self):
        return self._moment_by_quadrature()

    def sample(self, draw, size):
        c, s = self.center, self.spread
        if self._mass() >= 0.25:
            # normal proposals (Box-Muller), keep those inside [0, 1]
            def propose(us):
                r = np.sqrt(-2.0 * np.log1p(-us[0]))
                x = c + s * r * np.cos(2 * math.pi * us[1])
                return x, (x >= 0.0) & (x <= 1.0)
        else:
            peak = min(max(c, 0.0), 1.0)

            def propose(us):
                x = us[0]
                log_ratio = -((x - c) ** 2 - (peak - c) ** 2) / (2 * s * s)
                return x, np.log1p(-us[1]) <= log_ratio
        return _rejection(size, 2, draw, propose)

    def to_dict(self):
        return {"kind": "truncnormal", "center": self.center, "spread": self.spread}


def spec_from_dict(d: dict) -> DistributionSpec:
    kind = d.get("kind")
    try:
        if kind == "uniform":
            return Uniform(float(d.get("lo", 0.0)), float(d.get("hi", 1.0)))
        if kind == "beta":
            return Beta(float(d["alpha"]), float(d["beta"]))
        if kind == "discrete":
            return Discrete(tuple(d["points"]), tuple(d["probs"]))
        if kind == "truncnormal":
            return TruncatedNormal(float(d["center"]), float(d["spread"]))
    except KeyError as e:
        raise ValueError(f"{kind} spec is missing field {e.args[0]!r}") from None
    raise ValueError(f"unknown distribution kind {kind!r}")


def spec_from_json(text: str) -> DistributionSpec:
    return spec_from_dict(json.loads(text))


def parse_spec(text: str) -> DistributionSpec:
    """JSON, or shorthand such as ``uniform:0,1``, ``beta:2,5``,
    ``discrete:0.3,0.7:0.5,0.5`` or ``truncnormal:0.5,0.2``."""
    text = text.strip()
    if text.startswith("{"):
        return spec_from_json(text)
    kind, _, rest = text.partition(":")
    parts = [[float(x) for x in chunk.split(",") if x] for chunk in rest.split(":")] if rest else [[]]
    if kind == "uniform":
        return Uniform(*parts[0]) if parts[0] else Uniform()
    if kind == "beta":
        return Beta(*parts[0])
    if kind == "discrete":
        if len(parts) != 2:
            raise ValueError("discrete shorthand is discrete:<points>:<probs>")
        return Discrete(tuple(parts[0]), tuple(parts[1]))
    if kind == "truncnormal":
        return TruncatedNormal(*parts[0])
    raise ValueError(f"unknown distribution kind {kind!r}")
