"""Closed-form thresholds and bounds for the average-case ratio of RP.

All functions are pure.  ``c1`` (the worst-case envelope coefficient) and
``C_prime`` (the non-identical Berry-Esseen constant) have no published
values; finite-n bounds are conditional on the configured constants.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .distributions import DistributionSpec

PRIOR_UNIFORM_BOUND = 3.718


class OutsideValidityWindow(ValueError):
    """Raised when a finite-n bound is evaluated where its derivation fails."""


@dataclass(frozen=True)
class BoundConstants:
    C: float = 0.475
    C_prime: float = 0.56
    c1: float = 1.0

    def __post_init__(self):
        if not 0.409 < self.C <= 0.475:
            raise ValueError(f"C must lie in (0.409, 0.475], got {self.C}")
        if not self.C_prime > 0:
            raise ValueError(f"C_prime must be positive, got {self.C_prime}")
        if not self.c1 > 0:
            raise ValueError(f"c1 must be positive, got {self.c1}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "BoundConstants":
        return cls(**{k: float(v) for k, v in d.items()})


def _check_n(n: int):
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")


def lambda_iid(n: int, mu: float, sigma: float) -> float:
    """Welfare threshold 1 + mu(n-2) - sigma*sqrt(2(n-2) ln n / n).

    n = 2 returns 1 by convention (every (n-2) factor vanishes).
    """
    if not (0 < mu < 1 and sigma > 0):
        raise ValueError(f"need 0 < mu < 1 and sigma > 0, got mu={mu}, sigma={sigma}")
    if n == 2:
        return 1.0
    _check_n(n)
    return 1.0 + mu * (n - 2) - sigma * math.sqrt(2.0 * (n - 2) / n * math.log(n))


def _gaussian_tail_term(n: int) -> float:
    return 1.0 / (2.0 * n * math.sqrt(math.pi * math.log(n)))


def tail_bound_iid(n: int, sigma: float, consts: BoundConstants = BoundConstants()) -> float:
    """Upper bound on Pr{SW_RP <= lambda_iid} for i.i.d. values."""
    _check_n(n)
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return _gaussian_tail_term(n) + consts.C / (sigma ** 3 * math.sqrt(n * (n - 2)))


def lambda_non_iid(n: int, sum_mu: float, sum_var: float) -> float:
    _check_n(n)
    if sum_mu < 0 or sum_var < 0:
        raise ValueError("sum_mu and sum_var must be non-negative")
    return 1.0 + sum_mu / n - math.sqrt(2.0 * math.log(n)) / n * math.sqrt(sum_var)


def tail_bound_non_iid(n: int, sum_var: float, consts: BoundConstants = BoundConstants()) -> float:
    _check_n(n)
    if not sum_var > 0:
        raise ValueError("sum_var must be positive")
    return _gaussian_tail_term(n) + consts.C_prime / math.sqrt(sum_var)


def validity_deviation(n: int, mu: float, sigma: float) -> float:
    """|2/n - 1/(mu n) + sigma sqrt(2 ln n)/(mu n)|; the i.i.d. bound needs it < 1/2."""
    return abs(2.0 / n - 1.0 / (mu * n) + sigma * math.sqrt(2.0 * math.log(n)) / (mu * n))


def theorem2_finite_bound(n: int, mu: float, sigma: float,
                          consts: BoundConstants = BoundConstants()) -> float:
    """n/lambda + tail_bound * c1 sqrt(n): the i.i.d. bound before limits."""
    _check_n(n)
    if validity_deviation(n, mu, sigma) >= 0.5:
        raise OutsideValidityWindow(f"outside validity window at n={n} (deviation >= 1/2)")
    lam = lambda_iid(n, mu, sigma)
    if lam <= 0:
        raise OutsideValidityWindow(f"outside validity window at n={n} (lambda <= 0)")
    return n / lam + tail_bound_iid(n, sigma, consts) * consts.c1 * math.sqrt(n)


def theorem4_finite_bound(n: int, sum_mu: float, sum_var: float,
                          consts: BoundConstants = BoundConstants()) -> float:
    lam = lambda_non_iid(n, sum_mu, sum_var)
    if lam <= 0:
        raise OutsideValidityWindow(f"lambda = {lam:.6g} <= 0 at n={n}; conditions badly violated")
    return n / lam + tail_bound_non_iid(n, sum_var, consts) * consts.c1 * math.sqrt(n)


def berry_esseen_bound(dist: DistributionSpec, n_sum: int,
                       consts: BoundConstants = BoundConstants()) -> float:
    """C * E|X - mu|^3 / (sigma^3 sqrt(n_sum))."""
    sigma = dist.std()
    if not sigma > 0:
        raise ValueError("Berry-Esseen bound needs positive variance")
    return consts.C * dist.third_abs_central_moment() / (sigma ** 3 * math.sqrt(n_sum))


def dkw_epsilon(m: int, confidence: float) -> float:
    """Half-width of the DKW band for an m-sample empirical CDF."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * m))
