"""Monte Carlo counterparts of the bounds: ratios, tails, CLT gaps, adversarial search."""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import streams
from .bounds import (BoundConstants, berry_esseen_bound, dkw_epsilon, tail_bound_iid,
                     tail_bound_non_iid)
from .core import Instance, Mode
from .distributions import DistributionSpec, Uniform, norm_cdf
from .generators import NonIidGrid, PresetPolicy, gen_iid, gen_non_iid
from .matching import optimal_value
from .rp import exact_welfare, mc_welfares

EXACT_RP_MAX_N = 8
ADVERSARIAL_MAX_N = 7

Model = Union[DistributionSpec, NonIidGrid, Callable[[int], NonIidGrid]]


class RatioNotion(str, enum.Enum):
    EXPECTATION_OF_RATIO = "expectation-of-ratio"
    RATIO_OF_EXPECTATIONS = "ratio-of-expectations"


def resolve_grid(model: Model, n: int) -> NonIidGrid | None:
    if isinstance(model, DistributionSpec):
        return None
    grid = model if isinstance(model, NonIidGrid) else model(n)
    if grid.n != n:
        raise ValueError(f"dimension mismatch: grid is {grid.n}x{grid.n}, n={n}")
    return grid


def model_to_dict(model: Model, n: int) -> dict:
    grid = resolve_grid(model, n)
    return model.to_dict() if grid is None else grid.to_dict()


def trial_instance(model: Model, n: int, seed: int, trial: int,
                   policy: PresetPolicy = PresetPolicy.FIXED_COLUMNS) -> Instance:
    trial_seed = streams.stream_key(seed, streams.TAG_TRIAL, n, trial)
    grid = resolve_grid(model, n)
    if grid is None:
        return gen_iid(n, model, policy, trial_seed)
    return gen_non_iid(n, grid, policy, trial_seed)


def rp_welfare(values: np.ndarray, rp_samples: int, seed: int) -> float:
    """SW_RP: exact for n <= 8, otherwise the Monte Carlo mean."""
    if values.shape[0] <= EXACT_RP_MAX_N:
        return exact_welfare(values)
    return math.fsum(mc_welfares(values, rp_samples, seed)) / rp_samples


def _run_trials(fn, trials: int, workers: int, progress):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = []
            for t, r in enumerate(pool.map(fn, range(trials))):
                results.append(r)
                if progress:
                    progress(t + 1, trials)
            return results
    results = []
    for t in range(trials):
        results.append(fn(t))
        if progress:
            progress(t + 1, trials)
    return results


# --- ratios ---------------------------------------------------------------------


@dataclass(frozen=True)
class RatioTrials:
    n: int
    seed: int
    sw_opt: np.ndarray
    sw_rp: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        return self.sw_opt / self.sw_rp


@dataclass(frozen=True)
class RatioEstimate:
    mean: float
    stderr: float
    trials: int
    ci95: tuple
    notion: RatioNotion
    n: int = 0
    seed: int = 0
    rp_samples: int = 0
    model: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"n": self.n, "notion": self.notion.value, "trials": self.trials,
                "mean": self.mean, "stderr": self.stderr, "ci95": list(self.ci95),
                "rp_samples": self.rp_samples, "seed": self.seed, "model": self.model}


def ratio_trials(model: Model, n: int, trials: int, rp_samples: int, seed: int,
                 workers: int = 1, progress=None) -> RatioTrials:
    """SW_OPT and SW_RP on ``trials`` independent instances."""
    seed = streams.check_seed(seed)

    def one(t):
        values = trial_instance(model, n, seed, t).values
        rp_seed = streams.stream_key(seed, streams.TAG_RP, n, t)
        return optimal_value(values), rp_welfare(values, rp_samples, rp_seed)

    res = _run_trials(one, trials, workers, progress)
    return RatioTrials(n, seed, np.array([r[0] for r in res]), np.array([r[1] for r in res]))


def summarize_ratio(rt: RatioTrials, notion: RatioNotion) -> tuple[float, float]:
    m = rt.sw_opt.size
    if RatioNotion(notion) is RatioNotion.EXPECTATION_OF_RATIO:
        r = rt.ratios
        mean = math.fsum(r) / m
        var = math.fsum((r - mean) ** 2) / (m - 1)
        return mean, math.sqrt(var / m)
    o, p = rt.sw_opt, rt.sw_rp
    mo, mp = math.fsum(o) / m, math.fsum(p) / m
    cov = np.cov(np.vstack([o, p]), ddof=1)
    # delta method for mo / mp
    var = (cov[0, 0] / mp ** 2 - 2 * mo * cov[0, 1] / mp ** 3 + mo ** 2 * cov[1, 1] / mp ** 4) / m
    return mo / mp, math.sqrt(max(var, 0.0))


def avg_ratio(model: Model, n: int, trials: int, rp_samples: int,
              notion: RatioNotion = RatioNotion.EXPECTATION_OF_RATIO, seed: int = 0,
              workers: int = 1, progress=None) -> RatioEstimate:
    """Average-case approximation ratio of RP at size n."""
    if trials < 100:
        raise ValueError(f"avg_ratio needs trials >= 100, got {trials}")
    notion = RatioNotion(notion)
    rt = ratio_trials(model, n, trials, rp_samples, seed, workers, progress)
    mean, se = summarize_ratio(rt, notion)
    return RatioEstimate(mean, se, trials, (mean - 1.96 * se, mean + 1.96 * se), notion,
                         n, rt.seed, rp_samples, model_to_dict(model, n))


# --- tails ------------------------------------------------------------------------


@dataclass(frozen=True)
class TailReport:
    n: int
    lam: float
    empirical_prob: float
    theoretical_bound: float
    trials: int
    seed: int = 0
    rp_samples: int = 0
    model: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)

    @property
    def vacuous(self) -> bool:
        return self.theoretical_bound >= 1.0

    def to_dict(self) -> dict:
        return {"n": self.n, "lambda": self.lam, "empirical_prob": self.empirical_prob,
                "theoretical_bound": self.theoretical_bound, "trials": self.trials,
                "vacuous": self.vacuous, "seed": self.seed, "rp_samples": self.rp_samples,
                "model": self.model, "constants": self.constants}


def model_tail_bound(model: Model, n: int, consts: BoundConstants) -> float:
    grid = resolve_grid(model, n)
    if grid is None:
        return tail_bound_iid(n, model.std(), consts)
    return tail_bound_non_iid(n, grid.sum_var(), consts)


def empirical_tail(model: Model, n: int, lam: float, trials: int, rp_samples: int, seed: int,
                   consts: BoundConstants = BoundConstants(), workers: int = 1,
                   progress=None) -> TailReport:
    """Fraction of random instances with SW_RP <= lam, beside the matching bound."""
    if trials < 100:
        raise ValueError(f"empirical_tail needs trials >= 100, got {trials}")
    seed = streams.check_seed(seed)

    def one(t):
        values = trial_instance(model, n, seed, t).values
        return rp_welfare(values, rp_samples, streams.stream_key(seed, streams.TAG_RP, n, t))

    sw = np.array(_run_trials(one, trials, workers, progress))
    return TailReport(n, lam, float(np.count_nonzero(sw <= lam)) / trials,
                      model_tail_bound(model, n, consts), trials, seed, rp_samples,
                      model_to_dict(model, n), consts.to_dict())


# --- Berry-Esseen -----------------------------------------------------------------------


@dataclass(frozen=True)
class BerryEsseenReport:
    empirical_sup_gap: float
    bound: float
    dkw_slack: float
    n_sum: int
    trials: int
    grid_points: int
    seed: int
    model: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)

    def passes(self) -> bool:
        return self.empirical_sup_gap <= self.bound + self.dkw_slack

    def to_dict(self) -> dict:
        return {"empirical_sup_gap": self.empirical_sup_gap, "bound": self.bound,
                "dkw_slack": self.dkw_slack, "n_sum": self.n_sum, "trials": self.trials,
                "grid_points": self.grid_points, "seed": self.seed, "model": self.model,
                "constants": self.constants}


def normalized_sums(dist: DistributionSpec, n_sum: int, trials: int, seed: int) -> np.ndarray:
    """Samples of (sum of n_sum draws - n_sum*mu) / (sigma sqrt(n_sum))."""
    mu, sigma = dist.mean(), dist.std()
    rows = max(1, (1 << 20) // n_sum)
    out = np.empty(trials)
    for c, start in enumerate(range(0, trials, rows)):
        k = min(rows, trials - start)
        rng = np.random.default_rng(streams.stream_key(seed, streams.TAG_BERRY_ESSEEN, n_sum, c))
        x = dist.sample_rng(rng, k * n_sum).reshape(k, n_sum)
        out[start:start + k] = (x.sum(axis=1) - n_sum * mu) / (sigma * math.sqrt(n_sum))
    return out


def sup_gap(samples: np.ndarray, grid: np.ndarray) -> float:
    s = np.sort(samples)
    ecdf = np.searchsorted(s, grid, side="right") / s.size
    return float(np.max(np.abs(ecdf - norm_cdf(grid))))


def berry_esseen_grid(grid_points: int, half_width: float = 4.0) -> np.ndarray:
    return np.linspace(-half_width, half_width, grid_points)


def berry_esseen_gap(dist: DistributionSpec, n_sum: int, trials: int, grid_points: int, seed: int,
                     consts: BoundConstants = BoundConstants(),
                     confidence: float = 0.999) -> BerryEsseenReport:
    """Empirical sup |F_n - Phi| over an x-grid against the Berry-Esseen bound."""
    if trials < 10_000:
        raise ValueError(f"berry_esseen_gap needs trials >= 1e4, got {trials}")
    if grid_points < 100:
        raise ValueError(f"berry_esseen_gap needs grid_points >= 100, got {grid_points}")
    seed = streams.check_seed(seed)
    gap = sup_gap(normalized_sums(dist, n_sum, trials, seed), berry_esseen_grid(grid_points))
    return BerryEsseenReport(gap, berry_esseen_bound(dist, n_sum, consts), dkw_epsilon(trials, confidence),
                             n_sum, trials, grid_points, seed, dist.to_dict(), consts.to_dict())


# --- adversarial search ------------------------------------------------------------


@dataclass(frozen=True)
class AdversarialResult:
    instance: Instance
    ratio: float
    trace: tuple  # (restart, iteration, best ratio so far)
    seed: int = 0


def instance_ratio(values: np.ndarray) -> float:
    rp = exact_welfare(values)
    opt = optimal_value(values)
    if rp <= 0.0:
        return 1.0 if opt <= 0.0 else math.inf
    return opt / rp


def adversarial_search(n: int, iters: int, restarts: int, seed: int,
                       mode: Mode = Mode.UNIT_RANGE) -> AdversarialResult:
    """Hill-climb SW_OPT / SW_RP over free entries with geometric cooling.

    Each step perturbs one free entry by U(-m, m), m = 0.25 * 0.9^(t/100),
    clips to [0, 1] and keeps the change only on strict improvement.
    Unit-range restarts draw fresh preset positions per row.
    """
    if not 2 <= n <= ADVERSARIAL_MAX_N:
        raise ValueError(f"adversarial search needs 2 <= n <= {ADVERSARIAL_MAX_N}, got n={n}")
    seed = streams.check_seed(seed)
    mode = Mode(mode)
    best_inst, best = None, -math.inf
    trace = []
    for r in range(restarts):
        key = streams.stream_key(seed, streams.TAG_ADVERSARIAL, r)
        rng = np.random.default_rng(key)
        if mode is Mode.UNIT_RANGE:
            start = gen_iid(n, Uniform(), PresetPolicy.RANDOM_PER_ROW, key)
            values, preset = start.values.copy(), start.preset
            free = np.flatnonzero(~start.preset_mask().ravel())
        else:
            values, preset = rng.random((n, n)), frozenset()
            free = np.arange(n * n)
        flat = values.ravel()
        current = instance_ratio(values)
        for t in range(iters):
            if free.size:
                cell = free[rng.integers(free.size)]
                mag = 0.25 * 0.9 ** (t / 100)
                old = flat[cell]
                flat[cell] = min(1.0, max(0.0, old + rng.uniform(-mag, mag)))
                cand = instance_ratio(values)
                if cand > current:
                    current = cand
                else:
                    flat[cell] = old
            if current > best:
                best, best_inst = current, Instance(values.copy(), preset, mode)
            trace.append((r, t, best))
        if best_inst is None:
            best, best_inst = current, Instance(values.copy(), preset, mode)
    return AdversarialResult(best_inst, best, tuple(trace), seed)
