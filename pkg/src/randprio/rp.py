"""The Random Priority (random serial dictatorship) mechanism."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import streams
from ._kernels import exact_counts, preference_lists, sample_welfares
from .core import Allocation, Instance, Mode, social_welfare

EXACT_MAX_N = 10
TRUTHFUL_MAX_N = 6
MC_CHUNK = 1 << 16


@dataclass(frozen=True)
class RpExact:
    allocation: Allocation
    expected_welfare: float


@dataclass(frozen=True)
class WelfareEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int


@dataclass(frozen=True)
class TruthfulnessReport:
    max_gain: float
    witnessing_misreport: tuple | None
    truthful_utility: float


def _check_ordering(ordering, n: int) -> np.ndarray:
    order = np.asarray(ordering, dtype=np.int64)
    if order.shape != (n,) or sorted(order.tolist()) != list(range(n)):
        raise ValueError(f"ordering must be a permutation of range({n}), got {list(ordering)}")
    return order


def rp_run_once(inst: Instance, ordering, item_priority=None) -> tuple[tuple, float]:
    """Serve agents in ``ordering``; each takes its best remaining item.

    Ties go to the item listed first in ``item_priority`` (default: lowest
    index).  Returns (assignment agent -> item, welfare).
    """
    n = inst.n
    order = _check_ordering(ordering, n)
    if item_priority is None:
        rank = np.arange(n)
    else:
        rank = np.empty(n, dtype=np.int64)
        rank[_check_ordering(item_priority, n)] = np.arange(n)
    available = set(range(n))
    assignment = [0] * n
    welfare = 0.0
    for a in order:
        row = inst.values[a]
        item = max(available, key=lambda j: (row[j], -rank[j]))
        available.remove(item)
        assignment[a] = item
        welfare += row[item]
    return tuple(int(x) for x in assignment), float(welfare)


def _exact_allocation(values: np.ndarray) -> np.ndarray:
    counts = exact_counts(preference_lists(values))
    return counts / float(math.factorial(values.shape[0]))


def rp_exact(inst: Instance) -> RpExact:
    """Expected allocation over all n! orderings (n <= 10)."""
    if inst.n > EXACT_MAX_N:
        raise ValueError(f"exact enumeration limited to n <= {EXACT_MAX_N}, got n={inst.n}")
    alloc = Allocation(_exact_allocation(inst.values))
    return RpExact(alloc, social_welfare(inst, alloc))


def exact_welfare(values: np.ndarray) -> float:
    """Expected RP welfare of a raw value matrix (same arithmetic as rp_exact)."""
    x = _exact_allocation(values)
    n = values.shape[0]
    return float(sum(float(sum(values[i, j] * x[i, j] for j in range(n))) for i in range(n)))


def mc_welfares(values: np.ndarray, samples: int, seed: int, workers: int = 1) -> np.ndarray:
    """Per-sample RP welfare, in sample-index order."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    values = np.ascontiguousarray(values, dtype=np.float64)
    pref = preference_lists(values)
    base = np.uint64(streams.stream_key(seed, streams.TAG_RP))
    out = np.empty(samples, dtype=np.float64)
    starts = range(0, samples, MC_CHUNK)

    def run(start):
        count = min(MC_CHUNK, samples - start)
        sample_welfares(values, pref, base, start, count, out[start:start + count])

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, starts))
    else:
        for s in starts:
            run(s)
    return out


def summarize(welfares: np.ndarray) -> tuple[float, float]:
    """Mean and standard error with order-independent exact summation."""
    m = len(welfares)
    mean = math.fsum(welfares) / m
    if m < 2:
        return mean, 0.0
    var = math.fsum((welfares - mean) ** 2) / (m - 1)
    return mean, math.sqrt(var / m)


def rp_welfare_mc(inst: Instance, samples: int, seed: int, workers: int = 1) -> WelfareEstimate:
    seed = streams.check_seed(seed)
    w = mc_welfares(inst.values, samples, seed, workers)
    mean, stderr = summarize(w)
    return WelfareEstimate(mean, stderr, samples, seed)


def rp_welfare_lower_bound(inst: Instance) -> float:
    """1 + (1/n) * sum of the non-preset entries."""
    if inst.mode is not Mode.UNIT_RANGE or len(inst.preset) != 2 * inst.n:
        raise ValueError("lower bound needs a unit-range instance with 2n preset entries")
    return 1.0 + math.fsum(inst.free_values()) / inst.n


def admissible_row(row, mode: Mode) -> bool:
    row = np.asarray(row, dtype=np.float64)
    if (row < 0).any() or (row > 1).any():
        return False
    if Mode(mode) is Mode.UNIT_RANGE:
        return bool((row == 1.0).any() and (row == 0.0).any())
    return True


def check_truthfulness(inst: Instance, agent: int, misreports) -> TruthfulnessReport:
    """Largest expected-utility gain ``agent`` can get from any listed misreport."""
    n = inst.n
    if n > TRUTHFUL_MAX_N:
        raise ValueError(f"truthfulness check limited to n <= {TRUTHFUL_MAX_N}")
    true_row = inst.values[agent]
    truthful = float(np.dot(true_row, _exact_allocation(inst.values)[agent]))
    best_gain, witness = -math.inf, None
    for report in misreports:
        report = np.asarray(report, dtype=np.float64)
        if report.shape != (n,):
            raise ValueError(f"misreport must have length {n}, got shape {report.shape}")
        if not admissible_row(report, inst.mode):
            raise ValueError(f"misreport {report.tolist()} is not admissible in {inst.mode.value} mode")
        values = inst.values.copy()
        values[agent] = report
        gain = float(np.dot(true_row, _exact_allocation(values)[agent])) - truthful
        if gain > best_gain:
            best_gain, witness = gain, tuple(report.tolist())
    return TruthfulnessReport(best_gain, witness, truthful)
