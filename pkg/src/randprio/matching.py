"""Optimal social welfare as a maximum-weight perfect matching."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Instance

BRUTEFORCE_MAX_N = 10


@dataclass(frozen=True)
class MatchingResult:
    assignment: tuple  # agent -> item
    value: float


def assignment_value(values: np.ndarray, assignment) -> float:
    return float(sum(values[i, j] for i, j in enumerate(assignment)))


def optimal_welfare(inst: Instance) -> MatchingResult:
    """SW_OPT via an exact O(n^3) assignment solver (weights maximized directly)."""
    rows, cols = linear_sum_assignment(inst.values, maximize=True)
    assignment = tuple(int(c) for c in cols[np.argsort(rows)])
    return MatchingResult(assignment, assignment_value(inst.values, assignment))


def optimal_value(values: np.ndarray) -> float:
    rows, cols = linear_sum_assignment(values, maximize=True)
    return float(values[rows, cols].sum())


@lru_cache(maxsize=None)
def _all_permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int8)


def optimal_welfare_bruteforce(inst: Instance) -> MatchingResult:
    """Exhaustive maximum over all n! assignments; test oracle, n <= 10."""
    n = inst.n
    if n > BRUTEFORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTEFORCE_MAX_N}, got n={n}")
    perms = _all_permutations(n)
    rows = np.arange(n)
    best_val, best_perm = -math.inf, None
    chunk = 1 << 18
    for start in range(0, len(perms), chunk):
        block = perms[start:start + chunk]
        totals = inst.values[rows, block].sum(axis=1)
        k = int(np.argmax(totals))
        if totals[k] > best_val:
            best_val, best_perm = totals[k], block[k]
    assignment = tuple(int(c) for c in best_perm)
    return MatchingResult(assignment, assignment_value(inst.values, assignment))
