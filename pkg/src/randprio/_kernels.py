"""numba kernels for Random Priority: exhaustive enumeration and sampling."""
from __future__ import annotations

import numpy as np
from numba import njit, uint64

from .streams import _derive_nb, _uniform_nb


def preference_lists(values: np.ndarray) -> np.ndarray:
    """Items of each agent sorted by decreasing value, ties by lowest index."""
    return np.ascontiguousarray(np.argsort(-np.asarray(values), axis=1, kind="stable"), dtype=np.int64)


@njit(cache=True, nogil=True)
def exact_counts(pref):
    """counts[i, j] = number of orderings under which agent i receives item j.

    Depth-first walk over ordering prefixes; a node at depth d adds the
    (n-d-1)! completions below it to the count of the pick made there.
    """
    n = pref.shape[0]
    fact = np.ones(n + 1, dtype=np.int64)
    for k in range(1, n + 1):
        fact[k] = fact[k - 1] * k
    counts = np.zeros((n, n), dtype=np.int64)
    used = np.zeros(n, dtype=np.bool_)
    taken = np.zeros(n, dtype=np.bool_)
    agent_at = np.zeros(n, dtype=np.int64)
    item_at = np.zeros(n, dtype=np.int64)
    next_agent = np.zeros(n + 1, dtype=np.int64)
    d = 0
    while d >= 0:
        a = next_agent[d]
        while a < n and used[a]:
            a += 1
        if a == n:
            d -= 1
            if d >= 0:
                used[agent_at[d]] = False
                taken[item_at[d]] = False
                next_agent[d] = agent_at[d] + 1
            continue
        p = 0
        while taken[pref[a, p]]:
            p += 1
        item = pref[a, p]
        counts[a, item] += fact[n - d - 1]
        if d == n - 1:
            next_agent[d] = a + 1
            continue
        used[a] = True
        taken[item] = True
        agent_at[d] = a
        item_at[d] = item
        d += 1
        next_agent[d] = 0
    return counts


@njit(cache=True, nogil=True)
def run_ordering(values, pref, ordering, assignment):
    n = values.shape[0]
    taken = np.zeros(n, dtype=np.bool_)
    total = 0.0
    for t in range(n):
        a = ordering[t]
        p = 0
        while taken[pref[a, p]]:
            p += 1
        item = pref[a, p]
        taken[item] = True
        assignment[a] = item
        total += values[a, item]
    return total


@njit(cache=True, nogil=True)
def sample_welfares(values, pref, base_key, start, count, out):
    """Welfare of samples start..start+count-1, each from its own stream.

    Sample s shuffles agents with Fisher-Yates driven by the stream
    derive(base_key, s); results land in out[0:count].
    """
    n = values.shape[0]
    order = np.empty(n, dtype=np.int64)
    assignment = np.empty(n, dtype=np.int64)
    taken = np.zeros(n, dtype=np.bool_)
    for s in range(count):
        key = _derive_nb(base_key, uint64(start + s))
        for i in range(n):
            order[i] = i
        draw = 0
        for k in range(n - 1, 0, -1):
            j = int(_uniform_nb(key, draw) * (k + 1))
            draw += 1
            tmp = order[k]
            order[k] = order[j]
            order[j] = tmp
        for i in range(n):
            taken[i] = False
        total = 0.0
        for t in range(n):
            a = order[t]
            p = 0
            while taken[pref[a, p]]:
                p += 1
            item = pref[a, p]
            taken[item] = True
            total += values[a, item]
        out[s] = total
    return out
