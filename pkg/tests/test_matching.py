import itertools

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from randprio.core import Instance, Mode
from randprio.generators import PresetPolicy, gen_iid
from randprio.distributions import Uniform
from randprio.matching import optimal_welfare, optimal_welfare_bruteforce

M3 = [[0.5, 1, 0], [1, 0.5, 0], [0, 1, 0.5]]


def itertools_optimum(values):
    n = len(values)
    return max(sum(values[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def test_identity():
    res = optimal_welfare(Instance(np.eye(3)))
    assert res.value == 3 and res.assignment == (0, 1, 2)
    assert optimal_welfare_bruteforce(Instance(np.eye(2))).value == 2


def test_single_valuable_column():
    assert optimal_welfare(Instance([[1, 0], [1, 0]])).value == 1


def test_three_by_three_example():
    for solver in (optimal_welfare, optimal_welfare_bruteforce):
        res = solver(Instance(M3, mode=Mode.BOX))
        assert res.value == 2.5
        assert res.assignment == (1, 0, 2)


@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
@settings(max_examples=100)
def test_solver_matches_bruteforce_and_itertools(n, seed):
    values = np.random.default_rng(seed).random((n, n))
    inst = Instance(values, mode=Mode.BOX)
    fast = optimal_welfare(inst).value
    assert abs(fast - optimal_welfare_bruteforce(inst).value) <= 1e-12
    assert abs(fast - itertools_optimum(values.tolist())) <= 1e-12


@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.floats(0.01, 1.0))
def test_scaling_and_permutation_invariance(n, seed, scale):
    rng = np.random.default_rng(seed)
    values = rng.random((n, n))
    base = optimal_welfare(Instance(values, mode=Mode.BOX)).value
    assert optimal_welfare(Instance(values * scale, mode=Mode.BOX)).value == pytest.approx(base * scale, abs=1e-12)
    shuffled = values[rng.permutation(n)][:, rng.permutation(n)]
    assert optimal_welfare(Instance(shuffled, mode=Mode.BOX)).value == pytest.approx(base, abs=1e-12)


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_unit_range_optimum_between_one_and_n(n, seed):
    inst = gen_iid(n, Uniform(), PresetPolicy.RANDOM_PER_ROW, seed)
    res = optimal_welfare(inst)
    assert 1.0 <= res.value <= n
    assert sorted(res.assignment) == list(range(n))


def test_bruteforce_size_cap():
    with pytest.raises(ValueError):
        optimal_welfare_bruteforce(Instance(np.eye(11)))
