"""Random unit-range instances: i.i.d. and independent non-identical values.

Each free cell (i, j) draws from its own stream keyed by (seed, i, j), and
the preset positions of row i (under ``RANDOM_PER_ROW``) from the stream
(seed, "preset", i).  Changing one cell's distribution therefore never
perturbs another cell's value.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from . import streams
from .core import Instance, Mode
from .distributions import DistributionSpec, Uniform, spec_from_dict


class PresetPolicy(str, enum.Enum):
    FIXED_COLUMNS = "fixed-columns"
    RANDOM_PER_ROW = "random-per-row"


def fixed_preset(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Column of the preset 1 and preset 0 of every row: 0 and n-1."""
    return np.zeros(n, dtype=np.int64), np.full(n, n - 1, dtype=np.int64)


def _preset_positions(n: int, policy: PresetPolicy, seed: int):
    if PresetPolicy(policy) is PresetPolicy.FIXED_COLUMNS:
        return fixed_preset(n)
    ones = np.empty(n, dtype=np.int64)
    zeros = np.empty(n, dtype=np.int64)
    for i in range(n):
        key = streams.stream_key(seed, streams.TAG_PRESET, i)
        one = int(streams.uniform(key, 0) * n)
        zero = int(streams.uniform(key, 1) * (n - 1))
        ones[i] = one
        zeros[i] = zero + (zero >= one)
    return ones, zeros


def preset_mask(n: int, ones: np.ndarray, zeros: np.ndarray) -> np.ndarray:
    mask = np.zeros((n, n), dtype=bool)
    rows = np.arange(n)
    mask[rows, ones] = True
    mask[rows, zeros] = True
    return mask


class NonIidGrid:
    """Per-cell distributions for an n x n instance (preset cells ignored)."""

    def __init__(self, specs):
        specs = np.asarray(specs, dtype=object)
        if specs.ndim != 2 or specs.shape[0] != specs.shape[1]:
            raise ValueError(f"grid must be square, got shape {specs.shape}")
        for s in specs.flat:
            if not isinstance(s, DistributionSpec):
                raise TypeError(f"grid cell holds {type(s).__name__}, not a DistributionSpec")
        specs.setflags(write=False)
        self.specs = specs
        self._codes = None

    @property
    def n(self) -> int:
        return self.specs.shape[0]

    @classmethod
    def constant(cls, n: int, spec: DistributionSpec) -> "NonIidGrid":
        specs = np.empty((n, n), dtype=object)
        specs[:, :] = spec
        return cls(specs)

    @classmethod
    def checkerboard(cls, n: int, even: DistributionSpec, odd: DistributionSpec) -> "NonIidGrid":
        specs = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                specs[i, j] = even if (i + j) % 2 == 0 else odd
        return cls(specs)

    @classmethod
    def row_decay(cls, n: int) -> "NonIidGrid":
        """Row i ~ Uniform(0, 1/(i+1)): means shrink, breaking condition (i)."""
        specs = np.empty((n, n), dtype=object)
        for i in range(n):
            specs[i, :] = Uniform(0.0, 1.0 / (i + 1))
        return cls(specs)

    def codes(self) -> tuple[np.ndarray, list]:
        """Integer code per cell and the distinct specs the codes index."""
        if self._codes is None:
            lookup: dict = {}
            codes = np.array([lookup.setdefault(s, len(lookup)) for s in self.specs.flat], dtype=np.int64)
            self._codes = (codes, list(lookup))
        return self._codes

    def _free(self, mask):
        if mask is None:
            mask = preset_mask(self.n, *fixed_preset(self.n))
        return [s for s, m in zip(self.specs.flat, mask.flat) if not m]

    def means(self) -> np.ndarray:
        return np.vectorize(lambda s: s.mean(), otypes=[float])(self.specs)

    def variances(self) -> np.ndarray:
        return np.vectorize(lambda s: s.variance(), otypes=[float])(self.specs)

    def sum_mu(self, mask=None) -> float:
        """Sum of cell means off the preset set (fixed columns by default)."""
        return float(sum(s.mean() for s in self._free(mask)))

    def sum_var(self, mask=None) -> float:
        return float(sum(s.variance() for s in self._free(mask)))

    def to_dict(self) -> dict:
        flat = list(self.specs.flat)
        default = max(set(flat), key=flat.count)
        overrides = [{"i": i, "j": j, "spec": self.specs[i, j].to_dict()}
                     for i in range(self.n) for j in range(self.n) if self.specs[i, j] != default]
        return {"n": self.n, "default": default.to_dict(), "overrides": overrides}

    @classmethod
    def from_dict(cls, d: dict, n: int | None = None) -> "NonIidGrid":
        """Parse grid JSON.  ``pattern`` selects a built-in family sized to n."""
        n = int(d["n"]) if n is None else n
        pattern = d.get("pattern")
        if pattern == "checkerboard":
            return cls.checkerboard(n, spec_from_dict(d["even"]), spec_from_dict(d["odd"]))
        if pattern == "row-decay":
            return cls.row_decay(n)
        if pattern is not None:
            raise ValueError(f"unknown grid pattern {pattern!r}")
        specs = np.empty((n, n), dtype=object)
        specs[:, :] = spec_from_dict(d["default"])
        for o in d.get("overrides", []):
            i, j = int(o["i"]), int(o["j"])
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"override index ({i}, {j}) out of range for n={n}")
            specs[i, j] = spec_from_dict(o["spec"])
        return cls(specs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _assemble(n: int, codes: np.ndarray | None, specs: list, preset_policy, seed: int) -> Instance:
    seed = streams.check_seed(seed)
    ones, zeros = _preset_positions(n, preset_policy, seed)
    mask = preset_mask(n, ones, zeros).ravel()
    keys = streams.grid_keys(streams.stream_key(seed), n).ravel()
    values = np.zeros(n * n)
    for code, spec in enumerate(specs):
        cells = np.flatnonzero(~mask if codes is None else (~mask) & (codes == code))
        if cells.size:
            cell_keys = keys[cells]
            values[cells] = spec.sample(lambda k, active: streams.uniforms(cell_keys[active], k), cells.size)
    values = values.reshape(n, n)
    rows = np.arange(n)
    values[rows, ones] = 1.0
    values[rows, zeros] = 0.0
    preset = frozenset(zip(range(n), ones.tolist())) | frozenset(zip(range(n), zeros.tolist()))
    return Instance(values, preset, Mode.UNIT_RANGE)


def gen_iid(n: int, dist: DistributionSpec, preset_policy=PresetPolicy.FIXED_COLUMNS, seed: int = 0) -> Instance:
    """Unit-range instance whose n^2 - 2n free entries are i.i.d. from ``dist``."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not isinstance(dist, DistributionSpec):
        raise TypeError("dist must be a DistributionSpec")
    return _assemble(n, None, [dist], preset_policy, seed)


def gen_non_iid(n: int, grid: NonIidGrid, preset_policy=PresetPolicy.FIXED_COLUMNS, seed: int = 0) -> Instance:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if grid.n != n:
        raise ValueError(f"dimension mismatch: grid is {grid.n}x{grid.n}, n={n}")
    codes, specs = grid.codes()
    return _assemble(n, codes, specs, preset_policy, seed)


@dataclass(frozen=True)
class ConditionReport:
    n: int
    mu_density: float
    var_density: float

    def violations(self) -> list[str]:
        """Violations visible at a single n (degenerate densities)."""
        out = []
        if self.mu_density <= 0.0:
            out.append("condition (i): mean density is zero")
        if self.var_density <= 0.0:
            out.append("condition (ii): variance density is zero")
        return out


def condition_report(grid: NonIidGrid, n: int) -> ConditionReport:
    """Finite-n proxies: mean density sum_mu/(n^2-2n) and variance density sum_var/n."""
    if n <= 2:
        raise ValueError("condition report needs n >= 3 (no free entries at n = 2)")
    if grid.n != n:
        raise ValueError(f"dimension mismatch: grid is {grid.n}x{grid.n}, n={n}")
    return ConditionReport(n, grid.sum_mu() / (n * n - 2 * n), grid.sum_var() / n)


def assess_conditions(reports: list[ConditionReport], mu_floor: float = 0.05,
                      decay_ratio: float = 0.5) -> dict:
    """Judge conditions (i)/(ii) from reports over increasing n.

    (i) holds when the mean density stays above ``mu_floor`` and does not
    shrink below ``decay_ratio`` of its first value; (ii) holds when the
    variance density is positive and strictly increasing.
    """
    reports = sorted(reports, key=lambda r: r.n)
    mus = [r.mu_density for r in reports]
    vs = [r.var_density for r in reports]
    cond_i = min(mus) >= mu_floor and mus[-1] >= decay_ratio * mus[0]
    cond_ii = vs[0] > 0 and all(b > a for a, b in zip(vs, vs[1:]))
    violations = [v for r in reports for v in r.violations()]
    if not cond_i:
        violations.append("condition (i): mean density decays toward zero")
    if not cond_ii:
        violations.append("condition (ii): variance density does not grow with n")
    return {"condition_i": cond_i, "condition_ii": cond_ii, "violations": sorted(set(violations))}
