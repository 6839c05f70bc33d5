"""Instances, allocations, welfare and the Birkhoff-von Neumann decomposition."""
from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

STOCHASTIC_TOL = 1e-9
SUPPORT_THRESHOLD = 1e-12


class Mode(str, enum.Enum):
    UNIT_RANGE = "unit-range"
    BOX = "box"


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """An n x n valuation profile.

    ``preset`` holds the matrix positions fixed by normalization (one 1 and
    one 0 per row in unit-range mode).  Construction only checks shapes;
    use :func:`validate_instance` for the model constraints.
    """

    values: np.ndarray
    preset: frozenset = field(default_factory=frozenset)
    mode: Mode = Mode.UNIT_RANGE

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 1:
            raise ValueError(f"values must be a non-empty square matrix, got shape {values.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "preset", frozenset((int(i), int(j)) for i, j in self.preset))
        object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @classmethod
    def unit_range(cls, values) -> "Instance":
        """Unit-range instance with S inferred as the first 1 and first 0 of each row."""
        values = np.asarray(values, dtype=np.float64)
        preset = set()
        for i, row in enumerate(values):
            ones = np.flatnonzero(row == 1.0)
            zeros = np.flatnonzero(row == 0.0)
            if ones.size:
                preset.add((i, int(ones[0])))
            if zeros.size:
                preset.add((i, int(zeros[0])))
        return cls(values, frozenset(preset), Mode.UNIT_RANGE)

    def preset_mask(self) -> np.ndarray:
        mask = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.preset:
            mask[i, j] = True
        return mask

    def free_values(self) -> np.ndarray:
        return self.values[~self.preset_mask()]

    def with_row(self, i: int, row) -> "Instance":
        values = self.values.copy()
        values[i] = row
        return Instance(values, self.preset, self.mode)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.mode == other.mode and self.preset == other.preset
                and np.array_equal(self.values, other.values))

    __hash__ = None

    # serialization

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode.value,
            "values": self.values.tolist(),
            "preset": sorted([i, j] for i, j in self.preset),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        inst = cls(d["values"], frozenset(tuple(p) for p in d.get("preset", [])), Mode(d["mode"]))
        if int(d["n"]) != inst.n:
            raise ValueError(f"n={d['n']} does not match a {inst.n}x{inst.n} value matrix")
        return inst

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class Allocation:
    """Doubly stochastic matrix of assignment probabilities."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.ndim != 2 or probs.shape[0] != probs.shape[1]:
            raise ValueError(f"allocation must be square, got shape {probs.shape}")
        if probs.min() < -STOCHASTIC_TOL or probs.max() > 1 + STOCHASTIC_TOL:
            raise ValueError("allocation entries must lie in [0, 1]")
        if np.abs(probs.sum(axis=1) - 1).max() > STOCHASTIC_TOL:
            raise ValueError("allocation rows must sum to 1")
        if np.abs(probs.sum(axis=0) - 1).max() > STOCHASTIC_TOL:
            raise ValueError("allocation columns must sum to 1")
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def from_permutation(cls, perm) -> "Allocation":
        return cls(permutation_matrix(perm))


@dataclass(frozen=True)
class BirkhoffDecomposition:
    terms: tuple  # of (weight, permutation tuple)

    def to_matrix(self) -> np.ndarray:
        n = len(self.terms[0][1])
        out = np.zeros((n, n))
        for w, perm in self.terms:
            out[np.arange(n), perm] += w
        return out

    def to_dict(self) -> dict:
        return {"terms": [{"weight": w, "permutation": list(p)} for w, p in self.terms]}


def permutation_matrix(perm) -> np.ndarray:
    perm = np.asarray(perm)
    n = perm.size
    m = np.zeros((n, n))
    m[np.arange(n), perm] = 1.0
    return m


def validate_instance(inst: Instance) -> list[str]:
    """All violations of the instance model constraints; empty means valid."""
    problems = []
    n, a = inst.n, inst.values
    if np.isnan(a).any():
        problems.append("values contain NaN")
    if (a < 0).any() or (a > 1).any():
        problems.append("values must lie in [0, 1]")
    for i, j in sorted(inst.preset):
        if not (0 <= i < n and 0 <= j < n):
            problems.append(f"preset index ({i}, {j}) out of range")
    if inst.mode is Mode.BOX:
        return problems

    for i in range(n):
        if not (a[i] == 1.0).any():
            problems.append(f"row {i} has no one entry")
        if not (a[i] == 0.0).any():
            problems.append(f"row {i} has no zero entry")
    if len(inst.preset) != 2 * n:
        problems.append(f"preset has {len(inst.preset)} entries, expected {2 * n}")
    by_row: dict[int, list[float]] = {}
    for i, j in inst.preset:
        if 0 <= i < n and 0 <= j < n:
            by_row.setdefault(i, []).append(a[i, j])
    for i in range(n):
        vals = sorted(by_row.get(i, []))
        if vals != [0.0, 1.0]:
            problems.append(f"row {i} needs exactly one preset 1 and one preset 0, got {vals}")
    return problems


def _check_dims(inst: Instance, alloc: Allocation):
    if inst.n != alloc.n:
        raise ValueError(f"dimension mismatch: instance n={inst.n}, allocation n={alloc.n}")


def utility(inst: Instance, alloc: Allocation, agent: int) -> float:
    _check_dims(inst, alloc)
    return float(sum(inst.values[agent, j] * alloc.probs[agent, j] for j in range(inst.n)))


def social_welfare(inst: Instance, alloc: Allocation) -> float:
    _check_dims(inst, alloc)
    return float(sum(utility(inst, alloc, i) for i in range(inst.n)))


# --- Birkhoff-von Neumann ----------------------------------------------------


def _support_matching(residual: np.ndarray) -> np.ndarray:
    n = residual.shape[0]
    support = residual > SUPPORT_THRESHOLD
    # Prefer heavy entries: extracting large weights first keeps the term count low.
    cost = np.where(support, -residual, float(n + 1))
    rows, cols = linear_sum_assignment(cost)
    if not support[rows, cols].all():
        raise ValueError("no perfect matching on the support; matrix is not doubly stochastic")
    return cols


def _caratheodory_reduce(weights: list[float], perms: list[np.ndarray], limit: int):
    n = perms[0].size
    while len(weights) > limit:
        k = len(weights)
        m = np.zeros((n * n + 1, k))
        for t, p in enumerate(perms):
            m[:n * n, t] = permutation_matrix(p).ravel()
        m[n * n] = 1.0
        c = np.linalg.svd(m)[2][-1]
        if not (c > 0).any():
            c = -c
        pos = np.flatnonzero(c > 1e-12)
        t_idx = pos[np.argmin(np.asarray(weights)[pos] / c[pos])]
        step = weights[t_idx] / c[t_idx]
        new = [w - step * ci for w, ci in zip(weights, c)]
        new[t_idx] = 0.0
        keep = [t for t in range(k) if new[t] > 0.0]
        weights = [new[t] for t in keep]
        perms = [perms[t] for t in keep]
    return weights, perms


def birkhoff_decompose(alloc: Allocation) -> BirkhoffDecomposition:
    """Write ``alloc`` as a convex combination of permutation matrices.

    Repeatedly extracts a perfect matching on the positive support and
    subtracts its smallest entry.  If the greedy pass produces more than
    (n-1)^2 + 1 terms, affine dependencies among the permutation matrices
    are used to drop terms until the bound holds.
    """
    n = alloc.n
    residual = np.array(alloc.probs, dtype=np.float64)
    residual[residual < SUPPORT_THRESHOLD] = 0.0
    weights: list[float] = []
    perms: list[np.ndarray] = []
    rows = np.arange(n)
    while residual.sum() >= STOCHASTIC_TOL:
        cols = _support_matching(residual)
        w = float(residual[rows, cols].min())
        residual[rows, cols] -= w
        residual[residual < SUPPORT_THRESHOLD] = 0.0
        weights.append(w)
        perms.append(cols)
        if len(weights) > n * n:
            raise RuntimeError("decomposition did not terminate")
    weights, perms = _caratheodory_reduce(weights, perms, (n - 1) ** 2 + 1)
    # rounding can push a lone weight to 1 + ulp
    return BirkhoffDecomposition(tuple((min(w, 1.0), tuple(int(x) for x in p)) for w, p in zip(weights, perms)))


# --- matrix CSV ----------------------------------------------------------------


def matrix_to_csv(m: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    for row in np.asarray(m):
        writer.writerow([format(float(x), ".17g") for x in row])
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    return np.array([[float(x) for x in r] for r in rows], dtype=np.float64)


def load_instance(path: str | Path, mode: Mode = Mode.UNIT_RANGE) -> Instance:
    """Read an instance from core JSON, or a bare CSV value matrix."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        values = matrix_from_csv(text)
        return Instance.unit_range(values) if Mode(mode) is Mode.UNIT_RANGE else Instance(values, mode=Mode.BOX)
    return Instance.from_json(text)


def save_instance(inst: Instance, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        path.write_text(matrix_to_csv(inst.values))
    else:
        path.write_text(inst.to_json() + "\n")
