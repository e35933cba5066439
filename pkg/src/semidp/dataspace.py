"""Finite categorical dataspaces, margin invariants, and adjacency geometry.

A dataspace holds n records, each a tuple of p feature levels (1-based).
Invariants are exact count statistics released without noise: per-feature
level counts (one-way margins) or counts over the product cells of grouped
features (joint margins). The operations here enumerate the datasets that
agree with a given invariant value and measure how far apart such datasets
sit in Hamming distance, which is what calibrates the widened adjacency
radius used downstream.

Everything is pure and operates on immutable tuples; enumeration order is
lexicographic and deterministic.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

#: Default ceiling on the raw dataspace size (#cells ** n) for enumeration.
ENUMERATION_CAP = 10_000_000

Dataset = tuple[tuple[int, ...], ...]
InvariantValue = tuple[tuple[int, ...], ...]


class EnumerationCapExceeded(RuntimeError):
    """Raised when an enumeration would exceed the configured state cap."""


@dataclass(frozen=True)
class DataspaceSpec:
    """n records over p categorical features with the given level counts."""

    n: int
    levels: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not self.levels or any(l < 1 for l in self.levels):
            raise ValueError("levels must be a non-empty tuple of positive ints")

    @property
    def p(self) -> int:
        return len(self.levels)

    def cell_count(self) -> int:
        out = 1
        for l in self.levels:
            out *= l
        return out

    def size(self) -> int:
        return self.cell_count() ** self.n


@dataclass(frozen=True)
class OneWayMargins:
    """Per-feature level counts for the listed features (0-based indices)."""

    features: tuple[int, ...]

    def groups(self) -> tuple[tuple[int, ...], ...]:
        return tuple((f,) for f in self.features)


@dataclass(frozen=True)
class JointMargins:
    """Counts over joint level combinations, one count vector per group."""

    groups_: tuple[tuple[int, ...], ...]

    def groups(self) -> tuple[tuple[int, ...], ...]:
        return self.groups_


InvariantSpec = Union[OneWayMargins, JointMargins]


def _validated_groups(spec: InvariantSpec, space: DataspaceSpec) -> tuple[tuple[int, ...], ...]:
    groups = spec.groups()
    seen: set[int] = set()
    for g in groups:
        for f in g:
            if not 0 <= f < space.p:
                raise ValueError(f"feature index {f} out of range for p={space.p}")
            if f in seen:
                raise ValueError(f"feature index {f} appears twice in the invariant")
            seen.add(f)
    return groups


def _group_sizes(groups: Sequence[tuple[int, ...]], space: DataspaceSpec) -> list[int]:
    out = []
    for g in groups:
        size = 1
        for f in g:
            size *= space.levels[f]
        out.append(size)
    return out


def _group_cell(row: tuple[int, ...], group: tuple[int, ...], space: DataspaceSpec) -> int:
    # row-major index over the group's level ranges
    idx = 0
    for f in group:
        idx = idx * space.levels[f] + (row[f] - 1)
    return idx


def validate_dataset(space: DataspaceSpec, rows: Dataset) -> None:
    if len(rows) != space.n:
        raise ValueError(f"dataset has {len(rows)} rows, expected {space.n}")
    for row in rows:
        if len(row) != space.p:
            raise ValueError(f"row {row} has {len(row)} features, expected {space.p}")
        for f, level in enumerate(row):
            if not 1 <= level <= space.levels[f]:
                raise ValueError(f"level {level} out of range for feature {f}")


def hamming_distance(x: Dataset, y: Dataset) -> int:
    """Number of record positions at which two datasets differ."""
    if len(x) != len(y):
        raise ValueError("datasets must have the same number of rows")
    return sum(1 for a, b in zip(x, y) if a != b)


def invariant_eval(spec: InvariantSpec, x: Dataset, space: DataspaceSpec) -> InvariantValue:
    """Count vector per invariant group, evaluated on a dataset."""
    validate_dataset(space, x)
    groups = _validated_groups(spec, space)
    sizes = _group_sizes(groups, space)
    counts = [[0] * size for size in sizes]
    for row in x:
        for gi, g in enumerate(groups):
            counts[gi][_group_cell(row, g, space)] += 1
    return tuple(tuple(c) for c in counts)


def conforming_set(
    space: DataspaceSpec,
    spec: InvariantSpec,
    t: InvariantValue,
    cap: int = ENUMERATION_CAP,
) -> list[Dataset]:
    """All datasets whose invariant equals t, in lexicographic order.

    Enumeration is a depth-first search over rows with pruning on the
    remaining per-cell budgets, refused outright when the raw dataspace
    exceeds ``cap`` states.
    """
    if space.size() > cap:
        raise EnumerationCapExceeded(
            f"dataspace has {space.size()} states, above the cap of {cap}"
        )
    groups = _validated_groups(spec, space)
    sizes = _group_sizes(groups, space)
    if len(t) != len(groups):
        raise ValueError(f"invariant value has {len(t)} groups, expected {len(groups)}")
    for vec, size in zip(t, sizes):
        if len(vec) != size:
            raise ValueError("invariant count vector length does not match group size")
        if any(c < 0 for c in vec):
            raise ValueError("invariant counts must be non-negative")
    if any(sum(vec) != space.n for vec in t):
        return []

    row_values = list(itertools.product(*[range(1, l + 1) for l in space.levels]))
    row_cells = [
        tuple(_group_cell(row, g, space) for g in groups) for row in row_values
    ]
    remaining = [list(vec) for vec in t]
    out: list[Dataset] = []
    prefix: list[tuple[int, ...]] = []

    def recurse(depth: int) -> None:
        if depth == space.n:
            out.append(tuple(prefix))
            return
        for row, cells in zip(row_values, row_cells):
            ok = True
            for gi, cell in enumerate(cells):
                if remaining[gi][cell] == 0:
                    ok = False
                    break
            if not ok:
                continue
            for gi, cell in enumerate(cells):
                remaining[gi][cell] -= 1
            prefix.append(row)
            recurse(depth + 1)
            prefix.pop()
            for gi, cell in enumerate(cells):
                remaining[gi][cell] += 1

    recurse(0)
    return out


def _row_codes(space: DataspaceSpec, datasets: Sequence[Dataset]) -> np.ndarray:
    # encode each record as a single joint-cell id so rows compare with ==
    all_group = tuple(range(space.p))
    return np.array(
        [[_group_cell(row, all_group, space) for row in x] for x in datasets],
        dtype=np.int64,
    )


def _pairwise_hamming(codes: np.ndarray, chunk: int = 512) -> np.ndarray:
    m = codes.shape[0]
    dist = np.empty((m, m), dtype=np.int32)
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        dist[start:stop] = (codes[start:stop, None, :] != codes[None, :, :]).sum(axis=2)
    return dist


def semi_adjacent_parameter(
    space: DataspaceSpec,
    spec: InvariantSpec,
    t: InvariantValue,
    cap: int = ENUMERATION_CAP,
) -> int:
    """Worst-case replacement radius within the invariant-conforming set.

    For every conforming dataset X, record position i, and feasible record
    value y for that position, some conforming dataset Y with Y_i = y must
    exist within the returned Hamming radius; the value is the maximum over
    (X, i, y) of the distance to the nearest such Y. A singleton conforming
    set yields 0: nothing is left to protect.
    """
    datasets = conforming_set(space, spec, t, cap=cap)
    if not datasets:
        raise ValueError("conforming set is empty; invariant value is infeasible")
    if len(datasets) == 1:
        return 0
    codes = _row_codes(space, datasets)
    dist = _pairwise_hamming(codes)
    worst = 0
    for i in range(space.n):
        column = codes[:, i]
        values = np.unique(column)
        index_groups = {int(v): np.nonzero(column == v)[0] for v in values}
        for x_val, x_idx in index_groups.items():
            for y_val, y_idx in index_groups.items():
                if x_val == y_val:
                    continue
                # farthest X needing to reach the nearest Y holding y at i
                block = dist[np.ix_(x_idx, y_idx)]
                worst = max(worst, int(block.min(axis=1).max()))
    return worst


def semi_adjacent_bound(p: int) -> int:
    """Replacement-radius bound for one-way margins over p features: p + 1."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return p + 1


def indistinguishable_pairs(
    datasets: Iterable[Dataset], radius: int
) -> set[tuple[Dataset, Dataset]]:
    """Unordered pairs of distinct datasets within the given Hamming radius."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    items = list(datasets)
    out: set[tuple[Dataset, Dataset]] = set()
    for a, b in itertools.combinations(items, 2):
        d = hamming_distance(a, b)
        if 1 <= d <= radius:
            out.add((a, b) if a <= b else (b, a))
    return out


def dataset_to_csv(x: Dataset) -> str:
    """One record per line, feature levels comma-separated."""
    return "\n".join(",".join(str(v) for v in row) for row in x) + "\n"


def dataset_from_csv(text: str) -> Dataset:
    rows = []
    for line in text.strip().splitlines():
        rows.append(tuple(int(v) for v in line.split(",")))
    return tuple(rows)


def invariant_value_to_json(t: InvariantValue) -> str:
    return json.dumps([list(vec) for vec in t])


def invariant_value_from_json(text: str) -> InvariantValue:
    return tuple(tuple(int(v) for v in vec) for vec in json.loads(text))
