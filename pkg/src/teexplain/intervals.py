"""Split points, interval decomposition, size measures and coverage.

Intervals are indexed from 0.  Feature ``i`` with sorted split points
``s_0 < ... < s_{k-1}`` has ``k + 1`` intervals: ``[lo, s_0)``,
``[s_0, s_1)``, ..., ``[s_{k-1}, hi]``.  A region keeps, per feature, an
inclusive pair ``(l, u)`` of interval indices.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .model import TreeEnsemble

# log weights are wrapped as rationals with this denominator
COST_DENOMINATOR = 10**9


@dataclass(frozen=True)
class Region:
    bounds: tuple[tuple[int, int], ...]

    def __iter__(self):
        return iter(self.bounds)

    def __len__(self):
        return len(self.bounds)

    def __getitem__(self, i):
        return self.bounds[i]

    def contains_cell(self, cell: Sequence[int]) -> bool:
        return all(l <= j <= u for (l, u), j in zip(self.bounds, cell))

    def covers(self, other: "Region") -> bool:
        return all(l <= a and b <= u for (l, u), (a, b) in zip(self.bounds, other.bounds))

    def with_feature(self, i: int, l: int, u: int) -> "Region":
        b = list(self.bounds)
        b[i] = (l, u)
        return Region(tuple(b))


@dataclass(frozen=True)
class IntervalTable:
    split_points: tuple[tuple[float, ...], ...]
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.split_points)

    def n_intervals(self, i: int) -> int:
        return len(self.split_points[i]) + 1

    def interval(self, i: int, j: int) -> tuple[float, float]:
        s = self.split_points[i]
        left = self.lo[i] if j == 0 else s[j - 1]
        right = self.hi[i] if j == len(s) else s[j]
        return left, right

    def span(self, i: int, l: int, u: int) -> tuple[float, float]:
        """Numeric ``(inf, sup)`` of the union of intervals ``l..u``."""
        return self.interval(i, l)[0], self.interval(i, u)[1]

    def full_region(self) -> Region:
        return Region(tuple((0, self.n_intervals(i) - 1) for i in range(self.m)))

    def cell_region(self, cell: Sequence[int]) -> Region:
        return Region(tuple((j, j) for j in cell))

    def is_free(self, region: Region, i: int) -> bool:
        return region[i] == (0, self.n_intervals(i) - 1)

    def restricted(self, region: Region) -> list[int]:
        """Features whose range is narrower than the full domain."""
        return [i for i in range(self.m) if not self.is_free(region, i)]

    def locate_point(self, point: Sequence[float]) -> tuple[int, ...]:
        return tuple(locate(x, i, self) for i, x in enumerate(point))

    def representative(self, i: int, j: int) -> float:
        a, b = self.interval(i, j)
        return (a + b) / 2


def build_interval_table(te: TreeEnsemble) -> IntervalTable:
    splits: list[set[float]] = [set() for _ in range(te.features.m)]
    for tree in te.trees:
        for feat, thr in tree.thresholds():
            splits[feat].add(thr)
    return IntervalTable(tuple(tuple(sorted(s)) for s in splits),
                         te.features.lo, te.features.hi)


def locate(value: float, feature: int, table: IntervalTable) -> int:
    """Index ``j`` of the interval containing ``value`` (half-open on the right)."""
    if not table.lo[feature] <= value <= table.hi[feature]:
        raise ValueError(f"value {value} outside the domain of feature {feature}")
    return bisect.bisect_right(table.split_points[feature], value)


class SizeMeasure:
    """Per-interval sizes that sum to 1 on each feature."""

    kind = "abstract"

    def __init__(self, table: IntervalTable, sizes: Sequence[Sequence[float]]):
        self.table = table
        self.sizes = tuple(tuple(s) for s in sizes)
        # prefix sums for O(1) range sizes
        self._prefix = []
        for s in self.sizes:
            acc = [0.0]
            for x in s:
                acc.append(acc[-1] + x)
            self._prefix.append(acc)

    def size(self, i: int, l: int, u: int) -> float:
        if l == 0 and u == len(self.sizes[i]) - 1:
            return 1.0
        p = self._prefix[i]
        return p[u + 1] - p[l]

    def weight(self, i: int, l: int, u: int) -> float:
        return interval_weight(i, l, u, self)

    def cost(self, i: int, l: int, u: int) -> Fraction:
        """``-weight`` as a rational with a fixed denominator (never negative)."""
        return Fraction(round(-self.weight(i, l, u) * COST_DENOMINATOR), COST_DENOMINATOR)


class ProportionMeasure(SizeMeasure):
    kind = "prop"

    def __init__(self, table: IntervalTable):
        sizes = []
        for i in range(table.m):
            width = table.hi[i] - table.lo[i]
            row = []
            for j in range(table.n_intervals(i)):
                a, b = table.interval(i, j)
                row.append((b - a) / width)
            sizes.append(row)
        super().__init__(table, sizes)


class DataProportionMeasure(SizeMeasure):
    """Fraction of training rows per interval with add-one smoothing."""

    kind = "data"

    def __init__(self, table: IntervalTable, rows: Sequence[Sequence[float]]):
        if not rows:
            raise ValueError("data-proportion measure needs at least one training row")
        n = len(rows)
        sizes = []
        for i in range(table.m):
            k = table.n_intervals(i)
            counts = [0] * k
            for row in rows:
                x = min(max(float(row[i]), table.lo[i]), table.hi[i])
                counts[locate(x, i, table)] += 1
            sizes.append([(c + 1) / (n + k) for c in counts])
        self.counts_total = n
        super().__init__(table, sizes)


def make_measure(kind: str, table: IntervalTable, rows=None) -> SizeMeasure:
    if kind in ("prop", "proportion"):
        return ProportionMeasure(table)
    if kind in ("data", "data-proportion"):
        if rows is None:
            raise ValueError("the data measure requires a training dataset")
        return DataProportionMeasure(table, rows)
    raise ValueError(f"unknown size measure {kind!r}")


def interval_weight(feature: int, l: int, u: int, measure: SizeMeasure) -> float:
    """log of the summed sizes of intervals ``l..u``; 0 for the full domain."""
    return math.log(measure.size(feature, l, u))


def fsc(region: Region, table: IntervalTable, measure: SizeMeasure) -> float:
    """Feature-space coverage: sum over features of log s(E_i)."""
    return sum(0.0 if table.is_free(region, i) else interval_weight(i, l, u, measure)
               for i, (l, u) in enumerate(region))


def region_cost(region: Region, measure: SizeMeasure) -> Fraction:
    """Negated FSC in the rational representation used by the candidate oracles."""
    return sum((measure.cost(i, l, u) for i, (l, u) in enumerate(region)), Fraction(0))


def coverage_percent(value: float) -> float:
    return 100.0 * math.exp(value)


def read_dataset(text: str | Iterable[str], n_features: int | None = None):
    """Parse comma-separated training data with a header row.

    Returns ``(header, rows)``; only the first ``n_features`` columns are kept
    (the label column, if any, is ignored).
    """
    if isinstance(text, str):
        text = io.StringIO(text)
    reader = csv.reader(text)
    header = next(reader)
    width = n_features if n_features is not None else len(header)
    rows = []
    for line in reader:
        if not line or all(not c.strip() for c in line):
            continue
        rows.append(tuple(float(c) for c in line[:width]))
    return [h.strip() for h in header], rows
