"""AXp / CXp extraction and greedy interval inflation."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .encoding import Counterexample, TeEncoding
from .intervals import (IntervalTable, ProportionMeasure, Region, SizeMeasure,
                        build_interval_table, fsc)
from .model import TreeEnsemble, make_instance


class ExplanationProblem:
    """A model, an instance and its prediction, plus the interval view of both.

    Owns one :class:`TeEncoding` for the predicted class; not meant to be
    shared between threads.
    """

    def __init__(self, te: TreeEnsemble, point: Sequence[float],
                 measure: SizeMeasure | None = None, table: IntervalTable | None = None):
        self.te = te
        self.instance = make_instance(te, point)
        self.table = table if table is not None else build_interval_table(te)
        self.measure = measure if measure is not None else ProportionMeasure(self.table)
        self.cell = self.table.locate_point(self.instance.values)
        self._encoding: TeEncoding | None = None

    @property
    def target(self) -> int:
        return self.instance.predicted_class

    @property
    def m(self) -> int:
        return self.te.features.m

    @property
    def encoding(self) -> TeEncoding:
        if self._encoding is None:
            self._encoding = TeEncoding(self.te, self.table, self.target)
        return self._encoding

    @property
    def oracle_calls(self) -> int:
        return 0 if self._encoding is None else self._encoding.calls

    def fixed_region(self, features) -> Region:
        """Instance interval on ``features``, full domain elsewhere."""
        features = set(features)
        return Region(tuple((e, e) if i in features else (0, self.table.n_intervals(i) - 1)
                            for i, e in enumerate(self.cell)))

    def fsc(self, region: Region) -> float:
        return fsc(region, self.table, self.measure)


@dataclass(frozen=True)
class ICxp:
    """Inflated CXp: features ``Y`` and, for each of them, an interval range
    ``(a, b)`` that excludes the instance's interval."""
    features: tuple[int, ...]
    ranges: tuple[tuple[int, int], ...]

    def items(self):
        return zip(self.features, self.ranges)


@dataclass
class Explanation:
    kind: str  # "AXp", "CXp", "iAXp", "iCXp" or "MaxiAXp"
    features: tuple[int, ...]
    region: Region | None = None
    fsc: float | None = None
    stats: dict = field(default_factory=dict)


def is_weak_axp(problem: ExplanationProblem, subset) -> bool:
    return problem.encoding.is_valid(problem.fixed_region(subset))


def compute_axp(problem: ExplanationProblem) -> Explanation:
    """Deletion-based: drop features in ascending order while the rest still entails c."""
    start, calls = time.perf_counter(), problem.oracle_calls
    kept = set(range(problem.m))
    for i in range(problem.m):
        if is_weak_axp(problem, kept - {i}):
            kept.discard(i)
    return Explanation("AXp", tuple(sorted(kept)), stats=_stats(problem, start, calls))


def compute_cxp(problem: ExplanationProblem) -> Explanation | None:
    """Deletion-based: re-fix features in ascending order while a counterexample survives.

    Returns None when no change of any feature alters the prediction.
    """
    start, calls = time.perf_counter(), problem.oracle_calls
    free = set(range(problem.m))
    if is_weak_axp(problem, ()):
        return None
    for i in range(problem.m):
        fixed = set(range(problem.m)) - (free - {i})
        if not is_weak_axp(problem, fixed):
            free.discard(i)
    return Explanation("CXp", tuple(sorted(free)), stats=_stats(problem, start, calls))


def inflate_axp(problem: ExplanationProblem, features) -> Explanation:
    """Greedy inflation of a weak AXp, one interval at a time.

    Features are visited in ascending order; each is widened upwards first,
    then downwards.  Features that reach their full domain leave the
    explanation.
    """
    start, calls = time.perf_counter(), problem.oracle_calls
    enc = problem.encoding
    region = problem.fixed_region(features)
    if not enc.is_valid(region):
        raise ValueError("features do not form a weak AXp")
    for i in sorted(features):
        l, u = region[i]
        top = problem.table.n_intervals(i) - 1
        while u < top and enc.is_valid(region.with_feature(i, l, u + 1)):
            u += 1
        while l > 0 and enc.is_valid(region.with_feature(i, l - 1, u)):
            l -= 1
        region = region.with_feature(i, l, u)
    kept = tuple(problem.table.restricted(region))
    return Explanation("iAXp", kept, region, problem.fsc(region), _stats(problem, start, calls))


def greedy_iaxp(problem: ExplanationProblem) -> Explanation:
    axp = compute_axp(problem)
    out = inflate_axp(problem, axp.features)
    out.stats["oracle_calls"] += axp.stats["oracle_calls"]
    out.stats["time"] += axp.stats["time"]
    return out


def reduce_counterexample_to_icxp(problem: ExplanationProblem, cex: Counterexample) -> ICxp:
    """Features on which the counterexample box misses the instance's interval."""
    feats, ranges = [], []
    for i, ((a, b), e) in enumerate(zip(cex.region, problem.cell)):
        if not a <= e <= b:
            feats.append(i)
            ranges.append((a, b))
    if not feats:
        raise AssertionError("counterexample box contains the instance")
    return ICxp(tuple(feats), tuple(ranges))


def icxp_region(problem: ExplanationProblem, icxp: ICxp) -> Region:
    """G as a region: the iCXp ranges on Y, the instance interval elsewhere."""
    bounds = [(e, e) for e in problem.cell]
    for i, r in icxp.items():
        bounds[i] = r
    return Region(tuple(bounds))


def _stats(problem, start, calls):
    return {"oracle_calls": problem.oracle_calls - calls,
            "time": time.perf_counter() - start}
