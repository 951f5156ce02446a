"""Exhaustive reference implementations (exponential; for small models only)."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .explain import ExplanationProblem, ICxp
from .intervals import IntervalTable, Region, SizeMeasure, build_interval_table, fsc
from .model import TreeEnsemble, predict
from .wcnf import maxsat_brute

GRID_CAP = 10**6

__all__ = ["GRID_CAP", "ExplanationSets", "GridClassification", "classify_grid",
           "enumerate_explanations", "is_weak_iaxp_brute", "max_iaxp_brute", "maxsat_brute",
           "weak_axp_table"]


@dataclass
class GridClassification:
    table: IntervalTable
    labels: np.ndarray  # class index per box, indexed by interval indices

    def __getitem__(self, cell) -> int:
        return int(self.labels[tuple(cell)])

    def boxes(self, region: Region):
        return product(*(range(l, u + 1) for l, u in region))

    def view(self, region: Region) -> np.ndarray:
        return self.labels[tuple(slice(l, u + 1) for l, u in region)]


def classify_grid(te: TreeEnsemble, table: IntervalTable | None = None,
                  cap: int = GRID_CAP) -> GridClassification:
    """Label every interval box by the prediction at its midpoint."""
    table = table or build_interval_table(te)
    shape = tuple(table.n_intervals(i) for i in range(table.m))
    if int(np.prod(shape)) > cap:
        raise ValueError(f"grid of {int(np.prod(shape))} boxes exceeds the cap of {cap}")
    mids = [[table.representative(i, j) for j in range(n)] for i, n in enumerate(shape)]
    labels = np.empty(shape, dtype=np.int32)
    for cell in product(*(range(n) for n in shape)):
        labels[cell] = predict(te, [mids[i][j] for i, j in enumerate(cell)])
    return GridClassification(table, labels)


def _grid(problem, grid):
    if grid is None:
        grid = getattr(problem, "_brute_grid", None)
        if grid is None:
            grid = classify_grid(problem.te, problem.table)
            problem._brute_grid = grid
    return grid


def is_weak_iaxp_brute(problem: ExplanationProblem, region: Region,
                       grid: GridClassification | None = None) -> bool:
    return bool(np.all(_grid(problem, grid).view(region) == problem.target))


def _ranges(problem, i):
    n, e = problem.table.n_intervals(i), problem.cell[i]
    return [(l, u) for l in range(e + 1) for u in range(e, n)]


def _candidate_regions(problem, cap):
    per = [_ranges(problem, i) for i in range(problem.m)]
    total = int(np.prod([len(r) for r in per]))
    if total > cap:
        raise ValueError(f"{total} candidate regions exceed the cap of {cap}")
    return (Region(b) for b in product(*per))


def max_iaxp_brute(problem: ExplanationProblem, measure: SizeMeasure | None = None,
                   cap: int = GRID_CAP) -> tuple[Region, float]:
    """Valid region of maximal FSC, by trying every region around the instance."""
    measure = measure or problem.measure
    grid = _grid(problem, None)
    best, best_fsc = None, None
    for region in _candidate_regions(problem, cap):
        if not is_weak_iaxp_brute(problem, region, grid):
            continue
        value = fsc(region, problem.table, measure)
        if best is None or value > best_fsc:
            best, best_fsc = region, value
    return best, best_fsc


@dataclass
class ExplanationSets:
    iaxps: list[Region]
    icxps: list[ICxp]

    def duality_violations(self, cell) -> list[tuple[Region, ICxp]]:
        """Pairs where no feature of the iCXp is disjoint from the iAXp's range."""
        bad = []
        for region in self.iaxps:
            for g in self.icxps:
                if not any(b < region[i][0] or a > region[i][1] for i, (a, b) in g.items()):
                    bad.append((region, g))
        return bad


def enumerate_explanations(problem: ExplanationProblem, cap: int = GRID_CAP) -> ExplanationSets:
    """All inclusion-maximal valid regions and all minimal iCXps.

    An iCXp here is a subset-minimal feature set Y together with a single
    adversarial box that differs from the instance on exactly Y; these are
    the iCXps whose ranges cannot be shrunk any further.
    """
    grid = _grid(problem, None)
    table, cell = problem.table, problem.cell
    valid = [r for r in _candidate_regions(problem, cap)
             if is_weak_iaxp_brute(problem, r, grid)]

    def extendable(r):
        for i, (l, u) in enumerate(r):
            for nl, nu in ((l - 1, u), (l, u + 1)):
                if 0 <= nl and nu < table.n_intervals(i):
                    if is_weak_iaxp_brute(problem, r.with_feature(i, nl, nu), grid):
                        return True
        return False

    iaxps = [r for r in valid if not extendable(r)]

    def adversarial_cells(ys):
        axes = [[j for j in range(table.n_intervals(i)) if j != cell[i]] if i in ys
                else [cell[i]] for i in range(problem.m)]
        return [c for c in product(*axes) if grid[c] != problem.target]

    icxps: list[ICxp] = []
    cxps: list[set[int]] = []
    for k in range(1, problem.m + 1):
        for ys in combinations(range(problem.m), k):
            if any(c <= set(ys) for c in cxps):
                continue
            # Y is a CXp when freeing it (but no proper subset) admits a change
            free = problem.fixed_region(set(range(problem.m)) - set(ys))
            if np.all(grid.view(free) == problem.target):
                continue
            cxps.append(set(ys))
            for c in adversarial_cells(ys):
                icxps.append(ICxp(ys, tuple((c[i], c[i]) for i in ys)))
    return ExplanationSets(iaxps, icxps)


def weak_axp_table(problem: ExplanationProblem) -> dict[frozenset, bool]:
    """Weak-AXp verdict for every feature subset."""
    grid = _grid(problem, None)
    out = {}
    for k in range(problem.m + 1):
        for xs in combinations(range(problem.m), k):
            out[frozenset(xs)] = is_weak_iaxp_brute(problem, problem.fixed_region(xs), grid)
    return out
