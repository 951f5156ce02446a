"""Propositional encoding of a tree ensemble and the counterexample checker.

Variables:
  ``x[i,k]``  -- x_i < s_{i,k} for split point k of feature i
  ``R[t,p]``  -- path p of tree t is the one taken

For a target class c and opponent c', the score difference
S(c,c') = sum_{c'} - sum_c is a signed sum over path literals.  It is
turned into a minimisation: positive terms become soft units ``R`` and
negative ones soft units ``-R``, so that S = offset - cost.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .intervals import IntervalTable, Region
from .model import TreeEnsemble
from .wcnf import MaxSat, VarPool, Wcnf


@dataclass(frozen=True)
class Counterexample:
    splits: tuple[tuple[bool, ...], ...]  # value of x_i < s_{i,k}, per feature
    region: Region                        # extracted box (a_i, b_i) per feature
    witness: int                          # opponent class index
    score: Fraction                       # S(c, witness) at the model

    @property
    def cell(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.region)


def extract_counterexample_region(splits: Sequence[Sequence[bool]]) -> Region:
    """Box ``(a_i, b_i)`` realised by an assignment to the split literals.

    ``a_i`` is one past the last false literal, ``b_i`` the first true one.
    """
    bounds = []
    for i, vals in enumerate(splits):
        n = len(vals) + 1
        a = max([k + 1 for k, v in enumerate(vals) if not v], default=0)
        b = min([k for k, v in enumerate(vals) if v], default=n - 1)
        if a > b:
            raise ValueError(f"split literals of feature {i} violate the ordering")
        bounds.append((a, b))
    return Region(tuple(bounds))


class TeEncoding:

    def __init__(self, te: TreeEnsemble, table: IntervalTable, target: int):
        self.te = te
        self.table = table
        self.target = target
        self.pool = VarPool()
        self.hard: list[list[int]] = []
        self.calls = 0

        self.split_vars = []
        self._split_index = []
        for i, points in enumerate(table.split_points):
            self.split_vars.append([self.pool.new(("x", i, k)) for k in range(len(points))])
            self._split_index.append({d: k for k, d in enumerate(points)})
        for xs in self.split_vars:
            for lo, hi in zip(xs, xs[1:]):
                self.hard.append([-lo, hi])

        # (var, class, weight) for every path
        self.paths: list[tuple[int, int, Fraction]] = []
        for t, tree in enumerate(te.trees):
            for p, path in enumerate(tree.paths):
                r = self.pool.new(("R", t, p))
                lits = []
                for feat, thr, lt in path.conditions:
                    x = self.split_vars[feat][self._split_index[feat][thr]]
                    lits.append(x if lt else -x)
                for lit in lits:
                    self.hard.append([-r, lit])
                self.hard.append([r] + [-lit for lit in lits])
                self.paths.append((r, path.cls, Fraction(path.weight)))

        self.objectives: dict[int, tuple[Wcnf, Fraction]] = {}
        self._solvers: dict[int, MaxSat] = {}
        for opp in range(te.n_classes):
            if opp == target:
                continue
            formula = Wcnf([list(c) for c in self.hard], nv=self.pool.top)
            offset = Fraction(0)
            terms: dict[int, Fraction] = {}
            for r, cls, w in self.paths:
                if cls == opp:
                    terms[r] = terms.get(r, Fraction(0)) + w
                elif cls == target:
                    terms[r] = terms.get(r, Fraction(0)) - w
            for r, a in terms.items():
                if a > 0:
                    formula.add_soft([r], a)
                    offset += a
                elif a < 0:
                    formula.add_soft([-r], -a)
            self.objectives[opp] = (formula, offset)
            self._solvers[opp] = MaxSat(formula)

    @property
    def n_vars(self) -> int:
        return self.pool.top

    def fixing_assumptions(self, region: Region) -> list[int]:
        """Split literals forced by the candidate region.

        x_i < s_k is true when s_k >= sup(E_i), false when s_k <= inf(E_i).
        """
        assum = []
        for xs, (l, u) in zip(self.split_vars, region):
            for k, x in enumerate(xs):
                if k >= u:
                    assum.append(x)
                elif k < l:
                    assum.append(-x)
        return assum

    def find_counterexample(self, region: Region) -> Counterexample | None:
        """An adversarial box inside ``region``, or None if the region entails the target.

        Opponents are tried in class order.  An opponent with a smaller index
        than the target wins ties (matching the argmax tie rule), so for it a
        zero score difference already counts.
        """
        self.calls += 1
        assum = self.fixing_assumptions(region)
        for opp, (formula, offset) in self.objectives.items():
            model = self._solvers[opp].compute(assum, bound=offset, strict=opp > self.target)
            if model is None:
                continue
            splits = tuple(tuple(model.value(x) for x in xs) for xs in self.split_vars)
            return Counterexample(splits, extract_counterexample_region(splits), opp,
                                  offset - model.cost)
        return None

    def is_valid(self, region: Region) -> bool:
        return self.find_counterexample(region) is None

    def describe_vars(self) -> list[str]:
        """Human-readable variable table, used in export headers."""
        out = []
        for var in range(1, self.pool.top + 1):
            name = self.pool.names[var]
            if name[0] == "x":
                _, i, k = name
                out.append(f"var {var} = [{self.te.features.names[i]} < "
                           f"{self.table.split_points[i][k]!r}]")
            else:
                _, t, p = name
                path = self.te.trees[t].paths[p]
                out.append(f"var {var} = path {p} of tree {t} "
                           f"(class {self.te.classes[path.cls]}, weight {path.weight!r})")
        return out
