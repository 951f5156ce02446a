"""Weighted partial MaxSAT over exact rational costs.

Literals are non-zero ints in the DIMACS convention.  SAT calls go to a
CDCL solver from PySAT; the optimiser on top is a core-guided (OLL-style)
search with totalizer relaxation, so soft costs can be arbitrary positive
``Fraction`` values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from numbers import Rational
from typing import Hashable, Iterable, Sequence

from pysat.card import ITotalizer
from pysat.solvers import Solver

SAT_BACKEND = "glucose4"
MAX_EXPORT_WEIGHT = 2**63 - 1


class HardUnsat(Exception):
    """The hard clauses (under the given assumptions) are unsatisfiable."""


def as_cost(value) -> Fraction:
    """Exact rational cost; floats are wrapped at a 10^9 denominator."""
    if isinstance(value, Rational):
        return Fraction(value)
    return Fraction(round(float(value) * 10**9), 10**9)


class VarPool:
    """Dense variable ids, optionally keyed by a hashable name."""

    def __init__(self, start: int = 1):
        self.top = start - 1
        self._ids: dict[Hashable, int] = {}
        self.names: dict[int, Hashable] = {}

    def new(self, name: Hashable | None = None) -> int:
        if name is not None and name in self._ids:
            return self._ids[name]
        self.top += 1
        if name is not None:
            self._ids[name] = self.top
            self.names[self.top] = name
        return self.top

    def get(self, name: Hashable) -> int | None:
        return self._ids.get(name)

    def __contains__(self, name) -> bool:
        return name in self._ids


@dataclass
class Wcnf:
    hard: list[list[int]] = field(default_factory=list)
    soft: list[tuple[list[int], Fraction]] = field(default_factory=list)
    nv: int = 0

    def _track(self, clause):
        for lit in clause:
            if lit == 0:
                raise ValueError("literal 0 is not allowed")
            self.nv = max(self.nv, abs(lit))

    def add_hard(self, clause: Iterable[int]) -> None:
        clause = list(clause)
        self._track(clause)
        self.hard.append(clause)

    def add_soft(self, clause: Iterable[int], cost) -> None:
        clause = list(clause)
        cost = as_cost(cost)
        if cost <= 0:
            raise ValueError("soft clause costs must be strictly positive")
        self._track(clause)
        self.soft.append((clause, cost))

    def cost_of(self, assignment: dict[int, bool] | Sequence[int]) -> Fraction:
        value = _valuation(assignment)
        return sum((w for cl, w in self.soft if not _satisfied(cl, value)), Fraction(0))

    def satisfies_hard(self, assignment) -> bool:
        value = _valuation(assignment)
        return all(_satisfied(cl, value) for cl in self.hard)

    def copy(self) -> "Wcnf":
        return Wcnf([list(c) for c in self.hard], [(list(c), w) for c, w in self.soft], self.nv)


def _valuation(assignment) -> dict[int, bool]:
    if isinstance(assignment, dict):
        return assignment
    return {abs(l): l > 0 for l in assignment}


def _satisfied(clause, value) -> bool:
    return any(value.get(abs(l), False) == (l > 0) for l in clause)


@dataclass
class SatResult:
    sat: bool
    model: list[int] | None = None  # signed literals, one per variable 1..nv
    core: list[int] | None = None   # subset of the assumptions when unsat

    def __bool__(self):
        return self.sat


def _full_model(raw: Sequence[int] | None, nv: int) -> list[int]:
    value = {abs(l): l for l in (raw or ())}
    return [value.get(v, -v) for v in range(1, nv + 1)]


def solve_sat(hard: Iterable[Sequence[int]], assumptions: Sequence[int] = ()) -> SatResult:
    clauses = [list(c) for c in hard]
    nv = max([abs(l) for c in clauses for l in c] + [abs(l) for l in assumptions] + [0])
    with Solver(name=SAT_BACKEND, bootstrap_with=clauses) as s:
        if s.solve(assumptions=list(assumptions)):
            return SatResult(True, _full_model(s.get_model(), nv))
        return SatResult(False, core=list(s.get_core() or []))


@dataclass
class MaxSatModel:
    assignment: list[int]
    cost: Fraction

    def value(self, var: int) -> bool:
        return self.assignment[var - 1] > 0


class MaxSat:
    """Weighted partial MaxSAT with monotone clause addition.

    Each :meth:`compute` call starts a fresh SAT solver over the current
    clause database, so clauses may be added freely between calls.
    """

    def __init__(self, formula: Wcnf | None = None):
        self.formula = formula if formula is not None else Wcnf()
        self.sat_calls = 0

    def add_hard(self, clause):
        self.formula.add_hard(clause)

    def add_soft(self, clause, cost):
        self.formula.add_soft(clause, cost)

    def compute(self, assumptions: Sequence[int] = (), bound: Fraction | None = None,
                strict: bool = True) -> MaxSatModel | None:
        """Minimum-cost model consistent with ``assumptions``.

        With ``bound`` set, the search stops early: it returns any model whose
        cost is below ``bound`` (at most ``bound`` when ``strict`` is False)
        as soon as one is seen, and ``None`` once the lower bound proves no
        such model exists.  Raises :class:`HardUnsat` when the hard clauses
        and assumptions are inconsistent.
        """
        f = self.formula
        nv = max([f.nv] + [abs(l) for l in assumptions])
        top = nv

        def below(cost):
            return bound is None or (cost < bound if strict else cost <= bound)

        with Solver(name=SAT_BACKEND, bootstrap_with=f.hard) as s:
            lb = Fraction(0)
            # selector literal -> remaining weight
            weight: dict[int, Fraction] = {}
            for clause, w in f.soft:
                if not clause:
                    lb += w
                    continue
                if len(clause) == 1:
                    sel = clause[0]
                else:
                    top += 1
                    sel = top
                    s.add_clause(list(clause) + [-sel])
                weight[sel] = weight.get(sel, Fraction(0)) + w
            # complementary unit softs: one of the two is always violated
            for sel in [l for l in weight if l > 0 and -l in weight]:
                common = min(weight[sel], weight[-sel])
                lb += common
                for x in (sel, -sel):
                    weight[x] -= common
                    if weight[x] == 0:
                        del weight[x]

            if bound is not None:
                # cheap probe: any model under the bound will do
                self.sat_calls += 1
                if not s.solve(assumptions=list(assumptions)):
                    raise HardUnsat()
                model = _full_model(s.get_model(), f.nv)
                cost = f.cost_of(model)
                if below(cost):
                    return MaxSatModel(model, cost)
                if not below(lb):
                    return None

            # bound literal of a totalizer -> (totalizer, index into rhs)
            sums: dict[int, tuple[ITotalizer, int]] = {}
            while True:
                self.sat_calls += 1
                if s.solve(assumptions=list(assumptions) + sorted(weight, key=abs)):
                    model = _full_model(s.get_model(), f.nv)
                    cost = f.cost_of(model)
                    assert cost == lb, (cost, lb)
                    return MaxSatModel(model, cost) if below(cost) else None
                core = [l for l in (s.get_core() or []) if l in weight]
                if not core:
                    raise HardUnsat()
                minw = min(weight[l] for l in core)
                lb += minw
                for l in core:
                    weight[l] -= minw
                    if weight[l] == 0:
                        del weight[l]
                    if l in sums:
                        # allow one more violation among this sum's inputs
                        tot, k = sums[l]
                        if k + 1 < len(tot.rhs):
                            nxt = -tot.rhs[k + 1]
                            weight[nxt] = weight.get(nxt, Fraction(0)) + minw
                            sums[nxt] = (tot, k + 1)
                if len(core) > 1:
                    tot = ITotalizer(lits=[-l for l in core], ubound=len(core), top_id=top)
                    top = max(top, tot.top_id)
                    s.append_formula(tot.cnf.clauses)
                    out = -tot.rhs[1]
                    weight[out] = weight.get(out, Fraction(0)) + minw
                    sums[out] = (tot, 1)
                else:
                    s.add_clause([-core[0]])
                if bound is not None and not below(lb):
                    return None


def solve_maxsat(formula: Wcnf, assumptions: Sequence[int] = ()) -> MaxSatModel:
    """Optimal model of ``formula``; raises :class:`HardUnsat` if none exists."""
    return MaxSat(formula).compute(assumptions)


def maxsat_brute(formula: Wcnf, max_vars: int = 20) -> Fraction | None:
    """Exact optimum by enumerating every assignment (``None`` if hard-unsat)."""
    nv = formula.nv
    if nv > max_vars:
        raise ValueError(f"{nv} variables exceed the enumeration cap of {max_vars}")
    best = None
    for bits in product((False, True), repeat=nv):
        value = {v + 1: b for v, b in enumerate(bits)}
        if not all(_satisfied(c, value) for c in formula.hard):
            continue
        cost = sum((w for c, w in formula.soft if not _satisfied(c, value)), Fraction(0))
        if best is None or cost < best:
            best = cost
    return best


def export_wcnf(formula: Wcnf, scale: int = 10**6, comments: Sequence[str] = ()) -> str:
    """Weighted-CNF text (``h`` marks hard clauses) with integer weights round(cost*scale)."""
    if scale < 1:
        raise ValueError("scale must be a positive integer")
    lines = ["c weighted CNF", f"c vars {formula.nv} hard {len(formula.hard)} "
             f"soft {len(formula.soft)} scale {scale}"]
    lines += [f"c {c}" for c in comments]
    for clause in formula.hard:
        lines.append("h " + " ".join(map(str, clause)) + " 0")
    for clause, cost in formula.soft:
        w = round(cost * scale)
        if w > MAX_EXPORT_WEIGHT:
            raise OverflowError(f"scaled weight {w} does not fit in 64 bits")
        lines.append(f"{w} " + " ".join(map(str, clause)) + " 0")
    return "\n".join(lines) + "\n"


def read_wcnf(text: str, scale: int = 1) -> Wcnf:
    """Parse weighted-CNF text (``h`` hard marker); weights are divided by ``scale``."""
    f = Wcnf()
    for line in text.splitlines():
        fields = line.split()
        if not fields or fields[0] in ("c", "p"):
            continue
        if fields[-1] != "0":
            raise ValueError(f"clause line not terminated by 0: {line!r}")
        lits = [int(x) for x in fields[1:-1]]
        if fields[0] == "h":
            f.add_hard(lits)
        else:
            w = Fraction(int(fields[0]), scale)
            if w > 0:
                f.add_soft(lits, w)
            else:
                f._track(lits)
    return f
