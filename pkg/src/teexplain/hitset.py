"""Candidate oracles for the hitting-set loop.

Both oracles pick, per feature, one contiguous interval range ``(l, u)``
around the instance's interval ``e`` and minimise the summed costs
``-log s(l..u)`` subject to hitting every blocked iCXp.

NaiveOracle   one Boolean per admissible range, exactly-one per feature
BoundsOracle  lower/upper bound literals with monotone chains; the range
              literals are defined from consecutive bounds
"""

from __future__ import annotations

from fractions import Fraction

from pysat.card import CardEnc, EncType

from .explain import ExplanationProblem, ICxp
from .intervals import Region
from .wcnf import HardUnsat, MaxSat, VarPool, Wcnf, export_wcnf

PAIRWISE_LIMIT = 8


class CandidateOracle:
    """Shared bookkeeping; subclasses define the encoding."""

    kind = "abstract"

    def __init__(self, problem: ExplanationProblem):
        self.problem = problem
        self.table = problem.table
        self.measure = problem.measure
        self.cell = problem.cell
        self.pool = VarPool()
        self.formula = Wcnf()
        self.blocks: list[ICxp] = []
        # (var, feature, l, u) for every range literal
        self.choices: list[tuple[int, int, int, int]] = []
        self.calls = 0
        self.last_cost: Fraction | None = None

    def _ranges(self, i):
        n, e = self.table.n_intervals(i), self.cell[i]
        return [(l, u) for l in range(e + 1) for u in range(e, n)]

    def _add_choice(self, i, l, u) -> int:
        y = self.pool.new(("y", i, l, u))
        self.choices.append((y, i, l, u))
        if (l, u) != (0, self.table.n_intervals(i) - 1):
            cost = self.measure.cost(i, l, u)
            if cost > 0:
                self.formula.add_soft([-y], cost)
        return y

    def next_candidate(self) -> Region:
        """FSC-maximal region hitting all blocks so far."""
        self.calls += 1
        try:
            model = MaxSat(self.formula).compute()
        except HardUnsat:
            raise HardUnsat("candidate formula became unsatisfiable") from None
        self.last_cost = model.cost
        return self.decode(model.value)

    def block(self, icxp: ICxp) -> None:
        if not icxp.features:
            raise ValueError("cannot block an iCXp with no features")
        for i, (a, b) in icxp.items():
            if a <= self.cell[i] <= b:
                raise ValueError(f"iCXp range {(a, b)} on feature {i} contains the instance")
        clause = self._blocking_clause(icxp)
        self.formula.add_hard(clause)
        self.blocks.append(icxp)

    def hits_all(self, region: Region) -> bool:
        """True when the region fails to cover every recorded iCXp."""
        return all(any(not (l <= a and b <= u) for i, (a, b) in g.items()
                       for l, u in [region[i]]) for g in self.blocks)

    def export_wcnf(self, scale: int = 10**6) -> str:
        header = [f"candidate oracle ({self.kind}), {len(self.blocks)} blocks"]
        header += [f"var {v} = {self._describe(name)}"
                   for v, name in sorted(self.pool.names.items())]
        return export_wcnf(self.formula, scale, header)

    def _describe(self, name) -> str:
        feat = self.problem.te.features.names
        if name[0] == "y":
            _, i, l, u = name
            a, b = self.table.span(i, l, u)
            return f"{feat[i]} in intervals {l}..{u} [{a}, {b}]"
        if name[0] == "L":
            _, i, k = name
            return f"{feat[i]} lower bound >= {self.table.split_points[i][k]}"
        if name[0] == "U":
            _, i, k = name
            return f"{feat[i]} upper bound < {self.table.split_points[i][k]}"
        _, i, a, b = name
        return f"{feat[i]} range does not cover intervals {a}..{b}"

    def decode(self, value) -> Region:
        raise NotImplementedError

    def _blocking_clause(self, icxp: ICxp) -> list[int]:
        raise NotImplementedError


class NaiveOracle(CandidateOracle):
    kind = "naive"

    def __init__(self, problem: ExplanationProblem):
        super().__init__(problem)
        self.groups: list[dict[tuple[int, int], int]] = []
        for i in range(self.table.m):
            group = {r: self._add_choice(i, *r) for r in self._ranges(i)}
            self.groups.append(group)
            self._exactly_one(list(group.values()))
        self._aux: dict[tuple[int, int, int], int] = {}

    def _exactly_one(self, lits):
        enc = EncType.pairwise if len(lits) <= PAIRWISE_LIMIT else EncType.seqcounter
        cnf = CardEnc.atmost(lits=lits, bound=1, top_id=self.pool.top, encoding=enc)
        # aux variables of the ladder are unnamed
        while self.pool.top < cnf.nv:
            self.pool.new()
        for clause in cnf.clauses:
            self.formula.add_hard(clause)
        self.formula.add_hard(lits)

    def not_covering(self, i: int, a: int, b: int) -> int:
        """Literal for "E_i does not contain intervals a..b", defined on demand."""
        key = (i, a, b)
        if key not in self._aux:
            aux = self.pool.new(("N", i, a, b))
            covering = [y for (l, u), y in self.groups[i].items() if l <= a and b <= u]
            for y in covering:
                self.formula.add_hard([-aux, -y])
            self.formula.add_hard([aux] + covering)
            self._aux[key] = aux
        return self._aux[key]

    def _blocking_clause(self, icxp):
        return [self.not_covering(i, a, b) for i, (a, b) in icxp.items()]

    def decode(self, value) -> Region:
        bounds = []
        for i, group in enumerate(self.groups):
            chosen = [r for r, y in group.items() if value(y)]
            if len(chosen) != 1:
                raise AssertionError(f"feature {i}: {len(chosen)} ranges selected")
            bounds.append(chosen[0])
        return Region(tuple(bounds))


class BoundsOracle(CandidateOracle):
    """Bound literals: ``L[i][k]`` is l_i >= s_k for k < e_i, ``U[i][k]`` is
    u_i < s_k for k >= e_i.  Literals outside those ranges are constants."""

    kind = "bounds"

    def __init__(self, problem: ExplanationProblem):
        super().__init__(problem)
        self.lower: list[dict[int, int]] = []
        self.upper: list[dict[int, int]] = []
        self.chains: list[tuple[int, int]] = []  # (a, b) meaning a -> b
        self.definitions: list[tuple[int, int, int, int, tuple]] = []
        for i in range(self.table.m):
            n, e = self.table.n_intervals(i), self.cell[i]
            L = {k: self.pool.new(("L", i, k)) for k in range(e)}
            U = {k: self.pool.new(("U", i, k)) for k in range(e, n - 1)}
            self.lower.append(L)
            self.upper.append(U)
            for k in range(e - 1):
                self.chains.append((L[k + 1], L[k]))
            for k in range(e, n - 2):
                self.chains.append((U[k], U[k + 1]))
        for a, b in self.chains:
            self.formula.add_hard([-a, b])
        for i in range(self.table.m):
            for l, u in self._ranges(i):
                y = self._add_choice(i, l, u)
                lits = self.range_literals(i, l, u)
                self.definitions.append((y, i, l, u, lits))
                self._define(y, lits)

    def _lit(self, i, kind, k):
        """Bound literal as an int, or True/False when it is a constant."""
        n = self.table.n_intervals(i)
        if kind == "L":
            if k < 0:
                return True
            return self.lower[i].get(k, False)
        if k >= n - 1:
            return True
        return self.upper[i].get(k, False)

    def range_literals(self, i, l, u):
        """``(A, B, C, D)`` with y_{l,u} <-> A & -B & -C & D."""
        return (self._lit(i, "L", l - 1), self._lit(i, "L", l),
                self._lit(i, "U", u - 1), self._lit(i, "U", u))

    def _define(self, y, lits):
        a, b, c, d = lits
        conj = []
        for lit, positive in ((a, True), (b, False), (c, False), (d, True)):
            if isinstance(lit, bool):
                if lit != positive:
                    raise AssertionError("range literal definition is constantly false")
                continue
            conj.append(lit if positive else -lit)
        for lit in conj:
            self.formula.add_hard([-y, lit])
        self.formula.add_hard([y] + [-lit for lit in conj])

    def blocking_literal(self, i: int, a: int, b: int) -> int:
        """Bound literal equivalent to "E_i does not contain intervals a..b".

        Ranges are contiguous and contain e, so above the instance this is
        u < s_b (u_i ends before interval b), below it l >= s_a.  For a single
        interval (a == b) that is the bound right next to the blocked box.
        """
        e = self.cell[i]
        if e < a:
            return self.upper[i][b - 1]
        if e > b:
            return self.lower[i][a]
        raise ValueError("range contains the instance interval")

    def _blocking_clause(self, icxp):
        return [self.blocking_literal(i, a, b) for i, (a, b) in icxp.items()]

    def decode(self, value) -> Region:
        bounds = []
        for i in range(self.table.m):
            n = self.table.n_intervals(i)
            l = max([k + 1 for k, v in self.lower[i].items() if value(v)], default=0)
            u = min([k for k, v in self.upper[i].items() if value(v)], default=n - 1)
            bounds.append((l, u))
        return Region(tuple(bounds))

    def export_lp(self) -> str:
        return export_lp(self)


def build_candidate_oracle(problem: ExplanationProblem, encoding: str = "bounds") -> CandidateOracle:
    if encoding == "naive":
        return NaiveOracle(problem)
    if encoding == "bounds":
        return BoundsOracle(problem)
    raise ValueError(f"unknown encoding {encoding!r}")


def _decimal(q: Fraction) -> str:
    """Exact decimal text for a rational whose denominator divides 10^9."""
    scaled = q * 10**9
    if scaled.denominator != 1:
        raise ValueError(f"{q} is not a multiple of 1e-9")
    n = scaled.numerator
    sign = "-" if n < 0 else ""
    whole, frac = divmod(abs(n), 10**9)
    text = f"{whole}.{frac:09d}".rstrip("0").rstrip(".")
    return sign + text


def _lp_name(name) -> str:
    return "_".join(str(x) for x in name).replace("-", "m")


def _row(label, coeffs, sense, rhs) -> str:
    terms = []
    for name, c in coeffs:
        if c == 0:
            continue
        op = "-" if c < 0 else "+"
        mag = "" if abs(c) == 1 else f"{abs(c)} "
        terms.append(f"{op} {mag}{name}")
    body = " ".join(terms).lstrip("+ ") or "0"
    if body.startswith("- "):
        body = "-" + body[2:]
    return f" {label}: {body} {sense} {rhs}"


def export_lp(oracle: BoundsOracle) -> str:
    """0-1 linear program equivalent to the bounds encoding.

    Variables ``L_i_k`` (lower bound >= s_k), ``U_i_k`` (upper bound < s_k)
    and ``y_i_l_u`` (range l..u chosen) use 0-based feature and interval
    indices.  Constant bound literals are folded into the right-hand sides.
    """
    name = {v: _lp_name(n) for v, n in oracle.pool.names.items()}
    cost = {y: Fraction(0) for y, *_ in oracle.choices}
    for clause, w in oracle.formula.soft:
        cost[-clause[0]] += w
    lines = [f"\\ candidate program ({len(oracle.blocks)} blocked iCXps)"]
    lines += [f"\\ {name[v]} = {oracle._describe(n)}" for v, n in sorted(oracle.pool.names.items())
              if n[0] != "N"]
    lines.append("Maximize")
    obj = [(name[y], -cost[y]) for y, *_ in oracle.choices if cost[y] != 0]
    if obj:
        text = " ".join(f"{'-' if w < 0 else '+'} {_decimal(abs(w))} {n}" for n, w in obj)
        lines.append(" obj: " + text.lstrip("+ "))
    else:
        lines.append(" obj: 0 " + name[oracle.choices[0][0]])
    lines.append("Subject To")
    r = 0

    def emit(coeffs, sense, rhs):
        nonlocal r
        r += 1
        lines.append(_row(f"r{r}", coeffs, sense, rhs))

    for a, b in oracle.chains:
        emit([(name[a], 1), (name[b], -1)], "<=", 0)
    for y, i, l, u, (A, B, C, D) in oracle.definitions:
        yn = name[y]
        # y <= A, y <= 1 - B, y <= 1 - C, y <= D, y >= A - B - C + D - 1
        for lit, sign, base in ((A, -1, 0), (B, 1, 1), (C, 1, 1), (D, -1, 0)):
            if isinstance(lit, bool):
                emit([(yn, 1)], "<=", base - sign * int(lit))
            else:
                emit([(yn, 1), (name[lit], sign)], "<=", base)
        coeffs, rhs = [(yn, 1)], -1
        for lit, sign in ((A, -1), (B, 1), (C, 1), (D, -1)):
            if isinstance(lit, bool):
                rhs -= sign * int(lit)
            else:
                coeffs.append((name[lit], sign))
        emit(coeffs, ">=", rhs)
    for g in oracle.blocks:
        lits = [oracle.blocking_literal(i, a, b) for i, (a, b) in g.items()]
        emit([(name[v], 1) for v in lits], ">=", 1)
    lines.append("Binaries")
    lines += [f" {name[v]}" for v in sorted(name)]
    lines.append("End")
    return "\n".join(lines) + "\n"
