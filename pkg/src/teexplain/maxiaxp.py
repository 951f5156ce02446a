"""Maximum inflated AXp by implicit hitting-set dualization."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from .explain import ExplanationProblem, ICxp, greedy_iaxp, reduce_counterexample_to_icxp
from .hitset import CandidateOracle, build_candidate_oracle
from .intervals import Region

log = logging.getLogger(__name__)


class BudgetExceeded(Exception):
    pass


@dataclass
class MaxIaxpResult:
    region: Region
    features: tuple[int, ...]
    fsc: float
    iterations: int                 # candidate-oracle calls
    icxps: list[ICxp]
    maximum: bool = True            # False when the budget ran out (greedy fallback)
    seeded: int = 0                 # blocks added before the first candidate
    trace: list[float] = field(default_factory=list)  # FSC of each candidate
    candidates: list[Region] = field(default_factory=list)
    checker_calls: int = 0
    time: float = 0.0


def seed_singleton_icxps(problem: ExplanationProblem, oracle: CandidateOracle) -> int:
    """Block, per feature and side, the adversarial interval nearest to the instance.

    Other features stay on the instance's intervals, so each hit is a
    single-feature iCXp.  Since candidate ranges are contiguous and contain
    the instance's interval, blocking the nearest hit on one side also keeps
    every farther interval on that side out of the candidates.
    """
    enc = problem.encoding
    base = problem.table.cell_region(problem.cell)
    added = 0
    for i in range(problem.m):
        e, n = problem.cell[i], problem.table.n_intervals(i)
        for side in (range(e + 1, n), range(e - 1, -1, -1)):
            for j in side:
                if not enc.is_valid(base.with_feature(i, j, j)):
                    oracle.block(ICxp((i,), ((j, j),)))
                    added += 1
                    break
    return added


def compute_max_iaxp(problem: ExplanationProblem, encoding: str = "bounds", seed: bool = False,
                     max_iter: int = 10**5, timeout: float | None = None,
                     oracle: CandidateOracle | None = None) -> MaxIaxpResult:
    """Alternate the candidate oracle and the counterexample checker.

    Each candidate is the FSC-maximal region hitting every iCXp seen so far;
    the first one the checker accepts is a maximum iAXp.  When ``max_iter``
    candidates or ``timeout`` seconds are used up, the greedy iAXp is
    returned with ``maximum=False``.
    """
    start = time.perf_counter()
    calls0 = problem.oracle_calls
    if oracle is None:
        oracle = build_candidate_oracle(problem, encoding)
    seeded = seed_singleton_icxps(problem, oracle) if seed else 0
    trace: list[float] = []
    candidates: list[Region] = []
    seen: set[ICxp] = set(oracle.blocks)
    try:
        while True:
            if len(trace) >= max_iter:
                raise BudgetExceeded(f"iteration budget of {max_iter} exhausted")
            if timeout is not None and time.perf_counter() - start > timeout:
                raise BudgetExceeded(f"time budget of {timeout}s exhausted")
            region = oracle.next_candidate()
            trace.append(-float(oracle.last_cost))
            candidates.append(region)
            cex = problem.encoding.find_counterexample(region)
            if cex is None:
                break
            icxp = reduce_counterexample_to_icxp(problem, cex)
            if icxp in seen:
                raise AssertionError(f"iCXp {icxp} blocked twice")
            seen.add(icxp)
            oracle.block(icxp)
    except BudgetExceeded as exc:
        log.warning("%s; falling back to the greedy iAXp", exc)
        g = greedy_iaxp(problem)
        return MaxIaxpResult(g.region, g.features, g.fsc, len(trace), list(oracle.blocks),
                             maximum=False, seeded=seeded, trace=trace, candidates=candidates,
                             checker_calls=problem.oracle_calls - calls0,
                             time=time.perf_counter() - start)
    return MaxIaxpResult(region, tuple(problem.table.restricted(region)), problem.fsc(region),
                         len(trace), list(oracle.blocks), seeded=seeded, trace=trace,
                         candidates=candidates,
                         checker_calls=problem.oracle_calls - calls0,
                         time=time.perf_counter() - start)

