"""Acceptance criteria; one PASS/FAIL line per criterion in the terminal summary."""

import json
import logging
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import pytest

from teexplain import fixtures, synth
from teexplain.brute import (classify_grid, enumerate_explanations, is_weak_iaxp_brute,
                             max_iaxp_brute)
from teexplain.explain import (ExplanationProblem, ICxp, compute_axp, greedy_iaxp,
                               reduce_counterexample_to_icxp)
from teexplain.hitset import build_candidate_oracle
from teexplain.intervals import Region
from teexplain.maxiaxp import compute_max_iaxp
from teexplain.model import predict
from teexplain.wcnf import HardUnsat, Wcnf, maxsat_brute, solve_maxsat

from conftest import record

log = logging.getLogger("acceptance")

# pinned tolerances and sizes
DISEASE_TOL = 1e-9
DISEASE_TIME = 1.0
FSC_TOL = 1e-6
SUITE_SIZE = 200
SUITE_SEED = 2024
SUITE_TIME = 120.0
LOGGED_RUNS = 20
RATIO_TOL = 1e-9
DUALITY_MODELS = 100
WCNF_CASES = 500
CHECKER_PAIRS = 1000
SEEDING_SOFT_SHARE = 0.95

TRACE_LOG = Path(__file__).resolve().parent.parent / "acceptance_traces.json"


@pytest.fixture(scope="module")
def suite():
    return synth.suite(SUITE_SEED, SUITE_SIZE)


@pytest.fixture(scope="module")
def suite_runs(suite):
    """Max-iAXp (both encodings, with and without seeding), brute force and greedy per instance."""
    runs = []
    start = time.perf_counter()
    for te, point in suite:
        row = {}
        for enc in ("bounds", "naive"):
            for seed in (False, True):
                p = ExplanationProblem(te, point)
                row[enc, seed] = (p, compute_max_iaxp(p, enc, seed=seed))
        p = ExplanationProblem(te, point)
        row["brute"] = max_iaxp_brute(p)
        row["greedy"] = greedy_iaxp(p)
        row["problem"] = p
        runs.append(row)
    return runs, time.perf_counter() - start


def test_c1_disease():
    start = time.perf_counter()
    p = ExplanationProblem(fixtures.disease(), fixtures.DISEASE_POINT)
    axp = compute_axp(p).features
    res = compute_max_iaxp(p)
    elapsed = time.perf_counter() - start
    spans = [p.table.span(i, *res.region[i]) for i in res.features]
    expected = math.log(1 / 3) + math.log(7 / 10)
    # features are 0-based: age is 1, weight is 2
    ok = (axp == (1, 2) and res.features == (1, 2) and spans == [(60, 80), (80, 150)]
          and abs(res.fsc - expected) <= DISEASE_TOL and elapsed < DISEASE_TIME)
    record("1 disease", ok, f"axp={axp} spans={spans} fsc={res.fsc:.12f} t={elapsed:.3f}s")
    assert ok


def test_c2_oracle_equivalence(suite_runs):
    runs, elapsed = suite_runs
    bad = 0
    for row in runs:
        p, res = row["bounds", False]
        _, best = row["brute"]
        if not (res.maximum and abs(res.fsc - best) <= FSC_TOL
                and is_weak_iaxp_brute(p, res.region)):
            bad += 1
    ok = bad == 0 and elapsed < SUITE_TIME
    record("2 oracle equivalence", ok,
           f"{len(runs) - bad}/{len(runs)} match brute force, suite {elapsed:.1f}s")
    assert ok


def _mirrored_trace(p, driver_kind):
    """Run the loop on one encoding, mirror every block into the other one."""
    driver = build_candidate_oracle(p, driver_kind)
    other = build_candidate_oracle(p, "naive" if driver_kind == "bounds" else "bounds")
    pairs = []
    while True:
        region = driver.next_candidate()
        other.next_candidate()
        pairs.append((driver.last_cost, other.last_cost))
        cex = p.encoding.find_counterexample(region)
        if cex is None:
            return pairs
        g = reduce_counterexample_to_icxp(p, cex)
        driver.block(g)
        other.block(g)


def test_c3_encoding_agreement(suite, suite_runs):
    runs, _ = suite_runs
    final_bad = sum(abs(row["bounds", False][1].fsc - row["naive", False][1].fsc) > FSC_TOL
                    for row in runs)
    # the runs with the most iterations are the most informative ones to log
    order = sorted(range(len(runs)), key=lambda k: -runs[k]["bounds", False][1].iterations)
    logged, iter_bad = [], 0
    for k in order[:LOGGED_RUNS]:
        te, point = suite[k]
        for driver in ("bounds", "naive"):
            pairs = _mirrored_trace(ExplanationProblem(te, point), driver)
            iter_bad += sum(a != b for a, b in pairs)
            logged.append({"instance": k, "driver": driver,
                           "fsc": [[-float(a), -float(b)] for a, b in pairs]})
    TRACE_LOG.write_text(json.dumps(logged, indent=1) + "\n")
    ok = final_bad == 0 and iter_bad == 0
    record("3 encoding agreement", ok,
           f"final mismatches {final_bad}/{len(runs)}, per-iteration mismatches {iter_bad} "
           f"over {len(logged)} logged traces")
    assert ok


def test_c4_coverage_ratio(suite_runs):
    runs, _ = suite_runs
    ratios = [math.exp(row["bounds", False][1].fsc - row["greedy"].fsc) for row in runs]
    ok = min(ratios) >= 1 - RATIO_TOL
    record("4 coverage ratio", ok, f"min {min(ratios):.6f}, mean {sum(ratios) / len(ratios):.4f}")
    assert ok


def test_c5_duality():
    bad, pairs = 0, 0
    for te, point in synth.suite(SUITE_SEED + 5, DUALITY_MODELS):
        p = ExplanationProblem(te, point)
        sets = enumerate_explanations(p)
        pairs += len(sets.iaxps) * len(sets.icxps)
        bad += len(sets.duality_violations(p.cell))
        if not sets.iaxps or not sets.icxps:
            bad += 1
    ok = bad == 0
    record("5 duality", ok, f"{pairs} iAXp/iCXp pairs over {DUALITY_MODELS} models, {bad} violations")
    assert ok


def _random_wcnf(rng):
    nv = rng.randint(1, 12)
    f = Wcnf(nv=nv)
    for _ in range(rng.randint(0, 2 * nv)):
        f.add_hard([rng.choice((1, -1)) * rng.randint(1, nv) for _ in range(rng.randint(1, 3))])
    for _ in range(rng.randint(1, 20)):
        lits = [rng.choice((1, -1)) * rng.randint(1, nv) for _ in range(rng.randint(1, 3))]
        f.add_soft(lits, Fraction(rng.randint(1, 10**6), rng.choice((1, 7, 10**9))))
    return f


def test_c6_maxsat_kernel():
    rng = random.Random(SUITE_SEED + 6)
    bad = unsat = 0
    for _ in range(WCNF_CASES):
        f = _random_wcnf(rng)
        best = maxsat_brute(f)
        try:
            got = solve_maxsat(f).cost
        except HardUnsat:
            got = None
        unsat += best is None
        bad += got != best
    ok = bad == 0
    record("6 MaxSAT kernel", ok, f"{WCNF_CASES - bad}/{WCNF_CASES} exact ({unsat} hard-unsat)")
    assert ok


def test_c7_checker_equivalence():
    rng = random.Random(SUITE_SEED + 7)
    bad = cex_count = 0
    models = synth.suite(SUITE_SEED + 7, CHECKER_PAIRS // 5)
    for te, point in models:
        p = ExplanationProblem(te, point)
        grid = classify_grid(te, p.table)
        for _ in range(5):
            region = Region(tuple(tuple(sorted((rng.randrange(p.table.n_intervals(i)),
                                                rng.randrange(p.table.n_intervals(i)))))
                                  for i in range(p.m)))
            cex = p.encoding.find_counterexample(region)
            if (cex is None) != is_weak_iaxp_brute(p, region, grid):
                bad += 1
            if cex is not None:
                cex_count += 1
                if not region.covers(cex.region) or any(grid[c] == p.target for c in
                                                        grid.boxes(cex.region)):
                    bad += 1
    ok = bad == 0
    record("7 checker equivalence", ok,
           f"{CHECKER_PAIRS} pairs, {cex_count} counterexamples, {bad} failures")
    assert ok


def test_c8_blocking_fidelity():
    p = ExplanationProblem(fixtures.iris(), fixtures.IRIS_POINT)
    assert fixtures.IRIS_POINT_SHIFTED[3] == 0.8
    assert p.te.classes[predict(p.te, fixtures.IRIS_POINT_SHIFTED)] == "versicolor"
    g = ICxp((3,), ((1, 1),))  # petal.width in [0.75, 1.55)
    ok = True
    details = []
    for enc in ("naive", "bounds"):
        oracle = build_candidate_oracle(p, enc)
        oracle.block(g)
        if enc == "bounds":
            unit = oracle.formula.hard[-1]
            ok &= unit == [oracle.upper[3][0]]
            ok &= oracle.pool.names[unit[0]] == ("U", 3, 0)
            ok &= p.table.split_points[3][0] == 0.75
            details.append(f"bounds clause {unit}")
        res = compute_max_iaxp(p, oracle=oracle)
        covering = [r for r in res.candidates if r[3][0] <= 1 <= r[3][1]]
        ok &= not covering and res.maximum
        details.append(f"{enc}: {len(res.candidates)} candidates, none cover")
    record("8 blocking fidelity", ok, "; ".join(details))
    assert ok


def test_c9_seeding_invariance(suite_runs):
    runs, _ = suite_runs
    bad = fewer = 0
    for row in runs:
        for enc in ("bounds", "naive"):
            plain, seeded = row[enc, False][1], row[enc, True][1]
            bad += plain.fsc != seeded.fsc
            fewer += seeded.iterations <= plain.iterations
    total = 2 * len(runs)
    share = fewer / total
    # the iteration share is a soft metric: logged, never asserted
    log.info("seeding: iterations not larger in %d/%d runs (%.1f%%)", fewer, total, 100 * share)
    record("9 seeding invariance", bad == 0,
           f"FSC mismatches {bad}/{total}; iterations <= unseeded in {100 * share:.1f}% "
           f"(soft target {100 * SEEDING_SOFT_SHARE:.0f}%, not asserted)")
    assert bad == 0
