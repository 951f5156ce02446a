import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from teexplain import synth
from teexplain.brute import (classify_grid, enumerate_explanations, is_weak_iaxp_brute,
                             max_iaxp_brute)
from teexplain.explain import ExplanationProblem, ICxp
from teexplain.intervals import Region
from teexplain.model import predict


def test_disease_grid(disease_problem):
    grid = classify_grid(disease_problem.te)
    assert grid.labels.shape == (1, 2, 2)
    # low, low, low, high over age x weight
    assert grid.labels[0].tolist() == [[0, 0], [0, 1]]


def test_grid_cap(disease_problem):
    with pytest.raises(ValueError):
        classify_grid(disease_problem.te, cap=3)


def test_weak_iaxp(disease_problem):
    assert is_weak_iaxp_brute(disease_problem, Region(((0, 0), (1, 1), (1, 1))))
    assert not is_weak_iaxp_brute(disease_problem, disease_problem.table.full_region())


def test_max_disease(disease_problem):
    region, value = max_iaxp_brute(disease_problem)
    assert region == Region(((0, 0), (1, 1), (1, 1)))
    assert value == pytest.approx(math.log(1 / 3) + math.log(7 / 10), abs=1e-12)


def test_max_single_split():
    from teexplain.model import load_model
    doc = {"kind": "rf_majority", "classes": ["a", "b"],
           "features": [{"name": "x", "lo": 0, "hi": 1}],
           "trees": [[{"id": 0, "feature": "x", "threshold": 0.25, "left": 1, "right": 2},
                      {"id": 1, "leaf_class": "a"}, {"id": 2, "leaf_class": "b"}]]}
    p = ExplanationProblem(load_model(doc), (0.1,))
    assert max_iaxp_brute(p)[0] == Region(((0, 0),))


def test_disease_explanation_sets(disease_problem):
    sets = enumerate_explanations(disease_problem)
    assert sets.iaxps == [Region(((0, 0), (1, 1), (1, 1)))]
    assert ICxp((1,), ((0, 0),)) in sets.icxps and ICxp((2,), ((0, 0),)) in sets.icxps
    assert not sets.duality_violations(disease_problem.cell)


def test_every_flip_changes_class():
    from teexplain.model import load_model
    # parity of two binary features: any single flip changes the class
    doc = {"kind": "rf_majority", "classes": ["a", "b"],
           "features": [{"name": "x", "lo": 0, "hi": 1}, {"name": "z", "lo": 0, "hi": 1}],
           "trees": [[{"id": 0, "feature": "x", "threshold": 0.5, "left": 1, "right": 4},
                      {"id": 1, "feature": "z", "threshold": 0.5, "left": 2, "right": 3},
                      {"id": 2, "leaf_class": "a"}, {"id": 3, "leaf_class": "b"},
                      {"id": 4, "feature": "z", "threshold": 0.5, "left": 5, "right": 6},
                      {"id": 5, "leaf_class": "b"}, {"id": 6, "leaf_class": "a"}]]}
    p = ExplanationProblem(load_model(doc), (0.2, 0.2))
    assert len(enumerate_explanations(p).icxps) >= p.m


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_grid_constant_inside_boxes(seed):
    rng = random.Random(seed)
    te = synth.random_ensemble(rng)
    grid = classify_grid(te)
    t = grid.table
    for cell in list(grid.boxes(t.full_region()))[:40]:
        for _ in range(5):
            point = []
            for i, j in enumerate(cell):
                a, b = t.interval(i, j)
                point.append(rng.uniform(a, b) if rng.random() < 0.8 else a)
            assert predict(te, point) == grid[cell]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_duality(seed):
    rng = random.Random(seed)
    te = synth.random_ensemble(rng)
    p = ExplanationProblem(te, synth.random_point(rng, te))
    sets = enumerate_explanations(p)
    assert sets.iaxps and sets.icxps
    assert not sets.duality_violations(p.cell)
