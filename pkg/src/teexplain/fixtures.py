"""Small hand-built models used by the tests and the CLI demo files."""

from __future__ import annotations

from .model import TreeEnsemble, load_model


def _leaf(nid, cls, weight=None):
    d = {"id": nid, "leaf_class": cls}
    if weight is not None:
        d["weight"] = weight
    return d


def _split(nid, feature, threshold, left, right):
    return {"id": nid, "feature": feature, "threshold": threshold, "left": left, "right": right}


DISEASE_DOC = {
    "kind": "rf_majority",
    "classes": ["low", "high"],
    "features": [
        {"name": "blood", "lo": 0, "hi": 3},
        {"name": "age", "lo": 20, "hi": 80},
        {"name": "weight", "lo": 50, "hi": 150},
    ],
    "trees": [[
        _split(0, "age", 60, 1, 2),
        _leaf(1, "low"),
        _split(2, "weight", 80, 3, 4),
        _leaf(3, "low"),
        _leaf(4, "high"),
    ]],
}
# blood type does not influence the risk; age 65, weight 85 gives "high"
DISEASE_POINT = (1.0, 65.0, 85.0)


IRIS_DOC = {
    "kind": "rf_majority",
    "classes": ["setosa", "versicolor", "virginica"],
    "features": [
        {"name": "sepal.length", "lo": 4, "hi": 8},
        {"name": "sepal.width", "lo": 2, "hi": 4.5},
        {"name": "petal.length", "lo": 1, "hi": 7},
        {"name": "petal.width", "lo": 0, "hi": 3},
    ],
    "trees": [
        [_split(0, "sepal.length", 5.75, 1, 2), _leaf(1, "setosa"),
         _split(2, "petal.width", 1.65, 3, 4), _leaf(3, "versicolor"), _leaf(4, "virginica")],
        [_split(0, "petal.width", 0.75, 1, 2), _leaf(1, "setosa"),
         _split(2, "petal.width", 1.55, 3, 4), _leaf(3, "versicolor"), _leaf(4, "virginica")],
        [_split(0, "petal.width", 0.75, 1, 2), _leaf(1, "setosa"),
         _split(2, "petal.length", 4.95, 3, 4), _leaf(3, "versicolor"), _leaf(4, "virginica")],
    ],
}
IRIS_POINT = (6.0, 3.5, 1.4, 0.2)
# same point with petal.width moved into [0.75, 1.55): predicted versicolor
IRIS_POINT_SHIFTED = (6.0, 3.5, 1.4, 0.8)


def _stump(tid, feature, threshold, cls, left, right):
    return [_split(0, feature, threshold, 1, 2), _leaf(1, cls, left), _leaf(2, cls, right)]


# three-class boosted ensemble, two trees per class
BOOSTED_DOC = {
    "kind": "boosted",
    "classes": ["c0", "c1", "c2"],
    "features": [
        {"name": "f0", "lo": 0, "hi": 10},
        {"name": "f1", "lo": 0, "hi": 10},
    ],
    "trees": [
        _stump(0, "f0", 4.0, "c0", 0.5, -0.3),
        _stump(1, "f1", 6.0, "c0", 0.22284, -0.2),
        _stump(2, "f0", 7.0, "c1", -0.2, 0.4),
        _stump(3, "f1", 3.0, "c1", -0.20355, 0.1),
        _stump(4, "f0", 2.0, "c2", 0.3, -0.21645),
        _stump(5, "f1", 8.0, "c2", -0.2, 0.25),
    ],
}
BOOSTED_POINT = (3.0, 2.0)


def disease() -> TreeEnsemble:
    return load_model(DISEASE_DOC)


def iris() -> TreeEnsemble:
    return load_model(IRIS_DOC)


def boosted() -> TreeEnsemble:
    return load_model(BOOSTED_DOC)
