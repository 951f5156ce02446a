"""Random tiny ensembles for property tests and benchmarks."""

from __future__ import annotations

import random

import numpy as np

from .brute import classify_grid
from .model import TreeEnsemble, load_model

KIND_CYCLE = ("rf_majority", "rf_weighted", "boosted")


def random_ensemble(rng: random.Random, kind: str | None = None, max_features: int = 4,
                    max_trees: int = 3, max_depth: int = 3, max_splits: int = 4,
                    max_classes: int = 3, attempts: int = 100) -> TreeEnsemble:
    """Random ensemble whose prediction is not constant over the domain.

    Features live on [0, 10]; thresholds come from a per-feature pool of at
    most ``max_splits`` values, so each feature has at most that many split
    points in the whole ensemble.
    """
    kind = kind or rng.choice(KIND_CYCLE)
    for _ in range(attempts):
        m = rng.randint(1, max_features)
        k = rng.randint(2, max_classes)
        pools = [sorted(rng.sample(range(1, 20), rng.randint(1, max_splits))) for _ in range(m)]
        n_trees = rng.randint(1, max_trees)
        if kind == "boosted":
            n_trees = max(n_trees, 2)
        trees = []
        for t in range(n_trees):
            tree_class = t % k if kind == "boosted" else None
            trees.append(_random_tree(rng, kind, pools, k, max_depth, tree_class))
        doc = {
            "kind": kind,
            "classes": [f"c{j}" for j in range(k)],
            "features": [{"name": f"x{i}", "lo": 0, "hi": 10} for i in range(m)],
            "trees": trees,
        }
        te = load_model(doc)
        if len(np.unique(classify_grid(te).labels)) > 1:
            return te
    raise RuntimeError("could not generate a non-constant ensemble")


def _random_tree(rng, kind, pools, k, max_depth, tree_class):
    nodes = []

    def leaf_weight():
        if kind == "rf_majority":
            return 1
        if kind == "rf_weighted":
            return rng.randint(1, 20) / 10
        return rng.randint(-20, 20) / 10

    def grow(depth):
        nid = len(nodes)
        nodes.append(None)
        if depth == max_depth or (depth > 0 and rng.random() < 0.3):
            cls = tree_class if tree_class is not None else rng.randrange(k)
            nodes[nid] = {"id": nid, "leaf_class": f"c{cls}", "weight": leaf_weight()}
            return nid
        feat = rng.randrange(len(pools))
        thr = rng.choice(pools[feat]) / 2
        left = grow(depth + 1)
        right = grow(depth + 1)
        nodes[nid] = {"id": nid, "feature": f"x{feat}", "threshold": thr,
                      "left": left, "right": right}
        return nid

    grow(0)
    return nodes


def random_point(rng: random.Random, te: TreeEnsemble) -> tuple[float, ...]:
    """Uniform point in the domain, drawn on a 1/8 grid so split values can be hit exactly."""
    f = te.features
    return tuple(rng.randint(int(lo * 8), int(hi * 8)) / 8 for lo, hi in zip(f.lo, f.hi))


def random_rows(rng: random.Random, te: TreeEnsemble, n: int = 30) -> list[tuple[float, ...]]:
    return [random_point(rng, te) for _ in range(n)]


def suite(seed: int, n: int, **kwargs):
    """``n`` (ensemble, point) pairs, cycling through the three kinds."""
    rng = random.Random(seed)
    out = []
    for j in range(n):
        te = random_ensemble(rng, KIND_CYCLE[j % 3], **kwargs)
        out.append((te, random_point(rng, te)))
    return out
