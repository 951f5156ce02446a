"""Unified tree-ensemble model: ingest, paths and the prediction function.

Random forests with majority votes, random forests with weighted votes and
boosted trees all share one representation.  Every root-to-leaf path carries
a class and a weight; the class weight of a point is the sum of the weights
of the consistent paths predicting that class, and the predicted class is
the argmax (smallest class index on ties).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Sequence

KINDS = ("rf_majority", "rf_weighted", "boosted")


class ModelError(ValueError):
    """Raised for malformed or inconsistent model documents."""


@dataclass(frozen=True)
class FeatureSpace:
    names: tuple[str, ...]
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    domain_source: str = "declared"  # or "training-min-max"

    @property
    def m(self) -> int:
        return len(self.names)

    def index(self, feature: int | str) -> int:
        if isinstance(feature, str):
            try:
                return self.names.index(feature)
            except ValueError:
                raise ModelError(f"unknown feature {feature!r}") from None
        if not 0 <= feature < self.m:
            raise ModelError(f"feature index {feature} out of range")
        return feature

    def contains(self, point: Sequence[float]) -> bool:
        return len(point) == self.m and all(
            lo <= x <= hi for x, lo, hi in zip(point, self.lo, self.hi))


@dataclass(frozen=True)
class Node:
    """Internal node (``feature`` set) or leaf (``leaf_class`` set)."""
    id: int
    feature: int | None = None
    threshold: float | None = None
    left: int | None = None  # taken when x[feature] < threshold
    right: int | None = None
    leaf_class: int | None = None
    weight: float = 1.0

    @property
    def is_leaf(self) -> bool:
        return self.leaf_class is not None


@dataclass(frozen=True)
class Path:
    """A root-to-leaf path: split conditions ``(feature, threshold, lt)``.

    ``lt`` is True when the path requires ``x[feature] < threshold``.
    """
    conditions: tuple[tuple[int, float, bool], ...]
    leaf: int
    cls: int
    weight: float


@dataclass(frozen=True)
class DecisionTree:
    nodes: dict[int, Node]
    root: int
    paths: tuple[Path, ...] = field(default=(), compare=False)

    def leaf_for(self, point: Sequence[float]) -> Node:
        node = self.nodes[self.root]
        while not node.is_leaf:
            nxt = node.left if point[node.feature] < node.threshold else node.right
            node = self.nodes[nxt]
        return node

    def thresholds(self):
        for node in self.nodes.values():
            if not node.is_leaf:
                yield node.feature, node.threshold


@dataclass(frozen=True)
class TreeEnsemble:
    features: FeatureSpace
    classes: tuple[str, ...]
    trees: tuple[DecisionTree, ...]
    kind: str = "rf_majority"

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def class_index(self, cls: int | str) -> int:
        if isinstance(cls, str):
            try:
                return self.classes.index(cls)
            except ValueError:
                raise ModelError(f"unknown class {cls!r}") from None
        if not 0 <= cls < self.n_classes:
            raise ModelError(f"class index {cls} out of range")
        return cls


@dataclass(frozen=True)
class Instance:
    values: tuple[float, ...]
    predicted_class: int


def consistent_path(tree: DecisionTree, point: Sequence[float]) -> int:
    """Index (into ``tree.paths``) of the unique path consistent with ``point``."""
    leaf = tree.leaf_for(point).id
    for k, path in enumerate(tree.paths):
        if path.leaf == leaf:
            return k
    raise AssertionError("leaf without path")  # unreachable for validated trees


def _exact_weights(te: TreeEnsemble, point: Sequence[float]) -> list[Fraction]:
    totals = [Fraction(0)] * te.n_classes
    for tree in te.trees:
        leaf = tree.leaf_for(point)
        totals[leaf.leaf_class] += Fraction(leaf.weight)
    return totals


def class_weights(te: TreeEnsemble, point: Sequence[float]) -> dict[str, float]:
    """W(c, v) for every class, keyed by class name."""
    return {name: float(w) for name, w in zip(te.classes, _exact_weights(te, point))}


def predict(te: TreeEnsemble, point: Sequence[float]) -> int:
    """Index of the argmax class; ties go to the smallest index.

    Sums are exact rationals over the double leaf weights so that the
    propositional checker and this function agree on near-ties.
    """
    totals = _exact_weights(te, point)
    best = 0
    for k in range(1, len(totals)):
        if totals[k] > totals[best]:
            best = k
    return best


def make_instance(te: TreeEnsemble, point: Sequence[float]) -> Instance:
    values = tuple(float(x) for x in point)
    if len(values) != te.features.m:
        raise ModelError(f"instance has {len(values)} values, model has {te.features.m} features")
    if not te.features.contains(values):
        raise ModelError("instance lies outside the feature domains")
    return Instance(values, predict(te, values))


def rf_majority_to_weighted(te: TreeEnsemble) -> TreeEnsemble:
    """RFmv -> RFwv: every leaf weight is set to 1."""
    if te.kind != "rf_majority":
        raise ModelError(f"expected an rf_majority ensemble, got {te.kind}")
    trees = []
    for tree in te.trees:
        nodes = {k: replace(n, weight=1.0) if n.is_leaf else n for k, n in tree.nodes.items()}
        trees.append(_finish_tree(nodes, tree.root))
    return replace(te, trees=tuple(trees), kind="rf_weighted")


# ---------------------------------------------------------------------------
# ingest

def _collect_paths(nodes: dict[int, Node], root: int) -> tuple[Path, ...]:
    paths = []
    stack = [(root, ())]
    while stack:
        nid, conds = stack.pop()
        node = nodes[nid]
        if node.is_leaf:
            paths.append(Path(conds, nid, node.leaf_class, node.weight))
            continue
        stack.append((node.right, conds + ((node.feature, node.threshold, False),)))
        stack.append((node.left, conds + ((node.feature, node.threshold, True),)))
    return tuple(paths)


def _finish_tree(nodes: dict[int, Node], root: int) -> DecisionTree:
    return DecisionTree(nodes, root, _collect_paths(nodes, root))


def _build_tree(raw_nodes, features: FeatureSpace, classes: tuple[str, ...],
                kind: str, t: int) -> DecisionTree:
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise ModelError(f"tree {t}: expected a non-empty node list")
    nodes: dict[int, Node] = {}
    for raw in raw_nodes:
        if not isinstance(raw, dict) or "id" not in raw:
            raise ModelError(f"tree {t}: node without id")
        nid = int(raw["id"])
        if nid in nodes:
            raise ModelError(f"tree {t}: duplicate node id {nid}")
        if "leaf_class" in raw:
            cls = raw["leaf_class"]
            try:
                cidx = classes.index(cls) if isinstance(cls, str) else int(cls)
            except ValueError:
                raise ModelError(f"tree {t}: unknown class {cls!r}") from None
            if not 0 <= cidx < len(classes):
                raise ModelError(f"tree {t}: class index {cidx} out of range")
            if "weight" in raw:
                weight = float(raw["weight"])
            elif kind == "rf_majority":
                weight = 1.0
            else:
                raise ModelError(f"tree {t}: leaf {nid} needs a weight for kind {kind}")
            if not math.isfinite(weight):
                raise ModelError(f"tree {t}: non-finite leaf weight")
            if kind == "rf_majority" and weight != 1.0:
                raise ModelError(f"tree {t}: rf_majority leaves must have weight 1")
            nodes[nid] = Node(nid, leaf_class=cidx, weight=weight)
        else:
            try:
                feat = features.index(raw["feature"])
                thr = float(raw["threshold"])
                left, right = int(raw["left"]), int(raw["right"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ModelError(f"tree {t}: malformed internal node {nid}: {exc}") from None
            nodes[nid] = Node(nid, feature=feat, threshold=thr, left=left, right=right)

    parents: dict[int, int] = {}
    for node in nodes.values():
        if node.is_leaf:
            continue
        for child in (node.left, node.right):
            if child not in nodes:
                raise ModelError(f"tree {t}: node {node.id} points to missing node {child}")
            if child in parents:
                raise ModelError(f"tree {t}: node {child} has two parents")
            parents[child] = node.id
    roots = [nid for nid in nodes if nid not in parents]
    if len(roots) != 1:
        raise ModelError(f"tree {t}: expected exactly one root, found {len(roots)}")
    root = roots[0]
    # every node must be reachable (rules out detached cycles)
    seen, stack = set(), [root]
    while stack:
        nid = stack.pop()
        if nid in seen:
            raise ModelError(f"tree {t}: cycle through node {nid}")
        seen.add(nid)
        node = nodes[nid]
        if not node.is_leaf:
            stack.extend((node.left, node.right))
    if len(seen) != len(nodes):
        raise ModelError(f"tree {t}: unreachable nodes")
    if kind == "boosted":
        leaf_classes = {n.leaf_class for n in nodes.values() if n.is_leaf}
        if len(leaf_classes) != 1:
            raise ModelError(f"tree {t}: boosted tree with mixed leaf classes")
    return _finish_tree(nodes, root)


def load_model(document: str | dict, data: Sequence[Sequence[float]] | None = None) -> TreeEnsemble:
    """Parse and validate a model document (JSON text or an already parsed dict).

    Features declared without ``lo``/``hi`` take their domain from the
    min/max of ``data`` (rows of feature values).
    """
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ModelError(f"invalid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ModelError("model document must be an object")
    kind = doc.get("kind", "rf_majority")
    if kind not in KINDS:
        raise ModelError(f"unknown kind {kind!r}")
    classes = tuple(str(c) for c in doc.get("classes", ()))
    if len(classes) < 2:
        raise ModelError("need at least two classes")
    if len(set(classes)) != len(classes):
        raise ModelError("duplicate class names")

    raw_feats = doc.get("features")
    if not isinstance(raw_feats, list) or not raw_feats:
        raise ModelError("missing features")
    names, lo, hi = [], [], []
    source = "declared"
    for i, f in enumerate(raw_feats):
        if isinstance(f, str):
            f = {"name": f}
        names.append(str(f.get("name", f"x{i}")))
        if "lo" in f and "hi" in f:
            lo.append(float(f["lo"]))
            hi.append(float(f["hi"]))
        else:
            if data is None or len(data) == 0:
                raise ModelError(f"feature {names[-1]!r} has no domain and no data was given")
            col = [float(row[i]) for row in data]
            lo.append(min(col))
            hi.append(max(col))
            source = "training-min-max"
    if len(set(names)) != len(names):
        raise ModelError("duplicate feature names")
    for name, a, b in zip(names, lo, hi):
        if not a < b:
            raise ModelError(f"degenerate domain for feature {name!r}: [{a}, {b}]")
    space = FeatureSpace(tuple(names), tuple(lo), tuple(hi), source)

    raw_trees = doc.get("trees")
    if not isinstance(raw_trees, list) or not raw_trees:
        raise ModelError("ensemble has no trees")
    trees = tuple(_build_tree(raw, space, classes, kind, t) for t, raw in enumerate(raw_trees))
    for t, tree in enumerate(trees):
        for feat, thr in tree.thresholds():
            if not space.lo[feat] < thr < space.hi[feat]:
                raise ModelError(
                    f"tree {t}: threshold {thr} on {space.names[feat]!r} is not strictly "
                    f"inside [{space.lo[feat]}, {space.hi[feat]}]")
    return TreeEnsemble(space, classes, trees, kind)


def dump_model(te: TreeEnsemble) -> dict[str, Any]:
    """Inverse of :func:`load_model` (declared domains)."""
    trees = []
    for tree in te.trees:
        raw = []
        for nid in sorted(tree.nodes):
            n = tree.nodes[nid]
            if n.is_leaf:
                raw.append({"id": nid, "leaf_class": te.classes[n.leaf_class], "weight": n.weight})
            else:
                raw.append({"id": nid, "feature": te.features.names[n.feature],
                            "threshold": n.threshold, "left": n.left, "right": n.right})
        trees.append(raw)
    return {
        "kind": te.kind,
        "classes": list(te.classes),
        "features": [{"name": n, "lo": a, "hi": b}
                     for n, a, b in zip(te.features.names, te.features.lo, te.features.hi)],
        "trees": trees,
    }
