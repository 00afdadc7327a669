"""C4.5-style decision tree induction over categorical features.

Splitting uses gain ratio restricted to candidates whose information gain is
at least the candidate mean (the classic guard against high-ratio, low-gain
splits).  Records missing the tested feature are excluded from that split's
statistics and the gain is scaled by the known fraction.  Pruning is
pessimistic: a subtree collapses to a leaf when the leaf's one-sided normal
error upper bound is no worse than the sum over the subtree's leaves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from statistics import NormalDist

from .dataset import DatasetView
from .errors import (
    AllZeroCounts,
    BadModelFile,
    EmptyView,
    SchemaMismatch,
    UnknownFeature,
)
from .schema import RiskFactorSchema, builtin_schema

FORMAT_VERSION = 1
KIND = "decision_tree"


@dataclass(frozen=True)
class TreeParams:
    min_leaf: int = 2
    prune: bool = True
    confidence: float = 0.25  # one-sided pessimistic-error confidence
    seed: int = 0

    def __post_init__(self):
        if self.min_leaf < 1:
            raise ValueError(f"min_leaf must be >= 1, got {self.min_leaf}")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must be in (0,1), got {self.confidence}")


@dataclass(frozen=True)
class Leaf:
    counts: tuple[int, ...]  # class counts in class-value order
    predicted: str

    @property
    def n(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class InternalNode:
    feature: str
    counts: tuple[int, ...]
    children: dict = field(default_factory=dict)  # feature value -> node

    @property
    def n(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class DecisionTreeModel:
    target: str
    class_values: tuple[str, ...]
    root: object  # Leaf | InternalNode
    params: TreeParams
    trained_on: int


@dataclass(frozen=True)
class PathStep:
    feature: str
    value: str
    imputed: bool = False  # value chosen by majority routing, not evidence

    def to_json(self) -> dict:
        return {"feature": self.feature, "value": self.value, "imputed": self.imputed}


@dataclass(frozen=True)
class PredictionResult:
    predicted: str
    distribution: dict  # class value -> smoothed probability
    path: tuple[PathStep, ...]


def entropy(class_counts) -> float:
    """Shannon entropy in bits of a count vector."""
    counts = list(class_counts)
    total = sum(counts)
    if total <= 0:
        raise AllZeroCounts("entropy needs at least one positive count")
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    return h


def _tally(view: DatasetView, records) -> tuple[int, ...]:
    class_values = view.class_values()
    idx = {v: i for i, v in enumerate(class_values)}
    counts = [0] * len(class_values)
    for r in records:
        counts[idx[r.get(view.target)]] += 1
    return tuple(counts)


def _argmax_class(counts, class_values) -> str:
    best = 0
    for i in range(1, len(counts)):
        if counts[i] > counts[best]:
            best = i
    return class_values[best]


def _gain_stats(view: DatasetView, records, feature: str):
    """(scaled gain, split info, gain ratio) for one candidate split."""
    known = [r for r in records if r.get(feature) is not None]
    if not known:
        return 0.0, 0.0, 0.0
    fraction = len(known) / len(records)
    base = entropy(_tally(view, known))
    split_entropy = 0.0
    split_info = 0.0
    for value in view.values_of(feature):
        part = [r for r in known if r.get(feature) == value]
        if not part:
            continue
        w = len(part) / len(known)
        split_entropy += w * entropy(_tally(view, part))
        split_info -= w * math.log2(w)
    gain = max(0.0, fraction * (base - split_entropy))
    if split_info == 0.0:
        return gain, 0.0, 0.0
    return gain, split_info, gain / split_info


def gain_ratio(view: DatasetView, feature: str) -> float:
    """Information gain over split information, 0 for constant features."""
    if feature not in view.predictors:
        raise UnknownFeature(feature)
    if len(view) == 0:
        raise EmptyView("cannot score a split on an empty view")
    return _gain_stats(view, view.records, feature)[2]


def _grow(view: DatasetView, records, used: frozenset, params: TreeParams):
    class_values = view.class_values()
    counts = _tally(view, records)
    predicted = _argmax_class(counts, class_values)
    if sum(1 for c in counts if c > 0) <= 1 or len(records) < 2 * params.min_leaf:
        return Leaf(counts=counts, predicted=predicted)

    candidates = []
    for feature in view.predictors:
        if feature in used:
            continue
        known = {r.get(feature) for r in records} - {None}
        if len(known) < 2:  # constant or fully missing here
            continue
        candidates.append((feature, _gain_stats(view, records, feature)))
    if not candidates:
        return Leaf(counts=counts, predicted=predicted)

    mean_gain = sum(g for _, (g, _, _) in candidates) / len(candidates)
    best = None
    for feature, (g, _, ratio) in candidates:
        if g < mean_gain:
            continue
        if best is None or ratio > best[1]:
            best = (feature, ratio, g)
    if best is None or best[2] <= 0.0:
        return Leaf(counts=counts, predicted=predicted)

    feature = best[0]
    children = {}
    for value in view.values_of(feature):
        part = [r for r in records if r.get(feature) == value]
        if part:
            children[value] = _grow(view, part, used | {feature}, params)
        else:
            # no training data down this branch: fall back to the lowest class
            children[value] = Leaf(counts=tuple([0] * len(class_values)),
                                   predicted=class_values[0])
    return InternalNode(feature=feature, counts=counts, children=children)


def induce(view: DatasetView, params: TreeParams = TreeParams()) -> DecisionTreeModel:
    """Grow a tree over the view, then prune if enabled.  Deterministic."""
    if len(view) == 0:
        raise EmptyView("cannot induce a tree from an empty view")
    root = _grow(view, list(view.records), frozenset(), params)
    model = DecisionTreeModel(target=view.target, class_values=view.class_values(),
                              root=root, params=params, trained_on=len(view))
    if params.prune:
        model = prune(model, view)
    return model


def _pessimistic_upper(n: int, e: int, z: float) -> float:
    """One-sided normal (Wilson) upper bound on the true error rate."""
    f = e / n
    z2 = z * z
    return (f + z2 / (2 * n)
            + z * math.sqrt(f * (1 - f) / n + z2 / (4 * n * n))) / (1 + z2 / n)


def _bound(n: int, e: int, z: float) -> float:
    return n * _pessimistic_upper(n, e, z) if n > 0 else 0.0


def _prune_node(node, view: DatasetView, records, z: float):
    class_values = view.class_values()
    counts = _tally(view, records)
    n = len(records)
    if isinstance(node, Leaf):
        e = n - counts[class_values.index(node.predicted)]
        return node, _bound(n, e, z)
    new_children = {}
    subtree_bound = 0.0
    for value in view.values_of(node.feature):
        part = [r for r in records if r.get(node.feature) == value]
        child, b = _prune_node(node.children[value], view, part, z)
        new_children[value] = child
        subtree_bound += b
    predicted = _argmax_class(counts, class_values)
    leaf_bound = _bound(n, n - max(counts), z)
    if leaf_bound <= subtree_bound:
        return Leaf(counts=counts, predicted=predicted), leaf_bound
    return InternalNode(feature=node.feature, counts=node.counts,
                        children=new_children), subtree_bound


def _used_features(node, acc: set) -> set:
    if isinstance(node, InternalNode):
        acc.add(node.feature)
        for child in node.children.values():
            _used_features(child, acc)
    return acc


def prune(model: DecisionTreeModel, view: DatasetView) -> DecisionTreeModel:
    """Pessimistic bottom-up pruning; routes the view's records to recount.

    Never increases the node count and is idempotent for a fixed view.
    """
    if view.target != model.target or view.class_values() != model.class_values:
        raise SchemaMismatch("view target does not match the model")
    missing = _used_features(model.root, set()) - set(view.predictors)
    if missing:
        raise SchemaMismatch(f"view lacks features used by the model: {sorted(missing)}")
    z = NormalDist().inv_cdf(1.0 - model.params.confidence)
    root, _ = _prune_node(model.root, view, list(view.records), z)
    return replace(model, root=root)


def _heaviest_child(node: InternalNode, values) -> str:
    best = None
    for value in values:
        n = node.children[value].n
        if best is None or n > best[1]:
            best = (value, n)
    return best[0]


def predict_tree(model: DecisionTreeModel, evidence: dict,
                 schema: RiskFactorSchema | None = None) -> PredictionResult:
    """Traverse from the root; missing tested features follow the heaviest
    training branch and the path step is marked imputed."""
    schema = schema or builtin_schema()
    for name, value in evidence.items():
        if name not in schema:
            raise UnknownFeature(name)
        schema.check_value(name, value)
    node = model.root
    path = []
    while isinstance(node, InternalNode):
        values = schema.values_of(node.feature)
        given = evidence.get(node.feature)
        if given is None:
            taken = _heaviest_child(node, values)
            path.append(PathStep(feature=node.feature, value=taken, imputed=True))
        else:
            taken = given
            path.append(PathStep(feature=node.feature, value=taken, imputed=False))
        node = node.children[taken]
    total = node.n + len(model.class_values)
    distribution = {v: (node.counts[i] + 1) / total
                    for i, v in enumerate(model.class_values)}
    return PredictionResult(predicted=node.predicted, distribution=distribution,
                            path=tuple(path))


def node_count(node) -> int:
    if isinstance(node, Leaf):
        return 1
    return 1 + sum(node_count(c) for c in node.children.values())


def used_features(model: DecisionTreeModel) -> tuple[str, ...]:
    """Features tested anywhere in the tree, sorted by name."""
    return tuple(sorted(_used_features(model.root, set())))


def export_tree_dot(model: DecisionTreeModel) -> str:
    """Stable DOT rendering: boxes test features, ellipses are leaves."""
    lines = ["digraph decision_tree {", "  rankdir=TB;"]
    counter = [0]

    def emit(node) -> str:
        nid = f"n{counter[0]}"
        counter[0] += 1
        if isinstance(node, Leaf):
            label = f"{node.predicted}\\n{'/'.join(str(c) for c in node.counts)}"
            lines.append(f'  {nid} [label="{label}", shape=ellipse];')
        else:
            lines.append(f'  {nid} [label="{node.feature}", shape=box];')
            for value, child in node.children.items():
                cid = emit(child)
                lines.append(f'  {nid} -> {cid} [label="{value}"];')
        return nid

    emit(model.root)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _node_to_json(node) -> dict:
    if isinstance(node, Leaf):
        return {"type": "leaf", "counts": list(node.counts), "predicted": node.predicted}
    return {"type": "internal", "feature": node.feature, "counts": list(node.counts),
            "children": {v: _node_to_json(c) for v, c in node.children.items()}}


def _node_from_json(doc: dict):
    try:
        if doc["type"] == "leaf":
            return Leaf(counts=tuple(int(c) for c in doc["counts"]),
                        predicted=doc["predicted"])
        if doc["type"] == "internal":
            return InternalNode(feature=doc["feature"],
                                counts=tuple(int(c) for c in doc["counts"]),
                                children={v: _node_from_json(c)
                                          for v, c in doc["children"].items()})
    except (KeyError, TypeError, ValueError) as exc:
        raise BadModelFile(f"malformed tree node: {exc}") from exc
    raise BadModelFile(f"unknown node type: {doc.get('type')!r}")


def tree_to_json(model: DecisionTreeModel) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": KIND,
        "target": model.target,
        "class_values": list(model.class_values),
        "params": {"min_leaf": model.params.min_leaf, "prune": model.params.prune,
                   "confidence": model.params.confidence, "seed": model.params.seed},
        "trained_on": model.trained_on,
        "root": _node_to_json(model.root),
    }
    return json.dumps(doc, indent=2) + "\n"


def tree_from_json(text: str) -> DecisionTreeModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadModelFile(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise BadModelFile("unsupported or missing format_version")
    if doc.get("kind") != KIND:
        raise BadModelFile(f"expected kind {KIND!r}, got {doc.get('kind')!r}")
    try:
        params = TreeParams(min_leaf=doc["params"]["min_leaf"],
                            prune=doc["params"]["prune"],
                            confidence=doc["params"]["confidence"],
                            seed=doc["params"]["seed"])
        return DecisionTreeModel(target=doc["target"],
                                 class_values=tuple(doc["class_values"]),
                                 root=_node_from_json(doc["root"]),
                                 params=params,
                                 trained_on=int(doc["trained_on"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise BadModelFile(f"malformed decision-tree file: {exc}") from exc
