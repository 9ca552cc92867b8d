"""Decision-tree learner with balanced class weights, plus the
balanced-accuracy metric.

The tree is grown by greedy recursive partitioning on weighted Gini
impurity.  Growth stops at pure nodes or when fewer than two units of
weighted sample mass remain; there is no depth cap.  Ties between equally
good splits break to the lowest feature index, then the lowest threshold,
making training fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyTrainingSet, LengthMismatch

MIN_LEAF_MASS = 2.0
_GAIN_EPS = 1e-12


def balanced_weights(labels: Sequence) -> dict:
    """Per-class weight N / (K * n_c): every class gets equal total mass."""
    if len(labels) == 0:
        raise EmptyTrainingSet("cannot weight an empty label list")
    counts: dict = {}
    for label in labels:
        counts[label] = counts.get(label, 0) + 1
    total = len(labels)
    k = len(counts)
    return {label: total / (k * count) for label, count in counts.items()}


def gini(class_masses: np.ndarray) -> float:
    """Gini impurity of a weighted class-mass vector."""
    total = class_masses.sum()
    if total <= 0:
        return 0.0
    fractions = class_masses / total
    return float(1.0 - np.sum(fractions * fractions))


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: Optional["_Node"] = None
    right: Optional["_Node"] = None
    distribution: Optional[np.ndarray] = None  # weighted mass per class
    prediction: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": True, "prediction": self.prediction,
                    "distribution": [round(v, 12) for v in self.distribution.tolist()]}
        return {"leaf": False, "feature": self.feature, "threshold": self.threshold,
                "left": self.left.to_dict(), "right": self.right.to_dict()}

    @staticmethod
    def from_dict(data: dict) -> "_Node":
        if data["leaf"]:
            return _Node(prediction=data["prediction"],
                         distribution=np.asarray(data["distribution"], dtype=np.float64))
        return _Node(feature=data["feature"], threshold=data["threshold"],
                     left=_Node.from_dict(data["left"]), right=_Node.from_dict(data["right"]))


class DecisionTree:
    """Binary decision tree over numeric feature vectors."""

    def __init__(self, root: _Node, n_features: int, classes: tuple):
        self.root = root
        self.n_features = n_features
        self.classes = classes

    def predict_index(self, x: np.ndarray) -> int:
        if len(x) != self.n_features:
            raise DimensionMismatch("expected %d features, got %d" % (self.n_features, len(x)))
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.prediction

    def predict(self, x: np.ndarray):
        return self.classes[self.predict_index(x)]

    def depth(self) -> int:
        def measure(node: _Node) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(measure(node.left), measure(node.right))
        return measure(self.root)

    def leaf_count(self) -> int:
        def count(node: _Node) -> int:
            if node.is_leaf:
                return 1
            return count(node.left) + count(node.right)
        return count(self.root)

    def to_dict(self) -> dict:
        return {"n_features": self.n_features, "classes": list(self.classes),
                "root": self.root.to_dict()}

    @staticmethod
    def from_dict(data: dict) -> "DecisionTree":
        return DecisionTree(root=_Node.from_dict(data["root"]),
                            n_features=int(data["n_features"]),
                            classes=tuple(data["classes"]))


def train_dt(features: np.ndarray, labels: Sequence, class_weights: Optional[dict] = None) -> DecisionTree:
    """Fit a decision tree on a (samples x features) matrix.

    `class_weights` maps labels to per-sample weights; when omitted every
    sample weighs 1.  Balanced weighting normally comes from the overall
    training set via `balanced_weights`.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        features = features.reshape(len(features), -1)
    if features.shape[0] == 0:
        raise EmptyTrainingSet("decision tree needs at least one sample")
    if features.shape[0] != len(labels):
        raise DimensionMismatch("feature rows (%d) != labels (%d)" % (features.shape[0], len(labels)))

    classes = tuple(sorted(set(labels), key=lambda v: str(v)))
    class_index = {c: i for i, c in enumerate(classes)}
    y = np.asarray([class_index[v] for v in labels], dtype=np.intp)
    if class_weights is None:
        sample_weights = np.ones(len(labels), dtype=np.float64)
    else:
        sample_weights = np.asarray([class_weights[v] for v in labels], dtype=np.float64)

    root = _grow(features, y, sample_weights, len(classes))
    return DecisionTree(root=root, n_features=features.shape[1], classes=classes)


def _leaf(y: np.ndarray, weights: np.ndarray, n_classes: int) -> _Node:
    masses = np.bincount(y, weights=weights, minlength=n_classes)
    return _Node(distribution=masses, prediction=int(np.argmax(masses)))


def _grow(X: np.ndarray, y: np.ndarray, weights: np.ndarray, n_classes: int) -> _Node:
    masses = np.bincount(y, weights=weights, minlength=n_classes)
    total_mass = masses.sum()
    parent_gini = gini(masses)
    if parent_gini == 0.0 or total_mass < MIN_LEAF_MASS:
        return _leaf(y, weights, n_classes)

    best_gain = 0.0
    best_feature = -1
    best_threshold = 0.0

    one_hot = np.zeros((len(y), n_classes), dtype=np.float64)
    one_hot[np.arange(len(y)), y] = weights

    for feature in range(X.shape[1]):
        column = X[:, feature]
        order = np.argsort(column, kind="stable")
        sorted_vals = column[order]
        if sorted_vals[0] == sorted_vals[-1]:
            continue
        cumulative = np.cumsum(one_hot[order], axis=0)
        boundaries = np.nonzero(sorted_vals[:-1] != sorted_vals[1:])[0]

        left = cumulative[boundaries]
        right = masses - left
        left_mass = left.sum(axis=1)
        right_mass = right.sum(axis=1)
        gini_left = 1.0 - np.sum((left / left_mass[:, None]) ** 2, axis=1)
        gini_right = 1.0 - np.sum((right / right_mass[:, None]) ** 2, axis=1)
        child = (left_mass * gini_left + right_mass * gini_right) / total_mass
        gains = parent_gini - child

        pick = int(np.argmax(gains))  # first max wins: lowest threshold
        if gains[pick] > best_gain + _GAIN_EPS:
            best_gain = float(gains[pick])
            best_feature = feature
            boundary = boundaries[pick]
            # threshold strictly between two observed values
            best_threshold = float((sorted_vals[boundary] + sorted_vals[boundary + 1]) / 2.0)

    if best_feature < 0:
        return _leaf(y, weights, n_classes)

    mask = X[:, best_feature] <= best_threshold
    node = _Node(feature=best_feature, threshold=best_threshold)
    node.left = _grow(X[mask], y[mask], weights[mask], n_classes)
    node.right = _grow(X[~mask], y[~mask], weights[~mask], n_classes)
    return node


def balanced_accuracy(y_true: Sequence, y_pred: Sequence) -> float:
    """Mean per-class recall over the classes present in `y_true`."""
    if len(y_true) != len(y_pred):
        raise LengthMismatch("y_true has %d entries, y_pred %d" % (len(y_true), len(y_pred)))
    if len(y_true) == 0:
        raise LengthMismatch("label sequences must be nonempty")
    hits: dict = {}
    totals: dict = {}
    for truth, pred in zip(y_true, y_pred):
        totals[truth] = totals.get(truth, 0) + 1
        if truth == pred:
            hits[truth] = hits.get(truth, 0) + 1
    recalls = [hits.get(label, 0) / count for label, count in totals.items()]
    return float(sum(recalls) / len(recalls))
