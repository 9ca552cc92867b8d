"""Repeated stratified k-fold cross-validation with balanced accuracy.

Each run reshuffles the per-class sample order, partitions every class
round-robin over k folds, trains on k-1 folds, and tests on the held-out
fold; a run's score is the balanced accuracy over all its held-out
predictions.  Level-1 routing statistics (metaclass count, unknown rate,
misassignment rate) are tracked per run for hierarchical models.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import metaclass
from .classifier import balanced_accuracy
from .errors import InsufficientData
from .model import (REP_HIERARCHICAL, AnalyzedFile, predict_model, train_model)
from .tree import ExclusionList


@dataclass
class RunStats:
    run: int
    balanced_accuracy: float
    metaclass_count: float
    unknown_fraction: float
    misassigned_fraction: float


@dataclass
class CvReport:
    k: int
    runs: int
    seed: int
    representation: str
    level1: str
    exclusion_profile: str
    classes: tuple[str, ...]
    run_stats: list[RunStats] = field(default_factory=list)
    confusion: dict = field(default_factory=dict)  # true -> pred -> count
    warnings: list[str] = field(default_factory=list)

    @property
    def mean_balanced_accuracy(self) -> float:
        scores = [r.balanced_accuracy for r in self.run_stats]
        return sum(scores) / len(scores)

    @property
    def std_balanced_accuracy(self) -> float:
        scores = [r.balanced_accuracy for r in self.run_stats]
        mean = self.mean_balanced_accuracy
        return (sum((s - mean) ** 2 for s in scores) / len(scores)) ** 0.5


def stratified_folds(labels: Sequence[str], k: int, rng: random.Random) -> list[list[int]]:
    """Round-robin assignment of each class's shuffled indices over k folds."""
    by_class: dict[str, list[int]] = {}
    for i, label in enumerate(labels):
        by_class.setdefault(label, []).append(i)
    folds: list[list[int]] = [[] for _ in range(k)]
    start = 0
    for label in sorted(by_class):
        indices = by_class[label]
        rng.shuffle(indices)
        for j, idx in enumerate(indices):
            folds[(start + j) % k].append(idx)
        start += 1  # stagger classes so small classes spread across folds
    return folds


def vector_kfold_cv(matrix, labels: Sequence[str], k: int = 5, runs: int = 10, seed: int = 0,
                    representation: str = "core-params") -> CvReport:
    """Cross-validate a decision tree over plain feature vectors (the
    partial-file path, where features arrive as 11-column vectors)."""
    import numpy as np

    from .classifier import balanced_weights, train_dt

    matrix = np.asarray(matrix, dtype=np.float64)
    classes = sorted(set(labels))
    if k < 2:
        raise InsufficientData("k must be at least 2")
    if len(classes) < 2:
        raise InsufficientData("cross-validation needs at least two classes")
    if len(labels) < k:
        raise InsufficientData("need at least %d samples for %d folds" % (k, k))

    report = CvReport(k=k, runs=runs, seed=seed, representation=representation,
                      level1="-", exclusion_profile="-", classes=tuple(classes))
    for label in classes:
        count = sum(1 for l in labels if l == label)
        if count < k:
            report.warnings.append(
                "class %r has fewer samples than folds (%d < %d); folds degrade gracefully"
                % (label, count, k))

    for run in range(runs):
        rng = random.Random(seed * 1_000_003 + run)
        folds = stratified_folds(labels, k, rng)
        run_true: list[str] = []
        run_pred: list[str] = []
        for held_out in range(k):
            test_idx = folds[held_out]
            train_idx = [i for f in range(k) if f != held_out for i in folds[f]]
            if not test_idx or not train_idx:
                continue
            train_labels = [labels[i] for i in train_idx]
            weights = balanced_weights(train_labels)
            dt = train_dt(matrix[train_idx], train_labels, class_weights=weights)
            for i in test_idx:
                run_true.append(labels[i])
                run_pred.append(dt.predict(matrix[i]))
        report.run_stats.append(RunStats(
            run=run, balanced_accuracy=balanced_accuracy(run_true, run_pred),
            metaclass_count=0.0, unknown_fraction=0.0, misassigned_fraction=0.0))
        for truth, pred in zip(run_true, run_pred):
            report.confusion.setdefault(truth, {})
            report.confusion[truth][pred] = report.confusion[truth].get(pred, 0) + 1
    return report


def kfold_cv(samples: Sequence[AnalyzedFile], k: int = 5, runs: int = 10, seed: int = 0,
             representation: str = REP_HIERARCHICAL,
             level1: str = metaclass.ABSTRACTION_HASH,
             exclusions: Optional[ExclusionList] = None) -> CvReport:
    samples = list(samples)
    labels = [s.label for s in samples]
    classes = sorted(set(labels))
    if k < 2:
        raise InsufficientData("k must be at least 2")
    if len(classes) < 2:
        raise InsufficientData("cross-validation needs at least two classes")
    if len(samples) < k:
        raise InsufficientData("need at least %d samples for %d folds" % (k, k))

    report = CvReport(k=k, runs=runs, seed=seed, representation=representation,
                      level1=level1,
                      exclusion_profile=exclusions.profile if exclusions else "none",
                      classes=tuple(classes))
    small = sorted({label for label in classes if labels.count(label) < k})
    for label in small:
        report.warnings.append(
            "class %r has fewer samples than folds (%d < %d); folds degrade gracefully"
            % (label, labels.count(label), k))

    for run in range(runs):
        rng = random.Random(seed * 1_000_003 + run)
        folds = stratified_folds(labels, k, rng)
        run_true: list[str] = []
        run_pred: list[str] = []
        unknown = 0
        misassigned = 0
        routed = 0
        metaclass_counts: list[int] = []
        for held_out in range(k):
            test_idx = folds[held_out]
            train_idx = [i for f in range(k) if f != held_out for i in folds[f]]
            if not test_idx or not train_idx:
                continue
            model = train_model([samples[i] for i in train_idx], representation=representation,
                                level1=level1, exclusions=exclusions)
            metaclass_counts.append(model.metaclass_count)
            for i in test_idx:
                prediction = predict_model(model, samples[i])
                run_true.append(samples[i].label)
                run_pred.append(prediction.label)
                if representation == REP_HIERARCHICAL:
                    routed += 1
                    if prediction.used_fallback:
                        unknown += 1
                    elif samples[i].label not in model.per_metaclass[prediction.metaclass_id].train_labels:
                        misassigned += 1
        score = balanced_accuracy(run_true, run_pred)
        report.run_stats.append(RunStats(
            run=run,
            balanced_accuracy=score,
            metaclass_count=(sum(metaclass_counts) / len(metaclass_counts)) if metaclass_counts else 0.0,
            unknown_fraction=(unknown / routed) if routed else 0.0,
            misassigned_fraction=(misassigned / routed) if routed else 0.0,
        ))
        for truth, pred in zip(run_true, run_pred):
            report.confusion.setdefault(truth, {})
            report.confusion[truth][pred] = report.confusion[truth].get(pred, 0) + 1
    return report
