"""End-to-end pipeline and the two-level classification model.

A file is parsed, its metadata tree built and pruned, and its structural
signature computed once (`AnalyzedFile`); training fits a metaclass index
over structure signatures plus one decision tree per metaclass, with a flat
track-and-type-aware model as the fallback for files whose structure was
never seen.  Flat single-level models (track-and-type-aware, sparse, or
codec-parameter features) use the same container.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bmff, features, h264, metaclass
from .classifier import DecisionTree, balanced_weights, train_dt
from .errors import EmptyTrainingSet, ModelMismatch, NoAvcConfig
from .tree import (ExclusionList, TreeNode, build_codec_subtree, build_container_subtree,
                   exclusion_profile_digest, join, prune, strip_values)

MODEL_FORMAT = "vidfp-model"
MODEL_FORMAT_VERSION = 1

REP_HIERARCHICAL = "hierarchical"
REP_FLAT = "flat"
REP_SPARSE = "sparse"
REP_TTA = "tta"
REP_CODEC = "codec"
FLAT_REPRESENTATIONS = (REP_FLAT, REP_SPARSE, REP_TTA, REP_CODEC)


@dataclass
class AnalyzedFile:
    """Parsed, pruned, and profiled view of one input file."""

    identifier: str
    label: Optional[str]
    tree: TreeNode
    structure: TreeNode
    setting: Optional[h264.EncodingSetting]
    parse_warnings: tuple[str, ...] = ()
    _tta: Optional[features.TtaProfile] = field(default=None, repr=False)
    _sparse: Optional[frozenset] = field(default=None, repr=False)

    @property
    def tta(self) -> features.TtaProfile:
        if self._tta is None:
            self._tta = features.tta_profile(self.tree)
        return self._tta

    @property
    def sparse(self) -> frozenset:
        if self._sparse is None:
            self._sparse = features.sparse_profile(self.tree)
        return self._sparse


def setting_from_record(record: bmff.ParameterSetRecord) -> h264.EncodingSetting:
    """Decode the first SPS and every PPS of one avcC record."""
    sps = h264.parse_sps(record.sps[0])
    pps_list = [h264.parse_pps(blob) for blob in record.pps]
    return h264.EncodingSetting(sps=sps, pps_list=pps_list)


def analyze_source(source, exclusions: ExclusionList, identifier: str = "<bytes>",
                   label: Optional[str] = None) -> AnalyzedFile:
    """Parse -> build joint tree -> prune -> strip, with codec subtree
    omitted for non-H.264 payloads."""
    box_tree = bmff.parse_boxes(source)
    container = build_container_subtree(box_tree)
    warnings = []
    if box_tree.truncated:
        warnings.append("truncated-at-%s" % box_tree.truncation_offset)

    setting = None
    codec = None
    try:
        records = bmff.extract_parameter_set_blobs(box_tree)
    except NoAvcConfig:
        warnings.append("no-avc-config")
    else:
        if len(records) > 1:
            warnings.append("multiple-avc-records")
        setting = setting_from_record(records[0])
        if len(records[0].sps) > 1:
            warnings.append("multiple-sps")
        warnings.extend(setting.sps.warnings)
        sps_id = setting.sps.get("seq_parameter_set_id")
        if any(pps.get("seq_parameter_set_id") != sps_id for pps in setting.pps_list):
            warnings.append("pps-sps-id-mismatch")
        codec = build_codec_subtree(setting)

    joint = join(container, codec)
    pruned = prune(joint, exclusions)
    return AnalyzedFile(identifier=identifier, label=label, tree=pruned,
                        structure=strip_values(pruned), setting=setting,
                        parse_warnings=tuple(warnings))


def analyze_path(path, exclusions: ExclusionList, label: Optional[str] = None) -> AnalyzedFile:
    return analyze_source(str(path), exclusions, identifier=str(path), label=label)


@dataclass
class SubModel:
    """One second-level predictor: a decision tree over a frozen vocabulary,
    or a constant for single-class metaclasses."""

    train_labels: tuple[str, ...]
    vocab: Optional[features.Vocabulary] = None
    dt: Optional[DecisionTree] = None
    constant: Optional[str] = None

    def predict(self, sample: AnalyzedFile, representation: str) -> str:
        if self.constant is not None:
            return self.constant
        vector = _vectorize(sample, representation, self.vocab)
        return self.dt.predict(vector.values)

    def to_dict(self) -> dict:
        return {"train_labels": list(self.train_labels),
                "vocab": self.vocab.to_dict() if self.vocab else None,
                "dt": self.dt.to_dict() if self.dt else None,
                "constant": self.constant}

    @staticmethod
    def from_dict(data: dict) -> "SubModel":
        return SubModel(
            train_labels=tuple(data["train_labels"]),
            vocab=features.Vocabulary.from_dict(data["vocab"]) if data["vocab"] else None,
            dt=DecisionTree.from_dict(data["dt"]) if data["dt"] else None,
            constant=data["constant"])


def _vectorize(sample: AnalyzedFile, representation: str,
               vocab: Optional[features.Vocabulary]) -> features.FeatureVector:
    if representation == REP_SPARSE:
        return features.vectorize_sparse(sample.sparse, vocab)
    if representation == REP_CODEC:
        return features.codec_vectorize(sample.setting)
    return features.vectorize_tta(sample.tta, vocab)


@dataclass
class HierarchicalModel:
    """Metaclass index plus per-metaclass trees plus the flat fallback."""

    representation: str
    level1: str
    exclusion_profile: str
    exclusion_digest: str
    classes: tuple[str, ...]
    fallback: SubModel
    index: Optional[metaclass.MetaclassIndex] = None
    per_metaclass: dict[int, SubModel] = field(default_factory=dict)

    @property
    def metaclass_count(self) -> int:
        return self.index.count if self.index is not None else 0

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "format_version": MODEL_FORMAT_VERSION,
            "representation": self.representation,
            "level1": self.level1,
            "exclusion_profile": self.exclusion_profile,
            "exclusion_digest": self.exclusion_digest,
            "classes": list(self.classes),
            "ldp_binning": {"bins": metaclass.LDP_BINS, "degree_cap": metaclass.LDP_DEGREE_CAP},
            "index": self.index.to_dict() if self.index else None,
            "per_metaclass": {str(mc): sub.to_dict() for mc, sub in self.per_metaclass.items()},
            "fallback": self.fallback.to_dict(),
        }

    @staticmethod
    def from_dict(data: dict) -> "HierarchicalModel":
        if data.get("format") != MODEL_FORMAT:
            raise ModelMismatch("not a vidfp model file")
        if data.get("format_version") != MODEL_FORMAT_VERSION:
            raise ModelMismatch("unsupported model format version %r" % data.get("format_version"))
        return HierarchicalModel(
            representation=data["representation"],
            level1=data["level1"],
            exclusion_profile=data["exclusion_profile"],
            exclusion_digest=data["exclusion_digest"],
            classes=tuple(data["classes"]),
            fallback=SubModel.from_dict(data["fallback"]),
            index=metaclass.MetaclassIndex.from_dict(data["index"]) if data["index"] else None,
            per_metaclass={int(mc): SubModel.from_dict(sub) for mc, sub in data["per_metaclass"].items()},
        )


@dataclass(frozen=True)
class Prediction:
    label: str
    metaclass_id: Optional[int]
    used_fallback: bool


def _fit_submodel(samples: Sequence[AnalyzedFile], representation: str,
                  weights: dict) -> SubModel:
    labels = [s.label for s in samples]
    distinct = sorted(set(labels))
    if len(distinct) == 1:
        return SubModel(train_labels=tuple(distinct), constant=distinct[0])
    vocab = None
    if representation == REP_SPARSE:
        vocab = features.fit_vocabulary_sparse([s.sparse for s in samples])
        matrix = np.stack([features.vectorize_sparse(s.sparse, vocab).values for s in samples])
    elif representation == REP_CODEC:
        matrix = np.stack([features.codec_vectorize(s.setting).values for s in samples])
    else:
        vocab = features.fit_vocabulary_tta([s.tta for s in samples])
        matrix = np.stack([features.vectorize_tta(s.tta, vocab).values for s in samples])
    dt = train_dt(matrix, labels, class_weights=weights)
    return SubModel(train_labels=tuple(distinct), vocab=vocab, dt=dt)


def train_model(samples: Sequence[AnalyzedFile], representation: str = REP_HIERARCHICAL,
                level1: str = metaclass.ABSTRACTION_HASH,
                exclusions: Optional[ExclusionList] = None) -> HierarchicalModel:
    """Train on analyzed, labeled files.

    `hierarchical` fits the metaclass index, one track-and-type-aware tree
    per metaclass (class weights taken from the overall training set), and
    the flat combined fallback.  The flat representations fit the fallback
    model only.
    """
    samples = list(samples)
    if not samples:
        raise EmptyTrainingSet("no training samples")
    if any(s.label is None for s in samples):
        raise EmptyTrainingSet("every training sample needs a label")
    if exclusions is None:
        from .tree import EMPTY_EXCLUSIONS
        exclusions = EMPTY_EXCLUSIONS

    weights = balanced_weights([s.label for s in samples])
    classes = tuple(sorted({s.label for s in samples}))

    # Fallback is always the flat combined track-and-type-aware model.
    fallback_rep = REP_TTA if representation == REP_HIERARCHICAL else representation
    fallback = _fit_submodel(samples, fallback_rep, weights)

    model = HierarchicalModel(
        representation=representation,
        level1=level1,
        exclusion_profile=exclusions.profile,
        exclusion_digest=exclusion_profile_digest(exclusions),
        classes=classes,
        fallback=fallback,
    )
    if representation != REP_HIERARCHICAL:
        return model

    model.index = metaclass.fit_index((s.structure for s in samples), level1)
    groups: dict[int, list[AnalyzedFile]] = {}
    for sample in samples:
        mc = metaclass.assign(sample.structure, model.index)
        groups.setdefault(mc, []).append(sample)
    for mc, group in sorted(groups.items()):
        model.per_metaclass[mc] = _fit_submodel(group, REP_TTA, weights)
    return model


def predict_model(model: HierarchicalModel, sample: AnalyzedFile) -> Prediction:
    """Route a file through the model: metaclass lookup then the matching
    second-level tree, or the flat fallback for unknown structures."""
    if model.representation != REP_HIERARCHICAL:
        return Prediction(label=model.fallback.predict(sample, model.representation),
                          metaclass_id=None, used_fallback=False)
    mc = metaclass.assign(sample.structure, model.index)
    if mc == metaclass.UNKNOWN_METACLASS or mc not in model.per_metaclass:
        return Prediction(label=model.fallback.predict(sample, REP_TTA),
                          metaclass_id=metaclass.UNKNOWN_METACLASS, used_fallback=True)
    return Prediction(label=model.per_metaclass[mc].predict(sample, REP_TTA),
                      metaclass_id=mc, used_fallback=False)


def corpus_feature_matrix(samples: Sequence[AnalyzedFile], representation: str):
    """Fit a vocabulary on the whole corpus and vectorize every file.

    Returns (descriptors, labels, matrix) for CSV export and external
    analysis.
    """
    rep = REP_TTA if representation in (REP_HIERARCHICAL, REP_FLAT) else representation
    if rep == REP_SPARSE:
        vocab = features.fit_vocabulary_sparse([s.sparse for s in samples])
        rows = [features.vectorize_sparse(s.sparse, vocab).values for s in samples]
    elif rep == REP_CODEC:
        vocab = features.CODEC_VOCABULARY
        rows = [features.codec_vectorize(s.setting).values for s in samples]
    else:
        vocab = features.fit_vocabulary_tta([s.tta for s in samples])
        rows = [features.vectorize_tta(s.tta, vocab).values for s in samples]
    descriptors = [descriptor for descriptor, _ in vocab.entries]
    labels = [s.label for s in samples]
    return descriptors, labels, np.stack(rows)


def save_model(model: HierarchicalModel, path) -> None:
    """Write the model as deterministic JSON (byte-identical across reruns)."""
    payload = json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))
    Path(path).write_text(payload + "\n", encoding="utf-8")


def load_model(path) -> HierarchicalModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelMismatch("cannot read model file %s: %s" % (path, exc)) from exc
    return HierarchicalModel.from_dict(data)


def check_exclusion_compatibility(model: HierarchicalModel, exclusions: ExclusionList) -> None:
    """Refuse to predict when the active exclusion profile differs from the
    one the model was trained with."""
    if exclusion_profile_digest(exclusions) != model.exclusion_digest:
        raise ModelMismatch(
            "exclusion profile %r does not match the model's %r"
            % (exclusions.profile, model.exclusion_profile))
