"""Feature representations over file-metadata trees.

Three path labeling schemes (plain, global sibling order, per-type sibling
order, plus the track-only ordering used by the track-and-type-aware
representation), a frozen vocabulary mapping path descriptors to vector
dimensions, and the three vectorizers: sparse binary path presence,
track-and-type-aware counts/values, and the fixed-order codec parameter
vector.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import EmptyCorpus, VocabularyKindMismatch
from .h264 import EncodingSetting, PpsParams, SpsParams, VuiParams
from .tree import TreeNode

# Marker for parameters that are absent from a bitstream; deliberately
# distinct from 0, which is a common legitimate value.
ABSENT_VALUE = -1048576.0

KIND_SPARSE = "sparse-binary"
KIND_TTA = "track-type-aware"
KIND_CODEC = "codec-params"


class LabelingScheme(enum.Enum):
    PLAIN = "plain"
    GLOBAL_ORDER = "global-order"
    TYPE_ORDER = "type-order"
    TRAK_ORDER = "trak-order"  # ordinals on media-track boxes only


def _escape(label: str) -> str:
    return label.replace("%", "%25").replace("/", "%2F")


def _annotated_children(node: TreeNode, scheme: LabelingScheme) -> Iterable[tuple[TreeNode, str]]:
    type_counter: Counter = Counter()
    for position, child in enumerate(node.children, start=1):
        if child.is_value:
            yield child, child.label
            continue
        label = _escape(child.label)
        if scheme is LabelingScheme.GLOBAL_ORDER:
            label = "%s-%d" % (label, position)
        elif scheme is LabelingScheme.TYPE_ORDER:
            type_counter[child.label] += 1
            label = "%s-%d" % (label, type_counter[child.label])
        elif scheme is LabelingScheme.TRAK_ORDER:
            if child.label == "trak":
                type_counter[child.label] += 1
                label = "%s-%d" % (label, type_counter[child.label])
        yield child, label


@dataclass(frozen=True)
class PathEntry:
    """A root-to-node label sequence with the node's value leaf, if any."""

    labels: tuple[str, ...]
    terminal_value: Optional[str] = None
    role: str = "box"

    def render(self, with_value: bool = False) -> str:
        parts = list(self.labels)
        if with_value and self.terminal_value is not None:
            parts.append(_escape(self.terminal_value))
        return "/".join(parts)


def _value_child_text(node: TreeNode) -> Optional[str]:
    if len(node.children) == 1 and node.children[0].is_value:
        return node.children[0].label
    return None


def enumerate_paths(tree: TreeNode, scheme: LabelingScheme) -> list[PathEntry]:
    """Root-to-leaf path entries in depth-first order.

    The root's own label is not part of any path.  A leaf that is a value
    node contributes the value as `terminal_value` on its field's entry.
    """
    entries: list[PathEntry] = []

    def walk(node: TreeNode, prefix: tuple[str, ...]) -> None:
        for child, label in _annotated_children(node, scheme):
            if child.is_value:
                continue  # handled through the parent's terminal value
            path = prefix + (label,)
            value = _value_child_text(child)
            if value is not None or not child.children:
                entries.append(PathEntry(path, value, child.role))
            if value is None:
                walk(child, path)

    walk(tree, ())
    return entries


def enumerate_node_paths(tree: TreeNode, scheme: LabelingScheme) -> list[PathEntry]:
    """Root-to-node path entries for every non-value node, depth-first."""
    entries: list[PathEntry] = []

    def walk(node: TreeNode, prefix: tuple[str, ...]) -> None:
        for child, label in _annotated_children(node, scheme):
            if child.is_value:
                continue
            path = prefix + (label,)
            entries.append(PathEntry(path, _value_child_text(child), child.role))
            walk(child, path)

    walk(tree, ())
    return entries


def load_value_kinds() -> frozenset[str]:
    """Field labels registered as non-categorical (numeric)."""
    text = resources.files("vidfp").joinpath("data", "value_kinds.txt").read_text(encoding="utf-8")
    names = []
    for line in text.splitlines():
        entry = line.split("#", 1)[0].strip()
        if entry:
            names.append(entry)
    return frozenset(names)


@dataclass(frozen=True)
class Vocabulary:
    """Frozen descriptor-to-dimension map.

    Unknown descriptors at transform time map to nothing; they never grow
    the vocabulary.
    """

    kind: str
    scheme: str
    entries: tuple[tuple[str, str], ...]  # (descriptor, entry-kind) by index
    version: str = "1"

    @property
    def size(self) -> int:
        return len(self.entries)

    def indexer(self) -> dict[str, int]:
        return {descriptor: i for i, (descriptor, _) in enumerate(self.entries)}

    def save_text(self) -> str:
        lines = ["# vidfp vocabulary version=%s kind=%s scheme=%s" % (self.version, self.kind, self.scheme)]
        for i, (descriptor, entry_kind) in enumerate(self.entries):
            lines.append("%d\t%s\t%s" % (i, entry_kind, descriptor))
        return "\n".join(lines) + "\n"

    @staticmethod
    def load_text(text: str) -> "Vocabulary":
        header = text.splitlines()[0]
        meta = dict(part.split("=", 1) for part in header.replace("# vidfp vocabulary ", "").split())
        entries = []
        for line in text.splitlines()[1:]:
            if not line.strip():
                continue
            _, entry_kind, descriptor = line.split("\t", 2)
            entries.append((descriptor, entry_kind))
        return Vocabulary(kind=meta["kind"], scheme=meta["scheme"], entries=tuple(entries), version=meta["version"])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "scheme": self.scheme, "version": self.version,
                "entries": [list(entry) for entry in self.entries]}

    @staticmethod
    def from_dict(data: dict) -> "Vocabulary":
        return Vocabulary(kind=data["kind"], scheme=data["scheme"], version=data["version"],
                          entries=tuple((d, k) for d, k in data["entries"]))


@dataclass(frozen=True)
class FeatureVector:
    kind: str
    values: np.ndarray
    flags: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.values)


def _sparse_descriptors(entries: Sequence[PathEntry]) -> set[str]:
    # two unordered descriptor sets: field-name-only paths plus field+value paths
    out = set()
    for entry in entries:
        out.add(entry.render(with_value=False))
        if entry.terminal_value is not None:
            out.add(entry.render(with_value=True))
    return out


def _tta_descriptors(entries: Sequence[PathEntry], numeric_fields: frozenset[str]) -> tuple[list[tuple[str, str]], dict[str, float], list[str]]:
    """Descriptor stream for the track-and-type-aware representation.

    Returns (list of (descriptor, kind) occurrences, value map, flags).
    Codec parameters are always non-categorical; container fields follow the
    registry.
    """
    occurrences: list[tuple[str, str]] = []
    values: dict[str, float] = {}
    flags: list[str] = []
    for entry in entries:
        descriptor = entry.render(with_value=False)
        numeric = entry.role == "param" or (entry.role == "field" and entry.labels[-1] in numeric_fields)
        if numeric:
            occurrences.append((descriptor, "value"))
            if entry.terminal_value is None:
                continue
            if descriptor in values:
                flags.append("duplicate-value:%s" % descriptor)
                continue
            parsed = _parse_numeric(entry.terminal_value)
            if parsed is None:
                flags.append("non-numeric:%s" % descriptor)
            else:
                values[descriptor] = parsed
        else:
            occurrences.append((descriptor, "count"))
            if entry.terminal_value is not None:
                occurrences.append((entry.render(with_value=True), "count"))
    return occurrences, values, flags


def _parse_numeric(text: str) -> Optional[float]:
    if text == "absent":
        return ABSENT_VALUE
    try:
        return float(text)
    except ValueError:
        return None


@dataclass(frozen=True)
class TtaProfile:
    """Per-tree descriptor stream for the track-and-type-aware
    representation, precomputed so cross-validation folds can refit
    vocabularies without re-walking trees."""

    occurrences: tuple[tuple[str, str], ...]
    values: tuple[tuple[str, float], ...]
    flags: tuple[str, ...]


def tta_profile(tree: TreeNode, numeric_fields: Optional[frozenset[str]] = None) -> TtaProfile:
    if numeric_fields is None:
        numeric_fields = load_value_kinds()
    entries = enumerate_node_paths(tree, LabelingScheme.TRAK_ORDER)
    occurrences, values, flags = _tta_descriptors(entries, numeric_fields)
    return TtaProfile(occurrences=tuple(occurrences),
                      values=tuple(sorted(values.items())),
                      flags=tuple(flags))


def sparse_profile(tree: TreeNode) -> frozenset[str]:
    return frozenset(_sparse_descriptors(enumerate_paths(tree, LabelingScheme.PLAIN)))


def fit_vocabulary_tta(profiles: Sequence[TtaProfile]) -> Vocabulary:
    if not profiles:
        raise EmptyCorpus("vocabulary fit needs at least one profile")
    kinds: dict[str, str] = {}
    for profile in profiles:
        for descriptor, entry_kind in profile.occurrences:
            kinds[descriptor] = entry_kind
    entries = tuple((descriptor, kinds[descriptor]) for descriptor in sorted(kinds))
    return Vocabulary(kind=KIND_TTA, scheme=LabelingScheme.TRAK_ORDER.value, entries=entries)


def fit_vocabulary_sparse(profiles: Sequence[frozenset[str]]) -> Vocabulary:
    if not profiles:
        raise EmptyCorpus("vocabulary fit needs at least one profile")
    descriptors: set[str] = set()
    for profile in profiles:
        descriptors.update(profile)
    entries = tuple((descriptor, "binary") for descriptor in sorted(descriptors))
    return Vocabulary(kind=KIND_SPARSE, scheme=LabelingScheme.PLAIN.value, entries=entries)


def vectorize_tta(profile: TtaProfile, vocab: Vocabulary) -> FeatureVector:
    if vocab.kind != KIND_TTA:
        raise VocabularyKindMismatch("expected %s vocabulary, got %s" % (KIND_TTA, vocab.kind))
    index = vocab.indexer()
    values = np.zeros(vocab.size, dtype=np.float64)
    for descriptor, entry_kind in profile.occurrences:
        slot = index.get(descriptor)
        if slot is not None and entry_kind == "count":
            values[slot] += 1.0
    for descriptor, value in profile.values:
        slot = index.get(descriptor)
        if slot is not None:
            values[slot] = value
    return FeatureVector(kind=KIND_TTA, values=values, flags=profile.flags)


def vectorize_sparse(profile: frozenset[str], vocab: Vocabulary) -> FeatureVector:
    if vocab.kind != KIND_SPARSE:
        raise VocabularyKindMismatch("expected %s vocabulary, got %s" % (KIND_SPARSE, vocab.kind))
    index = vocab.indexer()
    values = np.zeros(vocab.size, dtype=np.float64)
    for descriptor in profile:
        slot = index.get(descriptor)
        if slot is not None:
            values[slot] = 1.0
    return FeatureVector(kind=KIND_SPARSE, values=values)


def fit_vocabulary(corpus: Sequence[Sequence[PathEntry]], kind: str,
                   scheme: LabelingScheme, numeric_fields: Optional[frozenset[str]] = None) -> Vocabulary:
    """Fit a frozen vocabulary over per-tree path-entry lists.

    Descriptor order is lexicographic for reproducibility.
    """
    if not corpus:
        raise EmptyCorpus("vocabulary fit needs at least one path list")
    if numeric_fields is None:
        numeric_fields = load_value_kinds()
    kinds: dict[str, str] = {}
    if kind == KIND_SPARSE:
        for entries in corpus:
            for descriptor in _sparse_descriptors(entries):
                kinds[descriptor] = "binary"
    elif kind == KIND_TTA:
        for entries in corpus:
            occurrences, _, _ = _tta_descriptors(entries, numeric_fields)
            for descriptor, entry_kind in occurrences:
                kinds[descriptor] = entry_kind
    else:
        raise VocabularyKindMismatch("cannot fit vocabulary of kind %r" % kind)
    entries = tuple((descriptor, kinds[descriptor]) for descriptor in sorted(kinds))
    return Vocabulary(kind=kind, scheme=scheme.value, entries=entries)


def sparse_vectorize(tree: TreeNode, vocab: Vocabulary) -> FeatureVector:
    """Binary presence vector over root-to-leaf path descriptors."""
    if vocab.kind != KIND_SPARSE:
        raise VocabularyKindMismatch("expected %s vocabulary, got %s" % (KIND_SPARSE, vocab.kind))
    return vectorize_sparse(sparse_profile(tree), vocab)


def tta_vectorize(tree: TreeNode, vocab: Vocabulary,
                  numeric_fields: Optional[frozenset[str]] = None) -> FeatureVector:
    """Occurrence counts for categorical descriptors, raw numeric values for
    non-categorical fields and codec parameters."""
    if vocab.kind != KIND_TTA:
        raise VocabularyKindMismatch("expected %s vocabulary, got %s" % (KIND_TTA, vocab.kind))
    return vectorize_tta(tta_profile(tree, numeric_fields), vocab)


def _codec_schema_names() -> tuple[tuple[str, str], ...]:
    names = []
    for name, _ in SpsParams.schema:
        names.append(("SPS/%s" % name, "value"))
    for name, _ in PpsParams.schema:
        names.append(("PPS/%s" % name, "value"))
    for name, _ in VuiParams.schema:
        names.append(("VUI/%s" % name, "value"))
    return tuple(names)


CODEC_VOCABULARY = Vocabulary(kind=KIND_CODEC, scheme=LabelingScheme.PLAIN.value,
                              entries=_codec_schema_names())


def _param_number(value) -> float:
    if isinstance(value, tuple):
        return float(len(value))  # array params contribute their length
    return float(value)


def codec_vectorize(setting: Optional[EncodingSetting]) -> FeatureVector:
    """Fixed-order vector of every SPS+PPS+VUI parameter value.

    Absent parameters (including the whole VUI when missing) map to the
    dedicated absent marker.  With multiple PPS sets the first one is used.
    """
    values = np.full(CODEC_VOCABULARY.size, ABSENT_VALUE, dtype=np.float64)
    if setting is None:
        return FeatureVector(kind=KIND_CODEC, values=values)
    offset = 0
    for record, schema_len in ((setting.sps, len(SpsParams.schema)),
                               (setting.pps, len(PpsParams.schema)),
                               (setting.vui, len(VuiParams.schema))):
        if record is not None:
            for i, param in enumerate(record.params):
                if param.present:
                    values[offset + i] = _param_number(param.value)
        offset += schema_len
    return FeatureVector(kind=KIND_CODEC, values=values)
