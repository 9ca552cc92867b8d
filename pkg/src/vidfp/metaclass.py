"""Level-1 structural grouping of metadata trees into metaclasses.

Two abstractions over the structure-only tree: a local-degree-profile
embedding of the unlabeled topology, and an exact match on a cryptographic
digest of the depth-first label sequence.  Files whose signature was never
seen in training fall into the reserved unknown metaclass.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import EmptyTrainingSet
from .tree import TreeNode

UNKNOWN_METACLASS = -1

ABSTRACTION_HASH = "hash"
ABSTRACTION_LDP = "ldp"

# Histogram layout for the LDP embedding: five degree statistics, each
# aggregated into 32 log-spaced bins and quantized to 8-bit fractions,
# i.e. a 1280-bit signature.  Changing any of these invalidates stored
# signatures, so they are versioned into the model file.
LDP_BINS = 32
LDP_DEGREE_CAP = 4096.0
LDP_STAT_NAMES = ("degree", "neighbor_min", "neighbor_max", "neighbor_mean", "neighbor_std")
_LDP_EDGES = np.concatenate([[0.0], np.geomspace(1.0, LDP_DEGREE_CAP, LDP_BINS)])


def ldp_embed(tree: TreeNode) -> np.ndarray:
    """Local degree profile of the tree viewed as an undirected graph.

    For every node: its degree and the min/max/mean/std of its neighbors'
    degrees; each statistic is histogrammed over all nodes and the five
    normalized histograms are quantized and concatenated.  Node labels play
    no part, so any relabeling embeds identically.
    """
    degrees: list[int] = []
    neighbor_lists: list[list[int]] = []

    def walk(node: TreeNode, parent_slot: int) -> int:
        slot = len(degrees)
        degrees.append(len(node.children) + (1 if parent_slot >= 0 else 0))
        neighbor_lists.append([parent_slot] if parent_slot >= 0 else [])
        for child in node.children:
            child_slot = walk(child, slot)
            neighbor_lists[slot].append(child_slot)
        return slot

    walk(tree, -1)
    degree_arr = np.asarray(degrees, dtype=np.float64)

    stats = np.zeros((5, len(degrees)), dtype=np.float64)
    stats[0] = degree_arr
    for i, neighbors in enumerate(neighbor_lists):
        if not neighbors:
            continue  # single-node degenerate case: all neighbor stats stay 0
        values = degree_arr[neighbors]
        stats[1, i] = values.min()
        stats[2, i] = values.max()
        stats[3, i] = values.mean()
        stats[4, i] = values.std()

    chunks = []
    for row in stats:
        counts, _ = np.histogram(np.clip(row, 0.0, LDP_DEGREE_CAP), bins=_LDP_EDGES)
        fractions = counts / len(degrees)
        chunks.append(np.round(fractions * 255.0).astype(np.uint8))
    return np.concatenate(chunks)


_HASH_ESCAPES = str.maketrans({"\\": "\\\\", "(": "\\(", ")": "\\)"})


def _serialize(node: TreeNode, out: list[str]) -> None:
    out.append("(")
    out.append(node.label.translate(_HASH_ESCAPES))
    for child in node.children:
        _serialize(child, out)
    out.append(")")


def tree_hash(tree: TreeNode) -> str:
    """SHA-256 digest of the depth-first label sequence.

    Children are visited in stored order; open/close markers make the
    serialization uniquely decodable, so distinct shapes with equal label
    multisets still hash apart.  Expects a structure-only tree (values
    already stripped).
    """
    parts: list[str] = []
    _serialize(tree, parts)
    return hashlib.sha256("".join(parts).encode("utf-8")).hexdigest()


def signature_of(tree: TreeNode, abstraction: str) -> str:
    """Canonical signature key for a structure-only tree."""
    if abstraction == ABSTRACTION_HASH:
        return tree_hash(tree)
    if abstraction == ABSTRACTION_LDP:
        return ldp_embed(tree).tobytes().hex()
    raise ValueError("unknown level-1 abstraction %r" % abstraction)


@dataclass
class MetaclassIndex:
    """Injective map from structural signatures to dense metaclass ids."""

    abstraction: str
    signatures: dict[str, int]

    @property
    def count(self) -> int:
        return len(set(self.signatures.values()))

    def to_dict(self) -> dict:
        return {"abstraction": self.abstraction, "signatures": self.signatures}

    @staticmethod
    def from_dict(data: dict) -> "MetaclassIndex":
        return MetaclassIndex(abstraction=data["abstraction"],
                              signatures={k: int(v) for k, v in data["signatures"].items()})


def fit_index(trees, abstraction: str) -> MetaclassIndex:
    """One metaclass per distinct signature, ids in order of first appearance."""
    signatures: dict[str, int] = {}
    count = 0
    for tree in trees:
        key = signature_of(tree, abstraction)
        if key not in signatures:
            signatures[key] = len(signatures)
        count += 1
    if count == 0:
        raise EmptyTrainingSet("metaclass index needs at least one tree")
    return MetaclassIndex(abstraction=abstraction, signatures=signatures)


def assign(tree: TreeNode, index: MetaclassIndex) -> int:
    """Exact signature lookup; unseen structure maps to the unknown id."""
    return index.signatures.get(signature_of(tree, index.abstraction), UNKNOWN_METACLASS)
