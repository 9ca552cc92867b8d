"""Joint file-metadata tree: container subtree + codec subtree.

Internal nodes carry labels (box types, field names, parameter-set names,
parameter names); value leaves carry canonical value text.  Child order is
significant throughout and mirrors on-disk order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Iterator, Optional

from .bmff import BoxTree, RawBox
from .h264 import EncodingSetting, ParamRecord

ROOT_LABEL = "file"
CONTAINER_LABEL = "container"
CODEC_LABEL = "codec"

# Roles: section (synthetic grouping), box, field, param-set, param, value.


@dataclass
class TreeNode:
    label: str
    role: str = "box"
    children: list["TreeNode"] = field(default_factory=list)

    def add(self, child: "TreeNode") -> "TreeNode":
        self.children.append(child)
        return child

    def clone(self) -> "TreeNode":
        return TreeNode(self.label, self.role, [c.clone() for c in self.children])

    def walk(self) -> Iterator["TreeNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    @property
    def is_value(self) -> bool:
        return self.role == "value"

    def node_count(self) -> int:
        return sum(1 for _ in self.walk())


MetaTree = TreeNode


def build_container_subtree(box_tree: BoxTree) -> TreeNode:
    """One node per box in file order; each decoded field becomes a child
    node labeled by the field name with a single value leaf below it."""
    section = TreeNode(CONTAINER_LABEL, "section")
    for top in box_tree.top_level:
        section.add(_box_node(top))
    return section


def _box_node(box: RawBox) -> TreeNode:
    node = TreeNode(box.box_type, "box")
    for name, value in box.fields:
        field_node = node.add(TreeNode(name, "field"))
        field_node.add(TreeNode(value.text, "value"))
    for child in box.children:
        node.add(_box_node(child))
    return node


def build_codec_subtree(setting: EncodingSetting) -> TreeNode:
    """SPS / PPS / VUI parameter-set nodes under a codec section node.

    SPS and PPS nodes always expose their full named schema (absent
    parameters get an "absent" value leaf); the VUI node lists only the
    parameters present in the bitstream and is omitted entirely when the
    SPS carries no VUI.
    """
    section = TreeNode(CODEC_LABEL, "section")
    section.add(_param_set_node("SPS", setting.sps, full_schema=True))
    for pps in setting.pps_list:
        section.add(_param_set_node("PPS", pps, full_schema=True))
    if setting.vui is not None:
        section.add(_param_set_node("VUI", setting.vui, full_schema=False))
    return section


def _param_set_node(label: str, record: ParamRecord, full_schema: bool) -> TreeNode:
    node = TreeNode(label, "param-set")
    for param in record.params:
        if not full_schema and not param.present:
            continue
        param_node = node.add(TreeNode(param.name, "param"))
        param_node.add(TreeNode(param.render(), "value"))
    return node


def join(container: Optional[TreeNode], codec: Optional[TreeNode]) -> TreeNode:
    """Combine the two subtrees under a fresh root; inputs are not mutated."""
    root = TreeNode(ROOT_LABEL, "section")
    if container is not None:
        root.add(container.clone())
    if codec is not None:
        root.add(codec.clone())
    return root


@dataclass(frozen=True)
class ExclusionList:
    """Label-path patterns naming field/parameter nodes to drop.

    A pattern is a `/`-joined label sequence; `*` matches any single label.
    A field or parameter node is dropped when its root-to-node label path
    ends with the pattern.  Matching is exact on labels otherwise.
    """

    profile: str
    patterns: tuple[tuple[str, ...], ...]

    @staticmethod
    def parse(profile: str, lines) -> "ExclusionList":
        patterns = []
        for line in lines:
            text = line.split("#", 1)[0].strip()
            if text:
                patterns.append(tuple(text.split("/")))
        return ExclusionList(profile=profile, patterns=tuple(patterns))

    def matches(self, path_labels: tuple[str, ...]) -> bool:
        for pattern in self.patterns:
            if len(pattern) > len(path_labels):
                continue
            tail = path_labels[len(path_labels) - len(pattern):]
            if all(p == "*" or p == t for p, t in zip(pattern, tail)):
                return True
        return False


EMPTY_EXCLUSIONS = ExclusionList(profile="none", patterns=())


def load_exclusion_profile(name: str) -> ExclusionList:
    """Load a named profile from the packaged data files.

    `content` drops content-volatile fields; `user-adjustable` additionally
    drops resolution/fps/quality settings; `none` drops nothing.
    """
    if name in ("none", ""):
        return EMPTY_EXCLUSIONS
    files = {"content": ["exclusions_content.txt"],
             "user-adjustable": ["exclusions_content.txt", "exclusions_user.txt"]}
    if name not in files:
        raise ValueError("unknown exclusion profile %r" % name)
    lines = []
    for fname in files[name]:
        text = resources.files("vidfp").joinpath("data", fname).read_text(encoding="utf-8")
        lines.extend(text.splitlines())
    return ExclusionList.parse(name, lines)


def exclusion_profile_digest(excl: ExclusionList) -> str:
    import hashlib

    payload = excl.profile + "\n" + "\n".join("/".join(p) for p in excl.patterns)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def prune(tree: TreeNode, excl: ExclusionList) -> TreeNode:
    """Drop matched field/parameter nodes (with their value leaves)."""

    def keep(node: TreeNode, path: tuple[str, ...]) -> Optional[TreeNode]:
        if node.role in ("field", "param") and excl.matches(path):
            return None
        out = TreeNode(node.label, node.role)
        for child in node.children:
            kept = keep(child, path + (child.label,))
            if kept is not None:
                out.children.append(kept)
        return out

    result = keep(tree, ())
    assert result is not None  # root is never a field/param node
    return result


def strip_values(tree: TreeNode) -> TreeNode:
    """Remove exactly the value leaves; labeled structure is untouched."""
    out = TreeNode(tree.label, tree.role)
    for child in tree.children:
        if not child.is_value:
            out.children.append(strip_values(child))
    return out


def dump_tree_lines(tree: TreeNode, indent: str = "  ") -> Iterator[str]:
    """Indented text rendering of a metadata tree for inspection."""

    def emit(node: TreeNode, depth: int) -> Iterator[str]:
        if node.is_value:
            yield "%s= %s" % (indent * depth, node.label)
        else:
            yield "%s%s" % (indent * depth, node.label)
        for child in node.children:
            yield from emit(child, depth + 1)

    yield from emit(tree, 0)
