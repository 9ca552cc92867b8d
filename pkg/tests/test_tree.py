import random
import struct

import helpers
from vidfp import bmff, synth, tree
from vidfp.features import LabelingScheme, enumerate_paths
from vidfp.h264 import EncodingSetting, parse_pps, parse_sps
from vidfp.model import analyze_source
from vidfp.synth import CodecRecipe, encode_pps, encode_sps


def _mvhd_with_duration(duration: int) -> bytes:
    payload = bytes(4) + struct.pack(">IIII", 0, 0, 1000, duration) \
        + struct.pack(">ih", 65536, 256) + bytes(10) + bytes(36) + bytes(24) + struct.pack(">I", 2)
    return helpers.mkbox("mvhd", payload)


def _container_tree(*moov_children: bytes):
    data = bytes.fromhex("000000106674797069736f6d00000200") + helpers.mkbox("moov", b"".join(moov_children))
    return tree.build_container_subtree(bmff.parse_boxes(data))


def _setting(recipe: CodecRecipe) -> EncodingSetting:
    return EncodingSetting(sps=parse_sps(encode_sps(recipe)),
                           pps_list=[parse_pps(encode_pps(recipe, pps_id=i)) for i in range(recipe.n_pps)])


def test_duration_field_renders_documented_path():
    subtree = _container_tree(_mvhd_with_duration(17654))
    rendered = {entry.render(with_value=True) for entry in enumerate_paths(subtree, LabelingScheme.PLAIN)}
    assert "moov/mvhd/@duration/17654" in rendered


def test_box_without_fields_has_no_field_children():
    subtree = _container_tree(helpers.mkbox("free", bytes(4)))
    moov = subtree.children[1]
    free = moov.children[0]
    assert free.children == []


def test_sibling_traks_stay_in_file_order():
    subtree = _container_tree(helpers.mkbox("trak", helpers.mkbox("tkhd", bytes(84))),
                              helpers.mkbox("trak", helpers.mkbox("edts", b"")))
    moov = subtree.children[1]
    assert [c.label for c in moov.children] == ["trak", "trak"]
    assert [c.label for c in moov.children[0].children] == ["tkhd"]
    assert [c.label for c in moov.children[1].children] == ["edts"]


def test_codec_subtree_without_vui_has_two_children():
    codec = tree.build_codec_subtree(_setting(CodecRecipe()))
    assert [c.label for c in codec.children] == ["SPS", "PPS"]


def test_sps_node_always_exposes_38_parameters():
    codec = tree.build_codec_subtree(_setting(CodecRecipe()))
    sps_node = codec.children[0]
    assert len(sps_node.children) == 38
    values = {c.label: c.children[0].label for c in sps_node.children}
    assert values["chroma_format_idc"] == "absent"  # baseline profile branch


def test_multiple_pps_nodes_in_record_order():
    codec = tree.build_codec_subtree(_setting(CodecRecipe(n_pps=4, vui=synth.VuiRecipe(timing=(1, 30, 1)))))
    assert [c.label for c in codec.children] == ["SPS", "PPS", "PPS", "PPS", "PPS", "VUI"]
    first_pps = codec.children[1]
    ids = [c.children[0].label for c in first_pps.children if c.label == "pic_parameter_set_id"]
    assert ids == ["0"]


def test_join_arity_and_determinism():
    container = _container_tree(_mvhd_with_duration(5))
    codec = tree.build_codec_subtree(_setting(CodecRecipe()))
    only_container = tree.join(container, None)
    assert len(only_container.children) == 1
    joint = tree.join(container, codec)
    assert len(joint.children) == 2
    assert tree.join(container, codec) == joint


def test_join_does_not_mutate_inputs():
    container = _container_tree(_mvhd_with_duration(5))
    before = container.clone()
    tree.join(container, None)
    assert container == before


def test_prune_content_profile_removes_duration():
    subtree = _container_tree(_mvhd_with_duration(17654))
    excl = tree.load_exclusion_profile("content")
    pruned = tree.prune(subtree, excl)
    rendered = {e.render(with_value=True) for e in enumerate_paths(pruned, LabelingScheme.PLAIN)}
    assert not any("@duration" in path for path in rendered)
    assert any("@timescale/1000" in path for path in rendered)


def test_prune_user_profile_removes_sps_geometry():
    joint = tree.join(_container_tree(_mvhd_with_duration(1)),
                      tree.build_codec_subtree(_setting(CodecRecipe())))
    pruned = tree.prune(joint, tree.load_exclusion_profile("user-adjustable"))
    labels = {n.label for n in pruned.walk()}
    assert "pic_width_in_mbs_minus1" not in labels
    assert "pic_init_qp_minus26" in labels


def test_prune_with_empty_exclusions_is_identity():
    joint = tree.join(_container_tree(_mvhd_with_duration(3)), None)
    assert tree.prune(joint, tree.EMPTY_EXCLUSIONS) == joint


def test_strip_values_removes_exactly_value_leaves():
    joint = tree.join(_container_tree(_mvhd_with_duration(3)),
                      tree.build_codec_subtree(_setting(CodecRecipe())))
    total = joint.node_count()
    value_count = sum(1 for n in joint.walk() if n.is_value)
    stripped = tree.strip_values(joint)
    assert stripped.node_count() == total - value_count
    assert not any(n.is_value for n in stripped.walk())


def test_strip_is_idempotent():
    joint = tree.join(_container_tree(_mvhd_with_duration(3)), None)
    once = tree.strip_values(joint)
    assert tree.strip_values(once) == once


def test_value_only_difference_strips_to_equal_trees():
    a = tree.strip_values(tree.join(_container_tree(_mvhd_with_duration(10)), None))
    b = tree.strip_values(tree.join(_container_tree(_mvhd_with_duration(999)), None))
    assert a == b


def test_prune_and_strip_commute():
    joint = tree.join(_container_tree(_mvhd_with_duration(3)),
                      tree.build_codec_subtree(_setting(CodecRecipe())))
    excl = tree.load_exclusion_profile("content")
    assert tree.strip_values(tree.prune(joint, excl)) == tree.prune(tree.strip_values(joint), excl)


def test_build_is_deterministic_for_equal_bytes():
    data = synth.build_file(synth.default_class_recipe(5), random.Random(11))
    excl = tree.load_exclusion_profile("content")
    first = analyze_source(data, excl)
    second = analyze_source(data, excl)
    assert first.tree == second.tree
    assert first.structure == second.structure


def test_container_child_order_tracks_disk_order():
    import dataclasses
    recipe = synth.default_class_recipe(0)
    reordered = dataclasses.replace(recipe, mdat_before_moov=True)
    normal = analyze_source(synth.build_file(recipe, random.Random(1)), tree.EMPTY_EXCLUSIONS)
    swapped = analyze_source(synth.build_file(reordered, random.Random(1)), tree.EMPTY_EXCLUSIONS)
    order_a = [c.label for c in normal.tree.children[0].children]
    order_b = [c.label for c in swapped.tree.children[0].children]
    assert order_a == ["ftyp", "moov", "mdat"]
    assert order_b == ["ftyp", "mdat", "moov"]


def test_user_profile_pattern_counts_are_documented_7_plus_24():
    excl = tree.load_exclusion_profile("user-adjustable")
    content = tree.load_exclusion_profile("content")
    extra = [p for p in excl.patterns if p not in content.patterns]
    codec_side = [p for p in extra if p[0] in ("SPS", "PPS", "VUI")]
    container_side = [p for p in extra if p[0] not in ("SPS", "PPS", "VUI")]
    assert len(codec_side) == 7
    assert len(container_side) == 24


def test_exclusion_wildcard_matches_single_label():
    excl = tree.ExclusionList.parse("test", ["*/@duration"])
    assert excl.matches(("container", "moov", "mvhd", "@duration"))
    assert not excl.matches(("@duration",))
