"""Acceptance criteria, one test per criterion.

The conftest terminal-summary hook prints one PASS/FAIL line per criterion
at the end of every pytest run.
"""

import random
import struct
import time

import numpy as np
import pytest

import helpers
from vidfp import h264, metaclass, synth
from vidfp.classifier import balanced_accuracy, balanced_weights
from vidfp.evaluate import kfold_cv, vector_kfold_cv
from vidfp.features import LabelingScheme, enumerate_paths
from vidfp.model import analyze_source, predict_model, train_model
from vidfp.tree import TreeNode, strip_values


# --- criterion 1: Exp-Golomb oracle equivalence --------------------------

def _closed_form_codeword(n: int) -> str:
    # independent oracle: (n+1) in binary, prefixed by len-1 zeros
    code = bin(n + 1)[2:]
    return "0" * (len(code) - 1) + code


def test_criterion_1_exp_golomb_oracle_equivalence():
    start = time.monotonic()
    failures = 0
    for n in range(4097):
        bits = _closed_form_codeword(n)
        padded = bits + "0" * (-len(bits) % 8)
        data = bytes(int(padded[i:i + 8], 2) for i in range(0, len(padded), 8))
        if h264.BitCursor(data).read_ue() != n:
            failures += 1
    elapsed = time.monotonic() - start
    assert failures == 0
    assert elapsed < 1.0, "oracle sweep took %.2fs" % elapsed


# --- criterion 2: SPS/PPS fixture fidelity --------------------------------

def _norm(value):
    return list(value) if isinstance(value, tuple) else value


def test_criterion_2_sps_pps_fixture_fidelity():
    import json
    from pathlib import Path

    fixtures = json.loads((Path(__file__).parent / "data" / "sps_pps_fixtures.json").read_text())
    assert len(fixtures) >= 5
    for fixture in fixtures:
        sps = h264.parse_sps(bytes.fromhex(fixture["sps_hex"]))
        ref_sps = fixture["sps"]
        assert len(sps.params) == 38
        for param in sps.params:
            if param.name in ref_sps:
                assert param.present, (fixture["name"], param.name)
                assert _norm(param.value) == ref_sps[param.name], (fixture["name"], param.name)
            else:
                assert not param.present, (fixture["name"], param.name)

        ref_vui = fixture["vui"]
        if ref_vui is None:
            assert sps.vui is None
        else:
            assert sps.vui is not None
            for param in sps.vui.params:
                if param.name in ref_vui:
                    assert param.present, (fixture["name"], param.name)
                    assert _norm(param.value) == ref_vui[param.name], (fixture["name"], param.name)
                else:
                    assert not param.present, (fixture["name"], param.name)

        for pps_hex, ref_pps in zip(fixture["pps_hex"], fixture["pps"]):
            pps = h264.parse_pps(bytes.fromhex(pps_hex))
            assert len(pps.params) == 25
            for param in pps.params:
                if param.name in ref_pps:
                    assert param.present, (fixture["name"], param.name)
                    assert _norm(param.value) == ref_pps[param.name], (fixture["name"], param.name)
                else:
                    assert not param.present, (fixture["name"], param.name)


# --- criterion 3: box-parser round-trip on hand-built fixtures ------------

FTYP = bytes.fromhex("000000106674797069736f6d00000200")


def _shape(tree):
    return [(b.box_type, b.offset, b.declared_size, [(c.box_type, c.offset, c.declared_size)
                                                     for c in b.children])
            for b in tree.top_level]


def test_criterion_3_box_parser_round_trip():
    from vidfp.bmff import parse_boxes

    mvhd = helpers.mkbox("mvhd", bytes([0]) + bytes(3) + struct.pack(">IIII", 0, 0, 1000, 17654)
                         + struct.pack(">ih", 65536, 256) + bytes(10) + bytes(36) + bytes(24)
                         + struct.pack(">I", 2))
    minimal = FTYP + helpers.mkbox("moov", mvhd) + helpers.mkbox("mdat", b"abcde")
    tree = parse_boxes(minimal)
    assert _shape(tree) == [
        ("ftyp", 0, 16, []),
        ("moov", 16, 116, [("mvhd", 24, 108)]),
        ("mdat", 132, 13, []),
    ]
    assert not tree.truncated

    size_zero = FTYP + struct.pack(">I", 0) + b"free" + bytes(20)
    tree = parse_boxes(size_zero)
    assert _shape(tree) == [("ftyp", 0, 16, []), ("free", 16, 28, [])]
    assert tree.top_level[1].end == len(size_zero)

    largesize = FTYP + struct.pack(">I", 1) + b"mdat" + struct.pack(">Q", 26) + bytes(10)
    tree = parse_boxes(largesize)
    assert _shape(tree) == [("ftyp", 0, 16, []), ("mdat", 16, 26, [])]
    assert tree.top_level[1].header_size == 16

    unknown = FTYP + helpers.mkbox("moov", helpers.mkbox("xyz ", b"\xde\xad"))
    tree = parse_boxes(unknown)
    assert _shape(tree) == [("ftyp", 0, 16, []), ("moov", 16, 18, [("xyz ", 24, 10)])]
    assert tree.top_level[1].children[0].fields == []

    truncated = FTYP + struct.pack(">I", 4096) + b"moov" + bytes(50)
    tree = parse_boxes(truncated)
    assert tree.truncated and tree.truncation_offset == 16
    assert _shape(tree) == [("ftyp", 0, 16, [])]

    for fixture in (minimal, size_zero, largesize, unknown, truncated):
        from vidfp.bmff import dump_json_records
        assert dump_json_records(parse_boxes(fixture)) == dump_json_records(parse_boxes(fixture))


# --- criterion 4: Fig-4-style labeling conformance -------------------------

def test_criterion_4_labeling_conformance_on_deletion():
    def flat_tree(labels):
        return TreeNode("file", "section", [TreeNode(l) for l in labels])

    full = flat_tree(["ftyp", "moov", "free", "mdat"])
    reduced = flat_tree(["ftyp", "moov", "mdat"])

    global_full = {e.render() for e in enumerate_paths(full, LabelingScheme.GLOBAL_ORDER)}
    global_reduced = {e.render() for e in enumerate_paths(reduced, LabelingScheme.GLOBAL_ORDER)}
    # deleting `free` renames every later sibling and nothing else
    assert global_full == {"ftyp-1", "moov-2", "free-3", "mdat-4"}
    assert global_reduced == {"ftyp-1", "moov-2", "mdat-3"}
    assert global_full - global_reduced == {"free-3", "mdat-4"}
    assert global_reduced - global_full == {"mdat-3"}

    type_full = {e.render() for e in enumerate_paths(full, LabelingScheme.TYPE_ORDER)}
    type_reduced = {e.render() for e in enumerate_paths(reduced, LabelingScheme.TYPE_ORDER)}
    # under per-type ordering no non-free label changes
    assert type_full == {"ftyp-1", "moov-1", "free-1", "mdat-1"}
    assert type_reduced == type_full - {"free-1"}


# --- criterion 5: tree-hash invariants over a generated suite --------------

_LABEL_POOL = ["ftyp", "moov", "mvhd", "trak", "tkhd", "mdia", "stbl", "stsd",
               "avc1", "udta", "free", "SPS", "PPS", "@duration", "@width"]


def _random_tree(rng: random.Random) -> TreeNode:
    root = TreeNode("file", "section")
    # force two distinguishable top-level children so a reorder always
    # changes the DFS label sequence
    first = TreeNode("ftyp")
    second = TreeNode("moov")
    root.children = [first, second]

    def grow(node: TreeNode, depth: int) -> None:
        if depth > 3:
            return
        for _ in range(rng.randint(0, 3)):
            label = rng.choice(_LABEL_POOL)
            if label.startswith("@"):
                field = TreeNode(label, "field")
                field.children.append(TreeNode(str(rng.randint(0, 99999)), "value"))
                node.children.append(field)
            else:
                child = TreeNode(label)
                node.children.append(child)
                grow(child, depth + 1)

    grow(second, 0)
    for _ in range(rng.randint(0, 2)):
        extra = TreeNode(rng.choice(["mdat", "free", "skip"]))
        root.children.append(extra)
    return root


def _perturb_values(tree: TreeNode, rng: random.Random) -> TreeNode:
    out = tree.clone()
    for node in out.walk():
        if node.is_value:
            node.label = str(rng.randint(100000, 999999))
    return out


def test_criterion_5_tree_hash_invariants():
    cases = 200
    for case in range(cases):
        rng = random.Random(9000 + case)
        tree = _random_tree(rng)
        structure = strip_values(tree)
        digest = metaclass.tree_hash(structure)

        perturbed = strip_values(_perturb_values(tree, rng))
        assert metaclass.tree_hash(perturbed) == digest, case

        reordered = structure.clone()
        reordered.children[0], reordered.children[1] = reordered.children[1], reordered.children[0]
        assert metaclass.tree_hash(reordered) != digest, case

        relabeled = structure.clone()
        relabeled.children[1].label = "RELABELED"
        assert metaclass.tree_hash(relabeled) != digest, case
        assert np.array_equal(metaclass.ldp_embed(relabeled), metaclass.ldp_embed(structure)), case


# --- criterion 6: hierarchical reduces to flat with one metaclass ----------

def test_criterion_6_hierarchical_equals_flat_degeneracy():
    train = helpers.corpus_samples(3, 10, seed=21, structural_period=3)
    test = helpers.corpus_samples(3, 5, seed=2121, structural_period=3)
    hier = train_model(train, representation="hierarchical", exclusions=helpers.CONTENT_EXCLUSIONS)
    flat = train_model(train, representation="flat", exclusions=helpers.CONTENT_EXCLUSIONS)
    assert hier.metaclass_count == 1
    agree = [predict_model(hier, s).label == predict_model(flat, s).label for s in test]
    assert all(agree)


# --- criterion 7: synthetic end-to-end ------------------------------------

def test_criterion_7_synthetic_end_to_end(corpus12, corpus12_cloned):
    samples, build_seconds = corpus12
    start = time.monotonic()
    report = kfold_cv(samples, k=5, runs=10, seed=0,
                      representation="hierarchical", exclusions=helpers.CONTENT_EXCLUSIONS)
    elapsed = build_seconds + (time.monotonic() - start)
    assert report.mean_balanced_accuracy == pytest.approx(1.0, abs=0.0)
    assert report.std_balanced_accuracy == pytest.approx(0.0, abs=0.0)
    assert elapsed < 60.0, "end-to-end run took %.1fs" % elapsed

    cloned_report = kfold_cv(corpus12_cloned, k=5, runs=10, seed=0,
                             representation="hierarchical", exclusions=helpers.CONTENT_EXCLUSIONS)
    ceiling = (8 + 0.5 * 4) / 12  # distinct classes + half-credit for clones
    assert cloned_report.mean_balanced_accuracy == pytest.approx(ceiling, abs=0.01)


# --- criterion 8: unknown routing ------------------------------------------

def test_criterion_8_unknown_routing(corpus12):
    samples, _ = corpus12
    model = train_model(samples, representation="hierarchical",
                        exclusions=helpers.CONTENT_EXCLUSIONS)
    routed_unknown = 0
    for i in range(20):
        data = synth.build_file(synth.novel_recipe(i), random.Random(5000 + i))
        analyzed = analyze_source(data, helpers.CONTENT_EXCLUSIONS)
        prediction = predict_model(model, analyzed)
        if prediction.used_fallback and prediction.metaclass_id == metaclass.UNKNOWN_METACLASS:
            routed_unknown += 1
        assert prediction.label in model.classes
    assert routed_unknown == 20


# --- criterion 9: balanced accuracy and weight formula ----------------------

def test_criterion_9_balanced_accuracy_and_weights():
    y_true = ["a"] * 10 + ["b"] * 10
    y_pred = ["a"] * 10 + ["b"] * 5 + ["a"] * 5
    assert balanced_accuracy(y_true, y_pred) == 0.75

    rng = random.Random(77)
    for _ in range(5):
        counts = [rng.randint(1, 50) for _ in range(rng.randint(2, 9))]
        labels = ["c%d" % i for i, count in enumerate(counts) for _ in range(count)]
        weights = balanced_weights(labels)
        total, k = sum(counts), len(counts)
        for i, count in enumerate(counts):
            assert weights["c%d" % i] == pytest.approx(total / (k * count))


# --- criterion 10: core-parameter path --------------------------------------

def _core_matrix(share_last_pair: bool):
    labels, rows = [], []
    for m in range(6):
        effective = m - 1 if (share_last_pair and m == 5) else m
        vector = [0, 0, 2, 0, 0, effective % 2, 79 + effective, effective - 3,
                  1 if effective % 2 else 0, effective % 3, 720 + 8 * effective]
        for _ in range(10):
            labels.append("brand%d_model%d" % (m % 3, m))
            rows.append(vector)
    return labels, np.array(rows, dtype=float)


def test_criterion_10_core_parameter_path():
    labels, matrix = _core_matrix(share_last_pair=False)
    report = vector_kfold_cv(matrix, labels, k=5, runs=5, seed=0)
    assert report.mean_balanced_accuracy == pytest.approx(1.0, abs=0.0)

    labels2, matrix2 = _core_matrix(share_last_pair=True)
    shared = vector_kfold_cv(matrix2, labels2, k=5, runs=5, seed=0)
    ceiling = (4 + 0.5 * 2) / 6
    assert shared.mean_balanced_accuracy == pytest.approx(ceiling, abs=0.01)

    # brand-level grouping: 3 brands, still runnable end to end
    brand_labels = [label.split("_", 1)[0] for label in labels]
    brand_report = vector_kfold_cv(matrix, brand_labels, k=5, runs=3, seed=0)
    assert len(brand_report.classes) == 3
    assert brand_report.mean_balanced_accuracy == pytest.approx(1.0, abs=0.0)
