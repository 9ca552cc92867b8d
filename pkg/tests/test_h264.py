import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vidfp import h264
from vidfp.errors import BitstreamExhausted, MissingParameter
from vidfp.synth import CodecRecipe, encode_pps, encode_sps

FIXTURES = json.loads((Path(__file__).parent / "data" / "sps_pps_fixtures.json").read_text())


def bits_to_bytes(bits: str) -> bytes:
    padded = bits + "0" * (-len(bits) % 8)
    return bytes(int(padded[i:i + 8], 2) for i in range(0, len(padded), 8))


def golomb_codeword(n: int) -> str:
    """Closed-form Exp-Golomb codeword, independent of the bit writer."""
    code = bin(n + 1)[2:]
    return "0" * (len(code) - 1) + code


def test_unescape_removes_emulation_prevention_byte():
    assert h264.unescape_rbsp(bytes.fromhex("00000301")) == bytes.fromhex("000001")


def test_unescape_passthrough_without_escape():
    assert h264.unescape_rbsp(bytes.fromhex("abcd")) == bytes.fromhex("abcd")


def test_unescape_two_removals():
    assert h264.unescape_rbsp(bytes.fromhex("000003000003")) == bytes.fromhex("00000000")


@given(st.binary(max_size=200))
def test_escape_unescape_round_trip(data):
    assert h264.unescape_rbsp(h264.escape_rbsp(data)) == data


def test_read_ue_shortest_codeword():
    assert h264.BitCursor(bits_to_bytes("1")).read_ue() == 0


def test_read_ue_examples():
    assert h264.BitCursor(bits_to_bytes("010")).read_ue() == 1
    assert h264.BitCursor(bits_to_bytes("00111")).read_ue() == 6


def test_read_se_mapping():
    assert h264.BitCursor(bits_to_bytes("1")).read_se() == 0
    assert h264.BitCursor(bits_to_bytes("010")).read_se() == 1
    assert h264.BitCursor(bits_to_bytes("011")).read_se() == -1


def test_reads_past_end_raise():
    with pytest.raises(BitstreamExhausted):
        h264.BitCursor(b"").read_bit()
    with pytest.raises(BitstreamExhausted):
        h264.BitCursor(bytes([0x00])).read_ue()  # prefix never terminates


def test_exp_golomb_oracle_equivalence():
    for n in range(4097):
        cursor = h264.BitCursor(bits_to_bytes(golomb_codeword(n)))
        assert cursor.read_ue() == n


@given(st.integers(min_value=0, max_value=1_000_000))
def test_writer_reader_ue_round_trip(n):
    writer = h264.BitWriter().put_ue(n)
    assert h264.BitCursor(writer.to_bytes()).read_ue() == n


@given(st.integers(min_value=-100_000, max_value=100_000))
def test_writer_reader_se_round_trip(n):
    writer = h264.BitWriter().put_se(n)
    assert h264.BitCursor(writer.to_bytes()).read_se() == n


def test_sps_fixed_prefix_bytes():
    # 67 42 C0 1E: NAL header, profile 66, constraint byte C0, level 30
    blob = bytes.fromhex(FIXTURES[0]["sps_hex"])
    assert blob[:4] == bytes.fromhex("6742c01e")
    sps = h264.parse_sps(blob)
    assert sps.get("profile_idc") == 66
    assert sps.get("level_idc") == 30
    assert sps.get("constraint_set0_flag") == 1
    assert sps.get("constraint_set1_flag") == 1


def test_sps_720p_dimensions():
    sps = h264.parse_sps(bytes.fromhex(FIXTURES[0]["sps_hex"]))
    assert sps.get("pic_width_in_mbs_minus1") == 79
    assert sps.get("frame_mbs_only_flag") == 1
    assert sps.width_pixels == 1280
    assert sps.height_pixels == 720


def test_sps_without_vui_has_no_vui_record():
    sps = h264.parse_sps(bytes.fromhex(FIXTURES[0]["sps_hex"]))
    assert sps.get("vui_parameters_present_flag") == 0
    assert sps.vui is None


def test_parameter_schema_counts():
    assert len(h264.SpsParams.schema) == 38
    assert len(h264.PpsParams.schema) == 25
    assert len(h264.VuiParams.schema) == 32


def test_full_decode_exposes_complete_schemas():
    for fixture in FIXTURES:
        sps = h264.parse_sps(bytes.fromhex(fixture["sps_hex"]))
        assert len(sps.params) == 38
        if sps.vui is not None:
            assert sum(1 for p in sps.vui.params if p.present) <= 32
        for pps_hex in fixture["pps_hex"]:
            assert len(h264.parse_pps(bytes.fromhex(pps_hex)).params) == 25


def test_all_fixtures_consume_trailing_bits_cleanly():
    for fixture in FIXTURES:
        sps = h264.parse_sps(bytes.fromhex(fixture["sps_hex"]))
        assert sps.warnings == [], fixture["name"]
        for pps_hex in fixture["pps_hex"]:
            assert h264.parse_pps(bytes.fromhex(pps_hex)).warnings == []


def test_decode_is_deterministic():
    blob = bytes.fromhex(FIXTURES[1]["sps_hex"])
    assert h264.parse_sps(blob).as_dict() == h264.parse_sps(blob).as_dict()


def test_pps_entropy_mode_and_qp():
    pps = h264.parse_pps(bytes.fromhex(FIXTURES[1]["pps_hex"][0]))
    assert pps.get("entropy_coding_mode_flag") == 1  # CABAC
    ref = FIXTURES[1]["pps"][0]
    assert pps.get("pic_init_qp_minus26") == ref["pic_init_qp_minus26"]


def test_pps_base_qp_offset_semantics():
    # pic_init_qp_minus26 coded as ue=0 means base QP 26
    pps = h264.parse_pps(encode_pps(CodecRecipe(qp_delta=0)))
    assert pps.get("pic_init_qp_minus26") == 0
    assert 26 + pps.get("pic_init_qp_minus26") == 26


def test_core_param_vector_fixture_values():
    sps = h264.parse_sps(bytes.fromhex(FIXTURES[0]["sps_hex"]))
    pps = h264.parse_pps(bytes.fromhex(FIXTURES[0]["pps_hex"][0]))
    setting = h264.EncodingSetting(sps=sps, pps_list=[pps])
    core = h264.core_param_vector(setting, height=720)
    values = core.as_dict()
    assert values["pic_width_in_mbs_minus1"] == 79
    assert values["pic_init_qp_minus26"] == 0
    assert values["height_pixels"] == 720
    assert len(core.values) == 11


def _sps_with_crop_flag(flag: int) -> bytes:
    w = h264.BitWriter()
    w.put_bits(66, 8).put_bits(0, 8).put_bits(30, 8)
    w.put_ue(0)          # sps id
    w.put_ue(0)          # log2_max_frame_num_minus4
    w.put_ue(0)          # pic_order_cnt_type
    w.put_ue(2)          # log2_max_pic_order_cnt_lsb_minus4
    w.put_ue(1)          # max_num_ref_frames
    w.put_bit(0)         # gaps
    w.put_ue(79).put_ue(44)
    w.put_bit(1)         # frame_mbs_only
    w.put_bit(1)         # direct_8x8
    w.put_bit(flag)
    if flag:
        for _ in range(4):
            w.put_ue(0)  # zero crop offsets: only the flag differs
    w.put_bit(0)         # no VUI
    w.rbsp_trailing()
    return b"\x67" + h264.escape_rbsp(w.to_bytes())


def test_cropping_flag_changes_exactly_one_core_coordinate():
    pps = h264.parse_pps(encode_pps(CodecRecipe()))
    base = h264.core_param_vector(
        h264.EncodingSetting(sps=h264.parse_sps(_sps_with_crop_flag(0)), pps_list=[pps]), 720)
    flipped = h264.core_param_vector(
        h264.EncodingSetting(sps=h264.parse_sps(_sps_with_crop_flag(1)), pps_list=[pps]), 720)
    diffs = [i for i, (a, b) in enumerate(zip(base.values, flipped.values)) if a != b]
    assert diffs == [h264.CORE_PARAM_NAMES.index("frame_cropping_flag")]


def test_core_param_vector_is_deterministic():
    sps = h264.parse_sps(bytes.fromhex(FIXTURES[2]["sps_hex"]))
    pps = h264.parse_pps(bytes.fromhex(FIXTURES[2]["pps_hex"][0]))
    setting = h264.EncodingSetting(sps=sps, pps_list=[pps])
    assert h264.core_param_vector(setting, 480) == h264.core_param_vector(setting, 480)


def test_missing_parameter_on_partial_record():
    blob = bytearray(encode_sps(CodecRecipe(width=1280, height=720)))
    blob += b"\xff"  # residue after the RBSP stop pattern flags a partial decode
    sps = h264.parse_sps(bytes(blob))
    assert sps.partial
    pps = h264.parse_pps(encode_pps(CodecRecipe()))
    with pytest.raises(MissingParameter):
        h264.core_param_vector(h264.EncodingSetting(sps=sps, pps_list=[pps]), 720)


def test_unsupported_profile_residue_keeps_prefix():
    # append bits beyond the trailing pattern: decoded prefix is retained and
    # the record is flagged rather than rejected
    blob = bytes(bytearray(encode_sps(CodecRecipe())) + b"\x55")
    sps = h264.parse_sps(blob)
    assert "unsupported-profile-residue" in sps.warnings
    assert sps.get("profile_idc") == 66


@settings(max_examples=30)
@given(st.binary(min_size=1, max_size=60))
def test_parse_sps_never_hangs_on_garbage(data):
    blob = b"\x67" + data
    try:
        h264.parse_sps(blob)
    except BitstreamExhausted:
        pass


@settings(max_examples=30)
@given(st.binary(min_size=1, max_size=60))
def test_parse_pps_never_hangs_on_garbage(data):
    blob = b"\x68" + data
    try:
        h264.parse_pps(blob)
    except BitstreamExhausted:
        pass


@given(st.binary(max_size=200))
def test_escaped_stream_has_no_illegal_start_code_prefixes(data):
    out = h264.escape_rbsp(data)
    for i in range(len(out) - 2):
        if out[i] == 0 and out[i + 1] == 0:
            assert out[i + 2] == 3 or out[i + 2] > 3
