"""H.264 sequence/picture parameter set and VUI decoding.

Headers are decoded bit-by-bit (Exp-Golomb and fixed-width reads) into
ordered parameter records.  Every record exposes the full named schema:
38 SPS parameters, 25 PPS parameters, and up to 32 VUI parameters, with
parameters that do not occur in a given bitstream marked absent.  The exact
slot naming is this package's documented choice (see README); array-like
syntax elements (scaling list contents, FMO slice-group maps, HRD
sub-structures) are retained as auxiliary data rather than schema slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import BitstreamExhausted, MissingParameter

NAL_TYPE_SPS = 7
NAL_TYPE_PPS = 8

# Profiles whose SPS carries the chroma-format / bit-depth block.
HIGH_PROFILE_IDCS = {100, 110, 122, 244, 44, 83, 86, 118, 128, 138, 139, 134, 135}


def unescape_rbsp(data: bytes) -> bytes:
    """Remove emulation-prevention bytes: every 00 00 03 loses the 03."""
    out = bytearray()
    zeros = 0
    for b in data:
        if zeros >= 2 and b == 0x03:
            zeros = 0
            continue
        out.append(b)
        zeros = zeros + 1 if b == 0x00 else 0
    return bytes(out)


def escape_rbsp(data: bytes) -> bytes:
    """Insert emulation-prevention bytes so no 00 00 0x (x<=3) run survives."""
    out = bytearray()
    zeros = 0
    for b in data:
        if zeros >= 2 and b <= 0x03:
            out.append(0x03)
            zeros = 0
        out.append(b)
        zeros = zeros + 1 if b == 0x00 else 0
    return bytes(out)


class BitCursor:
    """MSB-first bit reader over an unescaped RBSP span.

    Reads past the end raise `BitstreamExhausted` rather than returning
    zero bits.
    """

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0  # bit index

    @property
    def remaining(self) -> int:
        return len(self.data) * 8 - self.pos

    def read_bit(self) -> int:
        if self.pos >= len(self.data) * 8:
            raise BitstreamExhausted("read past end at bit %d" % self.pos)
        byte, offset = divmod(self.pos, 8)
        self.pos += 1
        return (self.data[byte] >> (7 - offset)) & 1

    def read_bits(self, n: int) -> int:
        value = 0
        for _ in range(n):
            value = (value << 1) | self.read_bit()
        return value

    def read_ue(self) -> int:
        """Unsigned Exp-Golomb: k leading zeros, then 1, then k suffix bits."""
        leading = 0
        while self.read_bit() == 0:
            leading += 1
            if leading > 63:
                raise BitstreamExhausted("Exp-Golomb prefix too long")
        return (1 << leading) - 1 + self.read_bits(leading)

    def read_se(self) -> int:
        code = self.read_ue()
        magnitude = (code + 1) // 2
        return magnitude if code % 2 == 1 else -magnitude

    def more_rbsp_data(self) -> bool:
        """True while bits remain before the final rbsp_stop_one_bit."""
        return _more_rbsp_data(self)


def read_ue(cursor: BitCursor) -> int:
    return cursor.read_ue()


def read_se(cursor: BitCursor) -> int:
    return cursor.read_se()


class BitWriter:
    """MSB-first bit writer; counterpart of `BitCursor` for fixture assembly."""

    def __init__(self) -> None:
        self.bits: list[int] = []

    def put_bit(self, value: int) -> "BitWriter":
        self.bits.append(value & 1)
        return self

    def put_bits(self, value: int, n: int) -> "BitWriter":
        for shift in range(n - 1, -1, -1):
            self.put_bit((value >> shift) & 1)
        return self

    def put_ue(self, value: int) -> "BitWriter":
        code = value + 1
        width = code.bit_length()
        self.put_bits(0, width - 1)
        self.put_bits(code, width)
        return self

    def put_se(self, value: int) -> "BitWriter":
        code = 2 * value - 1 if value > 0 else -2 * value
        return self.put_ue(code)

    def rbsp_trailing(self) -> "BitWriter":
        self.put_bit(1)
        while len(self.bits) % 8 != 0:
            self.put_bit(0)
        return self

    def to_bytes(self) -> bytes:
        padded = self.bits + [0] * (-len(self.bits) % 8)
        out = bytearray()
        for i in range(0, len(padded), 8):
            byte = 0
            for bit in padded[i:i + 8]:
                byte = (byte << 1) | bit
            out.append(byte)
        return bytes(out)


@dataclass(frozen=True)
class Param:
    """One named syntax element: value plus presence and a categorical tag."""

    name: str
    value: object
    categorical: bool
    present: bool

    def render(self) -> str:
        if not self.present:
            return "absent"
        if isinstance(self.value, tuple):
            return "[" + ",".join(str(v) for v in self.value) + "]"
        return str(self.value)


class ParamRecord:
    """Ordered parameter record over a fixed named schema."""

    schema: tuple[tuple[str, bool], ...] = ()

    def __init__(self) -> None:
        self.params: list[Param] = [Param(name, None, cat, False) for name, cat in self.schema]
        self._index = {name: i for i, (name, _) in enumerate(self.schema)}
        self.extras: dict = {}
        self.warnings: list[str] = []

    def set(self, name: str, value) -> None:
        i = self._index[name]
        self.params[i] = Param(name, value, self.params[i].categorical, True)

    def get(self, name: str):
        return self.params[self._index[name]].value

    def present(self, name: str) -> bool:
        return self.params[self._index[name]].present

    @property
    def partial(self) -> bool:
        return bool(self.warnings)

    def as_dict(self) -> dict:
        return {p.name: (p.value if p.present else None) for p in self.params}


class SpsParams(ParamRecord):
    schema = (
        ("profile_idc", True),
        ("constraint_set0_flag", True),
        ("constraint_set1_flag", True),
        ("constraint_set2_flag", True),
        ("constraint_set3_flag", True),
        ("constraint_set4_flag", True),
        ("constraint_set5_flag", True),
        ("reserved_zero_2bits", True),
        ("level_idc", True),
        ("seq_parameter_set_id", True),
        ("chroma_format_idc", True),
        ("separate_colour_plane_flag", True),
        ("bit_depth_luma_minus8", False),
        ("bit_depth_chroma_minus8", False),
        ("qpprime_y_zero_transform_bypass_flag", True),
        ("seq_scaling_matrix_present_flag", True),
        ("seq_scaling_list_present_flags", True),
        ("log2_max_frame_num_minus4", False),
        ("pic_order_cnt_type", True),
        ("log2_max_pic_order_cnt_lsb_minus4", False),
        ("delta_pic_order_always_zero_flag", True),
        ("offset_for_non_ref_pic", False),
        ("offset_for_top_to_bottom_field", False),
        ("num_ref_frames_in_pic_order_cnt_cycle", False),
        ("offset_for_ref_frame", False),
        ("max_num_ref_frames", False),
        ("gaps_in_frame_num_value_allowed_flag", True),
        ("pic_width_in_mbs_minus1", False),
        ("pic_height_in_map_units_minus1", False),
        ("frame_mbs_only_flag", True),
        ("mb_adaptive_frame_field_flag", True),
        ("direct_8x8_inference_flag", True),
        ("frame_cropping_flag", True),
        ("frame_crop_left_offset", False),
        ("frame_crop_right_offset", False),
        ("frame_crop_top_offset", False),
        ("frame_crop_bottom_offset", False),
        ("vui_parameters_present_flag", True),
    )

    def __init__(self) -> None:
        super().__init__()
        self.vui: Optional[VuiParams] = None

    @property
    def width_pixels(self) -> int:
        width = (self.get("pic_width_in_mbs_minus1") + 1) * 16
        if self.get("frame_cropping_flag"):
            width -= 2 * ((self.get("frame_crop_left_offset") or 0) + (self.get("frame_crop_right_offset") or 0))
        return width

    @property
    def height_pixels(self) -> int:
        frame_factor = 2 - (self.get("frame_mbs_only_flag") or 0)
        height = (self.get("pic_height_in_map_units_minus1") + 1) * 16 * frame_factor
        if self.get("frame_cropping_flag"):
            height -= 2 * frame_factor * ((self.get("frame_crop_top_offset") or 0) + (self.get("frame_crop_bottom_offset") or 0))
        return height


class PpsParams(ParamRecord):
    schema = (
        ("pic_parameter_set_id", True),
        ("seq_parameter_set_id", True),
        ("entropy_coding_mode_flag", True),
        ("bottom_field_pic_order_in_frame_present_flag", True),
        ("num_slice_groups_minus1", False),
        ("slice_group_map_type", True),
        ("run_length_minus1", False),
        ("top_left", False),
        ("bottom_right", False),
        ("slice_group_change_direction_flag", True),
        ("slice_group_change_rate_minus1", False),
        ("pic_size_in_map_units_minus1", False),
        ("num_ref_idx_l0_default_active_minus1", False),
        ("num_ref_idx_l1_default_active_minus1", False),
        ("weighted_pred_flag", True),
        ("weighted_bipred_idc", True),
        ("pic_init_qp_minus26", False),
        ("pic_init_qs_minus26", False),
        ("chroma_qp_index_offset", False),
        ("deblocking_filter_control_present_flag", True),
        ("constrained_intra_pred_flag", True),
        ("redundant_pic_cnt_present_flag", True),
        ("transform_8x8_mode_flag", True),
        ("pic_scaling_matrix_present_flag", True),
        ("second_chroma_qp_index_offset", False),
    )


class VuiParams(ParamRecord):
    schema = (
        ("aspect_ratio_info_present_flag", True),
        ("aspect_ratio_idc", True),
        ("sar_width", False),
        ("sar_height", False),
        ("overscan_info_present_flag", True),
        ("overscan_appropriate_flag", True),
        ("video_signal_type_present_flag", True),
        ("video_format", True),
        ("video_full_range_flag", True),
        ("colour_description_present_flag", True),
        ("colour_primaries", True),
        ("transfer_characteristics", True),
        ("matrix_coefficients", True),
        ("chroma_loc_info_present_flag", True),
        ("chroma_sample_loc_type_top_field", True),
        ("chroma_sample_loc_type_bottom_field", True),
        ("timing_info_present_flag", True),
        ("num_units_in_tick", False),
        ("time_scale", False),
        ("fixed_frame_rate_flag", True),
        ("nal_hrd_parameters_present_flag", True),
        ("vcl_hrd_parameters_present_flag", True),
        ("low_delay_hrd_flag", True),
        ("pic_struct_present_flag", True),
        ("bitstream_restriction_flag", True),
        ("motion_vectors_over_pic_boundaries_flag", True),
        ("max_bytes_per_pic_denom", False),
        ("max_bits_per_mb_denom", False),
        ("log2_max_mv_length_horizontal", False),
        ("log2_max_mv_length_vertical", False),
        ("max_num_reorder_frames", False),
        ("max_dec_frame_buffering", False),
    )


@dataclass
class EncodingSetting:
    """One SPS plus the PPS set (and optional VUI) that encoded a stream."""

    sps: SpsParams
    pps_list: list[PpsParams] = field(default_factory=list)

    @property
    def pps(self) -> Optional[PpsParams]:
        return self.pps_list[0] if self.pps_list else None

    @property
    def vui(self) -> Optional[VuiParams]:
        return self.sps.vui


def _skip_scaling_list(cursor: BitCursor, size: int) -> list[int]:
    last, nxt = 8, 8
    values = []
    for _ in range(size):
        if nxt != 0:
            delta = cursor.read_se()
            nxt = (last + delta + 256) % 256
        last = nxt if nxt != 0 else last
        values.append(last)
    return values


def parse_sps(blob: bytes) -> SpsParams:
    """Decode an SPS NAL unit (header byte included) into `SpsParams`."""
    sps = SpsParams()
    if not blob:
        raise BitstreamExhausted("empty SPS blob")
    nal_type = blob[0] & 0x1F
    if nal_type != NAL_TYPE_SPS:
        sps.warnings.append("nal-type-%d-not-sps" % nal_type)
    cursor = BitCursor(unescape_rbsp(blob[1:]))

    sps.set("profile_idc", cursor.read_bits(8))
    for i in range(6):
        sps.set("constraint_set%d_flag" % i, cursor.read_bit())
    sps.set("reserved_zero_2bits", cursor.read_bits(2))
    sps.set("level_idc", cursor.read_bits(8))
    sps.set("seq_parameter_set_id", cursor.read_ue())

    if sps.get("profile_idc") in HIGH_PROFILE_IDCS:
        chroma = cursor.read_ue()
        sps.set("chroma_format_idc", chroma)
        if chroma == 3:
            sps.set("separate_colour_plane_flag", cursor.read_bit())
        sps.set("bit_depth_luma_minus8", cursor.read_ue())
        sps.set("bit_depth_chroma_minus8", cursor.read_ue())
        sps.set("qpprime_y_zero_transform_bypass_flag", cursor.read_bit())
        scaling_present = cursor.read_bit()
        sps.set("seq_scaling_matrix_present_flag", scaling_present)
        if scaling_present:
            count = 12 if chroma == 3 else 8
            flags = []
            lists = []
            for i in range(count):
                flag = cursor.read_bit()
                flags.append(flag)
                if flag:
                    lists.append(_skip_scaling_list(cursor, 16 if i < 6 else 64))
            sps.set("seq_scaling_list_present_flags", tuple(flags))
            sps.extras["seq_scaling_lists"] = lists

    sps.set("log2_max_frame_num_minus4", cursor.read_ue())
    poc_type = cursor.read_ue()
    sps.set("pic_order_cnt_type", poc_type)
    if poc_type == 0:
        sps.set("log2_max_pic_order_cnt_lsb_minus4", cursor.read_ue())
    elif poc_type == 1:
        sps.set("delta_pic_order_always_zero_flag", cursor.read_bit())
        sps.set("offset_for_non_ref_pic", cursor.read_se())
        sps.set("offset_for_top_to_bottom_field", cursor.read_se())
        cycle = cursor.read_ue()
        sps.set("num_ref_frames_in_pic_order_cnt_cycle", cycle)
        sps.set("offset_for_ref_frame", tuple(cursor.read_se() for _ in range(cycle)))
    sps.set("max_num_ref_frames", cursor.read_ue())
    sps.set("gaps_in_frame_num_value_allowed_flag", cursor.read_bit())
    sps.set("pic_width_in_mbs_minus1", cursor.read_ue())
    sps.set("pic_height_in_map_units_minus1", cursor.read_ue())
    frame_mbs_only = cursor.read_bit()
    sps.set("frame_mbs_only_flag", frame_mbs_only)
    if not frame_mbs_only:
        sps.set("mb_adaptive_frame_field_flag", cursor.read_bit())
    sps.set("direct_8x8_inference_flag", cursor.read_bit())
    cropping = cursor.read_bit()
    sps.set("frame_cropping_flag", cropping)
    if cropping:
        sps.set("frame_crop_left_offset", cursor.read_ue())
        sps.set("frame_crop_right_offset", cursor.read_ue())
        sps.set("frame_crop_top_offset", cursor.read_ue())
        sps.set("frame_crop_bottom_offset", cursor.read_ue())
    vui_present = cursor.read_bit()
    sps.set("vui_parameters_present_flag", vui_present)
    if vui_present:
        sps.vui = _parse_vui(cursor)

    _check_trailing(cursor, sps)
    return sps


def _parse_vui(cursor: BitCursor) -> VuiParams:
    vui = VuiParams()
    aspect = cursor.read_bit()
    vui.set("aspect_ratio_info_present_flag", aspect)
    if aspect:
        idc = cursor.read_bits(8)
        vui.set("aspect_ratio_idc", idc)
        if idc == 255:  # Extended_SAR
            vui.set("sar_width", cursor.read_bits(16))
            vui.set("sar_height", cursor.read_bits(16))
    overscan = cursor.read_bit()
    vui.set("overscan_info_present_flag", overscan)
    if overscan:
        vui.set("overscan_appropriate_flag", cursor.read_bit())
    signal = cursor.read_bit()
    vui.set("video_signal_type_present_flag", signal)
    if signal:
        vui.set("video_format", cursor.read_bits(3))
        vui.set("video_full_range_flag", cursor.read_bit())
        colour = cursor.read_bit()
        vui.set("colour_description_present_flag", colour)
        if colour:
            vui.set("colour_primaries", cursor.read_bits(8))
            vui.set("transfer_characteristics", cursor.read_bits(8))
            vui.set("matrix_coefficients", cursor.read_bits(8))
    chroma_loc = cursor.read_bit()
    vui.set("chroma_loc_info_present_flag", chroma_loc)
    if chroma_loc:
        vui.set("chroma_sample_loc_type_top_field", cursor.read_ue())
        vui.set("chroma_sample_loc_type_bottom_field", cursor.read_ue())
    timing = cursor.read_bit()
    vui.set("timing_info_present_flag", timing)
    if timing:
        vui.set("num_units_in_tick", cursor.read_bits(32))
        vui.set("time_scale", cursor.read_bits(32))
        vui.set("fixed_frame_rate_flag", cursor.read_bit())
    nal_hrd = cursor.read_bit()
    vui.set("nal_hrd_parameters_present_flag", nal_hrd)
    if nal_hrd:
        vui.extras["nal_hrd"] = _parse_hrd(cursor)
    vcl_hrd = cursor.read_bit()
    vui.set("vcl_hrd_parameters_present_flag", vcl_hrd)
    if vcl_hrd:
        vui.extras["vcl_hrd"] = _parse_hrd(cursor)
    if nal_hrd or vcl_hrd:
        vui.set("low_delay_hrd_flag", cursor.read_bit())
    vui.set("pic_struct_present_flag", cursor.read_bit())
    restriction = cursor.read_bit()
    vui.set("bitstream_restriction_flag", restriction)
    if restriction:
        vui.set("motion_vectors_over_pic_boundaries_flag", cursor.read_bit())
        vui.set("max_bytes_per_pic_denom", cursor.read_ue())
        vui.set("max_bits_per_mb_denom", cursor.read_ue())
        vui.set("log2_max_mv_length_horizontal", cursor.read_ue())
        vui.set("log2_max_mv_length_vertical", cursor.read_ue())
        vui.set("max_num_reorder_frames", cursor.read_ue())
        vui.set("max_dec_frame_buffering", cursor.read_ue())
    return vui


def _parse_hrd(cursor: BitCursor) -> dict:
    hrd = {"cpb_cnt_minus1": cursor.read_ue(),
           "bit_rate_scale": cursor.read_bits(4),
           "cpb_size_scale": cursor.read_bits(4),
           "schedules": []}
    for _ in range(hrd["cpb_cnt_minus1"] + 1):
        hrd["schedules"].append({
            "bit_rate_value_minus1": cursor.read_ue(),
            "cpb_size_value_minus1": cursor.read_ue(),
            "cbr_flag": cursor.read_bit(),
        })
    hrd["initial_cpb_removal_delay_length_minus1"] = cursor.read_bits(5)
    hrd["cpb_removal_delay_length_minus1"] = cursor.read_bits(5)
    hrd["dpb_output_delay_length_minus1"] = cursor.read_bits(5)
    hrd["time_offset_length"] = cursor.read_bits(5)
    return hrd


def parse_pps(blob: bytes) -> PpsParams:
    """Decode a PPS NAL unit (header byte included) into `PpsParams`."""
    pps = PpsParams()
    if not blob:
        raise BitstreamExhausted("empty PPS blob")
    nal_type = blob[0] & 0x1F
    if nal_type != NAL_TYPE_PPS:
        pps.warnings.append("nal-type-%d-not-pps" % nal_type)
    cursor = BitCursor(unescape_rbsp(blob[1:]))

    pps.set("pic_parameter_set_id", cursor.read_ue())
    pps.set("seq_parameter_set_id", cursor.read_ue())
    pps.set("entropy_coding_mode_flag", cursor.read_bit())
    pps.set("bottom_field_pic_order_in_frame_present_flag", cursor.read_bit())
    num_slice_groups = cursor.read_ue()
    pps.set("num_slice_groups_minus1", num_slice_groups)
    if num_slice_groups > 0:
        map_type = cursor.read_ue()
        pps.set("slice_group_map_type", map_type)
        if map_type == 0:
            pps.set("run_length_minus1", tuple(cursor.read_ue() for _ in range(num_slice_groups + 1)))
        elif map_type == 2:
            tl, br = [], []
            for _ in range(num_slice_groups):
                tl.append(cursor.read_ue())
                br.append(cursor.read_ue())
            pps.set("top_left", tuple(tl))
            pps.set("bottom_right", tuple(br))
        elif map_type in (3, 4, 5):
            pps.set("slice_group_change_direction_flag", cursor.read_bit())
            pps.set("slice_group_change_rate_minus1", cursor.read_ue())
        elif map_type == 6:
            size = cursor.read_ue()
            pps.set("pic_size_in_map_units_minus1", size)
            bits = max(1, (num_slice_groups + 1 - 1).bit_length())
            pps.extras["slice_group_id"] = [cursor.read_bits(bits) for _ in range(size + 1)]
    pps.set("num_ref_idx_l0_default_active_minus1", cursor.read_ue())
    pps.set("num_ref_idx_l1_default_active_minus1", cursor.read_ue())
    pps.set("weighted_pred_flag", cursor.read_bit())
    pps.set("weighted_bipred_idc", cursor.read_bits(2))
    pps.set("pic_init_qp_minus26", cursor.read_se())
    pps.set("pic_init_qs_minus26", cursor.read_se())
    pps.set("chroma_qp_index_offset", cursor.read_se())
    pps.set("deblocking_filter_control_present_flag", cursor.read_bit())
    pps.set("constrained_intra_pred_flag", cursor.read_bit())
    pps.set("redundant_pic_cnt_present_flag", cursor.read_bit())
    if _more_rbsp_data(cursor):
        transform_8x8 = cursor.read_bit()
        pps.set("transform_8x8_mode_flag", transform_8x8)
        scaling = cursor.read_bit()
        pps.set("pic_scaling_matrix_present_flag", scaling)
        if scaling:
            # chroma_format_idc==3 would add lists; assume 4:2:0 here since the
            # PPS alone does not carry chroma format
            count = 6 + (2 if transform_8x8 else 0)
            flags, lists = [], []
            for i in range(count):
                flag = cursor.read_bit()
                flags.append(flag)
                if flag:
                    lists.append(_skip_scaling_list(cursor, 16 if i < 6 else 64))
            pps.extras["pic_scaling_list_present_flags"] = flags
            pps.extras["pic_scaling_lists"] = lists
        pps.set("second_chroma_qp_index_offset", cursor.read_se())
    _check_trailing(cursor, pps)
    return pps


def _more_rbsp_data(cursor: BitCursor) -> bool:
    if cursor.remaining <= 0:
        return False
    for idx in range(len(cursor.data) * 8 - 1, cursor.pos - 1, -1):
        byte, offset = divmod(idx, 8)
        if (cursor.data[byte] >> (7 - offset)) & 1:
            return idx > cursor.pos
    return False


def _check_trailing(cursor: BitCursor, record: ParamRecord) -> None:
    """Validate the rbsp_stop_one_bit + alignment-zeros tail."""
    if cursor.remaining <= 0:
        record.warnings.append("missing-rbsp-trailing-bits")
        return
    if _more_rbsp_data(cursor):
        residue = cursor.remaining
        record.warnings.append("unsupported-profile-residue")
        record.extras["residue_bits"] = residue
        return
    if cursor.read_bit() != 1:
        record.warnings.append("bad-rbsp-stop-bit")
        return
    while cursor.remaining > 0:
        if cursor.read_bit() != 0:
            record.warnings.append("bad-rbsp-alignment")
            return


# Fixed order of the core parameter vector used for partial-file
# classification: five parse-controlling fields, entropy mode, frame width,
# base quantization, cropping flag and bottom offset, then picture height.
CORE_PARAM_NAMES = (
    "log2_max_frame_num_minus4",
    "pic_order_cnt_type",
    "log2_max_pic_order_cnt_lsb_minus4",
    "delta_pic_order_always_zero_flag",
    "bottom_field_pic_order_in_frame_present_flag",
    "entropy_coding_mode_flag",
    "pic_width_in_mbs_minus1",
    "pic_init_qp_minus26",
    "frame_cropping_flag",
    "frame_crop_bottom_offset",
    "height_pixels",
)

# Coordinates dropped by the user-adjustable reduction: everything tied to
# frame geometry.
USER_ADJUSTABLE_CORE_INDICES = (6, 8, 9, 10)

_SPS_CORE = {
    "log2_max_frame_num_minus4", "pic_order_cnt_type",
    "log2_max_pic_order_cnt_lsb_minus4", "delta_pic_order_always_zero_flag",
    "pic_width_in_mbs_minus1", "frame_cropping_flag", "frame_crop_bottom_offset",
}
_PPS_CORE = {
    "bottom_field_pic_order_in_frame_present_flag", "entropy_coding_mode_flag",
    "pic_init_qp_minus26",
}


@dataclass(frozen=True)
class CoreParams:
    """The 11-value numeric vector for partial-file classification."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(CORE_PARAM_NAMES):
            raise MissingParameter("core vector must have %d entries" % len(CORE_PARAM_NAMES))

    def as_dict(self) -> dict:
        return dict(zip(CORE_PARAM_NAMES, self.values))


def core_param_vector(setting: EncodingSetting, height: int) -> CoreParams:
    """Project an encoding setting (plus caller-supplied picture height in
    pixels) onto the fixed 11-value core vector.

    Raises `MissingParameter` when a core field sits in a region the parser
    had to skip (flagged partial decode).
    """
    values = []
    for name in CORE_PARAM_NAMES:
        if name == "height_pixels":
            values.append(float(height))
            continue
        record = setting.sps if name in _SPS_CORE else setting.pps
        if record is None:
            raise MissingParameter("no PPS available for %r" % name)
        if record.present(name):
            values.append(float(record.get(name)))
        elif record.partial:
            raise MissingParameter("core parameter %r not decoded (partial record)" % name)
        else:
            values.append(0.0)  # conditionally absent by syntax
    return CoreParams(values=tuple(values))
