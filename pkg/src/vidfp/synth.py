"""Synthetic MP4 corpus generator for desk-scale testing.

Emits minimal but well-formed files (ftyp/moov/.../stsd/avcC/mdat) whose
box layout and codec parameters are controlled per class, while
content-volatile values (durations, timestamps, sample counts, mdat bytes)
vary per file.  SPS/PPS blobs are assembled with the package's own
Exp-Golomb writer.
"""

from __future__ import annotations

import dataclasses
import json
import random
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .h264 import HIGH_PROFILE_IDCS, BitWriter, escape_rbsp


def box(box_type: str, payload: bytes = b"") -> bytes:
    raw_type = box_type.encode("latin-1")
    assert len(raw_type) == 4, box_type
    return struct.pack(">I", 8 + len(payload)) + raw_type + payload


def full_box(box_type: str, version: int, flags: int, payload: bytes) -> bytes:
    return box(box_type, bytes([version]) + flags.to_bytes(3, "big") + payload)


_IDENTITY_MATRIX = struct.pack(">9i", 65536, 0, 0, 0, 65536, 0, 0, 0, 0x40000000)


@dataclass(frozen=True)
class VuiRecipe:
    aspect_ratio_idc: Optional[int] = None
    video_signal: Optional[tuple[int, int, int, int, int]] = None  # format, full_range, primaries, transfer, matrix
    timing: Optional[tuple[int, int, int]] = None  # num_units_in_tick, time_scale, fixed_frame_rate
    restriction: Optional[tuple[int, int, int, int, int, int, int]] = None


@dataclass(frozen=True)
class CodecRecipe:
    profile_idc: int = 66
    level_idc: int = 30
    width: int = 1280
    height: int = 720
    qp_delta: int = 0  # pic_init_qp_minus26
    entropy: int = 0
    chroma_qp_offset: int = 0
    deblocking: int = 1
    n_pps: int = 1
    log2_max_frame_num_minus4: int = 0
    poc_type: int = 0
    log2_max_poc_lsb_minus4: int = 2
    max_num_ref_frames: int = 1
    frame_mbs_only: int = 1
    mb_adaptive: int = 0
    transform_8x8: int = 0
    constraint_byte: int = 0
    vui: Optional[VuiRecipe] = None

    @property
    def width_mbs(self) -> int:
        return (self.width + 15) // 16

    @property
    def height_units(self) -> int:
        unit = 16 * (2 - self.frame_mbs_only)
        return (self.height + unit - 1) // unit

    @property
    def crop(self) -> tuple[int, int, int, int]:
        crop_right = (self.width_mbs * 16 - self.width) // 2
        unit = 2 * (2 - self.frame_mbs_only)
        crop_bottom = (self.height_units * 16 * (2 - self.frame_mbs_only) - self.height) // unit
        return (0, crop_right, 0, crop_bottom)


def encode_sps(recipe: CodecRecipe) -> bytes:
    w = BitWriter()
    w.put_bits(recipe.profile_idc, 8)
    w.put_bits(recipe.constraint_byte, 8)  # constraint flags + reserved bits
    w.put_bits(recipe.level_idc, 8)
    w.put_ue(0)  # seq_parameter_set_id
    if recipe.profile_idc in HIGH_PROFILE_IDCS:
        w.put_ue(1)  # chroma_format_idc 4:2:0
        w.put_ue(0).put_ue(0)  # bit depths
        w.put_bit(0)  # qpprime bypass
        w.put_bit(0)  # seq_scaling_matrix_present
    w.put_ue(recipe.log2_max_frame_num_minus4)
    w.put_ue(recipe.poc_type)
    if recipe.poc_type == 0:
        w.put_ue(recipe.log2_max_poc_lsb_minus4)
    elif recipe.poc_type == 1:
        w.put_bit(0)           # delta_pic_order_always_zero_flag
        w.put_se(0).put_se(0)  # non-ref / top-to-bottom offsets
        w.put_ue(0)            # empty ref-frame offset cycle
    w.put_ue(recipe.max_num_ref_frames)
    w.put_bit(0)  # gaps_in_frame_num_value_allowed
    w.put_ue(recipe.width_mbs - 1)
    w.put_ue(recipe.height_units - 1)
    w.put_bit(recipe.frame_mbs_only)
    if not recipe.frame_mbs_only:
        w.put_bit(recipe.mb_adaptive)
    w.put_bit(1)  # direct_8x8_inference
    crop = recipe.crop
    if any(crop):
        w.put_bit(1)
        for value in crop:
            w.put_ue(value)
    else:
        w.put_bit(0)
    if recipe.vui is not None:
        w.put_bit(1)
        _write_vui(w, recipe.vui)
    else:
        w.put_bit(0)
    w.rbsp_trailing()
    return b"\x67" + escape_rbsp(w.to_bytes())


def _write_vui(w: BitWriter, vui: VuiRecipe) -> None:
    if vui.aspect_ratio_idc is not None:
        w.put_bit(1)
        w.put_bits(vui.aspect_ratio_idc, 8)
    else:
        w.put_bit(0)
    w.put_bit(0)  # overscan_info_present
    if vui.video_signal is not None:
        fmt, full_range, primaries, transfer, matrix = vui.video_signal
        w.put_bit(1)
        w.put_bits(fmt, 3)
        w.put_bit(full_range)
        w.put_bit(1)  # colour_description_present
        w.put_bits(primaries, 8)
        w.put_bits(transfer, 8)
        w.put_bits(matrix, 8)
    else:
        w.put_bit(0)
    w.put_bit(0)  # chroma_loc_info_present
    if vui.timing is not None:
        nuit, time_scale, fixed = vui.timing
        w.put_bit(1)
        w.put_bits(nuit, 32)
        w.put_bits(time_scale, 32)
        w.put_bit(fixed)
    else:
        w.put_bit(0)
    w.put_bit(0)  # nal_hrd_parameters_present
    w.put_bit(0)  # vcl_hrd_parameters_present
    w.put_bit(0)  # pic_struct_present
    if vui.restriction is not None:
        w.put_bit(1)
        mv_over, max_bytes, max_bits, mv_h, mv_v, reorder, buffering = vui.restriction
        w.put_bit(mv_over)
        for value in (max_bytes, max_bits, mv_h, mv_v, reorder, buffering):
            w.put_ue(value)
    else:
        w.put_bit(0)


def encode_pps(recipe: CodecRecipe, pps_id: int = 0) -> bytes:
    w = BitWriter()
    w.put_ue(pps_id)
    w.put_ue(0)  # seq_parameter_set_id
    w.put_bit(recipe.entropy)
    w.put_bit(0)  # bottom_field_pic_order_in_frame_present
    w.put_ue(0)  # num_slice_groups_minus1
    w.put_ue(0)  # num_ref_idx_l0_default_active_minus1
    w.put_ue(0)  # num_ref_idx_l1_default_active_minus1
    w.put_bit(0)  # weighted_pred
    w.put_bits(0, 2)  # weighted_bipred_idc
    w.put_se(recipe.qp_delta)
    w.put_se(0)  # pic_init_qs_minus26
    w.put_se(recipe.chroma_qp_offset)
    w.put_bit(recipe.deblocking)
    w.put_bit(0)  # constrained_intra_pred
    w.put_bit(0)  # redundant_pic_cnt_present
    if recipe.profile_idc in HIGH_PROFILE_IDCS:
        w.put_bit(recipe.transform_8x8)
        w.put_bit(0)  # pic_scaling_matrix_present
        w.put_se(0)   # second_chroma_qp_index_offset
    w.rbsp_trailing()
    return b"\x68" + escape_rbsp(w.to_bytes())


def make_avcc(recipe: CodecRecipe) -> bytes:
    sps = encode_sps(recipe)
    pps_blobs = [encode_pps(recipe, pps_id=i) for i in range(recipe.n_pps)]
    payload = bytearray()
    payload += bytes([1, recipe.profile_idc, recipe.constraint_byte, recipe.level_idc])
    payload.append(0xFC | 3)  # 4-byte NALU lengths
    payload.append(0xE0 | 1)  # one SPS
    payload += struct.pack(">H", len(sps)) + sps
    payload.append(len(pps_blobs))
    for blob in pps_blobs:
        payload += struct.pack(">H", len(blob)) + blob
    return box("avcC", bytes(payload))


@dataclass(frozen=True)
class ClassRecipe:
    """Per-class structural layout and parameter choices."""

    name: str
    codec: CodecRecipe = CodecRecipe()
    free_before_moov: int = 0
    free_after_moov: int = 0
    mdat_before_moov: bool = False
    udta: Optional[tuple[str, str]] = None  # (4CC key, text payload)
    vendor_box: Optional[str] = None
    pasp: bool = False
    btrt: Optional[tuple[int, int]] = None  # (max_bitrate, avg_bitrate)
    mdhd_timescale: int = 30000
    hdlr_name: str = "VideoHandler"
    compressor: str = "AVC Coding"


def _qt_text(text: str) -> bytes:
    raw = text.encode("utf-8")
    return struct.pack(">HH", len(raw), 0) + raw


def _sample_entry(recipe: ClassRecipe) -> bytes:
    c = recipe.codec
    name = recipe.compressor.encode("utf-8")[:31]
    compressor = bytes([len(name)]) + name + bytes(31 - len(name))
    payload = bytearray()
    payload += bytes(6) + struct.pack(">H", 1)           # reserved + data_reference_index
    payload += bytes(16)                                  # pre_defined / reserved
    payload += struct.pack(">HH", c.width, c.height)
    payload += struct.pack(">II", 0x00480000, 0x00480000)  # 72 dpi
    payload += bytes(4)
    payload += struct.pack(">H", 1)                       # frame_count
    payload += compressor
    payload += struct.pack(">Hh", 24, -1)                 # depth, pre_defined
    payload += make_avcc(c)
    if recipe.pasp:
        payload += box("pasp", struct.pack(">II", 1, 1))
    if recipe.btrt is not None:
        payload += box("btrt", struct.pack(">III", 0, recipe.btrt[0], recipe.btrt[1]))
    return box("avc1", bytes(payload))


def build_file(recipe: ClassRecipe, rng: random.Random) -> bytes:
    """Assemble one file; per-file variation lives in the content-volatile
    fields only."""
    n_frames = rng.randint(30, 240)
    creation = rng.randint(3_300_000_000, 3_600_000_000)
    sample_size = rng.randint(500, 8000)
    mdat_payload = rng.randbytes(rng.randint(64, 512))
    c = recipe.codec

    mvhd_timescale = 1000
    duration = n_frames * mvhd_timescale // 30
    media_duration = n_frames * (recipe.mdhd_timescale // 30)

    def assemble(chunk_offset: int) -> tuple[bytes, int]:
        mvhd = full_box("mvhd", 0, 0, struct.pack(
            ">IIIIih", creation, creation, mvhd_timescale, duration, 65536, 256)
            + bytes(10) + _IDENTITY_MATRIX + bytes(24) + struct.pack(">I", 2))
        tkhd = full_box("tkhd", 0, 3, struct.pack(
            ">IIIII", creation, creation, 1, 0, duration) + bytes(8)
            + struct.pack(">hhhH", 0, 0, 0, 0) + _IDENTITY_MATRIX
            + struct.pack(">II", c.width << 16, c.height << 16))
        mdhd = full_box("mdhd", 0, 0, struct.pack(
            ">IIIIHH", creation, creation, recipe.mdhd_timescale, media_duration, 0x55C4, 0))
        hdlr = full_box("hdlr", 0, 0, struct.pack(">I", 0) + b"vide" + bytes(12)
                        + recipe.hdlr_name.encode("utf-8") + b"\x00")
        vmhd = full_box("vmhd", 0, 1, struct.pack(">HHHH", 0, 0, 0, 0))
        dref = full_box("dref", 0, 0, struct.pack(">I", 1) + full_box("url ", 0, 1, b""))
        dinf = box("dinf", dref)
        stsd = full_box("stsd", 0, 0, struct.pack(">I", 1) + _sample_entry(recipe))
        stts = full_box("stts", 0, 0, struct.pack(">III", 1, n_frames, recipe.mdhd_timescale // 30))
        stsc = full_box("stsc", 0, 0, struct.pack(">IIII", 1, 1, n_frames, 1))
        stsz = full_box("stsz", 0, 0, struct.pack(">II", sample_size, n_frames))
        stco = full_box("stco", 0, 0, struct.pack(">II", 1, chunk_offset))
        stbl = box("stbl", stsd + stts + stsc + stsz + stco)
        minf = box("minf", vmhd + dinf + stbl)
        mdia = box("mdia", mdhd + hdlr + minf)
        trak = box("trak", tkhd + mdia)

        moov_children = mvhd + trak
        if recipe.udta is not None:
            key, text = recipe.udta
            moov_children += box("udta", box(key, _qt_text(text)))
        if recipe.vendor_box is not None:
            moov_children += box(recipe.vendor_box, bytes(12))
        moov = box("moov", moov_children)

        ftyp = box("ftyp", b"isom" + struct.pack(">I", 512) + b"isomiso2avc1mp41")
        frees_before = box("free", bytes(8)) * recipe.free_before_moov
        frees_after = box("free", bytes(8)) * recipe.free_after_moov
        mdat = box("mdat", mdat_payload)
        if recipe.mdat_before_moov:
            prefix = ftyp + frees_before
            data = prefix + mdat + frees_after + moov
        else:
            prefix = ftyp + frees_before + moov + frees_after
            data = prefix + mdat
        return data, len(prefix) + 8

    _, offset = assemble(0)
    data, final_offset = assemble(offset)
    assert final_offset == offset
    return data


@dataclass(frozen=True)
class SyntheticSpec:
    """Deterministic corpus description: class recipes, samples per class,
    and the master seed."""

    classes: tuple[ClassRecipe, ...]
    samples_per_class: int
    seed: int


_STRUCTURAL_VARIANTS: tuple[dict, ...] = (
    dict(),
    dict(free_after_moov=1, btrt=(8_000_000, 6_000_000)),
    dict(free_before_moov=1, vendor_box="xprt", pasp=True),
    dict(mdat_before_moov=True),
    dict(free_before_moov=2, udta=("©swr", "CamFirmware 2.1"), pasp=True, btrt=(12_000_000, 9_500_000)),
    dict(free_after_moov=1, mdat_before_moov=True, udta=("name", "StreamBox")),
    dict(free_before_moov=1, free_after_moov=1, vendor_box="zzap"),
    dict(udta=("auth", "HandHeld"), vendor_box="qtip", pasp=True),
)

_RESOLUTIONS = ((1280, 720), (1920, 1080), (640, 480), (3840, 2160))
_PROFILES = (66, 77, 100)
_LEVELS = (30, 31, 40, 41, 42, 50)
_TIMESCALES = (30000, 90000, 600, 44100)
_HANDLER_NAMES = ("VideoHandler", "Core Media Video", "vireo", "MP4 video handler")


def default_class_recipe(i: int, structural_period: int = 3) -> ClassRecipe:
    """Deterministic per-class recipe.

    Classes within one structural period share every structure-affecting
    choice (box layout, VUI parameter presence, PPS count) and differ only
    in parameter values; the base QP is unique per class index, so classes
    are always separable at level 2."""
    group = i // structural_period
    structural = _STRUCTURAL_VARIANTS[group % len(_STRUCTURAL_VARIANTS)]
    width, height = _RESOLUTIONS[i % len(_RESOLUTIONS)]
    profile = _PROFILES[i % len(_PROFILES)]
    vui = None
    if group % 3 != 2:
        vui = VuiRecipe(timing=(1001, 30000 + 1000 * (i % 7), 1),
                        aspect_ratio_idc=1 if group % 4 == 0 else None)
    codec = CodecRecipe(
        profile_idc=profile,
        level_idc=_LEVELS[i % len(_LEVELS)],
        width=width,
        height=height,
        qp_delta=(i % 40) - 14,  # unique per class for corpora up to 40 classes
        entropy=1 if (profile != 66 and i % 2) else 0,
        n_pps=4 if group % 7 == 5 else 1,
        vui=vui,
    )
    return ClassRecipe(
        name="model_%02d" % i,
        codec=codec,
        mdhd_timescale=_TIMESCALES[i % len(_TIMESCALES)],
        hdlr_name=_HANDLER_NAMES[i % len(_HANDLER_NAMES)],
        compressor="AVC Coding" if i % 2 == 0 else "H.264",
        **structural,
    )


def default_spec(n_classes: int, samples_per_class: int, seed: int,
                 clone_pairs: int = 0) -> SyntheticSpec:
    """Corpus of structurally or parametrically distinct classes, optionally
    with trailing clone pairs that share every device-stable property."""
    if 2 * clone_pairs > n_classes:
        raise ValueError("more clone pairs than classes can hold")
    recipes = [default_class_recipe(i) for i in range(n_classes)]
    for pair in range(clone_pairs):
        keep = n_classes - 2 * pair - 2
        clone = n_classes - 2 * pair - 1
        recipes[clone] = dataclasses.replace(recipes[keep], name=recipes[clone].name)
    return SyntheticSpec(classes=tuple(recipes), samples_per_class=samples_per_class, seed=seed)


def novel_recipe(i: int) -> ClassRecipe:
    """Topologies outside the default corpus, for unknown-routing tests."""
    base = default_class_recipe(i % 4)
    return dataclasses.replace(
        base, name="novel_%02d" % i,
        free_before_moov=5 + i,
        vendor_box="nv%02x" % (i % 256),
        udta=("odd ", "novel-%d" % i))


def write_corpus(spec: SyntheticSpec, out_dir) -> Path:
    """Write one MP4 per (class, sample) plus a JSON-lines manifest; returns
    the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for class_index, recipe in enumerate(spec.classes):
        for sample in range(spec.samples_per_class):
            rng = random.Random((spec.seed * 1_000_003 + class_index) * 1_000_003 + sample)
            data = build_file(recipe, rng)
            name = "%s_%03d.mp4" % (recipe.name, sample)
            (out / name).write_bytes(data)
            entries.append({"path": name, "label": recipe.name})
    manifest = out / "manifest.jsonl"
    with open(manifest, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return manifest
