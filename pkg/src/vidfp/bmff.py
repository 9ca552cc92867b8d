"""ISO base media file format (MP4/MOV/3GP) box parser.

Parses a byte stream into a tree of boxes, decoding field values for a
documented table of known box types.  Unknown and vendor-specific boxes are
kept in the tree as labeled nodes with no fields; `mdat` payloads are never
copied into memory (only size and offset are recorded).
"""

from __future__ import annotations

import datetime
import hashlib
import io
import mmap
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterator, Optional, Union

from .errors import CorruptAvcConfig, NoAvcConfig, NotIsoBmff

# First box of a file must carry one of these types to be treated as ISO-BMFF.
TOP_LEVEL_TYPES = {
    "ftyp", "styp", "moov", "moof", "mdat", "free", "skip", "wide",
    "meta", "pnot", "uuid", "sidx", "ssix", "prft", "emsg", "mfra", "pdin",
}

# Plain container boxes: payload is a sequence of child boxes.
CONTAINER_TYPES = {
    "moov", "trak", "mdia", "minf", "stbl", "udta", "edts", "dinf",
    "mvex", "moof", "traf", "mfra", "tref", "ilst",
}

# Sample entries found under stsd.  Visual entries carry a 70-byte fixed
# layout after the 8-byte sample-entry header, audio entries a 20-byte one;
# both may be followed by child boxes (avcC, pasp, esds, ...).
VISUAL_SAMPLE_ENTRY_TYPES = {"avc1", "avc3", "encv", "mp4v", "s263", "hvc1", "hev1", "mjpa", "mjpb", "jpeg"}
AUDIO_SAMPLE_ENTRY_TYPES = {"mp4a", "enca", "samr", "sawb", "sowt", "twos", "lpcm", "ac-3"}

_MAC_EPOCH = datetime.datetime(1904, 1, 1, tzinfo=datetime.timezone.utc)


def fourcc(raw: bytes) -> str:
    """Render a 4-byte type code as text, escaping non-printable bytes."""
    out = []
    for b in raw:
        if 0x20 <= b < 0x7F:
            out.append(chr(b))
        elif b == 0xA9:  # common in QuickTime metadata keys
            out.append("©")
        else:
            out.append("\\x%02x" % b)
    return "".join(out)


@dataclass(frozen=True)
class FieldValue:
    """A decoded box field with a deterministic canonical text rendering."""

    kind: str  # categorical-text | integer | fixed-point | timestamp | blob
    text: str

    @staticmethod
    def integer(value: int) -> "FieldValue":
        return FieldValue("integer", str(value))

    @staticmethod
    def text_value(value: str) -> "FieldValue":
        return FieldValue("categorical-text", value)

    @staticmethod
    def fixed(value: float) -> "FieldValue":
        return FieldValue("fixed-point", "%g" % value)

    @staticmethod
    def timestamp(seconds_since_1904: int) -> "FieldValue":
        try:
            moment = _MAC_EPOCH + datetime.timedelta(seconds=seconds_since_1904)
            text = moment.strftime("%Y-%m-%dT%H:%M:%SZ")
        except OverflowError:
            text = "raw:%d" % seconds_since_1904
        return FieldValue("timestamp", text)

    @staticmethod
    def blob(data: bytes) -> "FieldValue":
        if len(data) <= 64:
            return FieldValue("blob", data.hex())
        digest = hashlib.sha256(data).hexdigest()[:16]
        return FieldValue("blob", "%dB:%s" % (len(data), digest))


@dataclass
class RawBox:
    """One parsed box: type code, file position, payload and children."""

    box_type: str
    offset: int
    declared_size: int
    header_size: int
    payload: Optional[bytes] = None
    children: list["RawBox"] = field(default_factory=list)
    fields: list[tuple[str, FieldValue]] = field(default_factory=list)
    malformed: bool = False
    parent_type: Optional[str] = None

    @property
    def end(self) -> int:
        return self.offset + self.declared_size

    def walk(self) -> Iterator["RawBox"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def find_all(self, box_type: str) -> list["RawBox"]:
        return [b for b in self.walk() if b.box_type == box_type]


@dataclass
class BoxTree:
    """Parsed box hierarchy.  `root` is synthetic; its children are the
    top-level boxes in on-disk order."""

    root: RawBox
    source_size: int
    truncated: bool = False
    truncation_offset: Optional[int] = None

    @property
    def top_level(self) -> list[RawBox]:
        return self.root.children

    def walk(self) -> Iterator[RawBox]:
        for child in self.root.children:
            yield from child.walk()

    def find_all(self, box_type: str) -> list[RawBox]:
        return [b for b in self.walk() if b.box_type == box_type]


class _Truncation(Exception):
    def __init__(self, offset: int):
        self.offset = offset


Source = Union[bytes, bytearray, memoryview, str, Path, BinaryIO]


def _as_view(source: Source):
    """Return (memoryview, closer) over the input without copying file data."""
    if isinstance(source, (bytes, bytearray, memoryview)):
        return memoryview(bytes(source)), None
    if isinstance(source, (str, Path)):
        fh = open(source, "rb")
        try:
            mapped = mmap.mmap(fh.fileno(), 0, access=mmap.ACCESS_READ)
        except ValueError:  # empty file cannot be mapped
            fh.close()
            return memoryview(b""), None
        fh.close()
        return memoryview(mapped), mapped
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        data = source.read()
        return memoryview(data), None
    raise TypeError("unsupported source type: %r" % type(source))


def parse_boxes(source: Source) -> BoxTree:
    """Parse an MP4-like byte stream into a `BoxTree`.

    Raises `NotIsoBmff` when the stream does not begin with a known
    top-level box.  A box whose declared size overruns the remaining bytes
    stops the parse; everything read so far is returned with
    `tree.truncated` set.
    """
    view, closer = _as_view(source)
    try:
        total = len(view)
        if total < 8:
            raise NotIsoBmff("input too short for a box header (%d bytes)" % total)
        first_type = fourcc(bytes(view[4:8]))
        if first_type not in TOP_LEVEL_TYPES:
            raise NotIsoBmff("first box type %r is not a known top-level type" % first_type)

        root = RawBox(box_type="", offset=0, declared_size=total, header_size=0)
        tree = BoxTree(root=root, source_size=total)
        try:
            _parse_children(view, 0, total, root, top_level=True)
        except _Truncation as trunc:
            tree.truncated = True
            tree.truncation_offset = trunc.offset
        return tree
    finally:
        if closer is not None:
            view.release()
            closer.close()


def _parse_children(view: memoryview, start: int, end: int, parent: RawBox, top_level: bool = False) -> None:
    pos = start
    while pos < end:
        if end - pos < 8:
            raise _Truncation(pos)
        declared = struct.unpack_from(">I", view, pos)[0]
        box_type = fourcc(bytes(view[pos + 4:pos + 8]))
        header = 8
        if declared == 1:
            if end - pos < 16:
                raise _Truncation(pos)
            declared = struct.unpack_from(">Q", view, pos + 8)[0]
            header = 16
        elif declared == 0:
            declared = end - pos  # extends to end of the enclosing span
        if box_type == "uuid":
            if declared < header + 16 or end - pos < header + 16:
                raise _Truncation(pos)
            header += 16
        if declared < header or pos + declared > end:
            raise _Truncation(pos)

        box = RawBox(box_type=box_type, offset=pos, declared_size=declared,
                     header_size=header, parent_type=parent.box_type or None)
        parent.children.append(box)
        _fill_box(view, box)
        pos += declared


def _fill_box(view: memoryview, box: RawBox) -> None:
    body_start = box.offset + box.header_size
    body_end = box.end
    kind = box.box_type

    if kind == "mdat":
        return  # size/offset only; payload intentionally untouched
    if kind == "uuid":
        box.fields.append(("@usertype", FieldValue.blob(bytes(view[box.offset + 8:box.offset + 24]))))
        return
    if kind in CONTAINER_TYPES:
        if kind == "ilst":
            _parse_ilst(view, box, body_start, body_end)
            return
        _parse_children(view, body_start, body_end, box)
        return
    if kind == "meta":
        # full box: version/flags precede the child boxes
        if body_end - body_start >= 4:
            box.fields.append(("@version", FieldValue.integer(view[body_start])))
            box.fields.append(("@flags", FieldValue.integer(int.from_bytes(view[body_start + 1:body_start + 4], "big"))))
            _parse_children(view, body_start + 4, body_end, box)
        return
    if kind in ("stsd", "dref"):
        box.payload = bytes(view[body_start:body_end])
        decode_fields(box)
        if body_end - body_start >= 8:
            _parse_children(view, body_start + 8, body_end, box)
        return
    if kind in VISUAL_SAMPLE_ENTRY_TYPES:
        box.payload = bytes(view[body_start:body_end])
        decode_fields(box)
        if body_end - body_start > 78:
            _parse_children(view, body_start + 78, body_end, box)
        return
    if kind in AUDIO_SAMPLE_ENTRY_TYPES:
        box.payload = bytes(view[body_start:body_end])
        decode_fields(box)
        offset = _audio_entry_children_offset(box.payload)
        if offset is not None and body_end - body_start > offset:
            _parse_children(view, body_start + offset, body_end, box)
        return

    box.payload = bytes(view[body_start:body_end])
    decode_fields(box)


def _audio_entry_children_offset(payload: bytes) -> Optional[int]:
    # 8-byte sample-entry prefix + 20-byte audio fields; QuickTime v1 adds 16.
    if len(payload) < 28:
        return None
    version = struct.unpack_from(">H", payload, 8)[0]
    return 28 + 16 if version == 1 else 28


def _parse_ilst(view: memoryview, box: RawBox, start: int, end: int) -> None:
    """Best-effort decode of the Apple metadata item list: each child box is
    a (4CC key, value) pair whose value lives in a nested `data` box."""
    try:
        _parse_children(view, start, end, box)
    except _Truncation:
        box.malformed = True
        return
    for item in box.children:
        if item.payload is None or len(item.payload) < 16:
            continue
        data_size, data_tag = struct.unpack_from(">I4s", item.payload, 0)
        if data_tag != b"data" or data_size > len(item.payload):
            item.fields.append(("@value", FieldValue.blob(item.payload)))
            continue
        type_indicator = int.from_bytes(item.payload[8:12], "big")
        value = item.payload[16:data_size]
        item.fields.append(("@type_indicator", FieldValue.integer(type_indicator)))
        if type_indicator == 1:  # UTF-8 text
            try:
                item.fields.append(("@value", FieldValue.text_value(value.decode("utf-8"))))
                continue
            except UnicodeDecodeError:
                pass
        item.fields.append(("@value", FieldValue.blob(value)))


class _ByteReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise EOFError("field decode ran past end of payload")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def s16(self) -> int:
        return struct.unpack(">h", self.take(2))[0]

    def u24(self) -> int:
        return int.from_bytes(self.take(3), "big")

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def rest(self) -> bytes:
        out = self.data[self.pos:]
        self.pos = len(self.data)
        return out


def decode_fields(box: RawBox) -> list[tuple[str, FieldValue]]:
    """Decode the known fields of `box` from its payload, in payload order.

    Unsupported box types yield an empty list.  A decode failure mid-payload
    keeps the fields read so far and marks the box malformed.
    """
    decoder = _DECODERS.get(box.box_type)
    if decoder is None and box.parent_type == "udta":
        decoder = _decode_udta_text
    if decoder is None or box.payload is None:
        return box.fields
    reader = _ByteReader(box.payload)
    box.fields = []
    try:
        decoder(reader, box.fields)
    except (EOFError, struct.error):
        box.malformed = True
    return box.fields


def _version_flags(r: _ByteReader, out: list) -> int:
    version = r.u8()
    out.append(("@version", FieldValue.integer(version)))
    out.append(("@flags", FieldValue.integer(r.u24())))
    return version


def _time_field(r: _ByteReader, version: int) -> FieldValue:
    return FieldValue.timestamp(r.u64() if version == 1 else r.u32())


def _decode_ftyp(r: _ByteReader, out: list) -> None:
    out.append(("@major_brand", FieldValue.text_value(fourcc(r.take(4)))))
    out.append(("@minor_version", FieldValue.integer(r.u32())))
    brands = []
    while len(r.data) - r.pos >= 4:
        brands.append(fourcc(r.take(4)))
    out.append(("@compatible_brands", FieldValue.text_value(",".join(brands))))


def _decode_mvhd(r: _ByteReader, out: list) -> None:
    version = _version_flags(r, out)
    out.append(("@creation_time", _time_field(r, version)))
    out.append(("@modification_time", _time_field(r, version)))
    out.append(("@timescale", FieldValue.integer(r.u32())))
    out.append(("@duration", FieldValue.integer(r.u64() if version == 1 else r.u32())))
    out.append(("@rate", FieldValue.fixed(struct.unpack(">i", r.take(4))[0] / 65536.0)))
    out.append(("@volume", FieldValue.fixed(r.s16() / 256.0)))
    r.take(10)  # reserved
    out.append(("@matrix", FieldValue.blob(r.take(36))))
    r.take(24)  # pre_defined
    out.append(("@next_track_id", FieldValue.integer(r.u32())))


def _decode_tkhd(r: _ByteReader, out: list) -> None:
    version = _version_flags(r, out)
    out.append(("@creation_time", _time_field(r, version)))
    out.append(("@modification_time", _time_field(r, version)))
    out.append(("@track_id", FieldValue.integer(r.u32())))
    r.take(4)  # reserved
    out.append(("@duration", FieldValue.integer(r.u64() if version == 1 else r.u32())))
    r.take(8)  # reserved
    out.append(("@layer", FieldValue.integer(r.s16())))
    out.append(("@alternate_group", FieldValue.integer(r.s16())))
    out.append(("@volume", FieldValue.fixed(r.s16() / 256.0)))
    r.take(2)  # reserved
    out.append(("@matrix", FieldValue.blob(r.take(36))))
    out.append(("@width", FieldValue.fixed(r.u32() / 65536.0)))
    out.append(("@height", FieldValue.fixed(r.u32() / 65536.0)))


def _decode_mdhd(r: _ByteReader, out: list) -> None:
    version = _version_flags(r, out)
    out.append(("@creation_time", _time_field(r, version)))
    out.append(("@modification_time", _time_field(r, version)))
    out.append(("@timescale", FieldValue.integer(r.u32())))
    out.append(("@duration", FieldValue.integer(r.u64() if version == 1 else r.u32())))
    packed = r.u16()
    language = "".join(chr(((packed >> shift) & 0x1F) + 0x60) for shift in (10, 5, 0))
    out.append(("@language", FieldValue.text_value(language)))
    out.append(("@pre_defined", FieldValue.integer(r.u16())))


def _decode_hdlr(r: _ByteReader, out: list) -> None:
    _version_flags(r, out)
    out.append(("@pre_defined", FieldValue.integer(r.u32())))
    out.append(("@handler_type", FieldValue.text_value(fourcc(r.take(4)))))
    r.take(12)  # reserved
    name = r.rest()
    if name[:1] and name[0] == len(name) - 1:  # QuickTime pascal-style
        name = name[1:]
    out.append(("@name", FieldValue.text_value(name.rstrip(b"\x00").decode("utf-8", "replace"))))


def _decode_vmhd(r: _ByteReader, out: list) -> None:
    _version_flags(r, out)
    out.append(("@graphicsmode", FieldValue.integer(r.u16())))
    out.append(("@opcolor", FieldValue.text_value("%d,%d,%d" % (r.u16(), r.u16(), r.u16()))))


def _decode_smhd(r: _ByteReader, out: list) -> None:
    _version_flags(r, out)
    out.append(("@balance", FieldValue.fixed(r.s16() / 256.0)))


def _decode_full_entry_count(r: _ByteReader, out: list) -> None:
    _version_flags(r, out)
    out.append(("@entry_count", FieldValue.integer(r.u32())))


def _decode_stsz(r: _ByteReader, out: list) -> None:
    _version_flags(r, out)
    out.append(("@sample_size", FieldValue.integer(r.u32())))
    out.append(("@sample_count", FieldValue.integer(r.u32())))


def _decode_url(r: _ByteReader, out: list) -> None:
    _version_flags(r, out)
    location = r.rest().rstrip(b"\x00")
    if location:
        out.append(("@location", FieldValue.text_value(location.decode("utf-8", "replace"))))


def _decode_visual_entry(r: _ByteReader, out: list) -> None:
    r.take(6)  # reserved
    out.append(("@data_reference_index", FieldValue.integer(r.u16())))
    r.take(16)  # pre_defined / reserved
    out.append(("@width", FieldValue.integer(r.u16())))
    out.append(("@height", FieldValue.integer(r.u16())))
    out.append(("@horizresolution", FieldValue.fixed(r.u32() / 65536.0)))
    out.append(("@vertresolution", FieldValue.fixed(r.u32() / 65536.0)))
    r.take(4)  # reserved
    out.append(("@frame_count", FieldValue.integer(r.u16())))
    raw_name = r.take(32)
    name_len = min(raw_name[0], 31)
    out.append(("@compressorname", FieldValue.text_value(raw_name[1:1 + name_len].decode("utf-8", "replace"))))
    out.append(("@depth", FieldValue.integer(r.u16())))


def _decode_audio_entry(r: _ByteReader, out: list) -> None:
    r.take(6)  # reserved
    out.append(("@data_reference_index", FieldValue.integer(r.u16())))
    out.append(("@entry_version", FieldValue.integer(r.u16())))
    r.take(6)  # revision / vendor
    out.append(("@channelcount", FieldValue.integer(r.u16())))
    out.append(("@samplesize", FieldValue.integer(r.u16())))
    r.take(4)  # compression id / packet size
    out.append(("@samplerate", FieldValue.fixed(r.u32() / 65536.0)))


def _decode_avcc(r: _ByteReader, out: list) -> None:
    out.append(("@configuration_version", FieldValue.integer(r.u8())))
    out.append(("@avc_profile_indication", FieldValue.integer(r.u8())))
    out.append(("@profile_compatibility", FieldValue.integer(r.u8())))
    out.append(("@avc_level_indication", FieldValue.integer(r.u8())))
    out.append(("@length_size_minus_one", FieldValue.integer(r.u8() & 0x03)))
    num_sps = r.u8() & 0x1F
    out.append(("@num_sps", FieldValue.integer(num_sps)))
    for _ in range(num_sps):
        r.take(r.u16())
    num_pps = r.u8()
    out.append(("@num_pps", FieldValue.integer(num_pps)))


def _decode_btrt(r: _ByteReader, out: list) -> None:
    out.append(("@buffer_size_db", FieldValue.integer(r.u32())))
    out.append(("@max_bitrate", FieldValue.integer(r.u32())))
    out.append(("@avg_bitrate", FieldValue.integer(r.u32())))


def _decode_pasp(r: _ByteReader, out: list) -> None:
    out.append(("@h_spacing", FieldValue.integer(r.u32())))
    out.append(("@v_spacing", FieldValue.integer(r.u32())))


def _decode_colr(r: _ByteReader, out: list) -> None:
    colour_type = fourcc(r.take(4))
    out.append(("@colour_type", FieldValue.text_value(colour_type)))
    if colour_type in ("nclx", "nclc"):
        out.append(("@colour_primaries", FieldValue.integer(r.u16())))
        out.append(("@transfer_characteristics", FieldValue.integer(r.u16())))
        out.append(("@matrix_coefficients", FieldValue.integer(r.u16())))
        if colour_type == "nclx":
            out.append(("@full_range_flag", FieldValue.integer(r.u8() >> 7)))


def _decode_udta_text(r: _ByteReader, out: list) -> None:
    # QuickTime international text: u16 length, u16 language, then text.
    if len(r.data) >= 4:
        length = struct.unpack_from(">H", r.data, 0)[0]
        if length == len(r.data) - 4:
            r.take(2)
            out.append(("@language_code", FieldValue.integer(r.u16())))
            out.append(("@text", FieldValue.text_value(r.rest().decode("utf-8", "replace"))))
            return
    if r.data:
        out.append(("@value", FieldValue.blob(r.rest())))


_DECODERS = {
    "ftyp": _decode_ftyp,
    "styp": _decode_ftyp,
    "mvhd": _decode_mvhd,
    "tkhd": _decode_tkhd,
    "mdhd": _decode_mdhd,
    "hdlr": _decode_hdlr,
    "vmhd": _decode_vmhd,
    "smhd": _decode_smhd,
    "dref": _decode_full_entry_count,
    "stsd": _decode_full_entry_count,
    "stts": _decode_full_entry_count,
    "stsc": _decode_full_entry_count,
    "stco": _decode_full_entry_count,
    "co64": _decode_full_entry_count,
    "ctts": _decode_full_entry_count,
    "stss": _decode_full_entry_count,
    "elst": _decode_full_entry_count,
    "stsz": _decode_stsz,
    "url ": _decode_url,
    "urn ": _decode_url,
    "avcC": _decode_avcc,
    "btrt": _decode_btrt,
    "pasp": _decode_pasp,
    "colr": _decode_colr,
}
for _t in VISUAL_SAMPLE_ENTRY_TYPES:
    _DECODERS[_t] = _decode_visual_entry
for _t in AUDIO_SAMPLE_ENTRY_TYPES:
    _DECODERS[_t] = _decode_audio_entry


@dataclass
class ParameterSetRecord:
    """SPS/PPS byte strings from one AVC decoder configuration record,
    NAL header byte included, in record order."""

    sps: list[bytes]
    pps: list[bytes]


def extract_parameter_set_blobs(tree: BoxTree) -> list[ParameterSetRecord]:
    """Pull every SPS/PPS byte string out of the avcC records in `tree`.

    Raises `NoAvcConfig` when the tree holds no avcC box (non-H.264 video)
    and `CorruptAvcConfig` when a length-prefixed blob overruns its record.
    """
    records = []
    for box in tree.walk():
        if box.box_type != "avcC" or box.payload is None:
            continue
        records.append(_parse_avcc_record(box))
    if not records:
        raise NoAvcConfig("no AVC decoder configuration record in box tree")
    return records


def _parse_avcc_record(box: RawBox) -> ParameterSetRecord:
    data = box.payload
    try:
        reader = _ByteReader(data)
        reader.take(5)
        num_sps = reader.u8() & 0x1F
        sps = [bytes(reader.take(reader.u16())) for _ in range(num_sps)]
        num_pps = reader.u8()
        pps = [bytes(reader.take(reader.u16())) for _ in range(num_pps)]
    except EOFError as exc:
        raise CorruptAvcConfig("avcC record at offset %d overruns its payload" % box.offset) from exc
    return ParameterSetRecord(sps=sps, pps=pps)


def dump_lines(tree: BoxTree, indent: str = "  ") -> Iterator[str]:
    """Yield one indented text line per box node for debug inspection."""

    def emit(box: RawBox, depth: int) -> Iterator[str]:
        rendered = " ".join("%s=%s" % (name, value.text) for name, value in box.fields)
        suffix = (" " + rendered) if rendered else ""
        flag = " [malformed]" if box.malformed else ""
        yield "%s%s offset=%d size=%d%s%s" % (indent * depth, box.box_type, box.offset, box.declared_size, suffix, flag)
        for child in box.children:
            yield from emit(child, depth + 1)

    for top in tree.top_level:
        yield from emit(top, 0)
    if tree.truncated:
        yield "[truncated at offset %s]" % tree.truncation_offset


def dump_json_records(tree: BoxTree) -> list[dict]:
    """One flat JSON record per box node, depth-first."""
    records = []

    def emit(box: RawBox, depth: int) -> None:
        records.append({
            "type": box.box_type,
            "depth": depth,
            "offset": box.offset,
            "size": box.declared_size,
            "fields": {name: value.text for name, value in box.fields},
            "malformed": box.malformed,
        })
        for child in box.children:
            emit(child, depth + 1)

    for top in tree.top_level:
        emit(top, 0)
    return records
