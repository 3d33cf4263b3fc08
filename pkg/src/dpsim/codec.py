"""Off-chip data container codec and traffic accounting.

Three packing schemes share one stream container:

* NP - values stored at full width, no metadata.
* SP - every value packed at the layer's static precision.
* DP - groups of 16 values, each with a 4-bit precision prefix, a 16-bit
  zero mask, and only the nonzero values packed at the group's precision;
  each group independently padded to a 64-bit word boundary.

Bit order is fixed for interop: fields are packed LSB-first into
little-endian 64-bit words, precision field first, then mask, then payload.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import MalformedStreamError, ValidationError
from .precision import (
    LayerProfile,
    detect_group_precision,
    layer_static_precision,
    patterns_to_signed_stream,
    signed_stream_to_patterns,
)
from .tensors import FixedTensor, dispatch_stream, from_dispatch_stream

GROUP = 16
META_BITS = 4 + GROUP  # precision prefix + zero mask
WORD = 64

MAGIC = b"DPRS"
VERSION = 1
_SCHEMES = ("NP", "SP", "DP")
_HEADER = struct.Struct("<4sBBBBBBxxI")  # magic, ver, width, group, n_L, scheme, P, count


def pad64(bits: int) -> int:
    """Round a bit count up to a multiple of the 64b memory interface."""
    return (bits + WORD - 1) // WORD * WORD


def container_bits(nnz: int, p: int) -> int:
    """Size law for one DP group container."""
    return pad64(META_BITS + nnz * p)


@dataclass(frozen=True)
class GroupContainer:
    """One encoded group of 16 values."""

    p: int  # 0 for the all-zero group
    zero_mask: int
    payload: tuple  # nonzero values, already shifted right by n_L

    @property
    def all_zero(self) -> bool:
        return self.zero_mask == 0

    @property
    def bits(self) -> int:
        return container_bits(len(self.payload), self.p)

    def pack(self) -> int:
        """Container as a single integer, LSB-first field order."""
        prec_field = 0 if self.all_zero else self.p - 1
        word = prec_field | (self.zero_mask << 4)
        offset = META_BITS
        for v in self.payload:
            word |= v << offset
            offset += self.p
        return word


@dataclass
class EncodedStream:
    """A packed tensor plus the numbers the traffic model needs."""

    scheme: str
    width: int
    n_l: int
    n_values: int  # values actually encoded (dispatch stream for DP)
    n_source: int  # original tensor elements
    data: bytes
    total_bits: int
    metadata_bits: int = 0
    padding_bits: int = 0
    sp_precision: int = 0
    loop_table: Optional[List[tuple]] = None  # sorted (group index, byte offset)

    @property
    def original_bits(self) -> int:
        return self.n_source * self.width

    @property
    def ratio(self) -> float:
        return self.total_bits / self.original_bits if self.original_bits else 0.0

    @property
    def total_bytes(self) -> int:
        return (self.total_bits + 7) // 8


class _BitWriter:
    """LSB-first bit packer emitting little-endian bytes."""

    def __init__(self):
        self.buf = bytearray()
        self.acc = 0
        self.nbits = 0

    def write(self, value: int, bits: int):
        self.acc |= (value & ((1 << bits) - 1)) << self.nbits
        self.nbits += bits
        while self.nbits >= 8:
            self.buf.append(self.acc & 0xFF)
            self.acc >>= 8
            self.nbits -= 8

    def write_words(self, value: int, words: int):
        self.buf += value.to_bytes(words * 8, "little")

    def finish(self) -> bytes:
        if self.nbits:
            self.buf.append(self.acc & 0xFF)
            self.acc = 0
            self.nbits = 0
        return bytes(self.buf)


class _BitReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0  # bit position

    def read(self, bits: int) -> int:
        end = self.pos + bits
        if end > len(self.data) * 8:
            raise MalformedStreamError("truncated bitstream")
        first = self.pos // 8
        last = (end + 7) // 8
        chunk = int.from_bytes(self.data[first:last], "little")
        value = (chunk >> (self.pos % 8)) & ((1 << bits) - 1)
        self.pos = end
        return value


def encode_group(values: Sequence[int], n_l: int = 0, width: int = 16) -> GroupContainer:
    """Encode 16 unsigned (or sign-magnitude) patterns into one container."""
    vals = [int(v) for v in values]
    if len(vals) != GROUP:
        raise ValidationError(f"group must hold {GROUP} values, got {len(vals)}")
    for i, v in enumerate(vals):
        if v < 0 or v >= (1 << 16):
            raise ValidationError(f"value {v} at index {i} needs more than 16 bits")
    gp = detect_group_precision(vals, n_l)
    if gp.all_zero:
        return GroupContainer(p=0, zero_mask=0, payload=())
    mask = 0
    payload = []
    for i, v in enumerate(vals):
        if v:
            mask |= 1 << i
            payload.append(v >> n_l)
    return GroupContainer(p=gp.p, zero_mask=mask, payload=tuple(payload))


def decode_group(container: GroupContainer, n_l: int = 0) -> List[int]:
    """Serial expansion of one container back to 16 values."""
    if container.all_zero:
        if container.payload:
            raise MalformedStreamError("all-zero group carries payload")
        return [0] * GROUP
    if len(container.payload) != bin(container.zero_mask).count("1"):
        raise MalformedStreamError("zero mask inconsistent with payload length")
    out = []
    it = iter(container.payload)
    for i in range(GROUP):  # one value per step, as the serial decompressor does
        if container.zero_mask & (1 << i):
            out.append(next(it) << n_l)
        else:
            out.append(0)
    return out


def _scheme_code(scheme: str) -> int:
    if scheme not in _SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}")
    return _SCHEMES.index(scheme)


def encode_stream(
    tensor: FixedTensor,
    scheme: str,
    profile: Optional[LayerProfile] = None,
    loop_every: int = 0,
) -> EncodedStream:
    """Pack a whole tensor under one scheme.

    DP walks the dispatch stream in groups of 16; NP and SP pack the flat
    layout-order values. Signed tensors are moved to sign-magnitude patterns
    first so all schemes see non-negative values.

    ``loop_every`` > 0 records a (group index, byte offset) loop point every
    that many groups, enabling random re-access under refetch.
    """
    _scheme_code(scheme)
    n_l = profile.n_l if profile else 0
    width = tensor.width

    if scheme == "DP":
        stream = dispatch_stream(tensor)
    else:
        stream = tensor.values
    if tensor.signed:
        stream = signed_stream_to_patterns(stream, width)
    else:
        stream = np.asarray(stream, dtype=np.int64)

    writer = _BitWriter()
    metadata_bits = 0
    padding_bits = 0
    sp_precision = 0
    loop_table: Optional[List[tuple]] = [] if (scheme == "DP" and loop_every) else None

    if scheme == "NP":
        total_bits = stream.size * width
        writer.buf += stream.astype("<u2" if width == 16 else "<u1").tobytes()
    elif scheme == "SP":
        sp_precision = profile.p_a if profile else layer_static_precision(tensor, n_l)
        limit = 1 << sp_precision
        shifted = stream >> n_l
        if shifted.size and int(shifted.max()) >= limit:
            i = int(np.argmax(shifted >= limit))
            raise ValidationError(
                f"value at index {i} does not fit the static precision "
                f"{sp_precision} of scheme SP"
            )
        total_bits = stream.size * sp_precision
        for v in shifted:
            writer.write(int(v), sp_precision)
        writer.finish()
    else:  # DP
        total_bits = 0
        vals = stream.tolist()
        pad = (-len(vals)) % GROUP
        vals += [0] * pad
        for g in range(0, len(vals), GROUP):
            if loop_table is not None and (g // GROUP) % loop_every == 0:
                loop_table.append((g // GROUP, total_bits // 8))
            container = encode_group(vals[g : g + GROUP], n_l, width)
            bits = container.bits
            writer.write_words(container.pack(), bits // WORD)
            total_bits += bits
            metadata_bits += META_BITS
            padding_bits += bits - META_BITS - len(container.payload) * container.p

    return EncodedStream(
        scheme=scheme,
        width=width,
        n_l=n_l,
        n_values=stream.size + ((-stream.size) % GROUP if scheme == "DP" else 0),
        n_source=tensor.values.size,
        data=writer.finish(),
        total_bits=total_bits,
        metadata_bits=metadata_bits,
        padding_bits=padding_bits,
        sp_precision=sp_precision,
        loop_table=loop_table,
    )


def decode_stream(stream: EncodedStream, like: FixedTensor) -> FixedTensor:
    """Rebuild a tensor from an encoded stream plus its manifest metadata.

    Exact inverse of :func:`encode_stream` when n_L = 0; with n_L > 0 the
    bits below n_L come back cleared.
    """
    width = stream.width
    n_l = stream.n_l
    if width != like.width:
        raise MalformedStreamError(
            f"stream width {width} does not match manifest width {like.width}"
        )
    if stream.scheme == "NP":
        vals = np.frombuffer(
            stream.data, dtype="<u2" if width == 16 else "<u1"
        ).astype(np.int64)
        if vals.size != like.values.size:
            raise MalformedStreamError("NP stream length mismatch")
    elif stream.scheme == "SP":
        reader = _BitReader(stream.data)
        vals = np.fromiter(
            (reader.read(stream.sp_precision) << n_l for _ in range(stream.n_source)),
            dtype=np.int64,
            count=stream.n_source,
        )
    else:
        reader = _BitReader(stream.data)
        groups = stream.n_values // GROUP
        out = np.empty(stream.n_values, dtype=np.int64)
        for g in range(groups):
            out[g * GROUP : (g + 1) * GROUP] = _read_group(reader, n_l)
        if like.signed:
            out = patterns_to_signed_stream(out)
        return from_dispatch_stream(out, like)

    if like.signed:
        vals = patterns_to_signed_stream(vals)
    return like.with_values(vals)


def _read_group(reader: _BitReader, n_l: int) -> List[int]:
    start = reader.pos
    prec_field = reader.read(4)
    mask = reader.read(GROUP)
    if mask == 0:
        if prec_field != 0:
            raise MalformedStreamError(
                "all-zero group carries a nonzero precision field"
            )
        container = GroupContainer(p=0, zero_mask=0, payload=())
    else:
        p = prec_field + 1
        nnz = bin(mask).count("1")
        payload = tuple(reader.read(p) for _ in range(nnz))
        container = GroupContainer(p=p, zero_mask=mask, payload=payload)
    pad = pad64(reader.pos - start) - (reader.pos - start)
    if pad and reader.read(pad) != 0:
        raise MalformedStreamError("nonzero padding bits in group container")
    return decode_group(container, n_l)


def write_stream(stream: EncodedStream, path: str) -> None:
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        stream.width,
        GROUP,
        stream.n_l,
        _scheme_code(stream.scheme),
        stream.sp_precision,
        stream.n_values,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(stream.data)


def read_stream(path: str, n_source: int) -> EncodedStream:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise MalformedStreamError("stream file shorter than its header")
    magic, version, width, group, n_l, code, sp_p, n_values = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise MalformedStreamError("bad stream magic")
    if version != VERSION:
        raise MalformedStreamError(f"unsupported stream version {version}")
    if group != GROUP:
        raise MalformedStreamError(f"unsupported group size {group}")
    if code >= len(_SCHEMES):
        raise MalformedStreamError(f"unknown scheme code {code}")
    scheme = _SCHEMES[code]
    data = raw[_HEADER.size :]
    if scheme == "NP":
        total_bits = n_values * width
    elif scheme == "SP":
        total_bits = n_values * sp_p
    else:
        total_bits = len(data) * 8  # DP data is word-padded on disk
    return EncodedStream(
        scheme=scheme,
        width=width,
        n_l=n_l,
        n_values=n_values,
        n_source=n_source,
        data=data,
        total_bits=total_bits,
        sp_precision=sp_p,
    )


@dataclass
class TrafficReport:
    """Per-layer and whole-network traffic, normalized to NP."""

    rows: List[dict] = field(default_factory=list)
    totals: Dict[str, int] = field(default_factory=dict)

    def ratio(self, scheme: str) -> float:
        base = self.totals.get("NP", 0)
        return self.totals.get(scheme, 0) / base if base else 0.0

    @property
    def metadata_overhead(self) -> float:
        """Metadata bits as a fraction of the compressed DP traffic."""
        dp = self.totals.get("DP", 0)
        return self.totals.get("DP_metadata", 0) / dp if dp else 0.0


def traffic_report(streams: Dict[str, Dict[str, EncodedStream]]) -> TrafficReport:
    """Aggregate {layer -> {scheme -> stream}} into a report."""
    report = TrafficReport()
    for layer, per_scheme in streams.items():
        np_bits = per_scheme["NP"].total_bits if "NP" in per_scheme else 0
        for scheme, stream in per_scheme.items():
            report.rows.append(
                {
                    "layer": layer,
                    "scheme": scheme,
                    "bits": stream.total_bits,
                    "ratio_vs_np": stream.total_bits / np_bits if np_bits else 0.0,
                }
            )
            report.totals[scheme] = report.totals.get(scheme, 0) + stream.total_bits
            if scheme == "DP":
                report.totals["DP_metadata"] = (
                    report.totals.get("DP_metadata", 0) + stream.metadata_bits
                )
    return report
