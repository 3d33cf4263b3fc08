"""Per-group precision detection and aggregation.

The hardware detector ORs all values of a group and finds the leading set
bit; the software model mirrors that exactly. Signed inputs are first moved
to a sign-magnitude pattern with the sign in the least significant position,
so the detector only ever sees non-negative bit patterns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ValidationError
from .tensors import FixedTensor, dispatch_stream

GROUP_SIZES = (16, 64, 256)


@dataclass(frozen=True)
class GroupPrecision:
    """Detected bit range for one group of values."""

    n_h: int
    n_l: int
    p: int
    all_zero: bool = False
    clamped: bool = False  # profile n_L filtered every set bit of the group

    def __post_init__(self):
        if self.all_zero:
            if self.p != 0:
                raise ValidationError("all-zero group must have p == 0")
        elif not 1 <= self.p:
            raise ValidationError(f"invalid group precision p={self.p}")


@dataclass
class LayerProfile:
    """Static per-layer precisions, as consumed by the cycle models."""

    name: str
    p_a: int
    p_w: int = 16
    n_l: int = 0
    work: int = 0  # MACs

    def __post_init__(self):
        if not 1 <= self.p_a <= 16 or not 1 <= self.p_w <= 16:
            raise ValidationError(f"profile {self.name}: precisions out of [1, 16]")
        if not 0 <= self.n_l < self.p_a:
            raise ValidationError(f"profile {self.name}: n_L must be below P_a")


@dataclass
class PrecisionHistogram:
    """Distribution of detected group precisions for one tensor."""

    group_size: int
    width: int
    counts: np.ndarray  # index p in [0, width]

    @property
    def groups(self) -> int:
        return int(self.counts.sum())

    @property
    def cdf(self) -> np.ndarray:
        total = self.counts.sum()
        if total == 0:
            return np.zeros_like(self.counts, dtype=float)
        return np.cumsum(self.counts) / total

    def mean_precision(self) -> float:
        total = self.counts.sum()
        if total == 0:
            return 0.0
        return float(np.dot(np.arange(self.counts.size), self.counts) / total)

    def csv_rows(self):
        cdf = self.cdf
        for p in range(self.counts.size):
            yield {"precision": p, "count": int(self.counts[p]), "cdf": float(cdf[p])}


def to_sign_magnitude(value: int, width: int) -> int:
    """Two's-complement -> (|v| << 1) | sign, sign in the LSB."""
    lo = -(1 << (width - 1))
    hi = (1 << (width - 1)) - 1
    if not lo <= value <= hi:
        raise ValidationError(f"{value} not a {width}-bit two's-complement value")
    if value == lo:
        raise ValidationError(
            f"{value} has no {width}-bit magnitude counterpart; "
            "reject it at quantization time"
        )
    sign = 1 if value < 0 else 0
    return (abs(value) << 1) | sign


def from_sign_magnitude(pattern: int, width: int) -> int:
    """Inverse of :func:`to_sign_magnitude`."""
    if pattern < 0 or pattern >= (1 << width):
        raise ValidationError(f"{pattern} does not fit in {width} bits")
    mag = pattern >> 1
    return -mag if pattern & 1 else mag


def signed_stream_to_patterns(values: np.ndarray, width: int) -> np.ndarray:
    """Vectorized sign-magnitude conversion for a whole stream."""
    vals = np.asarray(values, dtype=np.int64)
    if vals.size and int(vals.min()) == -(1 << (width - 1)):
        raise ValidationError(
            f"stream contains -2^{width - 1}, which has no sign-magnitude form"
        )
    return (np.abs(vals) << 1) | (vals < 0)


def patterns_to_signed_stream(patterns: np.ndarray) -> np.ndarray:
    pats = np.asarray(patterns, dtype=np.int64)
    mags = pats >> 1
    return np.where(pats & 1, -mags, mags)


def detect_group_precision(values: Iterable[int], n_l: int = 0) -> GroupPrecision:
    """OR-tree + leading-one detection over one group of unsigned patterns."""
    acc = 0
    for v in values:
        if v < 0:
            raise ValidationError("detector input must be non-negative patterns")
        acc |= int(v)
    if acc == 0:
        return GroupPrecision(n_h=0, n_l=n_l, p=0, all_zero=True)
    n_h = acc.bit_length() - 1
    if n_h < n_l:
        return GroupPrecision(n_h=n_h, n_l=n_l, p=1, clamped=True)
    return GroupPrecision(n_h=n_h, n_l=n_l, p=n_h - n_l + 1)


def group_precisions(
    stream: np.ndarray, group_size: int, n_l: int = 0
) -> np.ndarray:
    """Per-group p over a flat unsigned stream, tail zero-padded.

    Vectorized equivalent of mapping :func:`detect_group_precision` over the
    stream in dispatch order.
    """
    vals = np.asarray(stream, dtype=np.int64)
    if vals.size == 0:
        return np.zeros(0, dtype=np.int64)
    if vals.size and int(vals.min()) < 0:
        raise ValidationError("detector input must be non-negative patterns")
    pad = (-vals.size) % group_size
    if pad:
        vals = np.pad(vals, (0, pad))
    ors = np.bitwise_or.reduce(vals.reshape(-1, group_size), axis=1)
    n_h = np.zeros_like(ors)
    tmp = ors.copy()
    while np.any(tmp > 1):
        step = tmp > 1
        n_h[step] += 1
        tmp[step] >>= 1
    p = n_h - n_l + 1
    p = np.maximum(p, 1)  # n_L filtered every set bit: clamp, matching detect_*
    p[ors == 0] = 0
    return p


def precision_histogram(
    tensor: FixedTensor, group_size: int, n_l: int = 0
) -> PrecisionHistogram:
    """Histogram of detected precisions over the dispatch stream."""
    stream = dispatch_stream(tensor)
    if tensor.signed:
        stream = signed_stream_to_patterns(stream, tensor.width)
    ps = group_precisions(stream, group_size, n_l)
    counts = np.bincount(ps, minlength=tensor.width + 1)
    return PrecisionHistogram(group_size=group_size, width=tensor.width, counts=counts)


def effective_precision(
    tensor: FixedTensor,
    group_size: int,
    n_l: int = 0,
    usage_weights: Optional[Sequence[float]] = None,
) -> float:
    """Usage-weighted mean of per-group precision; fractional by design."""
    stream = dispatch_stream(tensor)
    if tensor.signed:
        stream = signed_stream_to_patterns(stream, tensor.width)
    ps = group_precisions(stream, group_size, n_l)
    if ps.size == 0:
        return 0.0
    if usage_weights is None:
        return float(ps.mean())
    w = np.asarray(usage_weights, dtype=np.float64)
    if w.size != ps.size:
        raise ValidationError(
            f"{w.size} usage weights for {ps.size} groups"
        )
    if w.sum() <= 0:
        raise ValidationError("usage weights must have positive mass")
    return float(np.dot(ps, w) / w.sum())


def layer_static_precision(tensor: FixedTensor, n_l: int = 0) -> int:
    """Detection run over the whole layer; the per-layer worst case."""
    stream = dispatch_stream(tensor)
    if tensor.signed:
        stream = signed_stream_to_patterns(stream, tensor.width)
    gp = detect_group_precision((int(v) for v in stream), n_l)
    return max(gp.p, 1)


def load_profiles(path: str) -> dict:
    """Read a network profile fixture: {layer name -> LayerProfile}."""
    with open(path) as fh:
        data = json.load(fh)
    out = {}
    for entry in data.get("layers", []):
        out[entry["name"]] = LayerProfile(
            name=entry["name"],
            p_a=int(entry.get("p_a", 16)),
            p_w=int(entry.get("p_w", 16)),
            n_l=int(entry.get("n_l", 0)),
            work=int(entry.get("macs", 0)),
        )
    return out
