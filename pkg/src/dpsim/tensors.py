"""Fixed-point tensor ingestion and channel-major brick layout.

Tensors arrive as a JSON manifest plus a raw little-endian binary payload.
Every downstream consumer (precision detection, the codec, the cycle models)
reads values through the brick stream produced here, so the dispatch order is
fixed once: spatial positions in row-major order, channel groups of 16 minor.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .errors import ManifestError, ValidationError

BRICK = 16

_SIGNEDNESS = ("unsigned", "twos-complement")
# Channel-like axis labels: C for conv feature maps, I for FC input fan-in.
_CHANNEL_LABELS = ("C", "I")


@dataclass(frozen=True)
class FixedTensor:
    """A quantized integer tensor with enough metadata to reproduce its bytes."""

    shape: tuple
    values: np.ndarray  # flat, layout order
    width: int
    signed: bool
    layout: str
    scale: float = 1.0
    relu_output: bool = False

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        vals = np.asarray(self.values, dtype=np.int64)
        object.__setattr__(self, "values", vals)
        if self.width not in (8, 16):
            raise ValidationError(f"unsupported width {self.width}")
        n = int(np.prod(self.shape)) if self.shape else 0
        if vals.size != n:
            raise ValidationError(
                f"flat length {vals.size} does not match shape {self.shape}"
            )
        if len(self.layout) != len(self.shape):
            raise ValidationError(
                f"layout {self.layout!r} does not match rank {len(self.shape)}"
            )
        lo, hi = value_range(self.width, self.signed)
        bad = np.nonzero((vals < lo) | (vals > hi))[0]
        if bad.size:
            i = int(bad[0])
            raise ValidationError(
                f"value {int(vals[i])} at index {i} out of range [{lo}, {hi}]"
            )
        if self.relu_output and vals.size and int(vals.min()) < 0:
            i = int(np.argmax(vals < 0))
            raise ValidationError(
                f"negative value at index {i} in a tensor flagged as a ReLU output"
            )

    @property
    def channel_axis(self) -> int:
        for label in _CHANNEL_LABELS:
            if label in self.layout:
                return self.layout.index(label)
        raise ValidationError(f"layout {self.layout!r} declares no channel axis")

    @property
    def channels(self) -> int:
        return self.shape[self.channel_axis]

    @property
    def spatial_positions(self) -> int:
        n = 1
        for axis, extent in enumerate(self.shape):
            if axis != self.channel_axis:
                n *= extent
        return n

    def with_values(self, values: np.ndarray) -> "FixedTensor":
        return replace(self, values=np.asarray(values, dtype=np.int64))


@dataclass(frozen=True)
class Brick:
    """16 values contiguous along the channel dimension, zero-padded at the tail."""

    origin: tuple  # (spatial index, channel offset)
    values: tuple
    pad: int = 0  # trailing positions that are padding, not tensor data

    def __post_init__(self):
        if len(self.values) != BRICK:
            raise ValidationError(f"brick holds {len(self.values)} values, not {BRICK}")


def value_range(width: int, signed: bool):
    if signed:
        return -(1 << (width - 1)), (1 << (width - 1)) - 1
    return 0, (1 << width) - 1


def quantize(
    x: Sequence[float],
    width: int,
    scale: float,
    signed: bool = False,
    shape=None,
    layout: str = None,
    relu_output: bool = False,
) -> FixedTensor:
    """Linear quantization with round-half-away-from-zero and saturation.

    The signed range is clipped to +-(2^(width-1) - 1) so that every value has
    a sign-magnitude counterpart.
    """
    if width not in (8, 16):
        raise ValidationError(f"unsupported width {width}")
    if not scale > 0:
        raise ValidationError(f"scale must be positive, got {scale}")
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        i = int(np.argmax(~np.isfinite(arr.ravel())))
        raise ValidationError(f"non-finite input at index {i}")
    q = arr.ravel() / scale
    q = np.sign(q) * np.floor(np.abs(q) + 0.5)  # half away from zero
    lo, hi = value_range(width, signed)
    if signed:
        lo = -hi  # keep sign-magnitude invertible
    q = np.clip(q, lo, hi).astype(np.int64)
    if shape is None:
        shape = arr.shape if arr.ndim else (arr.size,)
    if layout is None:
        layout = _default_layout(len(shape))
    return FixedTensor(
        shape=tuple(shape),
        values=q,
        width=width,
        signed=signed,
        layout=layout,
        scale=scale,
        relu_output=relu_output,
    )


def _default_layout(rank: int) -> str:
    return {1: "C", 2: "NC", 3: "HWC", 4: "NHWC"}.get(rank, "X" * (rank - 1) + "C")


def _channel_major(tensor: FixedTensor) -> np.ndarray:
    """Values as a (spatial, channel) matrix in dispatch order."""
    arr = tensor.values.reshape(tensor.shape)
    arr = np.moveaxis(arr, tensor.channel_axis, -1)
    return arr.reshape(-1, tensor.channels)


def bricks_of(tensor: FixedTensor) -> Iterator[Brick]:
    """Bricks in dispatch order: spatial row-major, channel groups minor."""
    mat = _channel_major(tensor)
    c = tensor.channels
    groups = (c + BRICK - 1) // BRICK
    for pos in range(mat.shape[0]):
        row = mat[pos]
        for g in range(groups):
            chunk = row[g * BRICK : (g + 1) * BRICK]
            pad = BRICK - chunk.size
            vals = tuple(int(v) for v in chunk) + (0,) * pad
            yield Brick(origin=(pos, g * BRICK), values=vals, pad=pad)


def brick_count(tensor: FixedTensor) -> int:
    return tensor.spatial_positions * ((tensor.channels + BRICK - 1) // BRICK)


def dispatch_stream(tensor: FixedTensor) -> np.ndarray:
    """Flat value stream in dispatch order, padding included."""
    mat = _channel_major(tensor)
    c = tensor.channels
    padded_c = ((c + BRICK - 1) // BRICK) * BRICK
    if padded_c != c:
        mat = np.pad(mat, ((0, 0), (0, padded_c - c)))
    return mat.reshape(-1)


def from_dispatch_stream(stream: np.ndarray, like: FixedTensor) -> FixedTensor:
    """Inverse of :func:`dispatch_stream` given the original metadata."""
    c = like.channels
    padded_c = ((c + BRICK - 1) // BRICK) * BRICK
    mat = np.asarray(stream, dtype=np.int64).reshape(-1, padded_c)[:, :c]
    arr = mat.reshape(
        tuple(
            like.shape[a]
            for a in range(len(like.shape))
            if a != like.channel_axis
        )
        + (c,)
    )
    arr = np.moveaxis(arr, -1, like.channel_axis)
    return like.with_values(arr.reshape(-1))


def load_tensor(manifest_path: str) -> FixedTensor:
    """Load a tensor from a JSON manifest plus raw little-endian payload."""
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {manifest_path} is not valid JSON: {exc}") from exc

    for key in ("data_file", "shape", "width", "signedness"):
        if key not in manifest:
            raise ManifestError(f"manifest missing required field {key!r}")
    signedness = manifest["signedness"]
    if signedness not in _SIGNEDNESS:
        raise ManifestError(f"unknown signedness {signedness!r}")
    signed = signedness == "twos-complement"
    width = int(manifest["width"])
    shape = tuple(int(s) for s in manifest["shape"])
    layout = manifest.get("layout", _default_layout(len(shape)))

    data_path = os.path.join(os.path.dirname(manifest_path), manifest["data_file"])
    try:
        raw = open(data_path, "rb").read()
    except OSError as exc:
        raise ManifestError(f"cannot read payload {data_path}: {exc}") from exc

    dtype = {(8, False): "<u1", (8, True): "<i1", (16, False): "<u2", (16, True): "<i2"}
    if (width, signed) not in dtype:
        raise ManifestError(f"unsupported width {width}")
    values = np.frombuffer(raw, dtype=dtype[(width, signed)]).astype(np.int64)
    n = int(np.prod(shape))
    if values.size != n:
        raise ManifestError(
            f"payload holds {values.size} values, manifest shape implies {n}"
        )
    return FixedTensor(
        shape=shape,
        values=values,
        width=width,
        signed=signed,
        layout=layout,
        scale=float(manifest.get("scale", 1.0)),
        relu_output=bool(manifest.get("relu_output", False)),
    )


def save_tensor(tensor: FixedTensor, manifest_path: str, data_file: str = None) -> None:
    """Write the manifest + payload pair that :func:`load_tensor` reads."""
    if data_file is None:
        data_file = os.path.splitext(os.path.basename(manifest_path))[0] + ".bin"
    dtype = {(8, False): "<u1", (8, True): "<i1", (16, False): "<u2", (16, True): "<i2"}
    raw = tensor.values.astype(dtype[(tensor.width, tensor.signed)]).tobytes()
    data_path = os.path.join(os.path.dirname(manifest_path) or ".", data_file)
    with open(data_path, "wb") as fh:
        fh.write(raw)
    manifest = {
        "data_file": data_file,
        "shape": list(tensor.shape),
        "width": tensor.width,
        "signedness": "twos-complement" if tensor.signed else "unsigned",
        "layout": tensor.layout,
        "scale": tensor.scale,
        "relu_output": tensor.relu_output,
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
