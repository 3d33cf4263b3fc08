"""Synthetic value streams used when no real activation traces are supplied.

ReLU-like activations: a configurable fraction of exact zeros and
geometrically distributed magnitudes clipped to the representable range.
This keeps the skewed most-will-be-small shape the compression and
dynamic-precision results depend on.
"""

from __future__ import annotations

import numpy as np

from .tensors import FixedTensor, _default_layout


def relu_like(
    n: int,
    width: int = 16,
    seed: int = 0,
    zero_fraction: float = 0.3,
    mean_magnitude: float = 100.0,
    shape=None,
    layout: str = None,
) -> FixedTensor:
    """Unsigned tensor with clipped geometric magnitudes and exact zeros."""
    rng = np.random.default_rng(seed)
    mags = rng.geometric(p=min(1.0, 1.0 / mean_magnitude), size=n)
    mags = np.clip(mags, 1, (1 << width) - 1)
    zeros = rng.random(n) < zero_fraction
    values = np.where(zeros, 0, mags).astype(np.int64)
    if shape is None:
        shape = (n,)
    if layout is None:
        layout = _default_layout(len(shape))
    return FixedTensor(
        shape=shape,
        values=values,
        width=width,
        signed=False,
        layout=layout,
        relu_output=True,
    )


def signed_weights(
    n: int,
    width: int = 16,
    seed: int = 0,
    mean_magnitude: float = 60.0,
    shape=None,
    layout: str = None,
) -> FixedTensor:
    """Two's-complement tensor with symmetric geometric magnitudes."""
    rng = np.random.default_rng(seed)
    mags = rng.geometric(p=min(1.0, 1.0 / mean_magnitude), size=n)
    mags = np.clip(mags, 1, (1 << (width - 1)) - 1)
    signs = rng.choice((-1, 1), size=n)
    if shape is None:
        shape = (n,)
    if layout is None:
        layout = _default_layout(len(shape))
    return FixedTensor(
        shape=shape,
        values=(mags * signs).astype(np.int64),
        width=width,
        signed=True,
        layout=layout,
    )
