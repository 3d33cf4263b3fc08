"""Grouped dynamic-precision toolkit: detection, off-chip codec, and cycle
models for bit-serial DNN accelerators."""

from .codec import (
    EncodedStream,
    GroupContainer,
    container_bits,
    decode_group,
    decode_stream,
    encode_group,
    encode_stream,
    traffic_report,
)
from .errors import (
    DpsimError,
    MalformedStreamError,
    ManifestError,
    ModelError,
    ValidationError,
)
from .memmodel import INF_MEMORY, LayerTiming, MemoryConfig, layer_time, sweep
from .precision import (
    GroupPrecision,
    LayerProfile,
    PrecisionHistogram,
    detect_group_precision,
    effective_precision,
    from_sign_magnitude,
    precision_histogram,
    to_sign_magnitude,
)
from .simcore import (
    AcceleratorConfig,
    ConvLayer,
    CycleReport,
    Design,
    FcLayer,
    LayerResult,
    functional_check,
    serial_inner_product,
    simulate_conv,
    simulate_fc,
    simulate_loom,
)
from .synth import relu_like, signed_weights
from .tensors import Brick, FixedTensor, bricks_of, load_tensor, quantize, save_tensor

__version__ = "0.1.0"
