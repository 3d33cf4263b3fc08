"""Bandwidth-limited performance on top of compute cycles and traffic.

A layer's time is the max of its compute cycles and its transfer cycles,
assuming perfect double buffering. Transfer cycles come from the encoded
stream size, multiplied by a refetch factor when the activation working set
exceeds the on-chip activation memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from .codec import EncodedStream
from .errors import ModelError

CLOCK_HZ = 980e6

# Nominal peak rates in GB/s; converted to bytes per 980 MHz cycle below.
TECHNOLOGIES = {
    "ddr4-3200-2ch": 51.2,
    "lpddr4-4267": 34.1,
    "hbm": 128.0,
    "hbm2": 256.0,
    "inf": math.inf,
}

KB = 1024
MB = 1024 * 1024


@dataclass(frozen=True)
class MemoryConfig:
    technology: str = "inf"
    am_bytes: float = 4 * MB  # central activation memory
    wm_bytes_per_tile: float = 320 * KB  # sized so weights stream once per layer
    efficiency: float = 0.7  # DRAM efficiency; contention is not modeled
    peak_gbps: Optional[float] = None  # overrides the technology preset

    def __post_init__(self):
        if self.peak_gbps is None and self.technology not in TECHNOLOGIES:
            raise ModelError(f"unknown memory technology {self.technology!r}")
        if self.am_bytes <= 0 or self.wm_bytes_per_tile <= 0:
            raise ModelError("memory sizes must be positive")
        if not 0 < self.efficiency <= 1:
            raise ModelError("efficiency must be in (0, 1]")

    @property
    def bytes_per_cycle(self) -> float:
        peak = self.peak_gbps if self.peak_gbps is not None else TECHNOLOGIES[self.technology]
        if math.isinf(peak):
            return math.inf
        return peak * 1e9 / CLOCK_HZ * self.efficiency

    @property
    def infinite(self) -> bool:
        return math.isinf(self.bytes_per_cycle) and math.isinf(self.am_bytes)


INF_MEMORY = MemoryConfig(technology="inf", am_bytes=math.inf, wm_bytes_per_tile=math.inf)


@dataclass
class LayerTiming:
    layer: str
    compute_cycles: float
    traffic_bytes: float
    refetch_factor: float
    transfer_cycles: float

    @property
    def time(self) -> float:
        return max(self.compute_cycles, self.transfer_cycles)

    @property
    def bound(self) -> str:
        return "memory" if self.transfer_cycles > self.compute_cycles else "compute"


def refetch_factor(activation_bytes: float, mem: MemoryConfig) -> float:
    """How many times the activation working set crosses the pins.

    Weights are read once per layer by WM sizing; activations refetch when
    the working set exceeds AM under the canonical row-major window tiling.
    """
    if activation_bytes <= 0 or math.isinf(mem.am_bytes):
        return 1.0
    return float(max(1, math.ceil(activation_bytes / mem.am_bytes)))


def layer_time(
    compute_cycles: float,
    stream: EncodedStream,
    mem: MemoryConfig,
    layer: str = "",
    weight_bytes: float = 0.0,
) -> LayerTiming:
    """Bandwidth-limited time for one layer under one scheme and memory."""
    act_bytes = stream.total_bytes
    factor = refetch_factor(act_bytes, mem)
    traffic = act_bytes * factor + weight_bytes
    bpc = mem.bytes_per_cycle
    transfer = 0.0 if math.isinf(bpc) else math.ceil(traffic / bpc)
    return LayerTiming(
        layer=layer or f"{stream.scheme}-layer",
        compute_cycles=compute_cycles,
        traffic_bytes=traffic,
        refetch_factor=factor,
        transfer_cycles=transfer,
    )


def network_time(
    compute_cycles: Dict[str, float],
    streams: Dict[str, EncodedStream],
    mem: MemoryConfig,
) -> float:
    total = 0.0
    for name, cycles in compute_cycles.items():
        total += layer_time(cycles, streams[name], mem, layer=name).time
    return total


def sweep(
    compute_cycles: Dict[str, float],
    streams_by_scheme: Dict[str, Dict[str, EncodedStream]],
    memories: Iterable[MemoryConfig],
    network: str = "",
    design: str = "",
) -> List[dict]:
    """Evaluate scheme x memory grid, normalized to the infinite config.

    Output rows carry {network, design, scheme, memory, am_bytes,
    normalized_perf}, matching the documented CSV schema.
    """
    rows = []
    for scheme, streams in streams_by_scheme.items():
        ideal = network_time(compute_cycles, streams, INF_MEMORY)
        for mem in memories:
            t = network_time(compute_cycles, streams, mem)
            rows.append(
                {
                    "network": network,
                    "design": design,
                    "scheme": scheme,
                    "memory": mem.technology,
                    "am_bytes": mem.am_bytes,
                    "normalized_perf": ideal / t if t else 0.0,
                }
            )
    return rows
