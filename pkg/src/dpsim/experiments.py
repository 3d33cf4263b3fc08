"""Orchestration shared by the CLI and the report renderer.

Runs whole fixture networks through the cycle models and the codec,
producing the row dictionaries the CSV writers and figures consume.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from .codec import EncodedStream, encode_stream, traffic_report
from .errors import ModelError
from .fixtures import NetworkFixture
from .memmodel import MemoryConfig, sweep as memory_sweep
from .simcore import (
    AcceleratorConfig,
    ConvLayer,
    CycleReport,
    Design,
    FcLayer,
    simulate_conv,
    simulate_fc,
    simulate_loom,
)
from .synth import relu_like

SCHEMES = ("NP", "SP", "DP")

# Encoding a multi-megavalue layer is pointless for traffic *ratios*; sample
# this many values and scale the bit counts back up.
TRAFFIC_SAMPLE_CAP = 1 << 16


@dataclass
class ExperimentSpec:
    network: str
    designs: List[str] = field(default_factory=lambda: ["BASE", "STRIPES", "DSTRIPES", "TRT"])
    schemes: List[str] = field(default_factory=lambda: list(SCHEMES))
    memories: List[str] = field(default_factory=lambda: ["ddr4-3200-2ch", "hbm", "hbm2", "inf"])
    am_sizes_mb: List[float] = field(default_factory=lambda: [1.0, 2.0, 4.0, math.inf])
    group_size: int = 256
    width: int = 16
    seed: int = 0
    ideal: bool = False

    def config_hash(self) -> str:
        payload = json.dumps(dataclasses.asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def simulate_network(
    fixture: NetworkFixture,
    designs: Iterable[str],
    ideal: bool = False,
    width: int = 16,
    bits_per_cycle: int = 1,
    cascade_slices: int = 1,
    dynamic_group: int = 256,
) -> CycleReport:
    """Run every requested design over every layer of a fixture network.

    Without real traces, DSTRIPES and the TRT conv path fall back to the
    static per-layer profile as their precision source.
    """
    report = CycleReport()
    for design in designs:
        design = Design(design)
        config = AcceleratorConfig(
            design=design,
            width=width,
            bits_per_cycle=bits_per_cycle,
            cascade_slices=cascade_slices,
            dynamic_group=dynamic_group,
            ideal=ideal,
        )
        for layer in fixture.layers:
            profile = fixture.profiles[layer.name]
            if design is Design.LOOM:
                report.add(simulate_loom(config, layer, [profile.p_a], [profile.p_w]))
            elif isinstance(layer, ConvLayer):
                report.add(simulate_conv(config, layer, profile=profile))
            else:
                report.add(simulate_fc(config, layer, profile.p_a, profile.p_w))
    return report


def report_rows(report: CycleReport) -> List[dict]:
    return [
        {
            "layer": r.layer,
            "design": r.design,
            "cycles": r.cycles,
            "speedup": r.speedup,
            "utilization": r.utilization,
            "fill_overhead": r.fill_overhead,
        }
        for r in report.rows
    ]


def _activation_count(layer) -> int:
    if isinstance(layer, ConvLayer):
        return layer.windows * layer.filters
    return layer.outputs


def _scaled(stream: EncodedStream, factor: float) -> EncodedStream:
    if factor == 1.0:
        return stream
    return dataclasses.replace(
        stream,
        data=b"",
        n_values=int(stream.n_values * factor),
        n_source=int(stream.n_source * factor),
        total_bits=int(stream.total_bits * factor),
        metadata_bits=int(stream.metadata_bits * factor),
        padding_bits=int(stream.padding_bits * factor),
    )


def network_streams(
    fixture: NetworkFixture,
    schemes: Iterable[str] = SCHEMES,
    width: int = 16,
    seed: int = 0,
    sample_cap: int = TRAFFIC_SAMPLE_CAP,
) -> Dict[str, Dict[str, EncodedStream]]:
    """Per-layer encoded output-activation streams on synthetic data.

    Layer outputs are modeled as ReLU-like tensors sized to the layer's
    activation count; oversized layers are sampled and the bit counts scaled
    back, which preserves ratios but not byte-exact payloads.
    """
    streams: Dict[str, Dict[str, EncodedStream]] = {}
    for i, layer in enumerate(fixture.layers):
        count = _activation_count(layer)
        n = min(count, sample_cap)
        n = max(16, n - n % 16)
        factor = count / n
        tensor = relu_like(n, width=width, seed=seed + i)
        profile = fixture.profiles[layer.name]
        per_scheme = {}
        for scheme in schemes:
            # synthetic data can exceed the table profile; SP detects instead
            stream = encode_stream(tensor, scheme, profile=None)
            per_scheme[scheme] = _scaled(stream, factor)
        streams[layer.name] = per_scheme
    return streams


def run_sweep(
    fixture: NetworkFixture,
    spec: ExperimentSpec,
    design: str = "DSTRIPES",
) -> List[dict]:
    """Memory technology x AM size x scheme grid for one design."""
    report = simulate_network(fixture, [design], ideal=spec.ideal, width=spec.width)
    compute = {r.layer: r.cycles for r in report.rows}
    streams = network_streams(fixture, spec.schemes, width=spec.width, seed=spec.seed)
    memories = []
    for tech in spec.memories:
        for am_mb in spec.am_sizes_mb:
            memories.append(
                MemoryConfig(technology=tech, am_bytes=am_mb * 1024 * 1024)
            )
    by_scheme = {
        scheme: {layer: streams[layer][scheme] for layer in streams}
        for scheme in spec.schemes
    }
    rows = memory_sweep(compute, by_scheme, memories, network=fixture.name, design=design)
    for row in rows:
        row["config_hash"] = spec.config_hash()
    return rows
