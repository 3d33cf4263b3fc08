"""Cycle models for the bit-parallel baseline and the bit-serial designs.

All designs share one work decomposition: a *step* is the unit of concurrent
work (16 windows x 16 channel values x 16 filters x 16 tiles for conv, one
activation brick against all loaded weights for FC). The designs differ only
in what one step costs:

* BASE      - 16 cycles, always.
* STRIPES   - P_a cycles (static per-layer activation precision).
* DSTRIPES  - p cycles, detected per group of concurrently dispatched values.
* TRT       - conv as DSTRIPES; FC pipelines serial weight loads so a steady
              step costs max(P_a, P_w), plus a one-time P_w pipeline fill.
* LOOM      - P_a x P_w cycles per step against a width^2 bit-parallel charge.

A functional emulator of the serial inner-product unit doubles as the
numerical correctness oracle for all of the above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import ModelError, ValidationError
from .precision import LayerProfile, group_precisions, signed_stream_to_patterns
from .tensors import FixedTensor, dispatch_stream


class Design(str, Enum):
    BASE = "BASE"
    STRIPES = "STRIPES"
    DSTRIPES = "DSTRIPES"
    TRT = "TRT"
    LOOM = "LOOM"


@dataclass
class AcceleratorConfig:
    design: Design = Design.DSTRIPES
    tiles: int = 16
    filters_per_tile: int = 16
    weights_per_filter: int = 16
    sip_columns: int = 16
    bits_per_cycle: int = 1  # B; 2 halves the SIP count and doubles steps
    width: int = 16
    dynamic_group: int = 256  # activations sharing one detected precision
    cascade_slices: int = 1  # np; output slicing for small FC layers
    ideal: bool = False  # fractional work, no ceil utilization or fill
    loom_weights: int = 2048
    loom_activations: int = 256

    def __post_init__(self):
        self.design = Design(self.design)
        if self.bits_per_cycle not in (1, 2):
            raise ModelError(f"unsupported bits per cycle {self.bits_per_cycle}")
        if self.width not in (8, 16):
            raise ModelError(f"unsupported width {self.width}")
        if not 1 <= self.cascade_slices <= self.sip_columns:
            raise ModelError(
                f"cascade slices must be in [1, {self.sip_columns}]"
            )

    @property
    def peak_macs(self) -> int:
        """BASE throughput: one 16b x 16b MAC per weight lane per cycle."""
        return self.tiles * self.filters_per_tile * self.weights_per_filter

    @property
    def step_work(self) -> int:
        """MACs retired by one fully-utilized step."""
        return self.peak_macs * self.sip_columns

    @property
    def base_charge(self) -> int:
        return self.sip_columns  # 16 cycles for the equivalent BASE work


@dataclass(frozen=True)
class ConvLayer:
    name: str
    windows: int  # output spatial positions
    reduction: int  # C * Kh * Kw per output
    filters: int
    macs: int = 0

    def __post_init__(self):
        if self.macs == 0:
            object.__setattr__(self, "macs", self.windows * self.reduction * self.filters)


@dataclass(frozen=True)
class FcLayer:
    name: str
    inputs: int
    outputs: int
    macs: int = 0

    def __post_init__(self):
        if self.macs == 0:
            object.__setattr__(self, "macs", self.inputs * self.outputs)


@dataclass
class StepTrace:
    precisions: List[int] = field(default_factory=list)
    cycles: List[int] = field(default_factory=list)

    def record(self, p: int, cycles: int):
        self.precisions.append(p)
        self.cycles.append(cycles)


@dataclass
class LayerResult:
    layer: str
    design: str
    cycles: float
    base_cycles: float
    utilization: float = 1.0
    fill_overhead: float = 0.0

    @property
    def speedup(self) -> float:
        return self.base_cycles / self.cycles if self.cycles else 0.0


@dataclass
class CycleReport:
    rows: List[LayerResult] = field(default_factory=list)

    def add(self, row: LayerResult):
        self.rows.append(row)

    def total_cycles(self, design: str = None) -> float:
        return sum(r.cycles for r in self.rows if design is None or r.design == design)

    def speedup(self, design: str) -> float:
        base = sum(r.base_cycles for r in self.rows if r.design == design)
        cyc = sum(r.cycles for r in self.rows if r.design == design)
        return base / cyc if cyc else 0.0

    def fill_overhead(self, design: str = "TRT") -> float:
        rows = [r for r in self.rows if r.design == design]
        total = sum(r.cycles for r in rows)
        fill = sum(r.fill_overhead * r.cycles for r in rows)
        return fill / total if total else 0.0


# ---------------------------------------------------------------------------
# Functional emulation


def serial_inner_product(
    weights: Sequence[int],
    activations: Sequence[int],
    n_h: int,
    n_l: int = 0,
) -> int:
    """Bit-serial 16-lane inner product with the per-group output shifter.

    Processes one activation bit position per cycle from n_H down to n_L,
    shifting the adder-tree result to the current offset before accumulating.
    Equals the bit-parallel dot product of the n_L-truncated activations.
    """
    if len(weights) != len(activations):
        raise ValidationError("weight and activation lanes differ in length")
    acc = 0
    for i in range(n_h, n_l - 1, -1):
        tree = 0
        for w, a in zip(weights, activations):
            if (a >> i) & 1:
                tree += w
        acc += tree << i
    # 48b accumulator never overflows 16 products of 16b x 16b
    assert -(1 << 47) <= acc < (1 << 47)
    return acc


def truncate(value: int, n_l: int) -> int:
    return value & ~((1 << n_l) - 1) if n_l else value


# ---------------------------------------------------------------------------
# Precision sources


def conv_step_precisions(
    config: AcceleratorConfig,
    n_steps: int,
    profile: Optional[LayerProfile] = None,
    step_precisions: Optional[Sequence[int]] = None,
    activations: Optional[FixedTensor] = None,
) -> List[int]:
    """Per-step dynamic precision for the dispatched activation groups.

    Explicit per-step lists win; otherwise groups are detected over the
    activation tensor's dispatch stream and cycled to cover all steps; a
    static profile degenerates to a constant list.
    """
    if step_precisions is not None:
        ps = [int(p) for p in step_precisions]
        if not ps:
            raise ModelError("empty step precision list")
        return [ps[i % len(ps)] for i in range(n_steps)]
    if activations is not None:
        n_l = profile.n_l if profile else 0
        stream = dispatch_stream(activations)
        if activations.signed:
            stream = signed_stream_to_patterns(stream, activations.width)
        gp = group_precisions(stream, config.dynamic_group, n_l)
        if gp.size == 0:
            raise ModelError("activation tensor produced no dispatch groups")
        return [int(gp[i % gp.size]) for i in range(n_steps)]
    if profile is not None:
        return [profile.p_a] * n_steps
    raise ModelError("dynamic design needs a profile, tensor, or precision list")


def _step_cost(config: AcceleratorConfig, p: int) -> int:
    """Cycles one step costs at precision p, including the B=2 variant.

    B=2 halves the SIP columns, so each step runs twice at ceil(p/2) cycles.
    The all-zero group still spends the end-of-group signalling cycle.
    """
    b = config.bits_per_cycle
    return max(math.ceil(max(p, 1) / b), 1) * b


# ---------------------------------------------------------------------------
# Convolutional layers


def simulate_conv(
    config: AcceleratorConfig,
    layer: ConvLayer,
    profile: Optional[LayerProfile] = None,
    step_precisions: Optional[Sequence[int]] = None,
    activations: Optional[FixedTensor] = None,
    trace: Optional[StepTrace] = None,
) -> LayerResult:
    """Cycle count for one convolutional layer under one design."""
    if layer.windows <= 0 or layer.reduction <= 0 or layer.filters <= 0:
        raise ModelError(f"layer {layer.name}: inconsistent geometry")
    design = config.design
    if design is Design.LOOM:
        raise ModelError("use simulate_loom for the LOOM design")

    cols = config.sip_columns
    filter_par = config.tiles * config.filters_per_tile
    steps = (
        math.ceil(layer.windows / cols)
        * math.ceil(layer.reduction / config.weights_per_filter)
        * math.ceil(layer.filters / filter_par)
    )
    if config.ideal:
        steps_f = layer.macs / config.step_work
        base_cycles = steps_f * config.base_charge
        utilization = 1.0
    else:
        steps_f = steps
        base_cycles = steps * config.base_charge
        utilization = layer.macs / (steps * config.step_work)

    if design is Design.BASE:
        cycles = base_cycles
    elif design is Design.STRIPES:
        if profile is None:
            raise ModelError("STRIPES needs a static per-layer profile")
        cycles = steps_f * _step_cost(config, profile.p_a)
    else:  # DSTRIPES / TRT: conv path is identical
        ps = conv_step_precisions(config, steps, profile, step_precisions, activations)
        if config.ideal:
            mean_cost = sum(_step_cost(config, p) for p in ps) / len(ps)
            cycles = steps_f * mean_cost
        else:
            cycles = 0
            for p in ps:
                cost = _step_cost(config, p)
                cycles += cost
                if trace is not None:
                    trace.record(p, cost)

    return LayerResult(
        layer=layer.name,
        design=design.value,
        cycles=cycles,
        base_cycles=base_cycles,
        utilization=utilization,
    )


# ---------------------------------------------------------------------------
# Fully-connected layers


def simulate_fc(
    config: AcceleratorConfig,
    layer: FcLayer,
    p_a: int,
    p_w: int,
    trace: Optional[StepTrace] = None,
) -> LayerResult:
    """Cycle count for one fully-connected layer under one design.

    BASE, STRIPES and DSTRIPES see no gain here (weight loads dominate and
    every step costs 16 cycles). TRT overlaps serial weight loading with
    compute, so steady-state steps cost max(P_a, P_w) and only the initial
    P_w-cycle pipeline fill is exposed. Cascade mode slices each output over
    np SIPs, adding np reduction cycles per output set.
    """
    if layer.inputs <= 0 or layer.outputs <= 0:
        raise ModelError(f"layer {layer.name}: inconsistent geometry")
    design = config.design
    if design is Design.LOOM:
        raise ModelError("use simulate_loom for the LOOM design")
    if not 1 <= p_a <= config.width or not 1 <= p_w <= config.width:
        raise ModelError(f"layer {layer.name}: precisions out of range")

    brick = config.weights_per_filter
    total_outputs = config.tiles * config.filters_per_tile * config.sip_columns
    np_slices = config.cascade_slices
    if layer.outputs * np_slices < total_outputs // config.sip_columns:
        raise ModelError(
            f"layer {layer.name}: {layer.outputs} outputs cannot fill the "
            f"grid even with {np_slices} cascade slices"
        )

    base_steps = math.ceil(layer.inputs / brick) * math.ceil(
        layer.outputs / total_outputs
    )
    if config.ideal:
        base_cycles = layer.macs / config.peak_macs
    else:
        base_cycles = base_steps * config.base_charge

    if design in (Design.BASE, Design.STRIPES, Design.DSTRIPES):
        # weight loads gate these designs; performance matches BASE
        cycles = base_cycles if config.ideal else base_steps * config.base_charge
        return LayerResult(
            layer=layer.name,
            design=design.value,
            cycles=cycles,
            base_cycles=base_cycles,
            utilization=layer.macs / (base_steps * config.step_work)
            if not config.ideal
            else 1.0,
        )

    # TRT
    p_max = max(p_a, p_w)
    cost = _step_cost(config, p_max)
    if config.ideal:
        cycles = (layer.macs / config.step_work) * cost
        return LayerResult(
            layer=layer.name,
            design=design.value,
            cycles=cycles,
            base_cycles=base_cycles,
        )

    inputs_per_slice = math.ceil(layer.inputs / np_slices)
    steps_per_set = math.ceil(inputs_per_slice / brick)
    concurrent_outputs = total_outputs // np_slices
    output_sets = math.ceil(layer.outputs / concurrent_outputs)
    reduction_cycles = np_slices * output_sets if np_slices > 1 else 0
    fill = _step_cost(config, p_w)
    compute = output_sets * steps_per_set * cost
    cycles = fill + compute + reduction_cycles
    if trace is not None:
        for _ in range(output_sets * steps_per_set):
            trace.record(p_max, cost)
    utilization = layer.macs / (output_sets * steps_per_set * config.step_work)
    return LayerResult(
        layer=layer.name,
        design=design.value,
        cycles=cycles,
        base_cycles=base_cycles,
        utilization=min(utilization, 1.0),
        fill_overhead=fill / cycles,
    )


# ---------------------------------------------------------------------------
# LOOM


def simulate_loom(
    config: AcceleratorConfig,
    layer,
    pa_groups: Sequence[int],
    pw_groups: Sequence[int],
) -> LayerResult:
    """Cycle model for the doubly bit-serial design.

    Each step pairs one activation group with one weight group and costs
    P_a x P_w cycles; the throughput-equivalent bit-parallel baseline is
    charged width^2 per step. The pairing model is approximate; the
    equivalence constant is width^2 by construction of the comparison.
    """
    pa = [int(p) for p in pa_groups]
    pw = [int(p) for p in pw_groups]
    if not pa or not pw:
        raise ModelError("LOOM needs per-group precisions for both operands")
    quantum = config.loom_weights * config.loom_activations
    steps = max(1, math.ceil(layer.macs / quantum))
    cycles = 0
    base_cycles = 0
    for i in range(steps):
        a = max(pa[i % len(pa)], 1)
        w = max(pw[i % len(pw)], 1)
        cycles += a * w
        base_cycles += config.width * config.width
    return LayerResult(
        layer=layer.name,
        design=Design.LOOM.value,
        cycles=cycles,
        base_cycles=base_cycles,
    )


# ---------------------------------------------------------------------------
# Functional correctness harness


def _ref_conv(acts: np.ndarray, weights: np.ndarray, stride: int, n_l: int) -> np.ndarray:
    """Bit-parallel reference convolution on n_L-truncated activations."""
    h, w, c = acts.shape
    f, kh, kw, _ = weights.shape
    trunc = acts & ~((1 << n_l) - 1) if n_l else acts
    oh = (h - kh) // stride + 1
    ow = (w - kw) // stride + 1
    out = np.zeros((oh, ow, f), dtype=np.int64)
    for oy in range(oh):
        for ox in range(ow):
            patch = trunc[oy * stride : oy * stride + kh, ox * stride : ox * stride + kw]
            for fi in range(f):
                out[oy, ox, fi] = int(np.sum(patch * weights[fi]))
    return out


def _serial_conv(acts: np.ndarray, weights: np.ndarray, stride: int, n_l: int) -> np.ndarray:
    """Same convolution composed from serial inner products over bricks."""
    h, w, c = acts.shape
    f, kh, kw, _ = weights.shape
    oh = (h - kh) // stride + 1
    ow = (w - kw) // stride + 1
    out = np.zeros((oh, ow, f), dtype=np.int64)
    groups = math.ceil(c / 16)
    for oy in range(oh):
        for ox in range(ow):
            patch = acts[oy * stride : oy * stride + kh, ox * stride : ox * stride + kw]
            for fi in range(f):
                acc = 0
                for ky in range(kh):
                    for kx in range(kw):
                        for g in range(groups):
                            lanes_a = [
                                int(patch[ky, kx, g * 16 + j]) if g * 16 + j < c else 0
                                for j in range(16)
                            ]
                            lanes_w = [
                                int(weights[fi, ky, kx, g * 16 + j])
                                if g * 16 + j < c
                                else 0
                                for j in range(16)
                            ]
                            acc_or = 0
                            for a in lanes_a:
                                acc_or |= a
                            n_h = acc_or.bit_length() - 1 if acc_or else n_l
                            acc += serial_inner_product(lanes_w, lanes_a, n_h, n_l)
                out[oy, ox, fi] = acc
    return out


def _serial_fc(
    acts: np.ndarray, weights: np.ndarray, n_l: int, np_slices: int = 1
) -> np.ndarray:
    """FC via serial inner products, optionally sliced in cascade mode."""
    outputs, inputs = weights.shape
    out = np.zeros(outputs, dtype=np.int64)
    slice_len = math.ceil(inputs / np_slices)
    for o in range(outputs):
        partials = []
        for s in range(np_slices):
            lo = s * slice_len
            hi = min(lo + slice_len, inputs)
            acc = 0
            for g in range(lo, hi, 16):
                lanes_a = [int(acts[j]) if j < hi else 0 for j in range(g, g + 16)]
                lanes_w = [int(weights[o, j]) if j < hi else 0 for j in range(g, g + 16)]
                acc_or = 0
                for a in lanes_a:
                    acc_or |= a
                n_h = acc_or.bit_length() - 1 if acc_or else n_l
                acc += serial_inner_product(lanes_w, lanes_a, n_h, n_l)
            partials.append(acc)
        out[o] = sum(partials)  # cascade: np partial outputs added
    return out


def functional_check(
    acts: np.ndarray,
    weights: np.ndarray,
    stride: int = 1,
    n_l: int = 0,
):
    """Compare the serial composition against the bit-parallel reference.

    Returns (True, None) on a match, else (False, first mismatching coord).
    """
    ref = _ref_conv(acts, weights, stride, n_l)
    got = _serial_conv(acts, weights, stride, n_l)
    if np.array_equal(ref, got):
        return True, None
    coord = tuple(int(i) for i in np.argwhere(ref != got)[0])
    return False, coord
