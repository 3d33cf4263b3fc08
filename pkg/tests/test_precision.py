import numpy as np
import pytest
from hypothesis import given, strategies as st

from dpsim.errors import ValidationError
from dpsim.precision import (
    LayerProfile,
    detect_group_precision,
    effective_precision,
    from_sign_magnitude,
    group_precisions,
    layer_static_precision,
    precision_histogram,
    to_sign_magnitude,
)
from dpsim.synth import relu_like
from dpsim.tensors import FixedTensor


def msb_oracle(values):
    """Independent per-value scan: precision is the max set-bit index + 1."""
    best = -1
    for v in values:
        bit = -1
        i = 0
        while (1 << i) <= v:
            if v & (1 << i):
                bit = i
            i += 1
        best = max(best, bit)
    return best + 1


class TestDetect:
    def test_or_tree_example(self):
        gp = detect_group_precision([0x0800, 0x0123, 0x0004, 0x0700])
        assert gp.n_h == 11 and gp.p == 12 and not gp.all_zero

    def test_all_zero(self):
        gp = detect_group_precision([0, 0, 0])
        assert gp.all_zero and gp.p == 0

    def test_trailing_filter(self):
        gp = detect_group_precision([0x000C, 0x0004], n_l=2)
        assert gp.n_h == 3 and gp.p == 2

    def test_clamp_when_profile_filters_everything(self):
        gp = detect_group_precision([1, 2], n_l=4)
        assert gp.p == 1 and gp.clamped

    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            detect_group_precision([-1])

    @given(st.lists(st.integers(0, 2 ** 16 - 1), min_size=1, max_size=16))
    def test_matches_brute_force_oracle(self, values):
        gp = detect_group_precision(values)
        assert gp.p == msb_oracle(values)

    @given(st.lists(st.integers(0, 2 ** 16 - 1), min_size=16, max_size=16))
    def test_vectorized_matches_scalar(self, values):
        scalar = detect_group_precision(values).p
        vec = group_precisions(np.array(values), 16)
        assert vec.size == 1 and vec[0] == scalar


class TestSignMagnitude:
    def test_positive(self):
        assert to_sign_magnitude(5, 16) == 0b1010

    def test_negative(self):
        assert to_sign_magnitude(-5, 16) == 0b1011

    def test_zero(self):
        assert to_sign_magnitude(0, 16) == 0

    def test_rejects_min_twos_complement(self):
        with pytest.raises(ValidationError):
            to_sign_magnitude(-32768, 16)

    @given(st.integers(-32767, 32767))
    def test_bijection(self, v):
        assert from_sign_magnitude(to_sign_magnitude(v, 16), 16) == v


def tensor_of(values, width=16):
    return FixedTensor(shape=(len(values),), values=values, width=width,
                       signed=False, layout="C")


class TestHistogram:
    def test_uniform_ones(self):
        t = tensor_of([1] * 64)
        hist = precision_histogram(t, 16)
        assert hist.counts[1] == 4
        assert hist.cdf[1] == 1.0

    def test_outlier_groups_report_full_width(self):
        vals = [1] * 64
        vals[20] = 0x8000  # bit 15 -> p = 16 for its group only
        hist = precision_histogram(tensor_of(vals), 16)
        assert hist.counts[16] == 1
        assert hist.counts[1] == 3

    def test_counts_sum_to_groups(self):
        t = relu_like(1024, seed=2)
        hist = precision_histogram(t, 64)
        assert hist.groups == 16
        cdf = hist.cdf
        assert np.all(np.diff(cdf) >= 0) and cdf[-1] == pytest.approx(1.0)


class TestEffectivePrecision:
    def test_constant_groups(self):
        t = tensor_of([0b10000] * 32)  # p = 5 everywhere
        assert effective_precision(t, 16) == 5.0

    def test_two_groups_mean(self):
        vals = [0b1000] * 16 + [0b10000000] * 16  # p = 4 and p = 8
        assert effective_precision(tensor_of(vals), 16) == 6.0

    def test_usage_weights(self):
        vals = [0b1000] * 16 + [0b10000000] * 16
        assert effective_precision(tensor_of(vals), 16, usage_weights=[3, 1]) == 5.0

    def test_refinement_monotonicity(self):
        t = relu_like(4096, seed=7)
        effs = [effective_precision(t, g) for g in (16, 64, 256)]
        assert effs[0] <= effs[1] <= effs[2]

    def test_group_p_below_layer_static(self):
        t = relu_like(1024, seed=9)
        static = layer_static_precision(t)
        from dpsim.tensors import dispatch_stream
        ps = group_precisions(dispatch_stream(t), 16)
        assert int(ps.max()) <= static


class TestLayerProfile:
    def test_validates_ranges(self):
        with pytest.raises(ValidationError):
            LayerProfile(name="bad", p_a=0)
        with pytest.raises(ValidationError):
            LayerProfile(name="bad", p_a=4, n_l=4)
