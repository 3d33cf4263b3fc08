import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dpsim.errors import ManifestError, ValidationError
from dpsim.tensors import (
    Brick,
    FixedTensor,
    bricks_of,
    brick_count,
    dispatch_stream,
    from_dispatch_stream,
    load_tensor,
    quantize,
    save_tensor,
)


def write_manifest(tmp_path, values, shape, width=16, signed=False, layout=None, **extra):
    dtype = {(8, False): "<u1", (8, True): "<i1", (16, False): "<u2", (16, True): "<i2"}
    (tmp_path / "t.bin").write_bytes(
        np.asarray(values).astype(dtype[(width, signed)]).tobytes()
    )
    manifest = {
        "data_file": "t.bin",
        "shape": shape,
        "width": width,
        "signedness": "twos-complement" if signed else "unsigned",
        **extra,
    }
    if layout:
        manifest["layout"] = layout
    path = tmp_path / "t.json"
    path.write_text(json.dumps(manifest))
    return str(path)


class TestLoad:
    def test_identity_load(self, tmp_path):
        path = write_manifest(tmp_path, [1, 2, 3, 4], [2, 2])
        t = load_tensor(path)
        assert t.shape == (2, 2)
        assert list(t.values) == [1, 2, 3, 4]
        assert t.width == 16 and not t.signed

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestError):
            load_tensor(str(tmp_path / "nope.json"))

    def test_length_mismatch(self, tmp_path):
        path = write_manifest(tmp_path, [1, 2, 3], [2, 2])
        with pytest.raises(ManifestError, match="3 values"):
            load_tensor(path)

    def test_out_of_range_reports_offender_index(self):
        # payload bytes can never exceed the declared width, so the range
        # check guards the constructor paths (quantize, decode) instead
        with pytest.raises(ValidationError, match="index 1"):
            FixedTensor(shape=(2,), values=[1, 70000], width=16, signed=False, layout="C")

    def test_relu_flag_rejects_negative(self):
        with pytest.raises(ValidationError, match="ReLU"):
            FixedTensor(
                shape=(2,), values=[1, -1], width=16, signed=True,
                layout="C", relu_output=True,
            )

    def test_save_load_round_trip(self, tmp_path):
        t = FixedTensor(
            shape=(2, 3), values=[-1, 0, 5, 7, -9, 2], width=16,
            signed=True, layout="NC", scale=0.5,
        )
        save_tensor(t, str(tmp_path / "out.json"))
        back = load_tensor(str(tmp_path / "out.json"))
        assert np.array_equal(back.values, t.values)
        assert back.shape == t.shape and back.scale == t.scale
        assert back.signed == t.signed and back.layout == t.layout


class TestQuantize:
    def test_zero_maps_to_zero(self):
        assert quantize([0.0], 16, 0.37).values[0] == 0

    def test_saturation(self):
        assert quantize([300.0], 8, 1.0).values[0] == 255

    def test_scale_arithmetic(self):
        assert quantize([1.0], 16, 2.0 ** -8).values[0] == 256

    def test_half_away_from_zero(self):
        t = quantize([0.5, -0.5, 1.5], 16, 1.0, signed=True)
        assert list(t.values) == [1, -1, 2]

    def test_signed_range_keeps_magnitude_counterpart(self):
        t = quantize([-1e9], 16, 1.0, signed=True)
        assert t.values[0] == -32767

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            quantize([float("nan")], 16, 1.0)

    @given(
        st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=20),
        st.floats(0.01, 10.0),
    )
    def test_monotone_in_x(self, xs, scale):
        xs = sorted(xs)
        vals = quantize(xs, 16, scale, signed=True).values
        assert all(a <= b for a, b in zip(vals, vals[1:]))


class TestBricks:
    def test_single_brick(self):
        t = FixedTensor(shape=(1, 16), values=list(range(16)), width=16,
                        signed=False, layout="NC")
        bricks = list(bricks_of(t))
        assert len(bricks) == 1
        assert bricks[0].values == tuple(range(16))

    def test_channel_padding(self):
        t = FixedTensor(shape=(1, 1, 1, 20), values=list(range(1, 21)),
                        width=16, signed=False, layout="NHWC")
        bricks = list(bricks_of(t))
        assert len(bricks) == 2
        assert bricks[0].pad == 0
        assert bricks[1].pad == 12
        assert bricks[1].values[:4] == (17, 18, 19, 20)
        assert bricks[1].values[4:] == (0,) * 12

    def test_count_c48(self):
        t = FixedTensor(shape=(2, 1, 48), values=[0] * 96, width=16,
                        signed=False, layout="HWC")
        assert brick_count(t) == 6
        assert len(list(bricks_of(t))) == 6

    def test_c1_pads_15(self):
        t = FixedTensor(shape=(3, 1), values=[5, 6, 7], width=16,
                        signed=False, layout="NC")
        bricks = list(bricks_of(t))
        assert all(b.pad == 15 for b in bricks)

    def test_nonpad_elements_cover_tensor(self):
        rng = np.random.default_rng(0)
        t = FixedTensor(shape=(3, 2, 21), values=rng.integers(0, 100, 126),
                        width=16, signed=False, layout="HWC")
        total = sum(16 - b.pad for b in bricks_of(t))
        assert total == t.values.size

    def test_dispatch_stream_round_trip(self):
        rng = np.random.default_rng(1)
        t = FixedTensor(shape=(2, 3, 21), values=rng.integers(0, 100, 126),
                        width=16, signed=False, layout="HWC")
        back = from_dispatch_stream(dispatch_stream(t), t)
        assert np.array_equal(back.values, t.values)
