import json

import numpy as np
import pytest

from dpsim.cli import EXIT_IO, EXIT_MODEL, EXIT_VALIDATION, main
from dpsim.synth import relu_like
from dpsim.tensors import save_tensor


@pytest.fixture
def manifest(tmp_path):
    t = relu_like(2048, seed=4)
    path = str(tmp_path / "acts.json")
    save_tensor(t, path)
    return path


class TestProfile:
    def test_writes_histograms_and_summary(self, tmp_path, manifest, capsys):
        out = str(tmp_path / "prof")
        assert main(["profile", manifest, "--out", out]) == 0
        summary = (tmp_path / "prof" / "effective_precision.csv").read_text()
        assert "effective_precision" in summary.splitlines()[0]
        for g in (16, 64, 256):
            assert (tmp_path / "prof" / f"acts_hist_g{g}.csv").exists()

    def test_missing_manifest_is_io_error(self, tmp_path):
        rc = main(["profile", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
        assert rc == EXIT_IO


class TestEncodeDecode:
    @pytest.mark.parametrize("scheme", ["NP", "SP", "DP"])
    def test_round_trip(self, tmp_path, manifest, scheme):
        stream = str(tmp_path / "s.dpc")
        decoded = str(tmp_path / "dec.json")
        assert main(["encode", manifest, "--scheme", scheme, "--out", stream]) == 0
        assert main(["decode", manifest, "--stream", stream, "--out", decoded]) == 0
        from dpsim.tensors import load_tensor

        assert np.array_equal(load_tensor(decoded).values, load_tensor(manifest).values)

    def test_dp_reports_compression(self, tmp_path, manifest, capsys):
        stream = str(tmp_path / "s.dpc")
        main(["encode", manifest, "--scheme", "DP", "--out", stream])
        out = capsys.readouterr().out
        assert "bits" in out and "of uncompressed" in out

    def test_loop_table_sidecar(self, tmp_path, manifest):
        stream = str(tmp_path / "s.dpc")
        main(["encode", manifest, "--scheme", "DP", "--loop-every", "8",
              "--out", stream])
        loops = json.loads((tmp_path / "s.dpc.loops.json").read_text())
        assert loops[0] == [0, 0]

    def test_profile_too_tight_is_validation_error(self, tmp_path, manifest):
        prof = tmp_path / "p.json"
        prof.write_text(json.dumps({"name": "l", "p_a": 2}))
        rc = main(["encode", manifest, "--scheme", "SP", "--profile", str(prof),
                   "--out", str(tmp_path / "s.dpc")])
        assert rc == EXIT_VALIDATION

    def test_corrupt_stream_is_validation_error(self, tmp_path, manifest):
        bad = tmp_path / "bad.dpc"
        bad.write_bytes(b"not a stream at all")
        rc = main(["decode", manifest, "--stream", str(bad),
                   "--out", str(tmp_path / "d.json")])
        assert rc == EXIT_VALIDATION


class TestSimulate:
    def test_alexnet_summary(self, tmp_path, capsys):
        out = str(tmp_path / "sim")
        rc = main(["simulate", "--network", "alexnet", "--ideal", "--out", out])
        assert rc == 0
        summary = json.loads((tmp_path / "sim" / "alexnet_summary.json").read_text())
        assert summary["designs"]["BASE"]["speedup_vs_base"] == pytest.approx(1.0)
        assert summary["designs"]["STRIPES"]["speedup_vs_base"] > 1.5
        assert (tmp_path / "sim" / "alexnet_cycles.csv").exists()

    def test_unknown_network_rejected_by_parser(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["simulate", "--network", "lenet", "--out", str(tmp_path)])

    def test_bad_cascade_is_model_error(self, tmp_path):
        rc = main(["simulate", "--network", "alexnet", "--cascade-slices", "99",
                   "--out", str(tmp_path)])
        assert rc == EXIT_MODEL


class TestSweepAndReport:
    def test_sweep_csv(self, tmp_path):
        out = str(tmp_path / "sw")
        rc = main(["sweep", "--network", "neuraltalk", "--memories", "hbm,inf",
                   "--am-sizes", "1,inf", "--out", out])
        assert rc == 0
        text = (tmp_path / "sw" / "neuraltalk_sweep.csv").read_text()
        header = text.splitlines()[0].split(",")
        for col in ("network", "design", "scheme", "memory", "normalized_perf"):
            assert col in header

    def test_report_renders_csvs_and_figures(self, tmp_path):
        out = tmp_path / "rep"
        rc = main(["report", "--network", "neuraltalk", "--memories", "hbm,inf",
                   "--am-sizes", "1,inf", "--out", str(out)])
        assert rc == 0
        for name in (
            "neuraltalk_cycles.csv",
            "neuraltalk_speedup.png",
            "neuraltalk_traffic.csv",
            "neuraltalk_traffic.png",
            "neuraltalk_sweep.csv",
            "neuraltalk_memory.png",
            "precision_cdf.png",
        ):
            assert (out / name).exists(), name
        assert (out / "neuraltalk_speedup.png").read_bytes()[:8].startswith(b"\x89PNG")


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
