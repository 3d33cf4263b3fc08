import math

import pytest

from dpsim.codec import EncodedStream, encode_stream
from dpsim.errors import ModelError
from dpsim.memmodel import (
    INF_MEMORY,
    MB,
    MemoryConfig,
    layer_time,
    network_time,
    refetch_factor,
    sweep,
)
from dpsim.synth import relu_like


def stream_of(total_bits, scheme="NP"):
    return EncodedStream(
        scheme=scheme, width=16, n_l=0, n_values=total_bits // 16,
        n_source=total_bits // 16, data=b"", total_bits=total_bits,
    )


class TestConfig:
    def test_unknown_technology(self):
        with pytest.raises(ModelError):
            MemoryConfig(technology="sram")

    def test_override_wins(self):
        mem = MemoryConfig(technology="inf", peak_gbps=0.98, efficiency=1.0)
        assert mem.bytes_per_cycle == pytest.approx(1.0)

    def test_efficiency_applies(self):
        mem = MemoryConfig(technology="ddr4-3200-2ch")
        assert mem.bytes_per_cycle == pytest.approx(51.2e9 / 980e6 * 0.7)

    def test_invalid_sizes(self):
        with pytest.raises(ModelError):
            MemoryConfig(am_bytes=0)
        with pytest.raises(ModelError):
            MemoryConfig(efficiency=1.5)


class TestLayerTime:
    # 64 bytes/cycle with no efficiency loss, for round numbers
    MEM = MemoryConfig(peak_gbps=64 * 0.98, efficiency=1.0)

    def test_compute_bound(self):
        t = layer_time(100.0, stream_of(64 * 8), self.MEM)
        assert t.time == 100.0 and t.bound == "compute"

    def test_memory_bound(self):
        t = layer_time(1.0, stream_of(64 * 8 * 1000), self.MEM)
        assert t.transfer_cycles == 1000
        assert t.bound == "memory"

    def test_single_transfer_cycle(self):
        t = layer_time(0.0, stream_of(64 * 8), self.MEM)
        assert t.transfer_cycles == 1

    def test_infinite_memory_never_binds(self):
        t = layer_time(5.0, stream_of(1 << 30), INF_MEMORY)
        assert t.time == 5.0 and t.transfer_cycles == 0.0

    def test_refetch_inflates_traffic(self):
        small_am = MemoryConfig(peak_gbps=64 * 0.98, efficiency=1.0, am_bytes=1000)
        t = layer_time(0.0, stream_of(2500 * 8), small_am)
        assert t.refetch_factor == 3
        assert t.traffic_bytes == 7500

    def test_weight_bytes_added(self):
        t = layer_time(0.0, stream_of(64 * 8), self.MEM, weight_bytes=64)
        assert t.transfer_cycles == 2


class TestRefetch:
    def test_fits(self):
        assert refetch_factor(100, MemoryConfig(am_bytes=4 * MB)) == 1.0

    def test_monotone_in_am(self):
        factors = [
            refetch_factor(10 * MB, MemoryConfig(am_bytes=am * MB))
            for am in (1, 2, 4, 16)
        ]
        assert factors == sorted(factors, reverse=True)

    def test_infinite_am(self):
        assert refetch_factor(1e18, MemoryConfig(am_bytes=math.inf)) == 1.0


class TestNetworkAndSweep:
    def streams(self):
        t = relu_like(4096, seed=0)
        return {
            scheme: {"l0": encode_stream(t, scheme), "l1": encode_stream(t, scheme)}
            for scheme in ("NP", "SP", "DP")
        }

    def test_network_time_sums_layers(self):
        streams = self.streams()["NP"]
        compute = {"l0": 10.0, "l1": 20.0}
        assert network_time(compute, streams, INF_MEMORY) == 30.0

    def test_sweep_normalization(self):
        streams = self.streams()
        compute = {"l0": 50.0, "l1": 50.0}
        mems = [
            MemoryConfig(technology="ddr4-3200-2ch", am_bytes=1 * MB),
            MemoryConfig(technology="hbm2", am_bytes=1 * MB),
            INF_MEMORY,
        ]
        rows = sweep(compute, streams, mems, network="net", design="DSTRIPES")
        assert len(rows) == 9
        for row in rows:
            assert 0 < row["normalized_perf"] <= 1.0
        inf_rows = [r for r in rows if r["memory"] == "inf"]
        assert all(r["normalized_perf"] == 1.0 for r in inf_rows)

    def test_more_bandwidth_never_hurts(self):
        streams = self.streams()
        compute = {"l0": 5.0, "l1": 5.0}
        perfs = []
        for tech in ("lpddr4-4267", "ddr4-3200-2ch", "hbm", "hbm2"):
            rows = sweep(compute, streams, [MemoryConfig(technology=tech)])
            perfs.append(min(r["normalized_perf"] for r in rows))
        assert perfs == sorted(perfs)

    def test_dp_at_least_as_fast_as_np_when_memory_bound(self):
        streams = self.streams()
        compute = {"l0": 1.0, "l1": 1.0}
        mem = MemoryConfig(technology="lpddr4-4267")
        by_scheme = {
            s: network_time(compute, streams[s], mem) for s in ("NP", "SP", "DP")
        }
        assert by_scheme["DP"] <= by_scheme["SP"] <= by_scheme["NP"]
