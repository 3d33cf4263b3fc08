"""Report rendering: delimited output plus matplotlib figures.

Each figure is written next to the CSV it visualizes so a report directory
is self-contained.
"""

from __future__ import annotations

import csv
import math
import os
from typing import List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .codec import traffic_report
from .experiments import (
    ExperimentSpec,
    network_streams,
    report_rows,
    run_sweep,
    simulate_network,
)
from .fixtures import NetworkFixture
from .precision import precision_histogram
from .synth import relu_like


def _write_csv(path: str, rows: List[dict]):
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _speedup_figure(report, designs, fixture, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    speedups = [report.speedup(d) for d in designs]
    ax.bar(designs, speedups, color="steelblue")
    ax.axhline(1.0, color="gray", lw=0.8, ls="--")
    ax.set_ylabel("speedup vs BASE")
    ax.set_title(f"{fixture.name}: whole-network speedup")
    for i, s in enumerate(speedups):
        ax.text(i, s, f"{s:.2f}", ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _traffic_figure(tr, fixture, path):
    schemes = [s for s in ("NP", "SP", "DP") if s in tr.totals]
    ratios = [tr.ratio(s) for s in schemes]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(schemes, ratios, color=["gray", "darkorange", "seagreen"][: len(schemes)])
    ax.set_ylabel("off-chip traffic vs NP")
    ax.set_title(f"{fixture.name}: traffic by scheme (synthetic data)")
    for i, r in enumerate(ratios):
        ax.text(i, r, f"{r:.2f}", ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _sweep_figure(rows, fixture, path):
    # one bar group per memory technology, bars are schemes, at the largest
    # finite AM in the sweep
    finite_am = sorted({r["am_bytes"] for r in rows if math.isfinite(r["am_bytes"])})
    am = finite_am[-1] if finite_am else None
    rows = [r for r in rows if am is None or r["am_bytes"] == am]
    memories = sorted({r["memory"] for r in rows})
    schemes = sorted({r["scheme"] for r in rows})
    width = 0.8 / max(len(schemes), 1)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for i, scheme in enumerate(schemes):
        perf = [
            next(
                (r["normalized_perf"] for r in rows if r["memory"] == m and r["scheme"] == scheme),
                0.0,
            )
            for m in memories
        ]
        ax.bar(np.arange(len(memories)) + i * width, perf, width, label=scheme)
    ax.set_xticks(np.arange(len(memories)) + 0.4 - width / 2)
    ax.set_xticklabels(memories, fontsize=8)
    ax.set_ylabel("perf vs infinite memory")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    ax.set_title(f"{fixture.name}: memory sensitivity")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _cdf_figure(spec, path):
    tensor = relu_like(1 << 16, width=spec.width, seed=spec.seed)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for g in (16, 64, 256):
        hist = precision_histogram(tensor, g)
        ax.step(range(hist.counts.size), hist.cdf, where="post", label=f"group {g}")
    ax.set_xlabel("precision (bits)")
    ax.set_ylabel("fraction of groups")
    ax.set_title("synthetic activation precision CDF")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_network_report(
    fixture: NetworkFixture,
    spec: ExperimentSpec,
    out_dir: str,
    designs=("BASE", "STRIPES", "DSTRIPES", "TRT"),
) -> List[str]:
    """Render the full CSV + PNG report bundle for one network."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    report = simulate_network(fixture, designs, ideal=spec.ideal, width=spec.width)
    cycles_csv = os.path.join(out_dir, f"{fixture.name}_cycles.csv")
    _write_csv(cycles_csv, report_rows(report))
    paths.append(cycles_csv)
    fig = os.path.join(out_dir, f"{fixture.name}_speedup.png")
    _speedup_figure(report, list(designs), fixture, fig)
    paths.append(fig)

    streams = network_streams(fixture, spec.schemes, width=spec.width, seed=spec.seed)
    tr = traffic_report(streams)
    traffic_csv = os.path.join(out_dir, f"{fixture.name}_traffic.csv")
    _write_csv(traffic_csv, tr.rows)
    paths.append(traffic_csv)
    fig = os.path.join(out_dir, f"{fixture.name}_traffic.png")
    _traffic_figure(tr, fixture, fig)
    paths.append(fig)

    sweep_rows = run_sweep(fixture, spec)
    sweep_csv = os.path.join(out_dir, f"{fixture.name}_sweep.csv")
    _write_csv(sweep_csv, sweep_rows)
    paths.append(sweep_csv)
    fig = os.path.join(out_dir, f"{fixture.name}_memory.png")
    _sweep_figure(sweep_rows, fixture, fig)
    paths.append(fig)

    fig = os.path.join(out_dir, "precision_cdf.png")
    _cdf_figure(spec, fig)
    paths.append(fig)
    return paths
