"""Command-line front end.

Subcommands: profile, encode, decode, simulate, sweep, report.
Exit codes: 0 success, 2 I/O error, 3 validation error, 4 model error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

from . import __version__
from .codec import encode_stream, decode_stream, read_stream, traffic_report, write_stream
from .errors import (
    MalformedStreamError,
    ManifestError,
    ModelError,
    ValidationError,
)
from .experiments import (
    ExperimentSpec,
    network_streams,
    report_rows,
    run_sweep,
    simulate_network,
)
from .fixtures import NETWORKS, load_network
from .precision import (
    LayerProfile,
    effective_precision,
    layer_static_precision,
    precision_histogram,
)
from .tensors import load_tensor, save_tensor

EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_MODEL = 4


def _write_csv(path: str, rows, fieldnames=None):
    rows = list(rows)
    if not rows:
        return
    if fieldnames is None:
        fieldnames = list(rows[0].keys())
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {path}")


def _load_profile(path):
    if not path:
        return None
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ManifestError(f"cannot read profile {path}: {exc}") from exc
    return LayerProfile(
        name=data.get("name", "profile"),
        p_a=int(data.get("p_a", 16)),
        p_w=int(data.get("p_w", 16)),
        n_l=int(data.get("n_l", 0)),
    )


def cmd_profile(args) -> int:
    group_sizes = [int(g) for g in args.group_sizes.split(",")]
    summary = []
    for manifest in args.manifests:
        tensor = load_tensor(manifest)
        stem = os.path.splitext(os.path.basename(manifest))[0]
        static_p = layer_static_precision(tensor, args.n_l)
        for g in group_sizes:
            hist = precision_histogram(tensor, g, args.n_l)
            _write_csv(
                os.path.join(args.out, f"{stem}_hist_g{g}.csv"),
                hist.csv_rows(),
                ["precision", "count", "cdf"],
            )
            eff = effective_precision(tensor, g, args.n_l)
            summary.append(
                {
                    "tensor": stem,
                    "group_size": g,
                    "static_precision": static_p,
                    "effective_precision": round(eff, 4),
                    "reduction_pct": round(100.0 * (1 - eff / static_p), 2)
                    if static_p
                    else 0.0,
                }
            )
    _write_csv(os.path.join(args.out, "effective_precision.csv"), summary)
    return 0


def cmd_encode(args) -> int:
    tensor = load_tensor(args.manifest)
    profile = _load_profile(args.profile)
    stream = encode_stream(tensor, args.scheme, profile=profile, loop_every=args.loop_every)
    write_stream(stream, args.out)
    if stream.loop_table:
        with open(args.out + ".loops.json", "w") as fh:
            json.dump(stream.loop_table, fh)
    print(
        f"{args.scheme}: {stream.total_bits} bits "
        f"({stream.ratio:.3f} of uncompressed)"
    )
    return 0


def cmd_decode(args) -> int:
    like = load_tensor(args.manifest)
    stream = read_stream(args.stream, n_source=like.values.size)
    tensor = decode_stream(stream, like)
    save_tensor(tensor, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_simulate(args) -> int:
    fixture = load_network(args.network)
    designs = args.designs.split(",")
    report = simulate_network(
        fixture,
        designs,
        ideal=args.ideal,
        width=args.width,
        bits_per_cycle=args.bits_per_cycle,
        cascade_slices=args.cascade_slices,
        dynamic_group=args.group_size,
    )
    out_csv = os.path.join(args.out, f"{args.network}_cycles.csv")
    _write_csv(out_csv, report_rows(report))
    summary = {
        "network": args.network,
        "ideal": args.ideal,
        "designs": {
            d: {
                "speedup_vs_base": report.speedup(d),
                "cycles": report.total_cycles(d),
                "fill_overhead": report.fill_overhead(d),
            }
            for d in designs
        },
    }
    path = os.path.join(args.out, f"{args.network}_summary.json")
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)
    print(f"wrote {path}")
    for d in designs:
        print(f"{d:10s} speedup vs BASE: {report.speedup(d):.3f}")
    return 0


def _spec_from_args(args) -> ExperimentSpec:
    am = [float("inf") if s.lower() == "inf" else float(s) for s in args.am_sizes.split(",")]
    return ExperimentSpec(
        network=args.network,
        schemes=args.schemes.split(","),
        memories=args.memories.split(","),
        am_sizes_mb=am,
        group_size=args.group_size,
        width=args.width,
        seed=args.seed,
        ideal=args.ideal,
    )


def cmd_sweep(args) -> int:
    fixture = load_network(args.network)
    spec = _spec_from_args(args)
    rows = run_sweep(fixture, spec, design=args.design)
    _write_csv(os.path.join(args.out, f"{args.network}_sweep.csv"), rows)
    return 0


def cmd_report(args) -> int:
    from .report import render_network_report

    fixture = load_network(args.network)
    spec = _spec_from_args(args)
    paths = render_network_report(fixture, spec, args.out, designs=args.designs.split(","))
    for p in paths:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpsim",
        description="Grouped dynamic-precision detection, compression, and "
        "accelerator cycle modeling.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--width", type=int, default=16, choices=(8, 16))
        p.add_argument("--group-size", type=int, default=256)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="out")

    p = sub.add_parser("profile", help="per-group precision histograms and summaries")
    p.add_argument("manifests", nargs="+")
    p.add_argument("--group-sizes", default="16,64,256")
    p.add_argument("--n-l", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("encode", help="pack a tensor into a container stream")
    p.add_argument("manifest")
    p.add_argument("--scheme", default="DP", choices=("NP", "SP", "DP"))
    p.add_argument("--profile", help="JSON file with p_a/p_w/n_l")
    p.add_argument("--loop-every", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_encode, out="stream.dpc")

    p = sub.add_parser("decode", help="expand a container stream back to a tensor")
    p.add_argument("manifest", help="manifest describing the original tensor")
    p.add_argument("--stream", required=True)
    common(p)
    p.set_defaults(func=cmd_decode, out="decoded.json")

    p = sub.add_parser("simulate", help="cycle models over a fixture network")
    p.add_argument("--network", required=True, choices=NETWORKS)
    p.add_argument("--designs", default="BASE,STRIPES,DSTRIPES,TRT")
    p.add_argument("--ideal", action="store_true")
    p.add_argument("--bits-per-cycle", type=int, default=1, choices=(1, 2))
    p.add_argument("--cascade-slices", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="memory technology and AM size sweep")
    p.add_argument("--network", required=True, choices=NETWORKS)
    p.add_argument("--design", default="DSTRIPES")
    p.add_argument("--schemes", default="NP,SP,DP")
    p.add_argument("--memories", default="ddr4-3200-2ch,hbm,hbm2,inf")
    p.add_argument("--am-sizes", default="1,2,4,inf", help="MB per entry")
    p.add_argument("--ideal", action="store_true")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="render CSVs plus figures for a network")
    p.add_argument("--network", required=True, choices=NETWORKS)
    p.add_argument("--designs", default="BASE,STRIPES,DSTRIPES,TRT")
    p.add_argument("--schemes", default="NP,SP,DP")
    p.add_argument("--memories", default="ddr4-3200-2ch,hbm,hbm2,inf")
    p.add_argument("--am-sizes", default="1,2,4,inf")
    p.add_argument("--ideal", action="store_true")
    common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ManifestError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, MalformedStreamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
