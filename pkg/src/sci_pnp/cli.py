"""Command-line interface.

Subcommands are thin wrappers over the library; anything they write is
bit-identical to the corresponding direct calls:

    sci-pnp mask gen --nx 256 --ny 256 --B 8 --kind bernoulli --out masks.scit
    sci-pnp simulate --video truth.scit --masks masks.scit --out-measurement y.scit
    sci-pnp reconstruct --measurement y.scit --masks masks.scit \
        --config run.json --out recon.scit --ground-truth truth.scit --trace-csv trace.csv
    sci-pnp bench --suite suite.json --out-csv results.csv
    sci-pnp convert --from-png frames/ --out video.scit

All randomness flows from explicit --seed flags (or seeds inside config
files), so outputs are reproducible from the command line alone.
"""

import argparse
import json
import sys

import numpy as np

from . import bench as bench_mod
from .metrics import evaluate
from .runconfig import load_run_config, solve_from_config
from .sensing import SensingOperator, add_noise, generate_masks
from .tensorio import read_png_stack, read_tensor, write_png_stack, write_tensor

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sci-pnp", description="Coded-exposure video snapshots: simulate and reconstruct.")
    sub = parser.add_subparsers(dest="command", required=True)

    mask = sub.add_parser("mask", help="mask utilities")
    mask_sub = mask.add_subparsers(dest="mask_command", required=True)
    gen = mask_sub.add_parser("gen", help="generate a mask cube")
    gen.add_argument("--nx", type=int, required=True)
    gen.add_argument("--ny", type=int, required=True)
    gen.add_argument("--B", type=int, required=True, dest="B")
    gen.add_argument("--kind", choices=("bernoulli", "shifted", "gaussian"), default="bernoulli")
    gen.add_argument("--p1", type=float, default=0.5, help="on-probability for bernoulli masks")
    gen.add_argument("--shift", type=int, default=1, help="per-frame row shift for shifted masks")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    sim = sub.add_parser("simulate", help="compress a video into one coded snapshot")
    sim.add_argument("--video", required=True, help="ground-truth cube (tensor file or PNG directory)")
    sim.add_argument("--masks", required=True)
    sim.add_argument("--noise-sigma", type=float, default=0.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out-measurement", required=True)
    sim.add_argument("--bayer", action="store_true", help="inputs are Bayer mosaics; require even dims")
    sim.add_argument("--out-ground-truth", help="optionally re-emit the (possibly trimmed) truth cube")

    rec = sub.add_parser("reconstruct", help="recover the video cube from a snapshot")
    rec.add_argument("--measurement", required=True)
    rec.add_argument("--masks", required=True)
    rec.add_argument("--config", required=True, help="run config JSON")
    rec.add_argument("--out", required=True)
    rec.add_argument("--ground-truth")
    rec.add_argument("--trace-csv")

    ben = sub.add_parser("bench", help="run a benchmark suite grid")
    ben.add_argument("--suite", required=True)
    ben.add_argument("--out-csv", required=True)

    conv = sub.add_parser("convert", help="convert between PNG stacks and tensor files")
    group = conv.add_mutually_exclusive_group(required=True)
    group.add_argument("--from-png", help="directory of grayscale PNG frames")
    group.add_argument("--from-tensor", help="tensor file to expand into PNGs")
    conv.add_argument("--out", help="output tensor file (with --from-png)")
    conv.add_argument("--out-dir", help="output PNG directory (with --from-tensor)")
    conv.add_argument("--dtype", choices=("f32", "f64", "u8"), default="f64")
    return parser


def _load_cube(path):
    from pathlib import Path

    p = Path(path)
    return read_png_stack(p) if p.is_dir() else read_tensor(p)


def _cmd_mask_gen(args) -> int:
    masks = generate_masks(args.nx, args.ny, args.B, kind=args.kind, p1=args.p1, seed=args.seed, shift=args.shift)
    # Binary masks survive the u8 scaling exactly; gaussian masks need floats.
    write_tensor(args.out, masks, dtype="f64" if args.kind == "gaussian" else "u8")
    print(f"wrote masks {args.nx}x{args.ny}x{args.B} ({args.kind}) to {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    video = _load_cube(args.video)
    masks = read_tensor(args.masks)
    if args.bayer and (video.shape[-2] % 2 or video.shape[-1] % 2):
        raise ValueError(f"--bayer requires even spatial dims, got {video.shape[-2:]}")
    if video.shape[0] > masks.shape[0]:
        video = video[: masks.shape[0]]
    op = SensingOperator(masks)
    y = op.forward(video)
    if args.noise_sigma > 0:
        y = add_noise(y, args.noise_sigma, seed=args.seed)
    write_tensor(args.out_measurement, y, dtype="f64")
    if args.out_ground_truth:
        write_tensor(args.out_ground_truth, video, dtype="f64")
    print(f"wrote measurement {y.shape[0]}x{y.shape[1]} to {args.out_measurement}")
    return 0


def _cmd_reconstruct(args) -> int:
    y = read_tensor(args.measurement)
    masks = read_tensor(args.masks)
    cfg = load_run_config(args.config)
    truth = _load_cube(args.ground_truth) if args.ground_truth else None
    op = SensingOperator(masks)
    x, trace = solve_from_config(op, y, cfg, ground_truth=truth)
    write_tensor(args.out, x, dtype="f64")
    if args.trace_csv:
        trace.write_csv(args.trace_csv)
    print(f"wrote reconstruction to {args.out} ({len(trace)} iterations, {trace.wall_time_s:.2f} s)")
    if truth is not None:
        report = evaluate(truth, x, runtime_seconds=trace.wall_time_s)
        print(
            json.dumps(
                {
                    "mean_psnr": report.mean_psnr,
                    "mean_ssim": report.mean_ssim,
                    "per_frame_psnr": list(report.per_frame_psnr),
                    "per_frame_ssim": list(report.per_frame_ssim),
                    "runtime_seconds": report.runtime_seconds,
                },
                indent=2,
            )
        )
    return 0


def _cmd_bench(args) -> int:
    suite = bench_mod.load_suite(args.suite)
    from pathlib import Path

    results = bench_mod.run_suite(suite, out_csv=args.out_csv, base_dir=Path(args.suite).parent)
    failed = [r for r in results if r.error is not None]
    for r in results:
        if r.error is not None:
            print(f"FAILED {r.dataset}/{r.solver}/B={r.B}: {r.error}", file=sys.stderr)
        else:
            print(f"{r.dataset}/{r.solver}/B={r.B}: psnr {r.mean_psnr:.2f} dB, ssim {r.mean_ssim:.4f}, {r.runtime_s:.2f} s")
    print(f"wrote {len(results)} rows to {args.out_csv} ({len(failed)} failed)")
    return 1 if failed and len(failed) == len(results) else 0


def _cmd_convert(args) -> int:
    if args.from_png:
        if not args.out:
            raise ValueError("--from-png needs --out")
        cube = read_png_stack(args.from_png)
        write_tensor(args.out, cube, dtype=args.dtype)
        print(f"wrote {cube.shape[0]} frames to {args.out}")
    else:
        if not args.out_dir:
            raise ValueError("--from-tensor needs --out-dir")
        tensor = read_tensor(args.from_tensor)
        cube = tensor[None] if tensor.ndim == 2 else tensor
        paths = write_png_stack(np.asarray(cube), args.out_dir)
        print(f"wrote {len(paths)} PNG frames to {args.out_dir}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "mask": _cmd_mask_gen,
        "simulate": _cmd_simulate,
        "reconstruct": _cmd_reconstruct,
        "bench": _cmd_bench,
        "convert": _cmd_convert,
    }
    try:
        return handlers[args.command](args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
