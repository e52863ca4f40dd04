"""Benchmark harness: run a (dataset x solver x B) grid and emit a CSV.

A suite is a JSON document:

    {
      "seed": 0,
      "noise_sigma": 0.0,
      "datasets": [{"name": "shapes64", "synthetic": {"nx": 64, "ny": 64, "seed": 1}}],
      "B": [8, 16, 24],
      "masks": {"kind": "bernoulli", "p1": 0.5, "seed": 0},
      "solvers": [{"name": "gap-tv", "config": {"solver": "gap", "denoisers": [...]}}]
    }

Datasets are either synthetic (generated per cell with exactly B frames)
or a ``video`` path to a tensor file / PNG directory, of which the first
B frames are used. Every cell simulates its own measurement from the
ground truth with the suite's masks settings, reconstructs, and reports
mean PSNR/SSIM plus solver wall time.

Cells are independent and deterministic, so they may run in parallel
(SCI_PNP_THREADS caps the worker count, default 1). Rows are written in
canonical (dataset, solver, B) order regardless of completion order; a
failed cell keeps its row with empty metric fields and the run continues.
"""

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .metrics import evaluate
from .runconfig import solve_from_config, validate_run_config
from .sensing import SensingOperator, add_noise, generate_masks
from .synthetic import moving_shapes_video
from .tensorio import read_png_stack, read_tensor

__all__ = [
    "SUITE_SCHEMA",
    "BenchResult",
    "load_suite",
    "validate_suite",
    "run_suite",
    "write_results_csv",
    "read_results_csv",
    "CSV_HEADER",
]

CSV_VERSION = 1
CSV_HEADER = ["dataset", "solver", "denoiser", "B", "mean_psnr", "mean_ssim", "runtime_s"]

SUITE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "version": {"const": 1},
        "seed": {"type": "integer", "minimum": 0},
        "noise_sigma": {"type": "number", "minimum": 0},
        "datasets": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "synthetic": {
                        "type": "object",
                        "properties": {
                            "nx": {"type": "integer", "minimum": 8},
                            "ny": {"type": "integer", "minimum": 8},
                            "seed": {"type": "integer", "minimum": 0},
                        },
                        "required": ["nx", "ny"],
                        "additionalProperties": False,
                    },
                    "video": {"type": "string"},
                },
                "required": ["name"],
                "additionalProperties": False,
            },
        },
        "B": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "masks": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["bernoulli", "shifted", "gaussian"]},
                "p1": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "solvers": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {"name": {"type": "string", "minLength": 1}, "config": {"type": "object"}},
                "required": ["name", "config"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["datasets", "B", "solvers"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class BenchResult:
    dataset: str
    solver: str
    denoiser: str
    B: int
    mean_psnr: float | None
    mean_ssim: float | None
    runtime_s: float | None
    error: str | None = None


def load_suite(path) -> dict:
    with open(path) as fh:
        try:
            suite = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"suite {path} is not valid JSON: {exc}") from exc
    validate_suite(suite)
    return suite


def validate_suite(suite: dict) -> None:
    try:
        jsonschema.validate(suite, SUITE_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValueError(f"invalid suite at {path}: {exc.message}") from exc
    for ds in suite["datasets"]:
        if ("synthetic" in ds) == ("video" in ds):
            raise ValueError(f"dataset {ds['name']!r} needs exactly one of 'synthetic' or 'video'")
    for entry in suite["solvers"]:
        validate_run_config(entry["config"])


def _denoiser_label(config: dict) -> str:
    names = []
    for entry in config["denoisers"]:
        if not names or names[-1] != entry["name"]:
            names.append(entry["name"])
    return "+".join(names)


def _load_video(dataset: dict, B: int, base_dir) -> np.ndarray:
    if "synthetic" in dataset:
        s = dataset["synthetic"]
        return moving_shapes_video(s["nx"], s["ny"], B, seed=s.get("seed", 0))
    path = Path(dataset["video"])
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    video = read_png_stack(path) if path.is_dir() else read_tensor(path)
    if video.ndim != 3:
        raise ValueError(f"dataset {dataset['name']!r} is not a video cube")
    if video.shape[0] < B:
        raise ValueError(f"dataset {dataset['name']!r} has {video.shape[0]} frames, needs >= {B}")
    return video[:B]


def _run_cell(dataset: dict, solver_entry: dict, B: int, suite: dict, cell_index: int, base_dir) -> BenchResult:
    label = _denoiser_label(solver_entry["config"])
    try:
        truth = _load_video(dataset, B, base_dir)
        mask_opts = suite.get("masks", {})
        masks = generate_masks(
            truth.shape[1],
            truth.shape[2],
            B,
            kind=mask_opts.get("kind", "bernoulli"),
            p1=mask_opts.get("p1", 0.5),
            seed=mask_opts.get("seed", 0),
        )
        op = SensingOperator(masks)
        y = op.forward(truth)
        noise_sigma = suite.get("noise_sigma", 0.0)
        if noise_sigma > 0:
            y = add_noise(y, noise_sigma, seed=suite.get("seed", 0) + cell_index)
        x, trace = solve_from_config(op, y, solver_entry["config"], ground_truth=truth)
        report = evaluate(truth, x, runtime_seconds=trace.wall_time_s)
        return BenchResult(
            dataset=dataset["name"],
            solver=solver_entry["name"],
            denoiser=label,
            B=B,
            mean_psnr=report.mean_psnr,
            mean_ssim=report.mean_ssim,
            runtime_s=trace.wall_time_s,
        )
    except Exception as exc:
        return BenchResult(
            dataset=dataset["name"],
            solver=solver_entry["name"],
            denoiser=label,
            B=B,
            mean_psnr=None,
            mean_ssim=None,
            runtime_s=None,
            error=f"{type(exc).__name__}: {exc}",
        )


def run_suite(suite: dict, out_csv=None, base_dir=None) -> list[BenchResult]:
    """Run every grid cell; optionally write the CSV; return sorted results."""
    validate_suite(suite)
    cells = []
    index = 0
    for dataset in suite["datasets"]:
        for solver_entry in suite["solvers"]:
            for B in suite["B"]:
                cells.append((dataset, solver_entry, B, index))
                index += 1

    workers = max(1, int(os.environ.get("SCI_PNP_THREADS", "1")))
    if workers == 1:
        results = [_run_cell(d, s, B, suite, i, base_dir) for d, s, B, i in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_cell, d, s, B, suite, i, base_dir) for d, s, B, i in cells]
            results = [f.result() for f in futures]

    results.sort(key=lambda r: (r.dataset, r.solver, r.B))
    if out_csv is not None:
        write_results_csv(results, out_csv)
    return results


def write_results_csv(results: list[BenchResult], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# sci-pnp bench csv v{CSV_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in results:
            writer.writerow(
                [
                    r.dataset,
                    r.solver,
                    r.denoiser,
                    r.B,
                    "" if r.mean_psnr is None else f"{r.mean_psnr:.4f}",
                    "" if r.mean_ssim is None else f"{r.mean_ssim:.4f}",
                    "" if r.runtime_s is None else f"{r.runtime_s:.3f}",
                ]
            )


def read_results_csv(path) -> list[dict]:
    """Parse a bench CSV, rejecting unknown format versions."""
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("#") or first != f"# sci-pnp bench csv v{CSV_VERSION}":
            raise ValueError(f"unsupported bench csv header: {first!r}")
        return list(csv.DictReader(fh))
