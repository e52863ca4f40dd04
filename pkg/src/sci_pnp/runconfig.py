"""Run configuration: JSON schema, validation, and solver construction.

A run config is a flat JSON object selecting the solver and its numeric
settings, plus the denoiser schedule. Validation is strict: unknown keys
are rejected anywhere in the document, and solver-specific keys may only
appear with their solver. Example:

    {
      "solver": "gap",
      "schedule_mode": "adaptive",
      "lambda0": 1.0, "xi": 0.9, "eta": 0.8,
      "max_iters": 60,
      "denoisers": [{"name": "tv", "iters": 60, "params": {"weight": 0.5}}]
    }

The optional ``mask_source`` either points at a mask tensor file or gives
generator settings, so a run is reproducible from the config and seeds
alone. ``noise_sigma`` and ``seed`` configure measurement simulation where
a caller (the benchmark harness) does its own simulation.
"""

import json
from pathlib import Path

import jsonschema

from .admm import AdmmConfig, admm_solve
from .denoisers import Denoiser, DenoiserSchedule, ScheduleEntry, make_denoiser
from .gap import GapConfig, gap_solve
from .sensing import generate_masks
from .tensorio import read_tensor

__all__ = [
    "RUN_CONFIG_SCHEMA",
    "validate_run_config",
    "load_run_config",
    "build_schedule",
    "build_solver_config",
    "solve_from_config",
    "resolve_masks",
]

_GAP_KEYS = {"lambda0", "xi", "eta", "schedule_mode"}
_ADMM_KEYS = {"rho0", "gamma", "lambda"}

_MASK_GENERATE_SCHEMA = {
    "type": "object",
    "properties": {
        "nx": {"type": "integer", "minimum": 1},
        "ny": {"type": "integer", "minimum": 1},
        "B": {"type": "integer", "minimum": 1},
        "kind": {"enum": ["bernoulli", "shifted", "gaussian"]},
        "p1": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "shift": {"type": "integer", "minimum": 1},
    },
    "required": ["nx", "ny", "B"],
    "additionalProperties": False,
}

RUN_CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "solver": {"enum": ["gap", "admm"]},
        "denoisers": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string"},
                    "iters": {"type": "integer", "minimum": 1},
                    "params": {"type": "object"},
                },
                "required": ["name", "iters"],
                "additionalProperties": False,
            },
        },
        "max_iters": {"type": "integer", "minimum": 1},
        "init_mode": {"enum": ["adjoint_scaled", "zeros"]},
        "sigma_floor": {"type": ["number", "null"], "minimum": 0},
        # projection-solver settings
        "lambda0": {"type": "number", "exclusiveMinimum": 0},
        "xi": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "eta": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "schedule_mode": {"enum": ["adaptive", "monotone"]},
        # splitting-solver settings
        "rho0": {"type": "number", "exclusiveMinimum": 0},
        "gamma": {"type": "number", "minimum": 1},
        "lambda": {"type": "number", "exclusiveMinimum": 0},
        # simulation / reproducibility
        "mask_source": {
            "type": "object",
            "properties": {
                "file": {"type": "string"},
                "generate": _MASK_GENERATE_SCHEMA,
            },
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
        },
        "noise_sigma": {"type": "number", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "metrics": {"type": "boolean"},
    },
    "required": ["solver", "denoisers"],
    "additionalProperties": False,
}


def validate_run_config(cfg: dict) -> None:
    """Raise ValueError on any schema or cross-field violation."""
    try:
        jsonschema.validate(cfg, RUN_CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValueError(f"invalid run config at {path}: {exc.message}") from exc
    solver = cfg["solver"]
    if solver == "gap":
        bad = _ADMM_KEYS & set(cfg)
        if bad:
            raise ValueError(f"keys {sorted(bad)} are not valid with solver 'gap'")
    else:
        bad = _GAP_KEYS & set(cfg)
        if bad:
            raise ValueError(f"keys {sorted(bad)} are not valid with solver 'admm'")


def load_run_config(path) -> dict:
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ValueError(f"config {path} must contain a JSON object")
    validate_run_config(cfg)
    return cfg


def _build_denoiser(entry: dict) -> tuple[Denoiser, object]:
    """Returns (denoiser, closer-or-None); plugin denoisers own a subprocess."""
    name = entry["name"]
    params = dict(entry.get("params", {}))
    if name == "plugin":
        from .plugin import PluginClient, PluginDenoiser

        command = params.pop("command", None)
        if not command or not isinstance(command, list) or not all(isinstance(c, str) for c in command):
            raise ValueError("plugin denoiser needs params.command as a list of strings")
        timeout = params.pop("timeout", 60.0)
        label = params.pop("label", "plugin")
        bound = params.pop("bound_constant", None)
        if params:
            raise ValueError(f"plugin denoiser got unknown params {sorted(params)}")
        client = PluginClient(command, timeout=timeout)
        return PluginDenoiser(client, name=label, bound_constant=bound), client
    return make_denoiser(name, params), None


def build_schedule(entries: list[dict]) -> tuple[DenoiserSchedule, list]:
    """Build the schedule plus closers for any spawned plugin processes."""
    stages = []
    closers = []
    try:
        for entry in entries:
            denoiser, closer = _build_denoiser(entry)
            if closer is not None:
                closers.append(closer)
            stages.append(ScheduleEntry(denoiser, entry["iters"]))
    except Exception:
        for closer in closers:
            closer.close()
        raise
    return DenoiserSchedule(stages), closers


def build_solver_config(cfg: dict):
    """Turn a validated run config into (GapConfig | AdmmConfig, closers)."""
    validate_run_config(cfg)
    schedule, closers = build_schedule(cfg["denoisers"])
    common = {
        "schedule": schedule,
        "max_iters": cfg.get("max_iters"),
        "init_mode": cfg.get("init_mode", "adjoint_scaled"),
    }
    if "sigma_floor" in cfg:
        common["sigma_floor"] = cfg["sigma_floor"]
    try:
        if cfg["solver"] == "gap":
            solver_cfg = GapConfig(
                lambda0=cfg.get("lambda0", 1.0),
                xi=cfg.get("xi", 0.9),
                eta=cfg.get("eta", 0.8),
                schedule_mode=cfg.get("schedule_mode", "adaptive"),
                **common,
            )
        else:
            solver_cfg = AdmmConfig(
                rho0=cfg.get("rho0", 1.0),
                gamma=cfg.get("gamma", 1.05),
                lam=cfg.get("lambda", 1.0),
                **common,
            )
    except Exception:
        for closer in closers:
            closer.close()
        raise
    return solver_cfg, closers


def solve_from_config(op, y, cfg: dict, ground_truth=None):
    """Validate, build, solve, and release any plugin subprocesses."""
    solver_cfg, closers = build_solver_config(cfg)
    try:
        solve = gap_solve if cfg["solver"] == "gap" else admm_solve
        return solve(op, y, solver_cfg, ground_truth=ground_truth)
    finally:
        for closer in closers:
            closer.close()


def resolve_masks(cfg: dict, base_dir=None):
    """Load or generate the masks named by a config's ``mask_source``."""
    source = cfg.get("mask_source")
    if source is None:
        raise ValueError("config has no mask_source")
    if "file" in source:
        path = Path(source["file"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return read_tensor(path)
    gen = dict(source["generate"])
    return generate_masks(
        gen["nx"],
        gen["ny"],
        gen["B"],
        kind=gen.get("kind", "bernoulli"),
        p1=gen.get("p1", 0.5),
        seed=gen.get("seed", 0),
        shift=gen.get("shift", 1),
    )
