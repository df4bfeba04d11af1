"""Run artifacts: CSV tables, manifests, and the full-order trajectory
cache shared across ROM runs.

CSV schemas (consumed by tests and the plotting frontend):

* error histories -- header ``step,time,<var>_rel_err,...``, one row per
  fine step of the test interval.
* profiles -- header ``x,<var>@t=<time>,...``, one row per cell; times are
  formatted with ``%.6g``.
* snapshots -- header ``dof,s<step>,...``, the raw interleaved state at
  the saved steps.
* sweep summaries -- one row per run with time-averaged and final errors.

All data floats are written with 17 significant digits so rewriting a file
from the same run is byte-identical.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from pathlib import Path

import numpy as np

from .driver import ExperimentConfig, RunResult, make_problem, run_fom
from .tracking import UpdateRule

__all__ = [
    "fmt",
    "config_to_dict",
    "config_from_dict",
    "write_error_history",
    "write_signal_errors",
    "write_profiles",
    "write_snapshots",
    "write_manifest",
    "load_error_history",
    "fom_cache_key",
    "load_or_compute_fom",
]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def config_to_dict(config: ExperimentConfig) -> dict:
    d = dataclasses.asdict(config)
    d["rule"] = dataclasses.asdict(config.rule)
    d["save_times"] = list(config.save_times)
    return d


def config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    rule = d.get("rule")
    if isinstance(rule, dict):
        d["rule"] = UpdateRule(**rule)
    d["save_times"] = tuple(d.get("save_times", ()))
    return ExperimentConfig(**d)


def write_error_history(path: Path, result: RunResult) -> None:
    if result.errors is None:
        raise ValueError("run has no error history to write")
    names = result.var_names
    header = "step,time," + ",".join(f"{v}_rel_err" for v in names)
    dt = result.config.dt
    lines = [header]
    for step, row in zip(result.error_steps, result.errors):
        cells = [str(int(step)), fmt(step * dt)] + [fmt(x) for x in row]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def write_signal_errors(path: Path, result: RunResult) -> None:
    if result.signal_errors is None:
        raise ValueError("run has no signal error history to write")
    names = result.var_names
    header = "step,time," + ",".join(f"{v}_rel_err" for v in names)
    dt = result.config.dt
    lines = [header]
    for step, row in zip(result.signal_steps, result.signal_errors):
        cells = [str(int(step)), fmt(step * dt)] + [fmt(x) for x in row]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def _profile_steps(result: RunResult) -> list[int]:
    cfg = result.config
    if cfg.save_times:
        return sorted({min(cfg.n_t, max(0, round(t / cfg.dt))) for t in cfg.save_times})
    # default: three times across the test interval plus the final state
    span = cfg.n_t - cfg.w_init
    return sorted({cfg.w_init + span // 4, cfg.w_init + span // 2,
                   cfg.w_init + (3 * span) // 4, cfg.n_t})


def write_profiles(path: Path, result: RunResult) -> None:
    model = make_problem(result.config)
    steps = _profile_steps(result)
    dt = result.config.dt
    columns: list[tuple[str, np.ndarray]] = [("x", model.cell_centers)]
    for step in steps:
        fields = model.primitive_fields(result.trajectory[step])
        for v in model.var_names:
            columns.append((f"{v}@t={step * dt:.6g}", fields[v]))
    header = ",".join(name for name, _ in columns)
    rows = np.column_stack([col for _, col in columns])
    lines = [header]
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def write_snapshots(path: Path, result: RunResult) -> None:
    steps = result.saved_steps()
    header = "dof," + ",".join(f"s{int(s)}" for s in steps)
    block = result.trajectory[steps].T  # (n_dof, n_saved)
    lines = [header]
    for i, row in enumerate(block):
        lines.append(str(i) + "," + ",".join(fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def write_manifest(run_dir: Path, result: RunResult, files: list[str],
                   fom_wall: float | None = None,
                   status: str = "ok", error: str | None = None) -> dict:
    accel = None
    if fom_wall is not None and result.wall_seconds > 0:
        accel = fom_wall / result.wall_seconds
    manifest = {
        "run_id": run_dir.name,
        "kind": result.kind,
        "status": status,
        "config": config_to_dict(result.config),
        "files": [
            {"name": f, "sha256": _sha256(run_dir / f), "bytes": (run_dir / f).stat().st_size}
            for f in files if (run_dir / f).exists()
        ],
        "timing": {
            "wall_seconds": result.wall_seconds,
            "fom_wall_seconds": fom_wall,
            "acceleration": accel,
        },
        "newton_failures": list(map(int, result.newton_failures)),
        "event_log": result.event_log,
    }
    if error is not None:
        manifest["error"] = error
    if result.errors is not None and result.errors.size:
        manifest["time_averaged_errors"] = {
            v: result.time_averaged_error(v) for v in result.var_names
        }
        manifest["final_errors"] = {
            v: float(result.errors[-1, j]) for j, v in enumerate(result.var_names)
        }
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def load_error_history(path: Path) -> tuple[list[str], np.ndarray]:
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    return header, data


def fom_cache_key(config: ExperimentConfig) -> str:
    payload = {
        "model": config.model,
        "n_elem": config.n_elem,
        "nu": config.nu if config.model == "burgers" else None,
        "gamma": config.gamma if config.model == "sod" else None,
        "dt": config.dt,
        "n_t": config.n_t,
        "newton_tol": config.newton_tol,
        "newton_max_iter": config.newton_max_iter,
    }
    blob = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_or_compute_fom(config: ExperimentConfig, cache_dir: Path) -> tuple[np.ndarray, float]:
    """Ground-truth trajectory and its wall-clock time, cached on disk so a
    sweep computes the full-order solution once."""
    cache_dir.mkdir(parents=True, exist_ok=True)
    key = fom_cache_key(config)
    path = cache_dir / f"fom-{key}.npz"
    if path.exists():
        data = np.load(path)
        return data["trajectory"], float(data["wall_seconds"])
    fom_config = dataclasses.replace(config, mode="fom")
    res = run_fom(fom_config)
    np.savez_compressed(path, trajectory=res.trajectory,
                        wall_seconds=res.wall_seconds)
    return res.trajectory, res.wall_seconds
