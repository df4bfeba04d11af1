"""Command-line surface.

Subcommands:

* ``adrom run --config exp.toml [--set key=value ...]`` -- run one
  experiment (full-order, static ROM, or adaptive ROM) and write its
  artifacts.
* ``adrom sweep --config exp.toml --grid "rule.lambda=0.1,0.25" ...`` --
  Cartesian hyperparameter sweep with one summary row per run.
* ``adrom compare RUN_DIR ...`` -- time-averaged error table plus pairwise
  ordering verdicts for completed runs.
* ``adrom plot-data RUN_DIR ... --out DIR`` -- re-export CSVs and figure
  specs for the plotting frontend.

Exit codes: 0 success, 1 solver failure, 2 configuration error. The
output root defaults to ``./runs`` and can be moved with ``ADROM_OUT``.

Config files are TOML; see ``configs/`` in the repository for the
documented layout (sections ``model``, ``rom``, ``rule``, ``run``).
Dotted ``--set`` overrides address the same keys.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import shutil
import sys
from itertools import product
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import io as runio
from .driver import ExperimentConfig, run_adaptive_rom, run_fom, run_static_rom
from .tracking import UpdateRule

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    pass


def _parse_literal(text: str):
    s = text.strip()
    low = s.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    if "," in s:
        try:
            return tuple(float(p) for p in s.split(","))
        except ValueError:
            pass
    return s


def _apply_override(tree: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = tree
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override through non-table key {k!r}")
    node[keys[-1]] = value


def load_config(path: Path, overrides: list[str]) -> ExperimentConfig:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        tree = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        dotted, _, raw = item.partition("=")
        _apply_override(tree, dotted.strip(), _parse_literal(raw))
    return config_from_tree(tree)


def config_from_tree(tree: dict) -> ExperimentConfig:
    model = tree.get("model", {})
    rom = tree.get("rom", {})
    rule_tbl = tree.get("rule", {})
    run = tree.get("run", {})

    def pick(table, name, key, default):
        val = table.get(key, default)
        return name, val

    kw = {}
    try:
        for name, val in [
            pick(model, "model", "kind", "burgers"),
            pick(model, "n_elem", "n_elem", 1000),
            pick(model, "nu", "nu", 0.01),
            pick(model, "gamma", "gamma", 1.4),
            pick(model, "dt", "dt", 1e-3),
            pick(model, "n_t", "n_t", 500),
            pick(rom, "mode", "mode", "adaptive"),
            pick(rom, "projection", "projection", "lspg"),
            pick(rom, "sampling", "sampling", "qdeim"),
            pick(rom, "feature", "feature", "pressure-gradient"),
            pick(rom, "n_extra", "n_extra", 0),
            pick(rom, "r", "r", 4),
            pick(rom, "n_s", "n_s", 4),
            pick(rom, "w_init", "w_init", 4),
            pick(rom, "z", "z", 10),
            pick(rom, "cadence", "cadence", "every-event"),
            pick(run, "seed", "seed", 0),
            pick(run, "save_stride", "save_stride", 10),
            pick(run, "timing_repeats", "timing_repeats", 1),
            pick(run, "newton_tol", "newton_tol", 1e-8),
            pick(run, "newton_max_iter", "newton_max_iter", 10),
        ]:
            kw[name] = val
        save_times = run.get("save_times", ())
        if isinstance(save_times, (int, float)):
            save_times = (save_times,)
        kw["save_times"] = tuple(save_times)
        kw["label"] = str(tree.get("label", ""))
        kw["rule"] = UpdateRule(
            kind=rule_tbl.get("kind", "isvd"),
            lam=float(rule_tbl.get("lambda", rule_tbl.get("lam", 1.0))),
            window=int(rule_tbl.get("window", 8)),
            eta=float(rule_tbl.get("eta", 0.01)),
        )
        return ExperimentConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def out_root(args) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    return Path(os.environ.get("ADROM_OUT", "runs"))


def _run_label(config: ExperimentConfig) -> str:
    if config.label:
        return config.label
    tag = runio.fom_cache_key(config)[:8]
    if config.mode == "fom":
        return f"{config.model}-fom-{tag}"
    return f"{config.model}-{config.mode}-{config.rule.kind}-z{config.z}-{tag}"


def execute_run(config: ExperimentConfig, run_dir: Path, cache_dir: Path) -> dict:
    """Run one experiment and write its artifacts; returns the manifest."""
    run_dir.mkdir(parents=True, exist_ok=True)
    truth = fom_wall = None
    if config.mode != "fom":
        truth, fom_wall = runio.load_or_compute_fom(config, cache_dir)

    if config.mode == "fom":
        result = run_fom(config)
    elif config.mode == "static":
        result = run_static_rom(config, truth=truth)
    else:
        result = run_adaptive_rom(config, truth=truth)

    files = []
    if result.errors is not None:
        runio.write_error_history(run_dir / "error_history.csv", result)
        files.append("error_history.csv")
    if result.signal_errors is not None:
        runio.write_signal_errors(run_dir / "signal_errors.csv", result)
        files.append("signal_errors.csv")
    runio.write_profiles(run_dir / "profiles.csv", result)
    files.append("profiles.csv")
    runio.write_snapshots(run_dir / "snapshots.csv", result)
    files.append("snapshots.csv")
    return runio.write_manifest(run_dir, result, files, fom_wall=fom_wall)


def cmd_run(args) -> int:
    try:
        config = load_config(Path(args.config), args.set or [])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    root = out_root(args)
    run_dir = root / _run_label(config)
    try:
        manifest = execute_run(config, run_dir, root / "fom_cache")
    except Exception as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        (run_dir / "manifest.json").write_text(json.dumps(
            {"run_id": run_dir.name, "status": "failed",
             "error": f"{type(exc).__name__}: {exc}",
             "config": runio.config_to_dict(config)}, indent=2) + "\n")
        return EXIT_SOLVER
    print(f"wrote {run_dir} ({', '.join(f['name'] for f in manifest['files'])})")
    return EXIT_OK


def _parse_grid(specs: list[str]) -> list[tuple[str, list]]:
    grid = []
    for spec in specs:
        if "=" not in spec:
            raise ConfigError(f"grid spec {spec!r} is not of the form key=v1,v2,...")
        key, _, raw = spec.partition("=")
        values = [_parse_literal(v) for v in raw.split(",")]
        if not values:
            raise ConfigError(f"grid spec {spec!r} lists no values")
        grid.append((key.strip(), values))
    return grid


def cmd_sweep(args) -> int:
    try:
        grid = _parse_grid(args.grid or [])
        base_overrides = args.set or []
        load_config(Path(args.config), base_overrides)  # validate early
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    root = out_root(args)
    root.mkdir(parents=True, exist_ok=True)
    keys = [k for k, _ in grid]
    combos = list(product(*[v for _, v in grid])) if grid else [()]

    summary_rows = []
    header = None
    for i, combo in enumerate(combos):
        overrides = base_overrides + [f"{k}={v}" for k, v in zip(keys, combo)]
        config = load_config(Path(args.config), overrides)
        config = dataclasses.replace(config, label="")
        run_dir = root / f"sweep-{i:03d}-{_run_label(config)}"
        row = {"run_id": run_dir.name}
        row.update({k: v for k, v in zip(keys, combo)})
        try:
            manifest = execute_run(config, run_dir, root / "fom_cache")
            row["status"] = "ok"
            for v, e in manifest.get("time_averaged_errors", {}).items():
                row[f"{v}_avg_err"] = e
            for v, e in manifest.get("final_errors", {}).items():
                row[f"{v}_final_err"] = e
            row["wall_seconds"] = manifest["timing"]["wall_seconds"]
            if manifest["timing"]["acceleration"] is not None:
                row["acceleration"] = manifest["timing"]["acceleration"]
        except Exception as exc:
            row["status"] = f"failed: {type(exc).__name__}"
        summary_rows.append(row)
        if header is None or len(row) > len(header):
            header = list(row)

    lines = [",".join(header)]
    for row in summary_rows:
        lines.append(",".join(
            runio.fmt(row[k]) if isinstance(row.get(k), float) else str(row.get(k, ""))
            for k in header))
    (root / "summary.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {root / 'summary.csv'} ({len(summary_rows)} runs)")
    return EXIT_OK


def _load_run(run_dir: Path):
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise ConfigError(f"{run_dir} has no manifest.json")
    manifest = json.loads(manifest_path.read_text())
    errors = None
    err_path = run_dir / "error_history.csv"
    if err_path.exists():
        errors = runio.load_error_history(err_path)
    return manifest, errors


def cmd_compare(args) -> int:
    runs = []
    try:
        for d in args.run_dirs:
            runs.append((Path(d), *_load_run(Path(d))))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if len(runs) < 2:
        print("config error: need at least two run directories", file=sys.stderr)
        return EXIT_CONFIG

    horizons = {(m["config"]["n_t"], m["config"]["dt"], m["config"]["w_init"])
                for _, m, _ in runs}
    if len(horizons) != 1:
        print("config error: runs have mismatched horizons", file=sys.stderr)
        return EXIT_CONFIG

    table = []
    for run_dir, manifest, errors in runs:
        label = manifest["config"].get("label") or manifest["run_id"]
        avg = manifest.get("time_averaged_errors")
        if avg is None and errors is not None:
            hdr, data = errors
            avg = {hdr[j].replace("_rel_err", ""): float(data[:, j].mean())
                   for j in range(2, len(hdr))}
        if avg is None:
            print(f"config error: {run_dir} has no error history", file=sys.stderr)
            return EXIT_CONFIG
        table.append((label, avg))

    variables = list(table[0][1])
    width = max(len(t[0]) for t in table)
    print(f"{'run':<{width}}  " + "  ".join(f"{v:>12}" for v in variables))
    for label, avg in table:
        print(f"{label:<{width}}  " + "  ".join(f"{avg[v]:>12.4e}" for v in variables))
    print()
    verdicts = []
    for i in range(len(table)):
        for j in range(i + 1, len(table)):
            for v in variables:
                a, b = table[i][1][v], table[j][1][v]
                if a == b:
                    rel = "=="
                else:
                    rel = "<" if a < b else ">"
                verdicts.append(f"{table[i][0]} {rel} {table[j][0]}  [{v}]")
    for v in verdicts:
        print(v)
    if args.json:
        Path(args.json).write_text(json.dumps(
            {"table": [{"label": l, "avg_errors": a} for l, a in table],
             "verdicts": verdicts}, indent=2) + "\n")
    return EXIT_OK


def cmd_plot_data(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    curves = []
    profile_entries = []
    try:
        for d in args.run_dirs:
            run_dir = Path(d)
            manifest, _ = _load_run(run_dir)
            label = manifest["config"].get("label") or manifest["run_id"]
            var = "rho" if manifest["config"]["model"] == "sod" else "u"
            err = run_dir / "error_history.csv"
            if err.exists():
                target = out_dir / f"{run_dir.name}_error_history.csv"
                shutil.copyfile(err, target)
                curves.append({"csv": target.name, "label": label,
                               "column": f"{var}_rel_err"})
            prof = run_dir / "profiles.csv"
            if prof.exists():
                target = out_dir / f"{run_dir.name}_profiles.csv"
                shutil.copyfile(prof, target)
                profile_entries.append({"csv": target.name, "label": label})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if curves:
        (out_dir / "error_history_spec.json").write_text(json.dumps({
            "kind": "error-history",
            "output": "error_history.svg",
            "title": "relative error history",
            "curves": curves,
        }, indent=2) + "\n")
    if profile_entries:
        (out_dir / "profiles_spec.json").write_text(json.dumps({
            "kind": "profiles",
            "output": "profiles.svg",
            "title": "solution profiles",
            "curves": profile_entries,
        }, indent=2) + "\n")
    print(f"wrote plot data to {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adrom",
                                     description="adaptive ROM experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_run.add_argument("--out", help="output root (default $ADROM_OUT or ./runs)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="Cartesian hyperparameter sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--grid", action="append", metavar="KEY=V1,V2,...")
    p_sweep.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_sweep.add_argument("--out")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="compare completed runs")
    p_cmp.add_argument("run_dirs", nargs="+")
    p_cmp.add_argument("--json", help="also store the comparison as JSON")
    p_cmp.set_defaults(func=cmd_compare)

    p_pd = sub.add_parser("plot-data", help="re-export CSVs for the plotting frontend")
    p_pd.add_argument("run_dirs", nargs="+")
    p_pd.add_argument("--out", required=True)
    p_pd.set_defaults(func=cmd_plot_data)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
