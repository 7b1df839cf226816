"""Command-line interface: run experiments, re-render reports, plot curves.

``run`` executes an experiment described by a JSON config and writes a
report bundle (three CSV files plus a JSON manifest) to the output
directory.  ``report`` re-renders the phase and sampling tables from a
bundle; ``plot`` renders the learning curves as SVG.  The manifest embeds
the fully resolved config and can itself be passed back to ``run``.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy
import sklearn

from . import __version__
from .datasets import (
    DEFAULT_BUDGETS,
    SYNTHETIC_NAMES,
    Dataset,
    generate_synthetic,
    load_tabular,
)
from .exceptions import ConfigError, DatasetError, InternalConsistencyError
from .harness import ExperimentReport, aggregate, phase_bounds, run_experiment
from .plots import build_learning_curve_svg
from .strategies import STRATEGIES

EXIT_CONFIG = 2
EXIT_DATASET = 3
EXIT_RUNTIME = 4

_TOP_KEYS = {
    "dataset",
    "strategies",
    "trials",
    "budget",
    "sigma",
    "pseudo_per_class",
    "local_budget_max",
    "chunk_size",
    "folds",
    "base_seed",
    "workers",
    "output_dir",
}
_SYNTH_KEYS = {"name", "seed", "instances_per_class"}
_FILE_KEYS = {"path", "label_column", "class_filter", "name", "budget"}

_DEFAULTS = {
    "trials": 500,
    "budget": None,
    "sigma": 0.05,
    "pseudo_per_class": 25,
    "local_budget_max": 3,
    "chunk_size": None,
    "folds": 3,
    "base_seed": 0,
    "workers": 1,
    "output_dir": "palacs-out",
}

CURVES_CSV = "learning_curves.csv"
PHASES_CSV = "phase_table.csv"
SAMPLING_CSV = "sampling_proportions.csv"
MANIFEST_JSON = "run_manifest.json"
CURVES_SVG = "learning_curves.svg"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if raw.get("format") == "palacs-run-manifest":
        raw = raw.get("config", {})
    return raw


def resolve_config(raw: dict, overrides: dict | None = None) -> dict:
    """Validate a raw config dict and fill in every default.

    Raises :class:`ConfigError` naming the offending key on any problem.
    """
    cfg = dict(raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = value
    for key in cfg:
        _require(key in _TOP_KEYS, f"unknown config key {key!r}")

    _require("dataset" in cfg, "missing config key 'dataset'")
    dataset = cfg["dataset"]
    _require(isinstance(dataset, dict), "'dataset' must be an object")
    if "path" in dataset:
        for key in dataset:
            _require(key in _FILE_KEYS, f"unknown dataset key {key!r}")
        _require(
            "label_column" in dataset, "dataset with 'path' needs 'label_column'"
        )
        resolved_dataset = {
            "path": str(dataset["path"]),
            "label_column": str(dataset["label_column"]),
            "class_filter": dataset.get("class_filter"),
            "name": dataset.get("name"),
            "budget": dataset.get("budget"),
        }
    else:
        for key in dataset:
            _require(key in _SYNTH_KEYS, f"unknown dataset key {key!r}")
        _require("name" in dataset, "dataset needs either 'name' or 'path'")
        _require(
            dataset["name"] in SYNTHETIC_NAMES,
            f"unknown synthetic dataset {dataset.get('name')!r}; expected one of: "
            + ", ".join(SYNTHETIC_NAMES),
        )
        resolved_dataset = {
            "name": dataset["name"],
            "seed": int(dataset.get("seed", 1)),
            "instances_per_class": int(dataset.get("instances_per_class", 200)),
        }

    _require("strategies" in cfg, "missing config key 'strategies'")
    entries = cfg["strategies"]
    _require(
        isinstance(entries, list) and entries, "'strategies' must be a non-empty list"
    )
    resolved_strategies = []
    seen = set()
    for entry in entries:
        if isinstance(entry, str):
            entry = {"name": entry}
        _require(
            isinstance(entry, dict) and "name" in entry,
            "strategy entries must be names or objects with a 'name'",
        )
        name = entry["name"]
        _require(
            name in STRATEGIES,
            f"unknown strategy {name!r}; expected one of: "
            + ", ".join(sorted(STRATEGIES)),
        )
        _require(name not in seen, f"strategy {name!r} listed twice")
        seen.add(name)
        for key in entry:
            _require(
                key in {"name", "pseudo_per_class", "local_budget_max",
                        "chunk_size", "folds"},
                f"unknown strategy key {key!r} for {name!r}",
            )
        resolved_strategies.append(dict(entry))

    resolved = {"dataset": resolved_dataset, "strategies": resolved_strategies}
    for key, default in _DEFAULTS.items():
        resolved[key] = cfg.get(key, default)

    _require(
        isinstance(resolved["trials"], int) and resolved["trials"] >= 1,
        "'trials' must be an integer >= 1",
    )
    _require(
        resolved["budget"] is None
        or (isinstance(resolved["budget"], int) and resolved["budget"] >= 4),
        "'budget' must be an integer >= 4",
    )
    _require(
        isinstance(resolved["sigma"], (int, float)) and resolved["sigma"] > 0,
        "'sigma' must be > 0",
    )
    _require(
        isinstance(resolved["pseudo_per_class"], int)
        and resolved["pseudo_per_class"] >= 1,
        "'pseudo_per_class' must be an integer >= 1",
    )
    _require(
        isinstance(resolved["local_budget_max"], int)
        and resolved["local_budget_max"] >= 1,
        "'local_budget_max' must be an integer >= 1",
    )
    _require(
        resolved["chunk_size"] is None
        or (isinstance(resolved["chunk_size"], int) and resolved["chunk_size"] >= 2),
        "'chunk_size' must be an integer >= 2",
    )
    _require(
        isinstance(resolved["folds"], int) and resolved["folds"] >= 2,
        "'folds' must be an integer >= 2",
    )
    _require(
        isinstance(resolved["base_seed"], int) and resolved["base_seed"] >= 0,
        "'base_seed' must be a non-negative integer",
    )
    _require(
        isinstance(resolved["workers"], int) and resolved["workers"] >= 1,
        "'workers' must be an integer >= 1",
    )
    return resolved


def build_dataset(cfg: dict) -> Dataset:
    spec = cfg["dataset"]
    if "path" in spec:
        return load_tabular(
            spec["path"],
            spec["label_column"],
            class_filter=spec.get("class_filter"),
            name=spec.get("name"),
            budget=spec.get("budget"),
        )
    return generate_synthetic(spec["name"], spec["instances_per_class"], spec["seed"])


def _strategy_specs(cfg: dict) -> list[tuple[str, dict]]:
    shared = {
        key: cfg[key]
        for key in ("pseudo_per_class", "local_budget_max", "chunk_size", "folds")
    }
    specs = []
    for entry in cfg["strategies"]:
        params = dict(shared)
        params.update({k: v for k, v in entry.items() if k != "name"})
        specs.append((entry["name"], params))
    return specs


def _fmt_float(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_report_bundle(
    out_dir: Path, report: ExperimentReport, class_names, cfg: dict
) -> list[Path]:
    """Write the CSV tables and the manifest; returns the written paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    curves = out_dir / CURVES_CSV
    rows = []
    for name in report.strategies:
        for step in range(report.budget):
            rows.append(
                [
                    name,
                    step + 1,
                    _fmt_float(report.curve_mean[name][step]),
                    _fmt_float(report.curve_std[name][step]),
                ]
            )
    _write_csv(curves, ["strategy", "step", "mean_error", "std_error"], rows)
    paths.append(curves)

    phases = out_dir / PHASES_CSV
    rows = []
    for name in report.strategies:
        for ph, (lo, hi) in enumerate(report.phase_bounds):
            rows.append(
                [
                    name,
                    ph + 1,
                    lo,
                    hi,
                    _fmt_float(report.phase_mean[name][ph]),
                    _fmt_float(report.win_ratio[name][ph]),
                ]
            )
    _write_csv(
        phases,
        ["strategy", "phase", "start_step", "end_step", "mean_error", "win_ratio"],
        rows,
    )
    paths.append(phases)

    sampling = out_dir / SAMPLING_CSV
    header = ["strategy"] + [f"percent_{c}" for c in class_names]
    rows = [
        [name] + [_fmt_float(100.0 * share) for share in report.sampling[name]]
        for name in report.strategies
    ]
    _write_csv(sampling, header, rows)
    paths.append(sampling)

    manifest = out_dir / MANIFEST_JSON
    payload = {
        "format": "palacs-run-manifest",
        "config": cfg,
        "dataset": {
            "name": report.dataset,
            "num_classes": report.num_classes,
            "class_names": list(class_names),
            "budget": report.budget,
            "trials": report.trials,
            "strategies": list(report.strategies),
        },
        "versions": {
            "palacs": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "scikit-learn": sklearn.__version__,
        },
    }
    manifest.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    paths.append(manifest)
    return paths


def load_report_bundle(records_dir) -> tuple[ExperimentReport, list[str], dict]:
    """Rebuild an :class:`ExperimentReport` from a written bundle."""
    records_dir = Path(records_dir)
    manifest_path = records_dir / MANIFEST_JSON
    if not manifest_path.exists():
        raise DatasetError(f"no run manifest in {records_dir}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        meta = manifest["dataset"]
        strategies = tuple(meta["strategies"])
        budget = int(meta["budget"])
        class_names = [str(c) for c in meta["class_names"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"corrupt run manifest: {exc}") from exc

    def read_rows(filename: str) -> list[dict]:
        path = records_dir / filename
        if not path.exists():
            raise DatasetError(f"missing report file: {path}")
        with open(path, encoding="utf-8", newline="") as fh:
            return list(csv.DictReader(fh))

    try:
        curve_mean = {s: np.zeros(budget) for s in strategies}
        curve_std = {s: np.zeros(budget) for s in strategies}
        for row in read_rows(CURVES_CSV):
            step = int(row["step"]) - 1
            curve_mean[row["strategy"]][step] = float(row["mean_error"])
            curve_std[row["strategy"]][step] = float(row["std_error"])
        phase_mean = {s: np.zeros(len(phase_bounds(budget))) for s in strategies}
        win_ratio = {s: np.zeros(len(phase_bounds(budget))) for s in strategies}
        for row in read_rows(PHASES_CSV):
            ph = int(row["phase"]) - 1
            phase_mean[row["strategy"]][ph] = float(row["mean_error"])
            win_ratio[row["strategy"]][ph] = float(row["win_ratio"])
        sampling = {}
        for row in read_rows(SAMPLING_CSV):
            sampling[row["strategy"]] = np.array(
                [float(row[f"percent_{c}"]) / 100.0 for c in class_names]
            )
    except (KeyError, ValueError, IndexError) as exc:
        raise DatasetError(f"corrupt report bundle: {exc}") from exc

    report = ExperimentReport(
        dataset=str(meta["name"]),
        strategies=strategies,
        num_classes=len(class_names),
        budget=budget,
        trials=int(meta["trials"]),
        phase_bounds=phase_bounds(budget),
        curve_mean=curve_mean,
        curve_std=curve_std,
        phase_mean=phase_mean,
        win_ratio=win_ratio,
        sampling=sampling,
    )
    return report, class_names, manifest


def render_tables(report: ExperimentReport, class_names) -> str:
    """Phase and sampling tables as aligned text; '*' marks phase winners."""
    lines = [f"dataset: {report.dataset}   trials: {report.trials}   "
             f"budget: {report.budget}"]
    lines.append("")
    header = f"{'strategy':<16}"
    for ph, (lo, hi) in enumerate(report.phase_bounds):
        header += f"{f'phase {ph + 1} [{lo}-{hi}]':>22}"
    lines.append(header)
    best = [
        min(report.phase_mean[s][ph] for s in report.strategies)
        for ph in range(len(report.phase_bounds))
    ]
    for name in report.strategies:
        row = f"{name:<16}"
        for ph in range(len(report.phase_bounds)):
            err = report.phase_mean[name][ph]
            mark = "*" if err == best[ph] else " "
            row += f"{mark}{err:.4f} ({report.win_ratio[name][ph] * 100.0:5.1f}%)".rjust(22)
        lines.append(row)
    lines.append("")
    lines.append("final sampling proportions (%):")
    head = f"{'strategy':<16}" + "".join(f"{c:>10}" for c in class_names)
    lines.append(head)
    for name in report.strategies:
        row = f"{name:<16}" + "".join(
            f"{100.0 * share:>10.1f}" for share in report.sampling[name]
        )
        lines.append(row)
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    cfg = resolve_config(
        load_config(args.config),
        overrides={
            "trials": args.trials,
            "budget": args.budget,
            "base_seed": args.seed,
            "workers": args.workers,
            "output_dir": args.out,
        },
    )
    ds = build_dataset(cfg)
    if cfg["chunk_size"] is not None and cfg["chunk_size"] < ds.num_classes:
        raise ConfigError("'chunk_size' must be at least the number of classes")
    records = run_experiment(
        ds,
        _strategy_specs(cfg),
        trials=cfg["trials"],
        budget=cfg["budget"],
        base_seed=cfg["base_seed"],
        bandwidth=float(cfg["sigma"]),
        workers=cfg["workers"],
    )
    report = aggregate(records, ds.num_classes)
    paths = write_report_bundle(Path(cfg["output_dir"]), report, ds.class_names, cfg)
    for path in paths:
        print(f"wrote {path}")
    return 0


def cmd_report(args) -> int:
    report, class_names, _ = load_report_bundle(args.records_dir)
    sys.stdout.write(render_tables(report, class_names))
    return 0


def cmd_plot(args) -> int:
    report, _, _ = load_report_bundle(args.records_dir)
    out = Path(args.records_dir) / CURVES_SVG
    out.write_text(build_learning_curve_svg(report), encoding="utf-8")
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="palacs",
        description="Active class selection experiments: run, report, plot.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("config", help="path to the JSON config (or a run manifest)")
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--budget", type=int, default=None)
    run.add_argument("--seed", type=int, default=None, help="overrides base_seed")
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--out", default=None, help="overrides output_dir")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="print phase/sampling tables for a run")
    rep.add_argument("records_dir", help="directory written by 'run'")
    rep.set_defaults(func=cmd_report)

    plot = sub.add_parser("plot", help="write learning_curves.svg for a run")
    plot.add_argument("records_dir", help="directory written by 'run'")
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except InternalConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
