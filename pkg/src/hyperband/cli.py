"""Command-line entry point for reproducible selection / evaluation runs.

Commands
--------
profile   per-band MI-with-ground-truth curve        -> profile.csv
select    run one selector, write the trace          -> trace.csv
evaluate  select, train, classify the test half      -> report.csv, report.json
sweep     accuracy-vs-band-count curve + one map     -> sweep.csv, map.csv
synth     generate a planted-structure dataset       -> cube.json, cube.u16,
                                                        gt.csv, expected.json

Every artifact embeds the run configuration (including the seed) in
leading ``#`` comment lines or a ``config`` JSON field, and identical
flags produce byte-identical files: floats are rendered with 6
significant digits, '.' decimal separator, and nothing time- or
host-dependent is written.

Exit status: 0 on success, 1 on any validation or I/O failure (with a
single-line diagnostic on stderr), 2 on an internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cube_io import QuantizationConfig, load_cube, load_ground_truth
from .evaluation import (
    EvalReport,
    SvmParams,
    accuracy_sweep,
    classification_map,
    evaluate,
    stratified_split,
    train_knn,
    train_svm,
)
from .selectors import SELECTOR_NAMES, SelectionTrace, mi_profile, run_selector
from .synthgen import duplicate_spec, write_dataset, xor_contrast_spec, xor_spec

SYNTH_PRESETS = ("duplicate", "xor", "xor-contrast")


class ValidationError(ValueError):
    """A flag combination rejected before any computation."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    cube: str | None = None
    gt: str | None = None
    selector: str | None = None
    k: int | None = None
    ks: tuple[int, ...] | None = None
    th: float | None = None
    bins: int = 256
    svm_c: float = 100.0
    svm_gamma: float | None = None
    classifier: str = "svm"
    seed: int = 0
    out: str = "."
    preset: str = "duplicate"


def validate_config(cfg: RunConfig) -> list[str]:
    """All flag-compatibility checks; pure, runs before any file or math work."""
    errors: list[str] = []
    if cfg.command not in ("profile", "select", "evaluate", "sweep", "synth"):
        errors.append(f"unknown command {cfg.command!r}")
        return errors
    if cfg.bins < 2:
        errors.append("--bins must be >= 2")
    if cfg.svm_c <= 0:
        errors.append("--svm-c must be positive")
    if cfg.svm_gamma is not None and cfg.svm_gamma <= 0:
        errors.append("--svm-gamma must be positive")
    if cfg.classifier not in ("svm", "knn"):
        errors.append(f"--classifier must be svm or knn, got {cfg.classifier!r}")

    needs_data = cfg.command in ("profile", "select", "evaluate", "sweep")
    if needs_data:
        if not cfg.cube:
            errors.append("--cube is required")
        if not cfg.gt:
            errors.append("--gt is required")

    uses_selector = cfg.command in ("select", "evaluate", "sweep")
    if uses_selector:
        if cfg.selector not in SELECTOR_NAMES:
            errors.append(f"--selector must be one of {SELECTOR_NAMES}")
        if cfg.selector == "mi_th" and cfg.th is None:
            errors.append("--th is required with --selector mi_th")
        if cfg.selector != "mi_th" and cfg.th is not None:
            errors.append("--th is only valid with --selector mi_th")
    elif cfg.th is not None:
        errors.append(f"--th is not valid for command {cfg.command}")

    if cfg.command in ("select", "evaluate"):
        if cfg.k is None:
            errors.append("--k is required")
        elif cfg.k < 1:
            errors.append("--k must be >= 1")
    if cfg.command == "sweep":
        if not cfg.ks:
            errors.append("--ks is required")
        else:
            if any(k < 1 for k in cfg.ks):
                errors.append("--ks entries must be >= 1")
            if list(cfg.ks) != sorted(set(cfg.ks)):
                errors.append("--ks must be strictly ascending")
            if cfg.k is not None and cfg.k not in cfg.ks:
                errors.append("--k (classification-map k) must be one of --ks")
        if cfg.k is not None and cfg.k < 1:
            errors.append("--k must be >= 1")
    if cfg.command == "synth" and cfg.preset not in SYNTH_PRESETS:
        errors.append(f"--preset must be one of {SYNTH_PRESETS}")
    return errors


# ---------------------------------------------------------------------------
# artifact writing
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{float(x):.6g}"


def _config_json(cfg: RunConfig) -> str:
    payload = {k: v for k, v in vars(cfg).items() if v is not None}
    if cfg.command != "synth":
        payload.pop("preset", None)
    if "ks" in payload:
        payload["ks"] = list(payload["ks"])
    return json.dumps(payload, sort_keys=True)


def _write_rows(path: Path, cfg: RunConfig, header: str, rows: list[str],
                extra_comments: list[str] | None = None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config: {_config_json(cfg)}\n")
        for line in extra_comments or ():
            fh.write(f"# {line}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _write_trace(path: Path, cfg: RunConfig, trace: SelectionTrace) -> None:
    if cfg.selector == "mi_th":
        # accepted bands first (selection order), then rejected candidates
        # (rejection order); step numbers the rows
        header = "step,band_index,criterion_value,accepted"
        events = [(b, v, 1) for b, v in zip(trace.selected, trace.criterion_values)]
        events += [(b, v, 0) for b, v in zip(trace.rejected, trace.rejected_values)]
        rows = [f"{step},{band},{_fmt(value)},{flag}"
                for step, (band, value, flag) in enumerate(events)]
    else:
        header = "step,band_index,criterion_value"
        rows = [f"{i},{band},{_fmt(value)}"
                for i, (band, value) in enumerate(zip(trace.selected, trace.criterion_values))]
    _write_rows(path, cfg, header, rows,
                extra_comments=[f"stop_reason: {trace.stop_reason}"])


def _write_report(csv_path: Path, json_path: Path, cfg: RunConfig,
                  report: EvalReport) -> None:
    rows = []
    total_test = int(report.confusion.sum())
    correct = int(np.trace(report.confusion))
    rows.append(f"overall,,{total_test},{correct},{_fmt(report.overall_accuracy)}")
    for c in range(report.confusion.shape[0]):
        n_test = int(report.confusion[c].sum())
        n_correct = int(report.confusion[c, c])
        acc = report.per_class_accuracy[c]
        acc_str = _fmt(acc) if np.isfinite(acc) else "nan"
        rows.append(f"class,{c + 1},{n_test},{n_correct},{acc_str}")
    _write_rows(csv_path, cfg, "scope,class,test_pixels,correct,accuracy_pct", rows,
                extra_comments=[f"bands: {','.join(str(b) for b in report.band_subset)}"])

    doc = {
        "config": json.loads(_config_json(cfg)),
        "seed": report.seed,
        "classifier": report.classifier,
        "band_subset": list(report.band_subset),
        "overall_accuracy": round(report.overall_accuracy, 4),
        "per_class": [
            {
                "class": c + 1,
                "test_pixels": int(report.confusion[c].sum()),
                "accuracy_pct": (round(float(report.per_class_accuracy[c]), 4)
                                 if np.isfinite(report.per_class_accuracy[c]) else None),
            }
            for c in range(report.confusion.shape[0])
        ],
        "confusion": report.confusion.tolist(),
    }
    json_path.parent.mkdir(parents=True, exist_ok=True)
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_grid(path: Path, cfg: RunConfig, grid: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config: {_config_json(cfg)}\n")
        for row in grid:
            fh.write(",".join(str(int(v)) for v in row) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _load_pair(cfg: RunConfig):
    cube = load_cube(cfg.cube)
    gt = load_ground_truth(cfg.gt, cube.n_rows, cube.n_cols)
    return cube, gt


def _quant(cfg: RunConfig) -> QuantizationConfig:
    return QuantizationConfig(n_bins=cfg.bins)


def _svm_params(cfg: RunConfig) -> SvmParams:
    return SvmParams(C=cfg.svm_c, gamma=cfg.svm_gamma)


def _cmd_profile(cfg: RunConfig) -> int:
    cube, gt = _load_pair(cfg)
    profile = mi_profile(cube, gt, _quant(cfg))
    rows = [f"{band},{_fmt(value)}" for band, value in enumerate(profile)]
    _write_rows(Path(cfg.out) / "profile.csv", cfg, "band,mi_bits", rows)
    return 0


def _cmd_select(cfg: RunConfig) -> int:
    cube, gt = _load_pair(cfg)
    trace = run_selector(cfg.selector, cube, gt, _quant(cfg), cfg.k, th=cfg.th)
    _write_trace(Path(cfg.out) / "trace.csv", cfg, trace)
    return 0


def _train(cfg: RunConfig, cube, subset, split):
    if cfg.classifier == "knn":
        return train_knn(cube, subset, split)
    return train_svm(cube, subset, split, _svm_params(cfg))


def _cmd_evaluate(cfg: RunConfig) -> int:
    cube, gt = _load_pair(cfg)
    trace = run_selector(cfg.selector, cube, gt, _quant(cfg), cfg.k, th=cfg.th)
    split = stratified_split(gt, cfg.seed)
    model = _train(cfg, cube, trace.selected, split)
    report = evaluate(model, cube, trace.selected, split)
    out = Path(cfg.out)
    _write_report(out / "report.csv", out / "report.json", cfg, report)
    return 0


def _cmd_sweep(cfg: RunConfig) -> int:
    cube, gt = _load_pair(cfg)
    results = accuracy_sweep(
        cube, gt, cfg.selector, list(cfg.ks),
        quantization=_quant(cfg),
        svm_params=_svm_params(cfg),
        classifier=cfg.classifier,
        seed=cfg.seed,
        th=cfg.th,
    )
    rows = [f"{cfg.selector},{k},{cfg.seed},{_fmt(rep.overall_accuracy)}"
            for k, rep in results]
    out = Path(cfg.out)
    _write_rows(out / "sweep.csv", cfg, "selector,k,seed,overall_accuracy", rows)

    map_k = cfg.k if cfg.k is not None else cfg.ks[-1]
    trace = run_selector(cfg.selector, cube, gt, _quant(cfg), map_k, th=cfg.th)
    split = stratified_split(gt, cfg.seed)
    model = _train(cfg, cube, trace.selected, split)
    grid = classification_map(model, cube, trace.selected, gt)
    _write_grid(out / "map.csv", cfg, grid)
    return 0


def _cmd_synth(cfg: RunConfig) -> int:
    spec = {
        "duplicate": duplicate_spec,
        "xor": xor_spec,
        "xor-contrast": xor_contrast_spec,
    }[cfg.preset](seed=cfg.seed)
    provenance = json.loads(_config_json(cfg))
    paths = write_dataset(spec, cfg.out, provenance=provenance)
    expected = {
        "config": provenance,
        "minimal": paths["expected_minimal"],
        "redundant": paths["expected_redundant"],
    }
    with open(Path(cfg.out) / "expected.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(expected, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return 0


_COMMANDS = {
    "profile": _cmd_profile,
    "select": _cmd_select,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "synth": _cmd_synth,
}


def run(cfg: RunConfig) -> int:
    errors = validate_config(cfg)
    if errors:
        raise ValidationError("; ".join(errors))
    return _COMMANDS[cfg.command](cfg)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _parse_ks(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in raw.split(",") if part != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"--ks expects comma-separated integers, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperband",
        description="Information-theoretic band selection and evaluation for hyperspectral cubes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data(sp):
        sp.add_argument("--cube", required=True, help="path to the cube JSON header")
        sp.add_argument("--gt", required=True, help="path to the ground-truth CSV grid")

    def add_common(sp):
        sp.add_argument("--bins", type=int, default=256, help="histogram bins (default 256)")
        sp.add_argument("--seed", type=int, default=0, help="run seed (default 0)")
        sp.add_argument("--out", required=True, help="output directory")

    def add_selector(sp):
        sp.add_argument("--selector", required=True, choices=SELECTOR_NAMES)
        sp.add_argument("--th", type=float, default=None,
                        help="acceptance threshold (mi_th only)")

    def add_classifier(sp):
        sp.add_argument("--svm-c", type=float, default=100.0, dest="svm_c")
        sp.add_argument("--svm-gamma", type=float, default=None, dest="svm_gamma")
        sp.add_argument("--classifier", choices=("svm", "knn"), default="svm")

    sp = sub.add_parser("profile", help="per-band MI with the ground truth")
    add_data(sp); add_common(sp)

    sp = sub.add_parser("select", help="run one selector and write its trace")
    add_data(sp); add_selector(sp)
    sp.add_argument("--k", type=int, required=True, help="bands to retain")
    add_common(sp)

    sp = sub.add_parser("evaluate", help="select bands, train, and score the test half")
    add_data(sp); add_selector(sp)
    sp.add_argument("--k", type=int, required=True)
    add_classifier(sp); add_common(sp)

    sp = sub.add_parser("sweep", help="accuracy curve over several band counts")
    add_data(sp); add_selector(sp)
    sp.add_argument("--ks", type=_parse_ks, required=True,
                    help="comma-separated ascending band counts, e.g. 10,20,40")
    sp.add_argument("--k", type=int, default=None,
                    help="band count for the classification map (default: max of --ks)")
    add_classifier(sp); add_common(sp)

    sp = sub.add_parser("synth", help="generate a planted-structure benchmark dataset")
    sp.add_argument("--preset", choices=SYNTH_PRESETS, default="duplicate")
    add_common(sp)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {f: getattr(args, f) for f in vars(args) if f in RunConfig.__dataclass_fields__}
    return RunConfig(**fields)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if not exc.code else 1
    cfg = config_from_args(args)
    try:
        return run(cfg)
    except (ValidationError, FileNotFoundError, ValueError, OSError, IndexError, KeyError) as exc:
        print(f"hyperband: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # invariant violations and anything unexpected
        print(f"hyperband: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
