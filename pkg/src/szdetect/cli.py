"""Command-line interface: synthgen, featurize, train, evaluate, cost-report.

Options resolve in precedence order: explicit flag, then the key=value
config file named by --config, then the SEIZURE_SEED environment
variable (seed only), then built-in defaults.  Every command exits 0 on
success and nonzero with a one-line diagnostic on error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import costmodel, figures, pipeline, synthetic
from .costmodel import CostParams
from .dbn import DEFAULT_LAYER_SIZES, DbnModel, FINETUNE_MODES
from .evaluation import compute_metrics, majority_baseline
from .ingestion import (
    IngestionError,
    SeizureAnnotations,
    read_annotations,
    read_csv,
    read_edf,
    write_edf,
)
from .model_io import ModelFormatError, load_model, save_model
from .pipeline import EVAL_CSV_HEADER, EvalResult, TrainSettings


def read_config(path) -> dict:
    """Flat key=value file; blank lines and # comments are skipped."""
    config = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            config[key.strip()] = value.strip()
    return config


def _to_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _to_sizes(text: str) -> tuple:
    return tuple(int(part) for part in text.split(",") if part.strip())


class Options:
    """Merged view of CLI flags and the config file."""

    def __init__(self, args: argparse.Namespace):
        self.args = vars(args)
        config_path = self.args.get("config")
        self.config = read_config(config_path) if config_path else {}

    def get(self, name: str, default, convert=None):
        value = self.args.get(name)
        if value is not None:
            return value
        if name in self.config:
            raw = self.config[name]
            return convert(raw) if convert else raw
        return default

    def seed(self) -> int:
        env = os.environ.get("SEIZURE_SEED")
        fallback = int(env) if env else 0
        return self.get("seed", fallback, int)


def _train_settings(opts: Options) -> TrainSettings:
    base = TrainSettings()
    return TrainSettings(
        classifier=opts.get("classifier", base.classifier),
        k=opts.get("k", base.k, int),
        kernel=opts.get("kernel", base.kernel),
        gamma=opts.get("gamma", base.gamma, float),
        degree=opts.get("degree", base.degree, int),
        coef0=opts.get("coef0", base.coef0, float),
        c_reg=opts.get("c_reg", base.c_reg, float),
        tol=opts.get("tol", base.tol, float),
        lr_rate=opts.get("lr_rate", base.lr_rate, float),
        lr_iters=opts.get("lr_iters", base.lr_iters, int),
        layer_sizes=tuple(opts.get("layer_sizes", base.layer_sizes, _to_sizes)),
        pretrain_epochs=opts.get("pretrain_epochs", base.pretrain_epochs, int),
        pretrain_rate=opts.get("pretrain_rate", base.pretrain_rate, float),
        finetune_iters=opts.get("finetune_iters", base.finetune_iters, int),
        finetune_rate=opts.get("finetune_rate", base.finetune_rate, float),
        finetune_mode=opts.get("finetune_mode", base.finetune_mode),
        batch_size=opts.get("batch_size", base.batch_size, int),
    )


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, help="RNG seed (default: $SEIZURE_SEED or 0)")


def _add_hyper(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--classifier", choices=("knn", "cnn", "svm", "lr", "dbn"),
        help="classifier to train (default dbn)",
    )
    parser.add_argument("--k", type=int, help="neighbor count for knn/cnn")
    parser.add_argument("--kernel", choices=("rbf", "poly", "sigmoid"))
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--degree", type=int)
    parser.add_argument("--coef0", type=float)
    parser.add_argument("--c-reg", dest="c_reg", type=float)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--lr-rate", dest="lr_rate", type=float)
    parser.add_argument("--lr-iters", dest="lr_iters", type=int)
    parser.add_argument(
        "--layer-sizes", dest="layer_sizes", type=_to_sizes,
        help="comma separated, e.g. 207,500,500",
    )
    parser.add_argument("--pretrain-epochs", dest="pretrain_epochs", type=int)
    parser.add_argument("--pretrain-rate", dest="pretrain_rate", type=float)
    parser.add_argument("--finetune-iters", dest="finetune_iters", type=int)
    parser.add_argument("--finetune-rate", dest="finetune_rate", type=float)
    parser.add_argument("--finetune-mode", dest="finetune_mode", choices=FINETUNE_MODES)
    parser.add_argument("--batch-size", dest="batch_size", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="szdetect", description="Seizure detection over multichannel EEG."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthgen", help="generate a synthetic multi-patient study")
    _add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--patients", type=int, help="number of patients (default 5)")
    p.add_argument("--duration", type=int, help="seconds per recording (default 600)")
    p.add_argument("--channels", type=int, help="EEG channels (default 23)")
    p.add_argument("--rate", type=int, help="samples per second (default 256)")
    p.add_argument(
        "--seizure-fraction", dest="seizure_fraction", type=float,
        help="fraction of seconds inside seizure episodes (default 0.1)",
    )

    p = sub.add_parser("featurize", help="turn recordings into a feature CSV")
    _add_common(p)
    p.add_argument("inputs", nargs="+", help="EDF or sample-CSV recordings")
    p.add_argument("--annotations", help="seizure interval CSV")
    p.add_argument("--out", required=True, help="feature CSV to write")
    p.add_argument(
        "--sample-rate", dest="sample_rate", type=int,
        help="sample rate for CSV inputs (EDF carries its own)",
    )
    p.add_argument("--scaler", help="model file whose stored scaler to apply")
    p.add_argument("--jobs", type=int, help="parallel featurization workers")

    p = sub.add_parser("train", help="train one classifier and save the model")
    _add_common(p)
    _add_hyper(p)
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--protocol", choices=("single", "loo"))
    p.add_argument("--patient", help="patient to split (single) or hold out (loo)")
    p.add_argument(
        "--contiguous", action="store_true", default=None,
        help="split chronologically instead of shuffling",
    )
    p.add_argument("--out", required=True, help="model file to write")

    p = sub.add_parser("evaluate", help="run a study protocol and report metrics")
    _add_common(p)
    _add_hyper(p)
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--protocol", choices=("single", "loo"))
    p.add_argument("--patient", help="restrict to one patient")
    p.add_argument(
        "--contiguous", action="store_true", default=None,
        help="split chronologically instead of shuffling",
    )
    p.add_argument("--model", help="evaluate this saved model instead of training")
    p.add_argument("--out-dir", dest="out_dir", help="directory for CSV and figure")
    p.add_argument("--jobs", type=int, help="parallel held-out patients")

    p = sub.add_parser("cost-report", help="memory/computation cost table")
    _add_common(p)
    p.add_argument("--w", "--window-size", dest="window_size", type=int)
    p.add_argument("--t", "--train-windows", dest="train_windows", type=int)
    p.add_argument("--c", "--channels", dest="channels", type=int)
    p.add_argument("--m", "--features-per-channel", dest="features_per_channel", type=int)
    p.add_argument("--r", "--bit-resolution", dest="bit_resolution", type=int)
    p.add_argument("--n", "--neighbors", dest="neighbors", type=int)
    p.add_argument("--l", "--dbn-layers", dest="dbn_layers", type=int)
    p.add_argument("--peak-ratio", dest="peak_ratio", type=float)
    p.add_argument("--cnn-reduction-ratio", dest="cnn_reduction_ratio", type=float)
    p.add_argument("--svm-support-ratio", dest="svm_support_ratio", type=float)
    p.add_argument("--actual", help="model file to count exact parameter bits for")
    p.add_argument("--out-dir", dest="out_dir", help="directory for CSV and figure")

    return parser


# ---------------------------------------------------------------------------
# Commands


def cmd_synthgen(opts: Options) -> int:
    out_dir = Path(opts.get("out", None))
    out_dir.mkdir(parents=True, exist_ok=True)
    records, annotations = synthetic.generate_study(
        n_patients=opts.get("patients", 5, int),
        seed=opts.seed(),
        duration=opts.get("duration", synthetic.DEFAULT_DURATION, int),
        n_channels=opts.get("channels", synthetic.DEFAULT_CHANNELS, int),
        sample_rate=opts.get("rate", synthetic.DEFAULT_SAMPLE_RATE, int),
        seizure_fraction=opts.get(
            "seizure_fraction", synthetic.DEFAULT_SEIZURE_FRACTION, float
        ),
    )
    ann_lines = ["record_id,start_second,end_second"]
    for pid, record in records.items():
        write_edf(out_dir / f"{pid}.edf", record)
        for start, end in annotations[pid].intervals:
            ann_lines.append(f"{pid},{start:g},{end:g}")
    ann_path = out_dir / "annotations.csv"
    with open(ann_path, "w", newline="\n") as fh:
        fh.write("\n".join(ann_lines) + "\n")
    print(f"wrote {len(records)} patients to {out_dir}")
    return 0


def _load_recording(path: Path, sample_rate):
    if path.suffix.lower() == ".edf":
        return read_edf(path)
    if sample_rate is None:
        raise IngestionError(f"{path}: --sample-rate is required for CSV input")
    return read_csv(path, sample_rate)


def cmd_featurize(opts: Options) -> int:
    inputs = [Path(p) for p in opts.args["inputs"]]
    ann_path = opts.get("annotations", None)
    annotations = {}
    if ann_path and Path(ann_path).exists():
        annotations = read_annotations(ann_path)
    else:
        detail = f"{ann_path} missing" if ann_path else "no annotation file given"
        print(f"warning: {detail}; labeling every window 0", file=sys.stderr)
    scaler = None
    scaler_path = opts.get("scaler", None)
    if scaler_path:
        scaler = load_model(scaler_path).scaler
        if scaler is None:
            raise ModelFormatError(f"{scaler_path}: model carries no scaler")
    jobs = opts.get("jobs", 1, int)
    sample_rate = opts.get("sample_rate", None, int)
    rows = []
    for path in inputs:
        record = _load_recording(path, sample_rate)
        ann = annotations.get(record.patient_id, SeizureAnnotations(intervals=()))
        rows.extend(pipeline.featurize_record(record, ann, jobs=jobs))
    if not rows:
        raise IngestionError("inputs produced no windows")
    out = opts.get("out", None)
    pipeline.write_features_csv(out, rows, scaler=scaler)
    print(f"wrote {len(rows)} feature rows to {out}")
    return 0


def _resolve_patient(opts: Options, by_patient: dict, protocol: str) -> str:
    patient = opts.get("patient", None)
    if patient is None:
        if protocol == "single" and len(by_patient) == 1:
            return next(iter(by_patient))
        raise ValueError(
            "multiple patients in the feature file; choose one with --patient"
        )
    if patient not in by_patient:
        raise ValueError(f"patient {patient!r} not present in the feature file")
    return patient


def _make_split(opts: Options, by_patient: dict, protocol: str, patient: str, seed: int):
    shuffle = not opts.get("contiguous", False, _to_bool)
    if protocol == "single":
        vectors, labels = by_patient[patient]
        return pipeline.split_single_patient(
            vectors, labels, patient, seed, shuffle=shuffle
        )
    return pipeline.split_leave_one_out(by_patient, patient, seed, shuffle=shuffle)


def cmd_train(opts: Options) -> int:
    settings = _train_settings(opts)
    rows = pipeline.read_features_csv(opts.get("features", None))
    by_patient = pipeline.rows_by_patient(rows)
    protocol = opts.get("protocol", "single")
    seed = opts.seed()
    patient = _resolve_patient(opts, by_patient, protocol)
    split = _make_split(opts, by_patient, protocol, patient, seed)
    model, scaler = pipeline.train_classifier(settings, split, seed)
    predicted = pipeline.predict_labels(model, scaler, split.validation.vectors)
    val = compute_metrics(predicted, split.validation.labels)
    out = opts.get("out", None)
    save_model(out, model, scaler)
    print(f"{settings.display_name} validation F1: {val.f1:.6f}")
    print(f"wrote model to {out}")
    return 0


def _evaluate_fixed_model(opts: Options, by_patient: dict, seed: int) -> list:
    loaded = load_model(opts.get("model", None))
    protocol = opts.get("protocol", "single")
    if protocol != "single":
        raise ValueError(
            "protocol/model mismatch: a saved model evaluates under the "
            "single-patient protocol only"
        )
    shuffle = not opts.get("contiguous", False, _to_bool)
    only = opts.get("patient", None)
    results = []
    for pid, (vectors, labels) in by_patient.items():
        if only is not None and pid != only:
            continue
        split = pipeline.split_single_patient(vectors, labels, pid, seed, shuffle=shuffle)
        predicted = pipeline.predict_labels(
            loaded.model, loaded.scaler, split.test.vectors
        )
        metrics = compute_metrics(predicted, split.test.labels)
        results.append(EvalResult("single", loaded.kind, pid, metrics, predicted))
        results.append(
            EvalResult("single", "baseline", pid, majority_baseline(split.test.labels))
        )
    if not results:
        raise ValueError("no patients matched the evaluation request")
    return results


def cmd_evaluate(opts: Options) -> int:
    rows = pipeline.read_features_csv(opts.get("features", None))
    by_patient = pipeline.rows_by_patient(rows)
    seed = opts.seed()
    if opts.get("model", None):
        results = _evaluate_fixed_model(opts, by_patient, seed)
    else:
        settings = _train_settings(opts)
        protocol = opts.get("protocol", "single")
        shuffle = not opts.get("contiguous", False, _to_bool)
        only = opts.get("patient", None)
        if protocol == "single":
            results = []
            for pid, (vectors, labels) in by_patient.items():
                if only is not None and pid != only:
                    continue
                results.extend(
                    pipeline.evaluate_single_patient(
                        settings, vectors, labels, pid, seed, shuffle=shuffle
                    )
                )
            if not results:
                raise ValueError("no patients matched the evaluation request")
        else:
            pool = by_patient
            if only is not None:
                if only not in by_patient:
                    raise ValueError(f"patient {only!r} not present in the feature file")
                results = pipeline._loo_one((settings, pool, only, seed, shuffle))
            else:
                results = pipeline.evaluate_leave_one_out(
                    settings, pool, seed, shuffle=shuffle,
                    jobs=opts.get("jobs", 1, int),
                )
    print(EVAL_CSV_HEADER)
    for result in results:
        print(result.csv_row())
    out_dir = Path(opts.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "evaluation.csv"
    with open(csv_path, "w", newline="\n") as fh:
        fh.write(EVAL_CSV_HEADER + "\n")
        for result in results:
            fh.write(result.csv_row() + "\n")
    figure_rows = [
        {"patient": r.patient, "classifier": r.classifier, "f1": r.metrics.f1}
        for r in results
    ]
    figure_path = out_dir / "evaluation.png"
    figures.render_f1_figure(figure_rows, figure_path)
    print(f"wrote {csv_path} and {figure_path}", file=sys.stderr)
    return 0


def _format_cost(value) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def cmd_cost_report(opts: Options) -> int:
    base = CostParams()
    kwargs = {}
    for name in (
        "window_size",
        "train_windows",
        "channels",
        "features_per_channel",
        "bit_resolution",
        "neighbors",
        "dbn_layers",
    ):
        kwargs[name] = opts.get(name, getattr(base, name), int)
    for name in ("peak_ratio", "cnn_reduction_ratio", "svm_support_ratio"):
        kwargs[name] = opts.get(name, getattr(base, name), float)
    for name, value in kwargs.items():
        if value <= 0:
            raise ValueError(f"{name} must be positive, got {value}")
    params = CostParams(**kwargs)
    report = costmodel.relative_report(params)
    lines = ["classifier,memory_bits,computation_ops,memory_vs_lr,computation_vs_lr"]
    for kind in costmodel.CLASSIFIERS:
        entry = report[kind]
        mem_ratio = "" if entry.memory_ratio_vs_lr is None else f"{entry.memory_ratio_vs_lr:.2f}"
        ops_ratio = "" if entry.computation_ratio_vs_lr is None else f"{entry.computation_ratio_vs_lr:.2f}"
        lines.append(
            f"{kind},{_format_cost(entry.memory_bits)},"
            f"{_format_cost(entry.computation_ops)},{mem_ratio},{ops_ratio}"
        )
    actual_path = opts.get("actual", None)
    if actual_path:
        loaded = load_model(actual_path)
        if not isinstance(loaded.model, DbnModel):
            raise ValueError("--actual expects a saved dbn model")
        bits = costmodel.dbn_actual_memory_bits(
            loaded.model.layer_sizes, params.bit_resolution
        )
        ratio = bits / costmodel.memory_bits("lr", params)
        lines.append(f"dbn-actual,{bits},,{ratio:.2f},")
    for line in lines:
        print(line)
    out_dir = Path(opts.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "cost_report.csv"
    with open(csv_path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    figure_path = out_dir / "cost_report.png"
    figures.render_cost_figure(report, figure_path)
    print(f"wrote {csv_path} and {figure_path}", file=sys.stderr)
    return 0


_COMMANDS = {
    "synthgen": cmd_synthgen,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "cost-report": cmd_cost_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = Options(args)
        return _COMMANDS[args.command](opts)
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
