"""End-to-end plumbing: records to feature tables to trained models.

This module glues the pure pieces together: featurization of labeled
1-second windows, the feature CSV format, classifier training on a
split, and the per-patient evaluation runs behind the two study
protocols.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field, replace

import numpy as np

from . import classifiers, dbn
from .classifiers import Dataset
from .evaluation import (
    Split,
    compute_metrics,
    majority_baseline,
    split_leave_one_out,
    split_single_patient,
)
from .features import window_features
from .ingestion import Record, SeizureAnnotations, label_windows
from .preprocessing import MinMaxScaler, apply_scaler, fit_scaler, normalize_record


@dataclass(frozen=True)
class FeatureRow:
    patient_id: str
    window_index: int
    label: int
    features: np.ndarray


def _feature_block(windows: np.ndarray) -> np.ndarray:
    # windows: (m, C, W) stacked 1-second windows
    return np.stack([window_features(w) for w in windows])


def featurize_record(
    record: Record,
    annotations: SeizureAnnotations | None = None,
    jobs: int = 1,
) -> list:
    """Normalize, window, label, and featurize one recording."""
    normalized, _ = normalize_record(record)
    if annotations is None:
        annotations = SeizureAnnotations(intervals=())
    windows = label_windows(normalized, annotations)
    if not windows:
        return []
    stacked = np.stack([w.samples for w in windows])
    if jobs > 1 and len(windows) > 1:
        chunks = np.array_split(stacked, min(jobs, len(windows)))
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(_feature_block, chunks))
        vectors = np.concatenate(blocks)
    else:
        vectors = _feature_block(stacked)
    return [
        FeatureRow(
            patient_id=record.patient_id,
            window_index=w.window_index,
            label=w.label,
            features=vectors[i],
        )
        for i, w in enumerate(windows)
    ]


# ---------------------------------------------------------------------------
# Feature CSV


def feature_header(n_features: int) -> str:
    names = ",".join(f"f{i}" for i in range(n_features))
    return f"patient_id,window_index,label,{names}"


def write_features_csv(path, rows: list, scaler: MinMaxScaler | None = None) -> None:
    """Write feature rows; values pass through the scaler when given."""
    if not rows:
        raise ValueError("no feature rows to write")
    n_features = len(rows[0].features)
    lines = [feature_header(n_features)]
    for row in rows:
        values = row.features
        if scaler is not None:
            values = apply_scaler(scaler, values)
        rendered = ",".join(repr(float(v)) for v in values)
        lines.append(f"{row.patient_id},{row.window_index},{row.label},{rendered}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_features_csv(path) -> list:
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty feature file")
    header = lines[0].split(",")
    if header[:3] != ["patient_id", "window_index", "label"]:
        raise ValueError(f"{path}: unrecognized feature file header")
    n_features = len(header) - 3
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != n_features + 3:
            raise ValueError(f"{path}:{lineno}: expected {n_features + 3} columns")
        rows.append(
            FeatureRow(
                patient_id=parts[0],
                window_index=int(parts[1]),
                label=int(parts[2]),
                features=np.array([float(v) for v in parts[3:]]),
            )
        )
    return rows


def rows_to_arrays(rows: list) -> tuple[np.ndarray, np.ndarray]:
    vectors = np.stack([row.features for row in rows])
    labels = np.array([row.label for row in rows], dtype=int)
    return vectors, labels


def rows_by_patient(rows: list) -> dict:
    """Patient id -> (vectors, labels), in first-appearance order."""
    grouped: dict = {}
    for row in rows:
        grouped.setdefault(row.patient_id, []).append(row)
    return {pid: rows_to_arrays(group) for pid, group in grouped.items()}


# ---------------------------------------------------------------------------
# Training


@dataclass(frozen=True)
class TrainSettings:
    """Classifier choice plus every tunable hyperparameter."""

    classifier: str = "dbn"
    k: int = 5
    kernel: str = "rbf"
    gamma: float | None = None
    degree: int = 3
    coef0: float = 0.0
    c_reg: float = 1.0
    tol: float = 1e-3
    lr_rate: float = 0.1
    lr_iters: int = 500
    layer_sizes: tuple = dbn.DEFAULT_LAYER_SIZES
    pretrain_epochs: int = dbn.DEFAULT_PRETRAIN_EPOCHS
    pretrain_rate: float = dbn.DEFAULT_PRETRAIN_RATE
    finetune_iters: int = dbn.DEFAULT_FINETUNE_ITERS
    finetune_rate: float = dbn.DEFAULT_FINETUNE_RATE
    finetune_mode: str = "full"
    batch_size: int = dbn.DEFAULT_BATCH_SIZE

    @property
    def display_name(self) -> str:
        if self.classifier in ("knn", "cnn"):
            return f"{self.classifier}{self.k}"
        if self.classifier == "svm":
            return f"svm-{self.kernel}"
        return self.classifier


def _scaled(scaler: MinMaxScaler, dataset: Dataset) -> Dataset:
    vectors = np.stack([apply_scaler(scaler, v) for v in dataset.vectors])
    return Dataset(vectors, dataset.labels)


def train_classifier(settings: TrainSettings, split: Split, seed: int):
    """Fit the selected classifier on the split's training partition.

    The feature scaler is fit on training vectors only and applied to
    every partition.  Returns the model and the scaler; for the network
    the best-validation-F1 snapshot is what comes back.
    """
    scaler = fit_scaler(split.train.vectors)
    train = _scaled(scaler, split.train)
    validation = _scaled(scaler, split.validation)
    name = settings.classifier
    if name == "knn":
        return classifiers.KnnModel(train=train, k=settings.k), scaler
    if name == "cnn":
        condensed = classifiers.cnn_condense(train, seed=seed)
        # a cleanly separable set can condense below k; the vote cannot
        # use more neighbors than stored instances
        k = min(settings.k, len(condensed))
        return classifiers.KnnModel(train=condensed, k=k, condensed=True), scaler
    if name == "svm":
        model = classifiers.svm_train(
            train,
            kernel=settings.kernel,
            gamma=settings.gamma,
            degree=settings.degree,
            coef0=settings.coef0,
            c_reg=settings.c_reg,
            tol=settings.tol,
        )
        return model, scaler
    if name == "lr":
        model = classifiers.lr_train(
            train, rate=settings.lr_rate, iters=settings.lr_iters
        )
        return model, scaler
    if name == "dbn":
        sizes = tuple(settings.layer_sizes)
        if sizes[0] != train.n_features:
            sizes = (train.n_features,) + sizes[1:]
        stack = dbn.dbn_pretrain(
            sizes,
            train.vectors,
            epochs=settings.pretrain_epochs,
            rate=settings.pretrain_rate,
            batch_size=settings.batch_size,
            seed=seed,
        )
        config = dbn.DbnTrainingConfig(
            layer_sizes=sizes,
            pretrain_epochs=settings.pretrain_epochs,
            pretrain_rate=settings.pretrain_rate,
            finetune_iters=settings.finetune_iters,
            finetune_rate=settings.finetune_rate,
            batch_size=settings.batch_size,
            mode=settings.finetune_mode,
            seed=seed,
        )
        model = dbn.dbn_finetune(
            stack,
            train,
            rate=settings.finetune_rate,
            iters=settings.finetune_iters,
            batch_size=settings.batch_size,
            seed=seed + 1,
            mode=settings.finetune_mode,
            validation=validation,
            scaler=scaler,
            config=config,
        )
        return model, scaler
    raise ValueError(f"unknown classifier {name!r}")


def predict_labels(model, scaler: MinMaxScaler | None, vectors) -> np.ndarray:
    """Apply the stored scaler, then the model's decision rule."""
    vectors = np.asarray(vectors, dtype=float)
    if scaler is not None:
        vectors = np.stack([apply_scaler(scaler, v) for v in vectors])
    if isinstance(model, classifiers.KnnModel):
        return classifiers.knn_classify_many(model.train, model.k, vectors)
    if isinstance(model, classifiers.SvmModel):
        return classifiers.svm_classify_many(model, vectors)
    if isinstance(model, classifiers.LrModel):
        return classifiers.lr_classify_many(model, vectors)
    if isinstance(model, dbn.DbnModel):
        # the scaler was already applied above; bypass the model's copy
        bare = replace(model, scaler=None)
        labels, _ = dbn.dbn_predict_many(bare, vectors)
        return labels
    raise TypeError(f"cannot predict with {type(model).__name__}")


# ---------------------------------------------------------------------------
# Protocol runs


@dataclass(frozen=True)
class EvalResult:
    protocol: str
    classifier: str
    patient: str
    metrics: object
    predictions: np.ndarray = field(repr=False, compare=False, default=None)

    def csv_row(self) -> str:
        m = self.metrics
        return (
            f"{self.protocol},{self.classifier},{self.patient},"
            f"{m.precision:.6f},{m.recall:.6f},{m.f1:.6f},{m.accuracy:.6f}"
        )


EVAL_CSV_HEADER = "protocol,classifier,patient,precision,recall,f1,accuracy"


def evaluate_single_patient(
    settings: TrainSettings,
    vectors,
    labels,
    patient_id: str,
    seed: int,
    shuffle: bool = True,
) -> list:
    """Within-patient run: returns the classifier row plus the baseline row."""
    split = split_single_patient(vectors, labels, patient_id, seed, shuffle=shuffle)
    model, scaler = train_classifier(settings, split, seed)
    predicted = predict_labels(model, scaler, split.test.vectors)
    metrics = compute_metrics(predicted, split.test.labels)
    baseline = majority_baseline(split.test.labels)
    return [
        EvalResult("single", settings.display_name, patient_id, metrics, predicted),
        EvalResult("single", "baseline", patient_id, baseline),
    ]


def _loo_one(args):
    settings, patients, test_patient, seed, shuffle = args
    split = split_leave_one_out(patients, test_patient, seed, shuffle=shuffle)
    model, scaler = train_classifier(settings, split, seed)
    predicted = predict_labels(model, scaler, split.test.vectors)
    metrics = compute_metrics(predicted, split.test.labels)
    baseline = majority_baseline(split.test.labels)
    return [
        EvalResult("loo", settings.display_name, test_patient, metrics, predicted),
        EvalResult("loo", "baseline", test_patient, baseline),
    ]


def evaluate_leave_one_out(
    settings: TrainSettings,
    patients: dict,
    seed: int,
    shuffle: bool = True,
    jobs: int = 1,
) -> list:
    """Hold out each patient in turn; two rows (model, baseline) per patient."""
    order = sorted(patients)
    tasks = [(settings, patients, pid, seed, shuffle) for pid in order]
    if jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            nested = list(pool.map(_loo_one, tasks))
    else:
        nested = [_loo_one(task) for task in tasks]
    return [result for pair in nested for result in pair]
