"""Dataset splitting and metric computation for the two study protocols."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifiers import Dataset


@dataclass(frozen=True)
class Split:
    train: Dataset
    validation: Dataset
    test: Dataset
    train_patients: tuple
    validation_patients: tuple
    test_patients: tuple


@dataclass(frozen=True)
class Metrics:
    """Confusion counts with the usual derived scores.

    Ratios whose denominator is zero are reported as 0.
    """

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def precision(self) -> float:
        denom = self.tp + self.fp
        return self.tp / denom if denom else 0.0

    @property
    def recall(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.n if self.n else 0.0


def compute_metrics(predicted, actual) -> Metrics:
    predicted = np.asarray(predicted, dtype=int)
    actual = np.asarray(actual, dtype=int)
    if predicted.shape != actual.shape:
        raise ValueError("prediction and label arrays differ in length")
    return Metrics(
        tp=int(np.sum((predicted == 1) & (actual == 1))),
        fp=int(np.sum((predicted == 1) & (actual == 0))),
        fn=int(np.sum((predicted == 0) & (actual == 1))),
        tn=int(np.sum((predicted == 0) & (actual == 0))),
    )


def majority_baseline(labels) -> Metrics:
    """Score a constant predictor of the majority label, ties toward 0."""
    labels = np.asarray(labels, dtype=int)
    if len(labels) == 0:
        raise ValueError("labels must be nonempty")
    ones = int(np.sum(labels == 1))
    majority = 1 if 2 * ones > len(labels) else 0
    return compute_metrics(np.full(len(labels), majority, dtype=int), labels)


def _check_train_classes(labels) -> None:
    present = set(int(v) for v in labels)
    if present != {0, 1}:
        raise ValueError("training partition lacks one of the two classes")


def split_single_patient(
    vectors, labels, patient_id: str, seed: int, shuffle: bool = True
) -> Split:
    """Partition one patient's windows into train, validation, and test.

    Validation and test each take one seventh of the windows; training
    keeps the remainder.  With shuffling off the partitions are
    contiguous in the original window order.
    """
    vectors = np.asarray(vectors, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n = len(labels)
    n_part = n // 7
    if n_part == 0:
        raise ValueError("too few windows to split seven ways")
    order = np.arange(n)
    if shuffle:
        order = np.random.default_rng(seed).permutation(n)
    n_train = n - 2 * n_part
    train_idx = order[:n_train]
    val_idx = order[n_train : n_train + n_part]
    test_idx = order[n_train + n_part :]
    _check_train_classes(labels[train_idx])
    pid = (patient_id,)
    return Split(
        train=Dataset(vectors[train_idx], labels[train_idx]),
        validation=Dataset(vectors[val_idx], labels[val_idx]),
        test=Dataset(vectors[test_idx], labels[test_idx]),
        train_patients=pid,
        validation_patients=pid,
        test_patients=pid,
    )


def split_leave_one_out(
    patients: dict, test_patient: str, seed: int, shuffle: bool = True
) -> Split:
    """Hold one patient out entirely; split the rest four to one.

    ``patients`` maps patient id to a ``(vectors, labels)`` pair.  The
    held-out patient supplies the whole test set.  The pooled remaining
    windows are split with one fifth for validation and the rest for
    training.
    """
    if test_patient not in patients:
        raise ValueError(f"unknown test patient {test_patient!r}")
    rest = sorted(pid for pid in patients if pid != test_patient)
    if not rest:
        raise ValueError("leave-one-out needs at least two patients")
    vec_parts = []
    label_parts = []
    for pid in rest:
        vectors, labels = patients[pid]
        vec_parts.append(np.asarray(vectors, dtype=float))
        label_parts.append(np.asarray(labels, dtype=int))
    pool_vec = np.concatenate(vec_parts)
    pool_labels = np.concatenate(label_parts)
    n = len(pool_labels)
    n_val = n // 5
    if n_val == 0:
        raise ValueError("too few pooled windows to split five ways")
    order = np.arange(n)
    if shuffle:
        order = np.random.default_rng(seed).permutation(n)
    val_idx = order[n - n_val :]
    train_idx = order[: n - n_val]
    _check_train_classes(pool_labels[train_idx])
    test_vec, test_labels = patients[test_patient]
    return Split(
        train=Dataset(pool_vec[train_idx], pool_labels[train_idx]),
        validation=Dataset(pool_vec[val_idx], pool_labels[val_idx]),
        test=Dataset(
            np.asarray(test_vec, dtype=float), np.asarray(test_labels, dtype=int)
        ),
        train_patients=tuple(rest),
        validation_patients=tuple(rest),
        test_patients=(test_patient,),
    )
