"""Split-protocol and metric tests."""

from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from szdetect.evaluation import (
    Metrics,
    compute_metrics,
    majority_baseline,
    split_leave_one_out,
    split_single_patient,
)


def labeled_vectors(n, seed=0, positive_fraction=0.3):
    """Identifiable one-dim vectors 0..n-1 with a deterministic label mix."""
    rng = np.random.default_rng(seed)
    vectors = np.arange(n, dtype=float).reshape(-1, 1)
    labels = (rng.uniform(size=n) < positive_fraction).astype(int)
    labels[0], labels[1] = 0, 1
    return vectors, labels


def row_multiset(*datasets):
    return Counter(float(v[0]) for ds in datasets for v in ds.vectors)


# ---------------------------------------------------------------------------
# Single-patient splits


def test_single_patient_700_windows():
    vectors, labels = labeled_vectors(700)
    split = split_single_patient(vectors, labels, "p1", seed=0)
    assert len(split.train.labels) == 500
    assert len(split.validation.labels) == 100
    assert len(split.test.labels) == 100
    assert split.train_patients == split.test_patients == ("p1",)


def test_single_patient_seven_windows():
    vectors = np.arange(7, dtype=float).reshape(-1, 1)
    labels = np.array([0, 1, 0, 1, 0, 1, 0])
    split = split_single_patient(vectors, labels, "p1", seed=3)
    assert len(split.train.labels) == 5
    assert len(split.validation.labels) == 1
    assert len(split.test.labels) == 1


def test_single_patient_remainder_goes_to_train():
    vectors, labels = labeled_vectors(705)
    split = split_single_patient(vectors, labels, "p1", seed=0)
    assert len(split.train.labels) == 505
    assert len(split.validation.labels) == 100
    assert len(split.test.labels) == 100


def test_single_patient_same_seed_identical():
    vectors, labels = labeled_vectors(70)
    a = split_single_patient(vectors, labels, "p1", seed=11)
    b = split_single_patient(vectors, labels, "p1", seed=11)
    assert np.array_equal(a.train.vectors, b.train.vectors)
    assert np.array_equal(a.test.vectors, b.test.vectors)
    c = split_single_patient(vectors, labels, "p1", seed=12)
    assert not np.array_equal(a.train.vectors, c.train.vectors)


def test_single_patient_partition_is_exact():
    vectors, labels = labeled_vectors(73)
    split = split_single_patient(vectors, labels, "p1", seed=5)
    assert row_multiset(split.train, split.validation, split.test) == Counter(
        float(v) for v in range(73)
    )


def test_single_patient_contiguous_mode():
    vectors, labels = labeled_vectors(14)
    split = split_single_patient(vectors, labels, "p1", seed=0, shuffle=False)
    assert [float(v[0]) for v in split.train.vectors] == [float(i) for i in range(10)]
    assert [float(v[0]) for v in split.validation.vectors] == [10.0, 11.0]
    assert [float(v[0]) for v in split.test.vectors] == [12.0, 13.0]


def test_single_patient_train_must_hold_both_classes():
    vectors = np.arange(14, dtype=float).reshape(-1, 1)
    labels = np.zeros(14, dtype=int)
    labels[-1] = 1  # lone positive lands in test when contiguous
    with pytest.raises(ValueError):
        split_single_patient(vectors, labels, "p1", seed=0, shuffle=False)


def test_single_patient_too_few_windows():
    with pytest.raises(ValueError):
        split_single_patient(np.zeros((6, 1)), [0, 1, 0, 1, 0, 1], "p1", seed=0)


# ---------------------------------------------------------------------------
# Leave-one-out splits


def patient_map(sizes, seed=0):
    patients = {}
    offset = 0
    for idx, size in enumerate(sizes):
        vectors = (offset + np.arange(size, dtype=float)).reshape(-1, 1)
        labels = np.array([i % 2 for i in range(size)])
        patients[f"p{idx}"] = (vectors, labels)
        offset += size
    return patients


def test_loo_two_patients_five_windows_each():
    patients = patient_map([5, 5])
    split = split_leave_one_out(patients, "p1", seed=0)
    assert len(split.train.labels) == 4
    assert len(split.validation.labels) == 1
    assert len(split.test.labels) == 5
    assert split.test_patients == ("p1",)
    assert split.train_patients == ("p0",)


def test_loo_test_set_is_whole_patient():
    patients = patient_map([12, 9, 14])
    split = split_leave_one_out(patients, "p2", seed=1)
    want, _ = patients["p2"]
    assert np.array_equal(split.test.vectors, want)
    assert len(split.test.labels) == 14


def test_loo_ten_patients_test_size_exact():
    sizes = [10, 11, 12, 13, 14, 15, 16, 17, 18, 19]
    patients = patient_map(sizes)
    for idx, size in enumerate(sizes):
        split = split_leave_one_out(patients, f"p{idx}", seed=2)
        assert len(split.test.labels) == size


def test_loo_excludes_test_patient_from_pool():
    patients = patient_map([8, 8, 8])
    split = split_leave_one_out(patients, "p1", seed=3)
    test_rows = {float(v[0]) for v in patients["p1"][0]}
    pooled = row_multiset(split.train, split.validation)
    assert not test_rows & set(pooled)
    want = Counter(
        float(v[0]) for pid in ("p0", "p2") for v in patients[pid][0]
    )
    assert pooled == want


def test_loo_four_to_one_pool_split():
    patients = patient_map([40, 40, 20])
    split = split_leave_one_out(patients, "p2", seed=4)
    assert len(split.train.labels) == 64
    assert len(split.validation.labels) == 16


def test_loo_deterministic_per_seed():
    patients = patient_map([15, 15, 15])
    a = split_leave_one_out(patients, "p0", seed=9)
    b = split_leave_one_out(patients, "p0", seed=9)
    assert np.array_equal(a.train.vectors, b.train.vectors)


def test_loo_unknown_patient():
    with pytest.raises(ValueError):
        split_leave_one_out(patient_map([5, 5]), "p9", seed=0)


def test_loo_needs_two_patients():
    with pytest.raises(ValueError):
        split_leave_one_out(patient_map([10]), "p0", seed=0)


@settings(max_examples=60, deadline=None)
@given(
    sizes=st.lists(st.integers(6, 20), min_size=2, max_size=5),
    seed=st.integers(0, 1000),
)
def test_loo_partition_property(sizes, seed):
    patients = patient_map(sizes)
    held = f"p{len(sizes) - 1}"
    split = split_leave_one_out(patients, held, seed=seed)
    pooled = row_multiset(split.train, split.validation)
    want = Counter(
        float(v[0])
        for pid, (vectors, _) in patients.items()
        if pid != held
        for v in vectors
    )
    assert pooled == want
    assert len(split.validation.labels) == sum(sizes[:-1]) // 5


# ---------------------------------------------------------------------------
# Metrics


def test_metrics_hand_confusion_matrix():
    got = compute_metrics([1, 1, 1, 0, 0, 0, 0, 0, 0, 0],
                          [1, 1, 0, 1, 0, 0, 0, 0, 0, 0])
    assert (got.tp, got.fp, got.fn, got.tn) == (2, 1, 1, 6)
    assert got.precision == pytest.approx(2 / 3)
    assert got.recall == pytest.approx(2 / 3)
    assert got.f1 == pytest.approx(2 / 3)
    assert got.accuracy == pytest.approx(0.8)


def test_metrics_perfect_predictions():
    got = compute_metrics([1, 0, 1, 0], [1, 0, 1, 0])
    assert got.precision == got.recall == got.f1 == got.accuracy == 1.0


def test_metrics_all_negative_on_skewed_labels():
    labels = [1] * 10 + [0] * 90
    got = compute_metrics([0] * 100, labels)
    assert got.accuracy == pytest.approx(0.9)
    assert got.f1 == 0.0
    assert got.precision == 0.0 and got.recall == 0.0


def test_metrics_length_mismatch():
    with pytest.raises(ValueError):
        compute_metrics([0, 1], [0, 1, 0])


def test_metrics_counts_sum_and_accuracy_identity():
    rng = np.random.default_rng(0)
    predicted = rng.integers(0, 2, 57)
    actual = rng.integers(0, 2, 57)
    got = compute_metrics(predicted, actual)
    assert got.n == 57
    assert got.accuracy == (got.tp + got.tn) / 57


def test_metrics_invariant_under_sample_order():
    rng = np.random.default_rng(1)
    predicted = rng.integers(0, 2, 40)
    actual = rng.integers(0, 2, 40)
    base = compute_metrics(predicted, actual)
    order = rng.permutation(40)
    again = compute_metrics(predicted[order], actual[order])
    assert base == again


def test_zero_denominators_report_zero():
    empty_pos = compute_metrics([0, 0], [0, 0])
    assert empty_pos.precision == 0.0
    assert empty_pos.recall == 0.0
    assert empty_pos.f1 == 0.0
    assert empty_pos.accuracy == 1.0
    assert Metrics(0, 0, 0, 0).accuracy == 0.0


# ---------------------------------------------------------------------------
# Majority baseline


def test_baseline_on_85_percent_negative():
    labels = [0] * 85 + [1] * 15
    got = majority_baseline(labels)
    assert got.accuracy == pytest.approx(0.85)
    assert got.f1 == 0.0


def test_baseline_all_positive():
    got = majority_baseline([1, 1, 1, 1])
    assert got.accuracy == 1.0
    assert got.f1 == 1.0


def test_baseline_tie_breaks_negative():
    got = majority_baseline([0, 1, 0, 1])
    assert got.tp == 0 and got.tn == 2
    assert got.accuracy == pytest.approx(0.5)


def test_baseline_empty_rejected():
    with pytest.raises(ValueError):
        majority_baseline([])
