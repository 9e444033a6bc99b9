"""Feature-pipeline tests: window featurization, the feature CSV format, and
classifier training/prediction dispatch."""

import numpy as np
import pytest

from szdetect.classifiers import Dataset, KnnModel, LrModel, SvmModel
from szdetect.dbn import DbnModel
from szdetect.evaluation import split_single_patient
from szdetect.features import window_features
from szdetect.ingestion import Record, SeizureAnnotations, label_windows
from szdetect.pipeline import (
    EVAL_CSV_HEADER,
    FeatureRow,
    TrainSettings,
    evaluate_leave_one_out,
    evaluate_single_patient,
    feature_header,
    featurize_record,
    predict_labels,
    read_features_csv,
    rows_by_patient,
    rows_to_arrays,
    train_classifier,
    write_features_csv,
)
from szdetect.preprocessing import MinMaxScaler, apply_scaler, normalize_record


def toy_record(seed=0, n_channels=3, seconds=10, rate=32, patient_id="p1"):
    rng = np.random.default_rng(seed)
    channels = rng.normal(size=(n_channels, seconds * rate))
    return Record(patient_id=patient_id, sample_rate=rate, channels=channels)


def toy_annotations(intervals=((2.0, 4.0),)):
    return SeizureAnnotations(intervals=tuple(intervals))


# ---------------------------------------------------------------------------
# Featurization


def test_featurize_dimensions_and_indices():
    record = toy_record(n_channels=3, seconds=10)
    rows = featurize_record(record, toy_annotations())
    assert len(rows) == 10
    assert [row.window_index for row in rows] == list(range(10))
    assert all(row.patient_id == "p1" for row in rows)
    assert all(row.features.shape == (27,) for row in rows)
    assert [row.label for row in rows] == [0, 0, 1, 1, 0, 0, 0, 0, 0, 0]


def test_featurize_matches_manual_path():
    record = toy_record(seed=5)
    rows = featurize_record(record, toy_annotations())
    normalized, _ = normalize_record(record)
    windows = label_windows(normalized, toy_annotations())
    want = np.stack([window_features(w.samples) for w in windows])
    got = np.stack([row.features for row in rows])
    assert np.array_equal(got, want)


def test_featurize_without_annotations_labels_zero():
    rows = featurize_record(toy_record())
    assert all(row.label == 0 for row in rows)


def test_featurize_parallel_matches_serial():
    record = toy_record(seed=7, seconds=12)
    serial = featurize_record(record, toy_annotations(), jobs=1)
    parallel = featurize_record(record, toy_annotations(), jobs=3)
    assert len(serial) == len(parallel)
    for a, b in zip(serial, parallel):
        assert a.label == b.label
        assert np.array_equal(a.features, b.features)


def test_full_channel_count_yields_full_width():
    record = toy_record(n_channels=23, seconds=3, rate=16)
    rows = featurize_record(record)
    assert rows[0].features.shape == (207,)


# ---------------------------------------------------------------------------
# Feature CSV


def test_feature_csv_round_trip(tmp_path):
    record = toy_record(seed=2)
    rows = featurize_record(record, toy_annotations())
    path = tmp_path / "features.csv"
    write_features_csv(path, rows)
    back = read_features_csv(path)
    assert len(back) == len(rows)
    for a, b in zip(back, rows):
        assert a.patient_id == b.patient_id
        assert a.window_index == b.window_index
        assert a.label == b.label
        assert np.array_equal(a.features, b.features)


def test_feature_csv_header_and_determinism(tmp_path):
    rows = featurize_record(toy_record(seed=3))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_features_csv(a, rows)
    write_features_csv(b, rows)
    assert a.read_bytes() == b.read_bytes()
    first = a.read_text().splitlines()[0]
    assert first == feature_header(27)
    assert first.startswith("patient_id,window_index,label,f0,")


def test_feature_csv_with_scaler(tmp_path):
    rows = featurize_record(toy_record(seed=4))
    scaler = MinMaxScaler(
        mins=np.full(27, -5.0), maxes=np.full(27, 5.0)
    )
    path = tmp_path / "scaled.csv"
    write_features_csv(path, rows, scaler=scaler)
    back = read_features_csv(path)
    for raw, cooked in zip(rows, back):
        assert np.allclose(cooked.features, apply_scaler(scaler, raw.features))
        assert np.all(cooked.features >= 0) and np.all(cooked.features <= 1)


def test_feature_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("who,what,when\n")
    with pytest.raises(ValueError):
        read_features_csv(path)


def test_feature_csv_rejects_ragged_row(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text(feature_header(2) + "\np1,0,0,1.0\n")
    with pytest.raises(ValueError):
        read_features_csv(path)


def test_rows_to_arrays_and_grouping():
    rows = [
        FeatureRow("a", 0, 0, np.array([1.0, 2.0])),
        FeatureRow("b", 0, 1, np.array([3.0, 4.0])),
        FeatureRow("a", 1, 1, np.array([5.0, 6.0])),
    ]
    vectors, labels = rows_to_arrays(rows)
    assert vectors.shape == (3, 2)
    assert labels.tolist() == [0, 1, 1]
    grouped = rows_by_patient(rows)
    assert list(grouped) == ["a", "b"]
    vec_a, lab_a = grouped["a"]
    assert vec_a.shape == (2, 2) and lab_a.tolist() == [0, 1]


# ---------------------------------------------------------------------------
# Training dispatch


def split_fixture(seed=0, n=70, d=4):
    rng = np.random.default_rng(seed)
    half = n // 2
    lo = np.clip(rng.normal(0.3, 0.1, size=(half, d)), -3, 3)
    hi = np.clip(rng.normal(0.9, 0.1, size=(n - half, d)), -3, 3)
    vectors = np.vstack([lo, hi])
    labels = np.array([0] * half + [1] * (n - half))
    return split_single_patient(vectors, labels, "p1", seed=1)


@pytest.mark.parametrize(
    "name,expected_type",
    [("knn", KnnModel), ("cnn", KnnModel), ("svm", SvmModel), ("lr", LrModel)],
)
def test_train_classifier_types(name, expected_type):
    split = split_fixture()
    model, scaler = train_classifier(TrainSettings(classifier=name), split, seed=0)
    assert isinstance(model, expected_type)
    if name == "cnn":
        assert model.condensed
    predicted = predict_labels(model, scaler, split.test.vectors)
    assert set(predicted) <= {0, 1}
    assert len(predicted) == len(split.test.labels)


def test_train_dbn_adapts_layer_width():
    split = split_fixture(d=4)
    settings = TrainSettings(classifier="dbn", layer_sizes=(207, 6, 6),
                             pretrain_epochs=1, finetune_iters=2)
    model, scaler = train_classifier(settings, split, seed=0)
    assert isinstance(model, DbnModel)
    assert model.layer_sizes == (4, 6, 6)
    assert model.scaler is not None
    predicted = predict_labels(model, scaler, split.test.vectors)
    assert len(predicted) == len(split.test.labels)


def test_scaler_is_fit_on_train_only():
    split = split_fixture()
    _, scaler = train_classifier(TrainSettings(classifier="knn"), split, seed=0)
    assert np.array_equal(scaler.mins, split.train.vectors.min(axis=0))
    assert np.array_equal(scaler.maxes, split.train.vectors.max(axis=0))


def test_predict_labels_scales_before_dispatch():
    train = Dataset(np.array([[0.0], [1.0]]), np.array([0, 1]))
    model = KnnModel(train=train, k=1)
    scaler = MinMaxScaler(mins=np.array([0.0]), maxes=np.array([100.0]))
    # raw 90 scales to 0.9, nearest stored vector is 1.0
    assert predict_labels(model, scaler, np.array([[90.0]]))[0] == 1
    assert predict_labels(model, None, np.array([[0.2]]))[0] == 0


def test_unknown_classifier_rejected():
    with pytest.raises(ValueError):
        train_classifier(TrainSettings(classifier="forest"), split_fixture(), 0)


def test_display_names():
    assert TrainSettings(classifier="knn", k=3).display_name == "knn3"
    assert TrainSettings(classifier="cnn", k=5).display_name == "cnn5"
    assert TrainSettings(classifier="svm", kernel="poly").display_name == "svm-poly"
    assert TrainSettings(classifier="lr").display_name == "lr"
    assert TrainSettings(classifier="dbn").display_name == "dbn"


# ---------------------------------------------------------------------------
# Evaluation drivers


def test_evaluate_single_patient_rows():
    rng = np.random.default_rng(10)
    n = 70
    vectors = np.vstack([
        rng.normal(0.2, 0.1, size=(35, 3)),
        rng.normal(0.8, 0.1, size=(35, 3)),
    ])
    labels = np.array([0] * 35 + [1] * 35)
    results = evaluate_single_patient(
        TrainSettings(classifier="knn"), vectors, labels, "p7", seed=0
    )
    assert [r.classifier for r in results] == ["knn5", "baseline"]
    assert all(r.protocol == "single" and r.patient == "p7" for r in results)
    assert results[0].metrics.f1 >= 0.8
    row = results[0].csv_row()
    assert row.startswith("single,knn5,p7,")
    assert len(row.split(",")) == len(EVAL_CSV_HEADER.split(","))


def loo_patients(n_patients=3, per=30, seed=0):
    rng = np.random.default_rng(seed)
    patients = {}
    for i in range(n_patients):
        half = per // 2
        vectors = np.vstack([
            rng.normal(0.2, 0.1, size=(half, 3)),
            rng.normal(0.8, 0.1, size=(per - half, 3)),
        ])
        labels = np.array([0] * half + [1] * (per - half))
        patients[f"p{i}"] = (vectors, labels)
    return patients


def test_evaluate_leave_one_out_rows():
    results = evaluate_leave_one_out(
        TrainSettings(classifier="lr", lr_iters=200), loo_patients(), seed=0
    )
    assert len(results) == 6
    assert [r.patient for r in results] == ["p0", "p0", "p1", "p1", "p2", "p2"]
    assert {r.protocol for r in results} == {"loo"}
    model_rows = [r for r in results if r.classifier == "lr"]
    assert all(r.metrics.f1 >= 0.8 for r in model_rows)


def test_evaluate_leave_one_out_parallel_matches_serial():
    settings = TrainSettings(classifier="knn", k=3)
    serial = evaluate_leave_one_out(settings, loo_patients(), seed=1, jobs=1)
    parallel = evaluate_leave_one_out(settings, loo_patients(), seed=1, jobs=3)
    assert [r.csv_row() for r in serial] == [r.csv_row() for r in parallel]
