"""Unit tests for dummy coding, standardization and fold-local scaling."""
import numpy as np
import pytest

from waitsurv.config.loader import load_schema
from waitsurv.domain.errors import DataError
from waitsurv.domain.models import SurvivalDataset
from waitsurv.preprocess.encoding import (
    FoldScaler,
    encode,
    fit_encoding,
    indicator_name,
    load_encoding,
    save_encoding,
)
from waitsurv.preprocess.io import load_csv


@pytest.fixture
def pedestrian_table(pedestrian_files):
    data, schema = pedestrian_files
    return load_csv(data, load_schema(schema))


def test_categorical_columns_drop_reference_level(pedestrian_table):
    dataset, spec = encode(pedestrian_table)

    assert dataset.feature_names == ("gender: male", "age", "lanes", "mobile: yes")
    gender = spec.columns[0]
    assert gender.reference == "female"
    assert gender.emitted == [indicator_name("gender", "male")]
    expected = (pedestrian_table.columns["gender"] == "male").astype(float)
    np.testing.assert_array_equal(dataset.features[:, 0], expected)


def test_numeric_columns_are_standardized(pedestrian_table):
    dataset, _ = encode(pedestrian_table)

    age = dataset.features[:, 1]
    assert age.mean() == pytest.approx(0.0, abs=1e-12)
    assert age.std(ddof=1) == pytest.approx(1.0)


def test_standardize_off_keeps_raw_values(pedestrian_table):
    dataset, spec = encode(pedestrian_table, standardize=False)

    np.testing.assert_array_equal(dataset.features[:, 1], pedestrian_table.columns["age"])
    assert spec.columns[1].mean is None


def test_saved_spec_is_reapplied_without_refitting(tmp_path, pedestrian_table):
    _, spec = encode(pedestrian_table)
    path = tmp_path / "encoding.yaml"
    save_encoding(spec, path)

    loaded = load_encoding(path)
    again, _ = encode(pedestrian_table, spec=loaded)
    first, _ = encode(pedestrian_table, spec=spec)

    assert loaded == spec
    np.testing.assert_array_equal(again.features, first.features)


def test_constant_numeric_column_cannot_be_standardized(pedestrian_table):
    columns = dict(pedestrian_table.columns)
    columns["age"] = np.full(pedestrian_table.n_rows, 33.0)
    table = type(pedestrian_table)(
        schema=pedestrian_table.schema,
        columns=columns,
        row_numbers=pedestrian_table.row_numbers,
    )

    with pytest.raises(DataError, match="constant numeric column"):
        fit_encoding(table)


def test_fold_scaler_uses_training_statistics_only():
    train = SurvivalDataset(
        features=np.array([[1.0, 0.0], [3.0, 1.0], [5.0, 1.0]]),
        feature_names=("a", "flag"),
        durations=[1.0, 2.0, 3.0],
        events=[1, 1, 0],
    )
    test = train.with_features(np.array([[7.0, 1.0], [3.0, 0.0], [1.0, 1.0]]), ["a", "flag"])

    scaler = FoldScaler.fit(train)
    scaled = scaler.transform(test)

    np.testing.assert_allclose(scaled.features[:, 0], [2.0, 0.0, -1.0])
    np.testing.assert_array_equal(scaled.features[:, 1], test.features[:, 1])


def test_fold_scaler_leaves_constant_columns_alone():
    train = SurvivalDataset(
        features=np.array([[2.0], [2.0], [2.0]]),
        feature_names=("c",),
        durations=[1.0, 2.0, 3.0],
        events=[1, 1, 1],
    )

    scaled = FoldScaler.fit(train).transform(train)

    np.testing.assert_array_equal(scaled.features, train.features)
