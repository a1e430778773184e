import numpy as np
import pytest
from pydantic import ValidationError

from waitsurv.config.models import DeepModelConfig
from waitsurv.domain.errors import DataError, DimensionMismatchError, NoEventsError
from waitsurv.domain.models import (
    ColumnSpec,
    EncodedColumn,
    EncodingSpec,
    FeatureRanking,
    RiskScores,
    SurvivalDataset,
    TableSchema,
    TrialRecord,
)


def _dataset(**overrides):
    values = dict(
        features=[[1.0, 2.0], [3.0, 4.0]],
        feature_names=("a", "b"),
        durations=[1.0, 2.0],
        events=[1, 0],
    )
    values.update(overrides)
    return SurvivalDataset(**values)


def test_dataset_normalizes_inputs():
    data = _dataset()

    assert data.n_samples == 2
    assert data.n_features == 2
    assert data.events.dtype == np.bool_
    assert data.event_count == 1


def test_dataset_arrays_are_read_only():
    data = _dataset()

    with pytest.raises(ValueError):
        data.features[0, 0] = 9.0


@pytest.mark.parametrize(
    "overrides, error",
    [
        ({"durations": [1.0, 0.0]}, DataError),
        ({"durations": [1.0, float("nan")]}, DataError),
        ({"events": [1, 2]}, DataError),
        ({"feature_names": ("a", "a")}, DataError),
        ({"feature_names": ("a",)}, DimensionMismatchError),
        ({"durations": [1.0, 2.0, 3.0]}, DimensionMismatchError),
        ({"features": [[1.0, float("inf")], [0.0, 0.0]]}, DataError),
    ],
)
def test_dataset_validation(overrides, error):
    with pytest.raises(error):
        _dataset(**overrides)


def test_select_drop_and_subset():
    data = _dataset()

    assert data.select(["b"]).features.tolist() == [[2.0], [4.0]]
    assert data.drop("a").feature_names == ("b",)
    assert data.subset([1]).durations.tolist() == [2.0]
    with pytest.raises(DataError, match="Unknown features: c"):
        data.select(["c"])


def test_require_events():
    with pytest.raises(NoEventsError):
        _dataset(events=[0, 0]).require_events()


def test_risk_scores_must_be_finite():
    with pytest.raises(DataError):
        RiskScores([0.0, float("nan")])
    assert len(RiskScores([1.0, 2.0])) == 2


def test_feature_ranking_rows():
    ranking = FeatureRanking(("a", "b"), [0.1, 0.3])

    assert ranking.rows() == [(1, "b", 0.3), (2, "a", 0.1)]
    with pytest.raises(DimensionMismatchError):
        FeatureRanking(("a",), [0.1, 0.2])


def test_categorical_column_needs_two_unique_levels():
    with pytest.raises(ValidationError):
        ColumnSpec(type="categorical", levels=["only"])
    with pytest.raises(ValidationError):
        ColumnSpec(type="categorical", levels=["a", "a"])
    with pytest.raises(ValidationError):
        ColumnSpec(type="numeric", levels=["a", "b"])


def test_schema_designations_must_be_numeric():
    with pytest.raises(ValidationError, match="must be numeric"):
        TableSchema(
            duration_column="wait",
            event_column="crossed",
            columns={
                "wait": {"type": "numeric"},
                "crossed": {"type": "categorical", "levels": ["no", "yes"]},
            },
        )


def test_schema_covariates_exclude_targets():
    schema = TableSchema(
        duration_column="wait",
        event_column="crossed",
        columns={"age": {"type": "numeric"}, "wait": {"type": "numeric"}, "crossed": {"type": "numeric"}},
    )

    assert schema.covariate_columns == ["age"]


def test_encoding_names_must_not_collide():
    with pytest.raises(ValidationError, match="collide"):
        EncodingSpec(
            columns=[
                EncodedColumn(name="a", kind="numeric", emitted=["x"]),
                EncodedColumn(name="b", kind="numeric", emitted=["x"]),
            ]
        )


def test_trial_record_mean_is_fold_average():
    record = TrialRecord(trial_index=0, seed=1, model=DeepModelConfig(), fold_c_indices=[0.6, 0.8])

    assert record.mean_c_index == pytest.approx(0.7)
    with pytest.raises(ValidationError):
        TrialRecord(trial_index=0, seed=1, model=DeepModelConfig(), fold_c_indices=[0.6], mean_c_index=0.9)


def test_failed_trial_needs_no_folds():
    record = TrialRecord(trial_index=3, seed=1, model=DeepModelConfig(), status="failed", error="diverged")

    assert record.mean_c_index is None


def test_trial_record_keeps_settings_as_plain_mapping():
    settings = DeepModelConfig(n_features=3)

    record = TrialRecord(trial_index=0, seed=1, model=settings, fold_c_indices=[0.6])

    assert record.model == settings.model_dump()
    assert record.model["network"]["hidden_layers"] == [32, 32]
