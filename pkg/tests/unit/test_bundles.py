"""Unit tests for saving, loading and scoring model bundles."""
import numpy as np
import pytest
import yaml

from waitsurv.config.loader import load_schema
from waitsurv.config.models import DeepModelConfig, LinearConfig, NetworkConfig, ReliefConfig
from waitsurv.domain.errors import ArtifactError
from waitsurv.pipeline.bundles import load_bundle, load_linear_fit, save_bundle, save_linear_fit, score_table
from waitsurv.pipeline.models import DeepCoxPipeline, LinearCoxPipeline
from waitsurv.preprocess.encoding import encode
from waitsurv.preprocess.io import load_csv
from waitsurv.survival import linear


@pytest.fixture
def pedestrian(pedestrian_files):
    data, schema_path = pedestrian_files
    schema = load_schema(schema_path)
    table = load_csv(data, schema)
    dataset, encoding = encode(table, standardize=False)
    return schema, table, dataset, encoding


def _deep_pipeline():
    model = DeepModelConfig(
        n_features=2,
        network=NetworkConfig(hidden_layers=[3], dropout_rate=0.1, batch_norm=True, epochs=4),
    )
    return DeepCoxPipeline(model, ReliefConfig(k_neighbors=5), seed=4)


def test_linear_bundle_round_trip_scores_identically(tmp_path, pedestrian):
    schema, table, dataset, encoding = pedestrian
    model = LinearCoxPipeline(LinearConfig(backward=False)).fit(dataset)

    save_bundle(model, schema, encoding, tmp_path / "bundle")
    bundle = load_bundle(tmp_path / "bundle")

    assert bundle.kind == "linear"
    assert bundle.label == "linear-cph"
    np.testing.assert_array_equal(score_table(bundle, table).log_risk, model.predict(dataset).log_risk)
    assert (tmp_path / "bundle" / "coefficients.csv").exists()


def test_deep_bundle_round_trip_scores_identically(tmp_path, pedestrian):
    schema, table, dataset, encoding = pedestrian
    model = _deep_pipeline().fit(dataset)

    save_bundle(model, schema, encoding, tmp_path / "bundle")
    bundle = load_bundle(tmp_path / "bundle")

    assert bundle.kind == "deep"
    assert bundle.model.selected == model.selected
    assert bundle.model.ranking.ranked_names == model.ranking.ranked_names
    assert bundle.label == "deep-cph (2 features)"
    np.testing.assert_array_equal(score_table(bundle, table).log_risk, model.predict(dataset).log_risk)


def test_null_model_bundle(tmp_path, pedestrian):
    schema, table, dataset, encoding = pedestrian
    model = LinearCoxPipeline(LinearConfig(alpha=1e-300)).fit(dataset)
    assert model.fit is None

    save_bundle(model, schema, encoding, tmp_path / "bundle")
    bundle = load_bundle(tmp_path / "bundle")

    assert not (tmp_path / "bundle" / "fit.yaml").exists()
    np.testing.assert_array_equal(score_table(bundle, table).log_risk, np.zeros(table.n_rows))


def test_linear_fit_round_trip_restores_statistics(tmp_path, linear_dataset):
    fit = linear.fit(linear_dataset)

    save_linear_fit(fit, tmp_path)
    loaded = load_linear_fit(tmp_path / "fit.yaml")

    np.testing.assert_array_equal(loaded.coefficients, fit.coefficients)
    np.testing.assert_array_equal(loaded.standard_errors, fit.standard_errors)
    np.testing.assert_allclose(loaded.p_values, fit.p_values)
    np.testing.assert_array_equal(loaded.baseline.cumulative_hazard, fit.baseline.cumulative_hazard)


def test_bundle_bytes_are_reproducible(tmp_path, pedestrian):
    schema, _, dataset, encoding = pedestrian
    model = _deep_pipeline().fit(dataset)

    save_bundle(model, schema, encoding, tmp_path / "a")
    save_bundle(model, schema, encoding, tmp_path / "b")

    for name in ("bundle.yaml", "scaler.yaml", "network.npz", "ranking.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_missing_directory_raises(tmp_path):
    with pytest.raises(ArtifactError, match="not found"):
        load_bundle(tmp_path / "absent")


def test_missing_file_raises(tmp_path, pedestrian):
    schema, _, dataset, encoding = pedestrian
    save_bundle(LinearCoxPipeline(LinearConfig(backward=False)).fit(dataset), schema, encoding, tmp_path)
    (tmp_path / "scaler.yaml").unlink()

    with pytest.raises(ArtifactError, match="scaler.yaml"):
        load_bundle(tmp_path)


def _rewrite_meta(path, **changes):
    meta = yaml.safe_load((path / "bundle.yaml").read_text())
    meta.update(changes)
    (path / "bundle.yaml").write_text(yaml.safe_dump(meta))


def test_other_format_version_raises(tmp_path, pedestrian):
    schema, _, dataset, encoding = pedestrian
    save_bundle(LinearCoxPipeline(LinearConfig(backward=False)).fit(dataset), schema, encoding, tmp_path)
    _rewrite_meta(tmp_path, format_version=2)

    with pytest.raises(ArtifactError, match="format version 2"):
        load_bundle(tmp_path)


def test_selected_features_must_match_network_inputs(tmp_path, pedestrian):
    schema, _, dataset, encoding = pedestrian
    save_bundle(_deep_pipeline().fit(dataset), schema, encoding, tmp_path)
    _rewrite_meta(tmp_path, selected=["age"])

    with pytest.raises(ArtifactError, match="1 selected features"):
        load_bundle(tmp_path)


def test_unknown_kind_raises(tmp_path, pedestrian):
    schema, _, dataset, encoding = pedestrian
    save_bundle(LinearCoxPipeline(LinearConfig(backward=False)).fit(dataset), schema, encoding, tmp_path)
    _rewrite_meta(tmp_path, kind="forest")

    with pytest.raises(ArtifactError, match="unknown bundle kind"):
        load_bundle(tmp_path)
