import yaml
from typer.testing import CliRunner

from waitsurv import __version__
from waitsurv import main as waitsurv_main
from waitsurv.domain.errors import (
    ArtifactError,
    DataError,
    FoldError,
    NoEventsError,
    ReproducibilityError,
    SearchError,
    TrainingDivergedError,
)

runner = CliRunner()

SMALL_CONFIG = {
    "general": {"seed": 5, "folds": 3},
    "relief": {"k_neighbors": 4},
    "deep": {"n_features": 2, "network": {"hidden_layers": [3], "epochs": 3, "dropout_rate": 0.0}},
    "search": {
        "budget": 1,
        "n_features": [2],
        "n_layers": [1],
        "layer_width": [3],
        "epochs": [3],
        "dropout_rate": [0.0],
    },
}


def _generate(tmp_path):
    spec = tmp_path / "spec.yaml"
    spec.write_text(
        yaml.safe_dump(
            {"n_samples": 60, "n_features": 3, "risk": {"kind": "linear", "coefficients": [1.0, 0.5, 0.0]}}
        )
    )
    out = tmp_path / "gen"
    result = runner.invoke(waitsurv_main.app, ["generate", "--spec", str(spec), "--out-dir", str(out)])
    assert result.exit_code == 0, result.output
    return out / "data.csv", out / "schema.yaml"


def _config(tmp_path):
    path = tmp_path / "waitsurv.yaml"
    path.write_text(yaml.safe_dump(SMALL_CONFIG))
    return path


def test_version_flag():
    result = runner.invoke(waitsurv_main.app, ["--version"])

    assert result.exit_code == 0
    assert f"waitsurv {__version__}" in result.output


def test_no_arguments_shows_help():
    result = runner.invoke(waitsurv_main.app, [])

    assert "fit-linear" in result.output
    assert "replay" in result.output


def test_generate_reports_censoring(tmp_path):
    spec = tmp_path / "spec.yaml"
    spec.write_text(yaml.safe_dump({"n_samples": 40, "censoring_rate": 0.25, "seed": 1}))

    result = runner.invoke(
        waitsurv_main.app, ["generate", "--spec", str(spec), "--out-dir", str(tmp_path / "out")]
    )

    assert result.exit_code == 0, result.output
    assert "Generated" in result.output
    assert "target" in result.output
    assert "0.250" in result.output
    assert (tmp_path / "out" / "manifest.yaml").exists()


def test_describe_prints_level_table(tmp_path, pedestrian_files):
    data, schema = pedestrian_files

    result = runner.invoke(
        waitsurv_main.app,
        ["describe", "--data", str(data), "--schema", str(schema), "--out-dir", str(tmp_path / "d")],
    )

    assert result.exit_code == 0, result.output
    assert "Average waiting time per level" in result.output
    assert "female" in result.output


def test_fit_linear_prints_cross_validated_c_index(tmp_path):
    data, schema = _generate(tmp_path)

    result = runner.invoke(
        waitsurv_main.app,
        ["fit-linear", "-d", str(data), "-s", str(schema), "-k", "3", "-o", str(tmp_path / "lin")],
    )

    assert result.exit_code == 0, result.output
    assert "mean C-index (3-fold)" in result.output
    assert (tmp_path / "lin" / "bundle" / "bundle.yaml").exists()


def test_rank_full_data_flag(tmp_path):
    data, schema = _generate(tmp_path)

    result = runner.invoke(
        waitsurv_main.app,
        [
            "rank", "-d", str(data), "-s", str(schema),
            "--k-neighbors", "4", "--full-data", "-o", str(tmp_path / "rank"),
        ],
    )

    assert result.exit_code == 0, result.output
    assert "RReliefF feature ranking" in result.output
    manifest = yaml.safe_load((tmp_path / "rank" / "manifest.yaml").read_text())
    assert manifest["config"]["relief"]["per_fold"] is False
    assert manifest["config"]["relief"]["k_neighbors"] == 4


def test_search_quiet_with_config(tmp_path):
    data, schema = _generate(tmp_path)

    result = runner.invoke(
        waitsurv_main.app,
        [
            "search", "-d", str(data), "-s", str(schema), "--quiet",
            "--config", str(_config(tmp_path)), "-o", str(tmp_path / "search"),
        ],
    )

    assert result.exit_code == 0, result.output
    assert "best trial #0" in result.output
    assert (tmp_path / "search" / "trial_log.csv").exists()


def test_evaluate_and_compare(tmp_path):
    data, schema = _generate(tmp_path)
    config = str(_config(tmp_path))
    runner.invoke(
        waitsurv_main.app,
        ["fit-linear", "-d", str(data), "-s", str(schema), "-c", config, "-o", str(tmp_path / "lin")],
    )

    evaluated = runner.invoke(
        waitsurv_main.app,
        ["evaluate", "-b", str(tmp_path / "lin" / "bundle"), "-d", str(data), "-o", str(tmp_path / "ev")],
    )
    compared = runner.invoke(
        waitsurv_main.app,
        ["compare", "-d", str(data), "-s", str(schema), "-c", config, "-o", str(tmp_path / "cmp")],
    )

    assert evaluated.exit_code == 0, evaluated.output
    assert "linear-cph" in evaluated.output
    assert compared.exit_code == 0, compared.output
    assert "Comparing the models" in compared.output
    assert "deep-cph (top 2)" in compared.output


def test_replay_command_round_trip(tmp_path):
    data, schema = _generate(tmp_path)
    runner.invoke(
        waitsurv_main.app,
        ["describe", "-d", str(data), "-s", str(schema), "-o", str(tmp_path / "first")],
    )

    result = runner.invoke(
        waitsurv_main.app,
        ["replay", str(tmp_path / "first" / "manifest.yaml"), "--out-dir", str(tmp_path / "again")],
    )

    assert result.exit_code == 0, result.output
    assert "Reproduced describe" in result.output


def test_missing_input_exits_with_io_code(tmp_path):
    result = runner.invoke(
        waitsurv_main.app,
        ["describe", "-d", str(tmp_path / "absent.csv"), "-s", str(tmp_path / "absent.yaml"), "-o", str(tmp_path / "o")],
    )

    assert result.exit_code == waitsurv_main.EXIT_IO
    assert "Error:" in result.output


def test_invalid_data_exits_with_data_code(tmp_path, pedestrian_files):
    data, schema = pedestrian_files
    data.write_text("gender,age,lanes,mobile,wait,crossed\nrobot,30,2,no,4,1\n")

    result = runner.invoke(
        waitsurv_main.app,
        ["describe", "-d", str(data), "-s", str(schema), "-o", str(tmp_path / "o")],
    )

    assert result.exit_code == waitsurv_main.EXIT_DATA
    assert "unknown level 'robot'" in result.output


def test_invalid_override_exits_with_data_code(tmp_path):
    data, schema = _generate(tmp_path)

    result = runner.invoke(
        waitsurv_main.app,
        ["fit-linear", "-d", str(data), "-s", str(schema), "--folds", "1", "-o", str(tmp_path / "o")],
    )

    assert result.exit_code == waitsurv_main.EXIT_DATA


def test_exit_codes_by_error_family():
    assert waitsurv_main.exit_code_for(DataError("bad")) == 3
    assert waitsurv_main.exit_code_for(NoEventsError()) == 3
    assert waitsurv_main.exit_code_for(TrainingDivergedError(3, float("inf"))) == 4
    assert waitsurv_main.exit_code_for(SearchError("all failed")) == 4
    assert waitsurv_main.exit_code_for(ArtifactError("gone")) == 2
    assert waitsurv_main.exit_code_for(ReproducibilityError("differs")) == 2
    assert waitsurv_main.exit_code_for(FileNotFoundError("x")) == 2
    assert waitsurv_main.exit_code_for(RuntimeError("other")) == 1


def test_fold_errors_use_the_cause_exit_code():
    assert waitsurv_main.exit_code_for(FoldError(2, TrainingDivergedError(1, float("nan")))) == 4
    assert waitsurv_main.exit_code_for(FoldError(0, DataError("bad"))) == 3
