"""Every command, re-run from its manifest, rewrites byte-identical outputs."""
import pytest
import yaml
from typer.testing import CliRunner

from waitsurv import main as waitsurv_main
from waitsurv.infrastructure.artifacts import digest_tree
from waitsurv.pipeline.runner import MANIFEST, VOLATILE_OUTPUTS, load_manifest

pytestmark = [pytest.mark.slow, pytest.mark.integration]

runner = CliRunner()

CONFIG = {
    "general": {"seed": 21, "folds": 3},
    "relief": {"k_neighbors": 5},
    "deep": {"n_features": 2, "network": {"hidden_layers": [6, 6], "epochs": 20, "dropout_rate": 0.1}},
    "search": {
        "budget": 3,
        "n_features": "1..3 int",
        "n_layers": [1, 2],
        "layer_width": [4, 6],
        "epochs": [10],
        "learning_rate": "1e-4..1e-3 log",
    },
}


def _invoke(*args):
    result = runner.invoke(waitsurv_main.app, [str(a) for a in args])
    assert result.exit_code == 0, result.output
    return result


@pytest.fixture
def recorded_runs(tmp_path):
    config = tmp_path / "waitsurv.yaml"
    config.write_text(yaml.safe_dump(CONFIG))
    spec = tmp_path / "spec.yaml"
    spec.write_text(
        yaml.safe_dump(
            {
                "n_samples": 150,
                "n_features": 4,
                "risk": {"kind": "linear", "coefficients": [1.0, -0.5, 0.0, 0.3]},
                "baseline": {"kind": "weibull", "shape": 1.5, "scale": 10.0},
                "censoring_rate": 0.25,
                "seed": 7,
            }
        )
    )
    runs = {name: tmp_path / "runs" / name for name in
            ("generate", "describe", "fit-linear", "rank", "search", "evaluate", "compare")}

    _invoke("generate", "--spec", spec, "--out-dir", runs["generate"])
    data = ["--data", runs["generate"] / "data.csv", "--schema", runs["generate"] / "schema.yaml"]
    common = ["--config", config]
    _invoke("describe", *data, *common, "--out-dir", runs["describe"])
    _invoke("fit-linear", *data, *common, "--out-dir", runs["fit-linear"])
    _invoke("rank", *data, *common, "--out-dir", runs["rank"])
    _invoke("search", *data, *common, "--quiet", "--jobs", 2, "--out-dir", runs["search"])
    _invoke(
        "evaluate",
        "--data", runs["generate"] / "data.csv",
        "--bundle", runs["fit-linear"] / "bundle",
        "--bundle", runs["search"] / "bundle",
        *common,
        "--out-dir", runs["evaluate"],
    )
    _invoke("compare", *data, *common, "--out-dir", runs["compare"])
    return tmp_path, runs


def test_every_command_replays_byte_identically(recorded_runs):
    tmp_path, runs = recorded_runs

    for name, out_dir in runs.items():
        manifest = load_manifest(out_dir / MANIFEST)
        assert manifest.status == "ok", name
        assert manifest.output_digests, name

        fresh = tmp_path / "replayed" / name
        _invoke("replay", out_dir / MANIFEST, "--out-dir", fresh)

        assert digest_tree(fresh, VOLATILE_OUTPUTS) == digest_tree(out_dir, VOLATILE_OUTPUTS), name


def test_same_seed_generates_identical_data(recorded_runs, tmp_path):
    _, runs = recorded_runs
    again = tmp_path / "again"

    _invoke("generate", "--spec", tmp_path / "spec.yaml", "--out-dir", again)

    assert (again / "data.csv").read_bytes() == (runs["generate"] / "data.csv").read_bytes()
