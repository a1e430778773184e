import numpy as np
import pytest
import yaml
from pathlib import Path

from waitsurv.config.models import AppConfig, SyntheticSpec
from waitsurv.domain.models import SurvivalDataset
from waitsurv.infrastructure.event_bus import EventBus
from waitsurv.preprocess.synthetic import generate_synthetic

# ============================================================================
# Configuration Fixtures
# ============================================================================

@pytest.fixture
def sample_config():
    """A small, fast AppConfig for command and pipeline tests."""
    return AppConfig(
        general={"seed": 3, "folds": 3, "jobs": 1},
        relief={"k_neighbors": 5},
        deep={
            "n_features": 2,
            "network": {
                "hidden_layers": [4],
                "dropout_rate": 0.0,
                "learning_rate": 1e-3,
                "epochs": 5,
            },
        },
        search={
            "budget": 2,
            "n_features": [2],
            "n_layers": [1],
            "layer_width": [4],
            "dropout_rate": [0.0],
            "batch_norm": [False],
            "epochs": [3],
        },
    )


@pytest.fixture
def bus():
    return EventBus()


# ============================================================================
# Dataset Fixtures
# ============================================================================

def make_dataset(n=200, coefficients=(1.0, -0.5), censoring_rate=0.2, seed=0) -> SurvivalDataset:
    spec = SyntheticSpec(
        n_samples=n,
        n_features=len(coefficients),
        risk={"kind": "linear", "coefficients": list(coefficients)},
        censoring_rate=censoring_rate,
        seed=seed,
    )
    dataset, _ = generate_synthetic(spec)
    return dataset


@pytest.fixture
def linear_dataset():
    """n=200 proportional-hazards sample with log-risk x1 - 0.5 x2."""
    return make_dataset()


@pytest.fixture
def tiny_dataset():
    """Three observed events at t=1,2,3 with x=(1,0,1)."""
    return SurvivalDataset(
        features=np.array([[1.0], [0.0], [1.0]]),
        feature_names=("x",),
        durations=np.array([1.0, 2.0, 3.0]),
        events=np.array([True, True, True]),
    )


PEDESTRIAN_SCHEMA = {
    "duration_column": "wait",
    "event_column": "crossed",
    "columns": {
        "gender": {"type": "categorical", "levels": ["female", "male"]},
        "age": {"type": "numeric"},
        "lanes": {"type": "numeric"},
        "mobile": {"type": "categorical", "levels": ["no", "yes"]},
        "wait": {"type": "numeric"},
        "crossed": {"type": "numeric"},
    },
}


@pytest.fixture
def pedestrian_files(tmp_path) -> tuple[Path, Path]:
    """A 60-row pedestrian-style CSV (categorical + numeric covariates) and its schema."""
    rng = np.random.default_rng(11)
    n = 60
    gender = rng.choice(["female", "male"], n)
    age = rng.integers(18, 70, n)
    lanes = rng.choice([2, 4, 6], n)
    mobile = rng.choice(["no", "yes"], n)
    risk = 0.03 * (age - 40) - 0.2 * lanes + 0.5 * (mobile == "no")
    wait = np.round(rng.exponential(1.0, n) / (0.1 * np.exp(risk)), 2) + 0.5
    crossed = (rng.uniform(size=n) > 0.2).astype(int)

    data = tmp_path / "waits.csv"
    lines = ["gender,age,lanes,mobile,wait,crossed"]
    for row in zip(gender, age, lanes, mobile, wait, crossed):
        lines.append(",".join(str(v) for v in row))
    data.write_text("\n".join(lines) + "\n", encoding="utf-8")

    schema = tmp_path / "schema.yaml"
    schema.write_text(yaml.safe_dump(PEDESTRIAN_SCHEMA, sort_keys=False), encoding="utf-8")
    return data, schema


@pytest.fixture
def dataset_factory():
    """make_dataset(n, coefficients, censoring_rate, seed) for tests needing several draws."""
    return make_dataset
