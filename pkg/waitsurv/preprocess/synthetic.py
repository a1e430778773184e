"""Synthetic proportional-hazards data with a known true log-risk.

Features are i.i.d. standard normal, named x1..xp. Latent event times follow a
proportional-hazards model around an exponential or Weibull baseline;
independent exponential censoring times are drawn with a rate solved so that
the expected censored fraction equals the target.

Draw order from `numpy.random.default_rng(seed)`: features, event uniforms,
censoring times. Same spec, same bytes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd
from scipy import optimize

from waitsurv.config.loader import dump_yaml
from waitsurv.config.models import SyntheticSpec
from waitsurv.domain.errors import CensoringTargetError, DataError
from waitsurv.domain.models import SurvivalDataset
from waitsurv.infrastructure.artifacts import write_csv
from waitsurv.preprocess.io import DURATION_COLUMN, EVENT_COLUMN, write_dataset

logger = logging.getLogger(__name__)

_MAX_BRACKET_DOUBLINGS = 200


@dataclass(frozen=True)
class GroundTruth:
    """What the generator knows and a fitted model should recover."""

    spec: SyntheticSpec
    log_risk: np.ndarray
    event_times: np.ndarray
    censoring_times: np.ndarray
    censoring_hazard: float

    @property
    def coefficients(self) -> Optional[list]:
        return list(self.spec.risk.coefficients) if self.spec.risk.kind == "linear" else None

    @property
    def realized_censoring_rate(self) -> float:
        return float(np.mean(self.censoring_times < self.event_times))


def feature_names(n_features: int) -> tuple:
    return tuple(f"x{j}" for j in range(1, n_features + 1))


def true_log_risk(spec: SyntheticSpec, features: np.ndarray) -> np.ndarray:
    """Evaluate the spec's true log-risk h(x) for every row."""
    risk = spec.risk
    if risk.kind == "linear":
        return features @ np.asarray(risk.coefficients, dtype=np.float64)
    if risk.kind == "quadratic_interaction":
        scale = risk.coefficients[0] if risk.coefficients else 1.0
        return scale * features[:, 0] * features[:, 1]

    frame = pd.DataFrame(features, columns=list(feature_names(features.shape[1])))
    try:
        result = frame.eval(risk.expression)
    except Exception as exc:
        raise DataError(f"cannot evaluate risk expression '{risk.expression}': {exc}") from exc
    values = np.broadcast_to(np.asarray(result, dtype=np.float64), (features.shape[0],)).copy()
    if not np.all(np.isfinite(values)):
        raise DataError(f"risk expression '{risk.expression}' produced non-finite values")
    return values


def _event_times(spec: SyntheticSpec, log_risk: np.ndarray, unit_exponential: np.ndarray) -> np.ndarray:
    baseline = spec.baseline
    if baseline.kind == "exponential":
        # H0(t) = rate * t
        return unit_exponential / (baseline.rate * np.exp(log_risk))
    # H0(t) = (t / scale) ** shape
    return baseline.scale * (unit_exponential / np.exp(log_risk)) ** (1.0 / baseline.shape)


def censoring_hazard_for(event_times: np.ndarray, target: float) -> float:
    """Rate c of exponential censoring with mean_i P(C < T_i) = mean_i (1 - exp(-c T_i)) = target.

    Raises:
        CensoringTargetError: If no finite rate reaches the target.
    """
    if target == 0.0:
        return 0.0

    def gap(rate: float) -> float:
        return float(np.mean(-np.expm1(-rate * event_times))) - target

    upper = 1.0 / float(np.median(event_times))
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        if gap(upper) > 0:
            break
        upper *= 2.0
    else:
        raise CensoringTargetError(f"censoring rate {target} cannot be reached")
    return float(optimize.brentq(gap, 0.0, upper, xtol=1e-14, rtol=1e-12))


def generate_synthetic(spec: SyntheticSpec) -> tuple[SurvivalDataset, GroundTruth]:
    """Draw a dataset from `spec`; fully determined by `spec.seed`."""
    rng = np.random.default_rng(spec.seed)
    features = rng.standard_normal((spec.n_samples, spec.n_features))
    log_risk = true_log_risk(spec, features)
    uniforms = rng.uniform(np.finfo(np.float64).tiny, 1.0, spec.n_samples)
    event_times = _event_times(spec, log_risk, -np.log(uniforms))
    if not np.all(np.isfinite(event_times)) or np.any(event_times <= 0):
        raise DataError("true log-risk is too extreme; event times over/underflow")

    hazard = censoring_hazard_for(event_times, spec.censoring_rate)
    if hazard > 0:
        censoring_times = rng.exponential(1.0 / hazard, spec.n_samples)
    else:
        censoring_times = np.full(spec.n_samples, np.inf)

    events = event_times <= censoring_times
    durations = np.where(events, event_times, censoring_times)
    dataset = SurvivalDataset(
        features=features,
        feature_names=feature_names(spec.n_features),
        durations=durations,
        events=events,
    )
    truth = GroundTruth(
        spec=spec,
        log_risk=log_risk,
        event_times=event_times,
        censoring_times=censoring_times,
        censoring_hazard=hazard,
    )
    logger.info(
        "Generated %d samples (%s risk, %s baseline), censored %.3f (target %.3f)",
        spec.n_samples, spec.risk.kind, spec.baseline.kind,
        truth.realized_censoring_rate, spec.censoring_rate,
    )
    return dataset, truth


def synthetic_schema(dataset: SurvivalDataset) -> Dict[str, object]:
    """Schema mapping that lets every command read a generated CSV."""
    columns = {name: {"type": "numeric"} for name in dataset.feature_names}
    columns[DURATION_COLUMN] = {"type": "numeric"}
    columns[EVENT_COLUMN] = {"type": "numeric"}
    return {
        "duration_column": DURATION_COLUMN,
        "event_column": EVENT_COLUMN,
        "columns": columns,
    }


def write_synthetic(dataset: SurvivalDataset, truth: GroundTruth, out_dir: Path) -> Dict[str, Path]:
    """Write data.csv, schema.yaml, truth.csv and truth.yaml; returns their paths."""
    out_dir = Path(out_dir)
    paths = {
        "data": out_dir / "data.csv",
        "schema": out_dir / "schema.yaml",
        "truth_table": out_dir / "truth.csv",
        "truth": out_dir / "truth.yaml",
    }
    write_dataset(paths["data"], dataset)
    dump_yaml(synthetic_schema(dataset), paths["schema"])
    write_csv(
        paths["truth_table"],
        pd.DataFrame(
            {
                "true_log_risk": truth.log_risk,
                "event_time": truth.event_times,
                "censoring_time": truth.censoring_times,
            }
        ),
    )
    dump_yaml(
        {
            "spec": truth.spec.model_dump(),
            "coefficients": truth.coefficients,
            "censoring_hazard": truth.censoring_hazard,
            "realized_censoring_rate": truth.realized_censoring_rate,
            "n_events": dataset.event_count,
        },
        paths["truth"],
    )
    return paths
