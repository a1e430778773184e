"""Model bundles: a directory holding everything needed to score new rows.

Layout:
    bundle.yaml      kind, format version, input features, model covariates
    schema.yaml      column schema the data must follow
    encoding.yaml    dummy coding (numeric columns raw)
    scaler.yaml      training-set z-score statistics
    linear:  fit.yaml + coefficients.csv (absent for the null model)
    deep:    network.npz + ranking.csv (when a ranking selected the inputs)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd
import yaml
from scipy import stats

from waitsurv import __version__
from waitsurv.config.loader import dump_yaml, load_schema
from waitsurv.domain.errors import ArtifactError
from waitsurv.domain.models import (
    BaselineHazard,
    EncodingSpec,
    FeatureRanking,
    RawTable,
    RiskScores,
    TableSchema,
)
from waitsurv.infrastructure.artifacts import write_csv, write_rows
from waitsurv.pipeline.models import DeepCoxModel, LinearCoxModel
from waitsurv.preprocess.encoding import FoldScaler, apply_encoding, load_encoding, save_encoding
from waitsurv.survival import network
from waitsurv.survival.linear import LinearCphFit

logger = logging.getLogger(__name__)

BUNDLE_FORMAT_VERSION = 1

FittedModel = Union[LinearCoxModel, DeepCoxModel]


@dataclass(frozen=True)
class ModelBundle:
    kind: str
    model: FittedModel
    schema: TableSchema
    encoding: EncodingSpec
    path: Path

    @property
    def label(self) -> str:
        if self.kind == "linear":
            return "linear-cph"
        return f"deep-cph ({len(self.model.covariates)} features)"


def _read_yaml(path: Path) -> Dict[str, Any]:
    if not path.is_file():
        raise ArtifactError(f"Bundle file missing: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ArtifactError(f"{path} must be a YAML mapping")
    return data


def _floats(values: np.ndarray) -> list:
    return [float(v) for v in np.asarray(values).reshape(-1)]


def save_linear_fit(fit: LinearCphFit, out_dir: Path) -> None:
    """fit.yaml (everything needed to rebuild the fit) and coefficients.csv (report table)."""
    out_dir = Path(out_dir)
    dump_yaml(
        {
            "feature_names": list(fit.feature_names),
            "coefficients": _floats(fit.coefficients),
            "standard_errors": _floats(fit.standard_errors),
            "log_likelihood": float(fit.log_likelihood),
            "iterations": int(fit.iterations),
            "converged": bool(fit.converged),
            "gradient_norm": float(fit.gradient_norm),
            "ridge": fit.ridge,
            "baseline": {
                "event_times": _floats(fit.baseline.event_times),
                "cumulative_hazard": _floats(fit.baseline.cumulative_hazard),
            },
        },
        out_dir / "fit.yaml",
    )
    write_rows(out_dir / "coefficients.csv", fit.summary_rows())


def load_linear_fit(path: Path) -> LinearCphFit:
    data = _read_yaml(Path(path))
    try:
        coefficients = np.asarray(data["coefficients"], dtype=np.float64)
        standard_errors = np.asarray(data["standard_errors"], dtype=np.float64)
        z_scores = coefficients / standard_errors
        return LinearCphFit(
            feature_names=tuple(data["feature_names"]),
            coefficients=coefficients,
            standard_errors=standard_errors,
            hazard_ratios=np.exp(coefficients),
            z_scores=z_scores,
            p_values=2.0 * stats.norm.sf(np.abs(z_scores)),
            log_likelihood=float(data["log_likelihood"]),
            iterations=int(data["iterations"]),
            converged=bool(data["converged"]),
            gradient_norm=float(data["gradient_norm"]),
            baseline=BaselineHazard(**data["baseline"]),
            ridge=data.get("ridge"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"{path}: invalid linear fit: {exc}") from exc


def _save_scaler(scaler: FoldScaler, path: Path) -> None:
    dump_yaml(
        {
            "feature_names": list(scaler.feature_names),
            "means": _floats(scaler.means),
            "scales": _floats(scaler.scales),
        },
        path,
    )


def _load_scaler(path: Path) -> FoldScaler:
    data = _read_yaml(path)
    try:
        return FoldScaler(
            feature_names=tuple(data["feature_names"]),
            means=np.asarray(data["means"], dtype=np.float64),
            scales=np.asarray(data["scales"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"{path}: invalid scaler: {exc}") from exc


def ranking_frame(ranking: FeatureRanking) -> pd.DataFrame:
    return pd.DataFrame(ranking.rows(), columns=["rank", "feature", "weight"])


def save_bundle(
    model: FittedModel,
    schema: TableSchema,
    encoding: EncodingSpec,
    out_dir: Path,
) -> Path:
    """Write `model` and its preprocessing into `out_dir`; returns the directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dump_yaml(
        {
            "kind": model.kind,
            "format_version": BUNDLE_FORMAT_VERSION,
            "version": __version__,
            "feature_names": list(model.scaler.feature_names),
            "selected": model.covariates,
            "null_model": model.kind == "linear" and model.fit is None,
        },
        out_dir / "bundle.yaml",
    )
    dump_yaml(schema.model_dump(), out_dir / "schema.yaml")
    save_encoding(encoding, out_dir / "encoding.yaml")
    _save_scaler(model.scaler, out_dir / "scaler.yaml")

    if isinstance(model, LinearCoxModel):
        if model.fit is not None:
            save_linear_fit(model.fit, out_dir)
    else:
        network.save_network(model.network, out_dir / "network.npz")
        if model.ranking is not None:
            write_csv(out_dir / "ranking.csv", ranking_frame(model.ranking))
    logger.info("Saved %s bundle to %s", model.kind, out_dir)
    return out_dir


def _load_ranking(path: Path) -> FeatureRanking:
    frame = pd.read_csv(path, dtype={"feature": str}, keep_default_na=False)
    return FeatureRanking(tuple(frame["feature"]), frame["weight"].to_numpy(dtype=np.float64))


def load_bundle(path: Path) -> ModelBundle:
    """Inverse of `save_bundle`.

    Raises:
        ArtifactError: If a file is missing, malformed or of another format version.
    """
    path = Path(path)
    if not path.is_dir():
        raise ArtifactError(f"Bundle directory not found: {path}")
    meta = _read_yaml(path / "bundle.yaml")
    version = meta.get("format_version")
    if version != BUNDLE_FORMAT_VERSION:
        raise ArtifactError(
            f"{path}: bundle format version {version} is not supported "
            f"(expected {BUNDLE_FORMAT_VERSION})"
        )
    try:
        schema = load_schema(path / "schema.yaml")
        encoding = load_encoding(path / "encoding.yaml")
    except (FileNotFoundError, ValueError) as exc:
        raise ArtifactError(f"{path}: {exc}") from exc
    scaler = _load_scaler(path / "scaler.yaml")

    kind = meta.get("kind")
    if kind == "linear":
        fit = None if meta.get("null_model") else load_linear_fit(path / "fit.yaml")
        model: FittedModel = LinearCoxModel(scaler=scaler, fit=fit)
    elif kind == "deep":
        net = network.load_network(path / "network.npz")
        ranking_path = path / "ranking.csv"
        ranking = _load_ranking(ranking_path) if ranking_path.is_file() else None
        model = DeepCoxModel(
            scaler=scaler,
            selected=tuple(meta.get("selected") or ()),
            network=net,
            ranking=ranking,
        )
        if len(model.selected) != net.n_inputs:
            raise ArtifactError(
                f"{path}: {len(model.selected)} selected features for a network "
                f"with {net.n_inputs} inputs"
            )
    else:
        raise ArtifactError(f"{path}: unknown bundle kind '{kind}'")
    return ModelBundle(kind=kind, model=model, schema=schema, encoding=encoding, path=path)


def score_table(bundle: ModelBundle, table: RawTable) -> RiskScores:
    """Encode `table` with the bundle's saved encoding and score it."""
    dataset = apply_encoding(table, bundle.encoding)
    return bundle.model.predict(dataset)
