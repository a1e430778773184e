"""Dummy coding and standardization of typed tables."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import yaml

from waitsurv.config.loader import dump_yaml
from waitsurv.domain.errors import DataError
from waitsurv.domain.models import EncodedColumn, EncodingSpec, RawTable, SurvivalDataset

logger = logging.getLogger(__name__)


def indicator_name(column: str, level: str) -> str:
    return f"{column}: {level}"


def fit_encoding(table: RawTable, standardize: bool = True) -> EncodingSpec:
    """Derive an EncodingSpec from a table.

    Categorical columns drop their first declared level; numeric columns record
    mean and sample standard deviation (ddof=1) when `standardize` is set.

    Raises:
        DataError: If a numeric column to be standardized is constant.
    """
    schema = table.schema
    columns: List[EncodedColumn] = []
    for name in schema.covariate_columns:
        spec = schema.columns[name]
        if spec.type == "categorical":
            reference, *others = spec.levels
            columns.append(
                EncodedColumn(
                    name=name,
                    kind="categorical",
                    reference=reference,
                    levels=list(spec.levels),
                    emitted=[indicator_name(name, level) for level in others],
                )
            )
            continue
        values = table.columns[name]
        mean = std = None
        if standardize:
            mean = float(np.mean(values))
            std = float(np.std(values, ddof=1)) if values.shape[0] > 1 else 0.0
            if not np.isfinite(std) or std <= 0:
                raise DataError("constant numeric column cannot be standardized", column=name)
        columns.append(EncodedColumn(name=name, kind="numeric", emitted=[name], mean=mean, std=std))
    return EncodingSpec(standardize=standardize, columns=columns)


def apply_encoding(table: RawTable, spec: EncodingSpec) -> SurvivalDataset:
    """Encode `table` with a fixed spec (saved means/deviations are reused, never refit)."""
    covariates = table.schema.covariate_columns
    encoded_names = [column.name for column in spec.columns]
    if encoded_names != covariates:
        raise DataError(
            "encoding spec columns do not match the table: "
            f"spec has {encoded_names}, table has {covariates}"
        )

    blocks = []
    for column in spec.columns:
        values = table.columns[column.name]
        if column.kind == "categorical":
            declared = table.schema.columns[column.name].levels
            if list(declared) != list(column.levels):
                raise DataError(
                    f"levels {declared} differ from the encoding's {column.levels}",
                    column=column.name,
                )
            others = [level for level in column.levels if level != column.reference]
            block = np.column_stack([(values == level).astype(np.float64) for level in others])
        else:
            block = np.asarray(values, dtype=np.float64)
            if column.mean is not None and column.std is not None:
                block = (block - column.mean) / column.std
            block = block.reshape(-1, 1)
        blocks.append(block)

    features = np.hstack(blocks) if blocks else np.empty((table.n_rows, 0))
    return SurvivalDataset(
        features=features,
        feature_names=tuple(spec.feature_names),
        durations=table.durations,
        events=table.events,
    )


def encode(
    table: RawTable,
    spec: Optional[EncodingSpec] = None,
    standardize: bool = True,
) -> Tuple[SurvivalDataset, EncodingSpec]:
    """One-hot + z-score encoding; pass a saved `spec` to reapply it unchanged."""
    if spec is None:
        spec = fit_encoding(table, standardize=standardize)
    dataset = apply_encoding(table, spec)
    logger.info(
        "Encoded %d covariate column(s) into %d feature(s)",
        len(spec.columns), dataset.n_features,
    )
    return dataset, spec


def save_encoding(spec: EncodingSpec, path: Path) -> None:
    dump_yaml(spec.model_dump(), path)


def load_encoding(path: Path) -> EncodingSpec:
    with open(path, "r", encoding="utf-8") as f:
        return EncodingSpec.model_validate(yaml.safe_load(f) or {})


@dataclass(frozen=True)
class FoldScaler:
    """z-score scaling fitted on training rows only.

    Binary (0/1) columns pass through unchanged; so do columns that are
    constant in the training rows.
    """

    feature_names: Tuple[str, ...]
    means: np.ndarray
    scales: np.ndarray

    @classmethod
    def fit(cls, dataset: SurvivalDataset) -> "FoldScaler":
        X = dataset.features
        means = np.zeros(dataset.n_features)
        scales = np.ones(dataset.n_features)
        for j in range(dataset.n_features):
            column = X[:, j]
            if np.isin(column, (0.0, 1.0)).all():
                continue
            std = float(np.std(column, ddof=1)) if column.shape[0] > 1 else 0.0
            if std > 0:
                means[j] = float(np.mean(column))
                scales[j] = std
        return cls(dataset.feature_names, means, scales)

    def transform(self, dataset: SurvivalDataset) -> SurvivalDataset:
        aligned = dataset.select(self.feature_names)
        return aligned.with_features((aligned.features - self.means) / self.scales, self.feature_names)
