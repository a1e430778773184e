"""Side-by-side cross-validation of the linear and deep Cox pipelines."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from waitsurv.config.models import AppConfig
from waitsurv.domain.models import SurvivalDataset
from waitsurv.infrastructure.event_bus import EventBus
from waitsurv.pipeline.evaluation import SurvivalPipeline, cross_validate, kfold_split
from waitsurv.pipeline.models import (
    DeepCoxPipeline,
    LinearCoxPipeline,
    RankingCache,
)
from waitsurv.pipeline.seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComparisonRow:
    """One row of the model comparison table."""

    model: str
    covariates: float
    mean_c_index: float
    fold_c_indices: List[float]

    def as_dict(self) -> dict:
        row = {"model": self.model, "covariates": self.covariates, "mean_c_index": self.mean_c_index}
        for i, value in enumerate(self.fold_c_indices):
            row[f"fold_{i}"] = value
        return row


def default_pipelines(config: AppConfig, n_available: int) -> List[SurvivalPipeline]:
    """Linear CPH, deep CPH on all features and deep CPH on the top-n RReliefF features."""
    seed = config.general.seed
    cache = RankingCache()
    full = config.deep.model_copy(update={"n_features": None})
    top_n = config.deep
    if top_n.n_features is None:
        top_n = top_n.model_copy(update={"n_features": max(1, n_available // 2)})
    return [
        LinearCoxPipeline(config.linear),
        DeepCoxPipeline(full, config.relief, seed=seed, ranking_cache=cache),
        DeepCoxPipeline(top_n, config.relief, seed=seed, ranking_cache=cache),
    ]


def compare_models(
    dataset: SurvivalDataset,
    config: AppConfig,
    pipelines: Optional[List[SurvivalPipeline]] = None,
    bus: Optional[EventBus] = None,
) -> List[ComparisonRow]:
    """Cross-validate every pipeline on the same folds.

    `covariates` is the mean number of inputs the fitted models used across folds.
    """
    k = config.general.folds
    folds = kfold_split(
        dataset.n_samples, k, derive_seed(config.general.seed, "folds"), events=dataset.events
    )
    if pipelines is None:
        pipelines = default_pipelines(config, dataset.n_features)

    rows = []
    for pipeline in pipelines:
        logger.info("Cross-validating %s", pipeline.name)
        result = cross_validate(pipeline, dataset, k, folds=folds, bus=bus, keep_models=True)
        covariates = float(np.mean([len(model.covariates) for model in result.models]))
        rows.append(
            ComparisonRow(
                model=pipeline.name,
                covariates=covariates,
                mean_c_index=result.mean_c_index,
                fold_c_indices=list(result.fold_c_indices),
            )
        )
    return rows
