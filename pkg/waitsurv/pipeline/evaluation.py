"""Fold assignment and cross-validated C-index for fold-local pipelines.

A pipeline sees only the training complement of each fold: scaling, feature
ranking, selection and training are all fitted there, and the held-out fold is
only scored.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, List, Optional, Protocol, Sequence

import numpy as np

from waitsurv.domain.errors import DataError, FoldError
from waitsurv.domain.events import FoldScored
from waitsurv.domain.models import RiskScores, SurvivalDataset
from waitsurv.infrastructure.event_bus import EventBus
from waitsurv.survival.concordance import c_index

logger = logging.getLogger(__name__)

MAX_SPLIT_RETRIES = 100


class SurvivalPipeline(Protocol):
    name: str

    def fit(self, train: SurvivalDataset, fold_index: Optional[int] = None) -> Any: ...

    def score(self, model: Any, data: SurvivalDataset) -> RiskScores: ...


@dataclass
class CrossValidationResult:
    fold_c_indices: List[float]
    folds: List[np.ndarray]
    models: List[Any] = field(default_factory=list)

    @property
    def mean_c_index(self) -> float:
        return float(np.mean(self.fold_c_indices))


def kfold_split(
    n_samples: int,
    k: int,
    seed: int,
    events: Optional[np.ndarray] = None,
    max_retries: int = MAX_SPLIT_RETRIES,
) -> List[np.ndarray]:
    """Partition 0..n-1 into k folds whose sizes differ by at most one.

    Folds come from one seeded permutation split into consecutive chunks (the
    first n % k folds get the extra sample); each fold is sorted. With
    `events`, the split is redrawn until every training complement holds at
    least one event.

    Raises:
        DataError: If k < 2, n < k, or the event constraint cannot be met.
    """
    if k < 2:
        raise DataError(f"need at least 2 folds, got {k}")
    if n_samples < k:
        raise DataError(f"cannot split {n_samples} samples into {k} folds")
    rng = np.random.default_rng(seed)
    event_flags = None if events is None else np.asarray(events, dtype=bool)
    total_events = 0 if event_flags is None else int(event_flags.sum())

    for _ in range(max_retries):
        permutation = rng.permutation(n_samples)
        folds = [np.sort(chunk) for chunk in np.array_split(permutation, k)]
        if event_flags is None:
            return folds
        if all(total_events - int(event_flags[fold].sum()) > 0 for fold in folds):
            return folds
    raise DataError(
        f"could not find a {k}-fold split with an event in every training set "
        f"after {max_retries} attempts ({total_events} events)"
    )


def cross_validate(
    pipeline: SurvivalPipeline,
    dataset: SurvivalDataset,
    k: int = 10,
    seed: int = 0,
    *,
    folds: Optional[Sequence[np.ndarray]] = None,
    bus: Optional[EventBus] = None,
    trial_index: Optional[int] = None,
    keep_models: bool = False,
) -> CrossValidationResult:
    """Fit on each training complement, score the held-out fold, return fold C-indices.

    Raises:
        FoldError: Wrapping any pipeline or scoring failure, with the fold index.
    """
    if folds is None:
        folds = kfold_split(dataset.n_samples, k, seed, events=dataset.events)
    folds = list(folds)
    all_indices = np.arange(dataset.n_samples)
    scores: List[float] = []
    models: List[Any] = []

    for fold_index, held_out in enumerate(folds):
        train = dataset.subset(np.setdiff1d(all_indices, held_out, assume_unique=True))
        validation = dataset.subset(held_out)
        try:
            model = pipeline.fit(train, fold_index)
            predicted = pipeline.score(model, validation)
            value = c_index(validation.durations, validation.events, predicted)
        except Exception as exc:
            raise FoldError(fold_index, exc) from exc
        scores.append(value)
        if keep_models:
            models.append(model)
        logger.debug("%s fold %d/%d: C-index %.4f", pipeline.name, fold_index + 1, len(folds), value)
        if bus is not None:
            bus.publish(
                FoldScored(
                    fold_index=fold_index,
                    n_folds=len(folds),
                    c_index=value,
                    trial_index=trial_index,
                )
            )

    result = CrossValidationResult(fold_c_indices=scores, folds=folds, models=models)
    logger.info("%s: mean C-index %.4f over %d folds", pipeline.name, result.mean_c_index, len(folds))
    return result
