"""Fold-local model pipelines: linear Cox and RReliefF + deep Cox.

Each pipeline's `fit` sees only training rows and returns a self-contained
model whose `predict` accepts any dataset with the same encoded columns.
"""

from __future__ import annotations

import hashlib
import logging
import threading
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from waitsurv.config.models import DeepModelConfig, LinearConfig, ReliefConfig
from waitsurv.domain.errors import NullModelError
from waitsurv.domain.models import FeatureRanking, RiskScores, SurvivalDataset
from waitsurv.pipeline.seeding import derive_seed
from waitsurv.preprocess.encoding import FoldScaler
from waitsurv.preprocess.vif import VifRemoval, vif_screen
from waitsurv.selection.relieff import rrelieff, select_top_n
from waitsurv.survival import linear, network

logger = logging.getLogger(__name__)

# Fold index used for the final model trained on all rows.
FULL_DATA_INDEX = 1_000_000


@dataclass(frozen=True)
class LinearCoxModel:
    """Scaler + fitted coefficients; `fit=None` is the null model (constant risk)."""

    scaler: FoldScaler
    fit: Optional[linear.LinearCphFit]
    vif_removals: Tuple[VifRemoval, ...] = ()
    eliminations: Tuple[linear.EliminationStep, ...] = ()
    constant_features: Tuple[str, ...] = ()

    @property
    def kind(self) -> str:
        return "linear"

    @property
    def covariates(self) -> List[str]:
        return list(self.fit.feature_names) if self.fit is not None else []

    def coefficient_rows(self) -> List[Dict[str, Any]]:
        """Fitted rows, then one row per training-constant feature (coefficient 0, p = 1)."""
        rows = self.fit.summary_rows() if self.fit is not None else []
        rows.extend(
            {
                "feature": name,
                "coefficient": 0.0,
                "hazard_ratio": 1.0,
                "standard_error": float("nan"),
                "z": 0.0,
                "p_value": 1.0,
            }
            for name in self.constant_features
        )
        return rows

    def predict(self, data: SurvivalDataset) -> RiskScores:
        if self.fit is None:
            return RiskScores(np.zeros(data.n_samples))
        return linear.predict_risk(self.fit, self.scaler.transform(data))


@dataclass(frozen=True)
class DeepCoxModel:
    scaler: FoldScaler
    selected: Tuple[str, ...]
    network: network.RiskNetwork
    ranking: Optional[FeatureRanking] = None
    loss_trace: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    best_epoch: Optional[int] = None

    @property
    def kind(self) -> str:
        return "deep"

    @property
    def covariates(self) -> List[str]:
        return list(self.selected)

    def predict(self, data: SurvivalDataset) -> RiskScores:
        return network.predict(self.network, self.scaler.transform(data).select(self.selected))


def _constant_columns(data: SurvivalDataset) -> Tuple[str, ...]:
    """Names of columns with zero range on these rows (e.g. a level absent from a fold)."""
    if data.n_samples == 0:
        return ()
    spans = np.ptp(data.features, axis=0)
    return tuple(name for name, span in zip(data.feature_names, spans) if span == 0.0)


class LinearCoxPipeline:
    """Scale -> drop training-constant columns -> VIF screen -> Newton-Raphson fit
    -> backward elimination.
    """

    name = "linear-cph"

    def __init__(self, config: Optional[LinearConfig] = None, allow_null_model: bool = True):
        self.config = config or LinearConfig()
        self.allow_null_model = allow_null_model

    def fit(self, train: SurvivalDataset, fold_index: Optional[int] = None) -> LinearCoxModel:
        cfg = self.config
        scaler = FoldScaler.fit(train)
        data = scaler.transform(train)
        constant = _constant_columns(data)
        if constant:
            logger.warning(
                "Dropping %d feature(s) constant in the training rows: %s",
                len(constant), ", ".join(constant),
            )
            data = data.select([n for n in data.feature_names if n not in constant])
        removals: List[VifRemoval] = []
        if cfg.vif_screen and data.n_features > 1:
            data, removals = vif_screen(data, cfg.vif_threshold)
        options = dict(max_iterations=cfg.max_iterations, tolerance=cfg.tolerance, ridge=cfg.ridge)
        if data.n_features == 0:
            if not self.allow_null_model:
                raise NullModelError("every feature is constant in the training rows")
            logger.warning("Every feature is constant in the training rows; using the null model")
            return LinearCoxModel(scaler=scaler, fit=None, constant_features=constant)
        try:
            if cfg.backward:
                result, steps = linear.backward_eliminate(data, cfg.alpha, **options)
            else:
                result, steps = linear.fit(data, **options), []
        except NullModelError:
            if not self.allow_null_model:
                raise
            logger.info("No covariate is significant at alpha=%s; using the null model", cfg.alpha)
            return LinearCoxModel(
                scaler=scaler, fit=None, vif_removals=tuple(removals), constant_features=constant
            )
        return LinearCoxModel(
            scaler=scaler,
            fit=result,
            vif_removals=tuple(removals),
            eliminations=tuple(steps),
            constant_features=constant,
        )

    def score(self, model: LinearCoxModel, data: SurvivalDataset) -> RiskScores:
        return model.predict(data)


class RankingCache:
    """RReliefF rankings keyed by training-set content, shared across search trials."""

    def __init__(self):
        self._rankings: Dict[str, FeatureRanking] = {}
        self._lock = threading.Lock()

    @staticmethod
    def _key(data: SurvivalDataset) -> str:
        digest = hashlib.sha256()
        digest.update("\0".join(data.feature_names).encode("utf-8"))
        for array in (data.features, data.durations):
            digest.update(np.ascontiguousarray(array).tobytes())
        return digest.hexdigest()

    def get(self, data: SurvivalDataset, config: ReliefConfig) -> FeatureRanking:
        key = self._key(data) + config.model_dump_json()
        with self._lock:
            cached = self._rankings.get(key)
        if cached is not None:
            return cached
        ranking = rrelieff(data, config)
        with self._lock:
            return self._rankings.setdefault(key, ranking)

    def __len__(self) -> int:
        with self._lock:
            return len(self._rankings)


class DeepCoxPipeline:
    """Scale -> RReliefF on training durations -> top-n -> deep Cox network.

    With `n_features=None` the ranking step is skipped and every feature feeds
    the network (full-feature baseline).
    """

    def __init__(
        self,
        model: DeepModelConfig,
        relief: Optional[ReliefConfig] = None,
        seed: int = 0,
        ranking_cache: Optional[RankingCache] = None,
    ):
        self.model = model
        self.relief = relief or ReliefConfig()
        self.seed = seed
        self.ranking_cache = ranking_cache or RankingCache()

    @property
    def name(self) -> str:
        if self.model.n_features is None:
            return "deep-cph (all features)"
        return f"deep-cph (top {self.model.n_features})"

    def _select(self, data: SurvivalDataset) -> Tuple[Tuple[str, ...], Optional[FeatureRanking]]:
        if self.model.n_features is None:
            return data.feature_names, None
        ranking = self.ranking_cache.get(data, self.relief)
        n = min(self.model.n_features, data.n_features)
        if n < self.model.n_features:
            logger.debug("top-n %d capped at %d available features", self.model.n_features, n)
        return tuple(select_top_n(ranking, n)), ranking

    def _inner_split(
        self, data: SurvivalDataset, fold_index: int
    ) -> Tuple[SurvivalDataset, Optional[SurvivalDataset]]:
        fraction = self.model.inner_validation
        n_validation = int(round(fraction * data.n_samples))
        if n_validation < 2:
            return data, None
        rng = np.random.default_rng(derive_seed(self.seed, "inner_split", fold_index))
        permutation = rng.permutation(data.n_samples)
        validation = data.subset(np.sort(permutation[:n_validation]))
        fitting = data.subset(np.sort(permutation[n_validation:]))
        if fitting.event_count == 0 or validation.event_count == 0:
            return data, None
        return fitting, validation

    def fit(self, train: SurvivalDataset, fold_index: Optional[int] = None) -> DeepCoxModel:
        index = FULL_DATA_INDEX if fold_index is None else fold_index
        scaler = FoldScaler.fit(train)
        scaled = scaler.transform(train)
        selected, ranking = self._select(scaled)
        data = scaled.select(selected)

        config = self.model.network.model_copy(
            update={"n_inputs": len(selected), "seed": derive_seed(self.seed, "network", index)}
        )
        fitting, validation = self._inner_split(data, index)
        result = network.train(network.init_network(config), fitting, validation=validation)
        return DeepCoxModel(
            scaler=scaler,
            selected=selected,
            network=result.network,
            ranking=ranking,
            loss_trace=result.loss_trace,
            best_epoch=result.best_epoch,
        )

    def score(self, model: DeepCoxModel, data: SurvivalDataset) -> RiskScores:
        return model.predict(data)
