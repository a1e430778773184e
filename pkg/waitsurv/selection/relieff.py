"""RReliefF feature weighting for a continuous target and top-n selection.

For each sampled instance R, its k nearest neighbours I_1..I_k (Manhattan
distance over range-normalized attribute differences, ties by index) contribute
with influence exp(-(rank/sigma)^2), normalized to sum to one:

    N_dC      += d * diff(target, R, I)
    N_dA[a]   += d * diff(a, R, I)
    N_dCdA[a] += d * diff(target, R, I) * diff(a, R, I)

    W[a] = N_dCdA[a] / N_dC - (N_dA[a] - N_dCdA[a]) / (m - N_dC)

diff(a, x, y) = |x_a - y_a| / (max_a - min_a); binary indicators therefore
differ by exactly 0 or 1.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Sequence

import numpy as np

from waitsurv.config.models import ReliefConfig
from waitsurv.domain.errors import DataError, DimensionMismatchError
from waitsurv.domain.models import FeatureRanking, SurvivalDataset

logger = logging.getLogger(__name__)


def _ranges(values: np.ndarray) -> np.ndarray:
    return values.max(axis=0) - values.min(axis=0)


def _sample_indices(n: int, config: ReliefConfig) -> np.ndarray:
    if config.m_samples is None:
        return np.arange(n)
    rng = np.random.default_rng(config.seed)
    return rng.choice(n, size=config.m_samples, replace=config.m_samples > n)


def neighbour_influence(k: int, sigma: float) -> np.ndarray:
    influence = np.exp(-((np.arange(1, k + 1) / sigma) ** 2))
    return influence / influence.sum()


def rrelieff(
    dataset: SurvivalDataset,
    config: Optional[ReliefConfig] = None,
    target: Optional[np.ndarray] = None,
) -> FeatureRanking:
    """Weight every feature of `dataset` against `target` (default: observed durations).

    Raises:
        DataError: If there are fewer than k + 1 instances.
    """
    config = config or ReliefConfig()
    X = dataset.features
    y = dataset.durations if target is None else np.asarray(target, dtype=np.float64).reshape(-1)
    n, p = X.shape
    if y.shape[0] != n:
        raise DimensionMismatchError(f"{y.shape[0]} target values for {n} instances")
    k = config.k_neighbors
    if n < k + 1:
        raise DataError(f"RReliefF with k={k} needs at least {k + 1} instances, got {n}")

    ranges = _ranges(X)
    constant = ranges == 0
    for j in np.flatnonzero(constant):
        logger.warning("RReliefF: feature '%s' has zero range; weight set to 0", dataset.feature_names[j])
    scale = np.where(constant, 1.0, ranges)

    target_range = float(y.max() - y.min())
    if target_range == 0.0:
        logger.warning("RReliefF: constant target; all weights are 0")
        return FeatureRanking(dataset.feature_names, np.zeros(p))

    influence = neighbour_influence(k, config.sigma)
    sampled = _sample_indices(n, config)
    positions = np.arange(n)
    n_dc = 0.0
    n_da = np.zeros(p)
    n_dcda = np.zeros(p)

    for i in sampled:
        attribute_diff = np.abs(X - X[i]) / scale
        attribute_diff[:, constant] = 0.0
        distance = attribute_diff.sum(axis=1)
        order = np.lexsort((positions, distance))
        neighbours = order[order != i][:k]

        target_diff = np.abs(y[neighbours] - y[i]) / target_range
        weighted = influence * target_diff
        n_dc += float(weighted.sum())
        n_da += influence @ attribute_diff[neighbours]
        n_dcda += weighted @ attribute_diff[neighbours]

    m = float(sampled.shape[0])
    weights = n_dcda / n_dc if n_dc > 0 else np.zeros(p)
    if m - n_dc > 0:
        weights = weights - (n_da - n_dcda) / (m - n_dc)
    weights[constant] = 0.0
    return FeatureRanking(dataset.feature_names, weights)


def select_top_n(ranking: FeatureRanking, n: int) -> List[str]:
    """First n feature names in rank order.

    Raises:
        DataError: If n is not within 1..number of features.
    """
    total = len(ranking.feature_names)
    if not 1 <= n <= total:
        raise DataError(f"top-n must be between 1 and {total}, got {n}")
    return ranking.ranked_names[:n]


def average_rankings(rankings: Sequence[FeatureRanking]) -> FeatureRanking:
    """Mean weight per feature across rankings of the same feature set."""
    if not rankings:
        raise DataError("no rankings to average")
    names = rankings[0].feature_names
    for ranking in rankings[1:]:
        if set(ranking.feature_names) != set(names):
            raise DimensionMismatchError("rankings cover different features")
    stacked = np.vstack([[ranking.weight_of(name) for name in names] for ranking in rankings])
    return FeatureRanking(names, stacked.mean(axis=0))


def fold_averaged_ranking(
    dataset: SurvivalDataset,
    folds: Sequence[np.ndarray],
    config: Optional[ReliefConfig] = None,
) -> FeatureRanking:
    """Rank on each training complement of `folds` and average the weights."""
    rankings = []
    all_indices = np.arange(dataset.n_samples)
    for fold in folds:
        train = np.setdiff1d(all_indices, fold, assume_unique=True)
        rankings.append(rrelieff(dataset.subset(train), config))
    return average_rankings(rankings)
