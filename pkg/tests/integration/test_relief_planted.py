"""RReliefF ranks planted relevant features above noise."""
import numpy as np
import pytest

from waitsurv.config.models import ReliefConfig
from waitsurv.domain.models import SurvivalDataset
from waitsurv.selection.relieff import rrelieff

pytestmark = [pytest.mark.slow, pytest.mark.integration]

RELEVANT = ("x1", "x2", "x3")


def _planted(seed, n=500, n_noise=7):
    rng = np.random.default_rng(seed)
    features = rng.uniform(size=(n, 3 + n_noise))
    durations = 5.0 + features[:, :3].sum(axis=1) + 0.05 * rng.standard_normal(n)
    names = [f"x{j + 1}" for j in range(3 + n_noise)]
    return SurvivalDataset(
        features=features,
        feature_names=names,
        durations=durations,
        events=np.ones(n, dtype=bool),
    )


def test_relevant_features_outrank_noise():
    config = ReliefConfig(k_neighbors=10)
    hits = 0
    for seed in range(20):
        ranking = rrelieff(_planted(seed), config)
        hits += set(ranking.ranked_names[:3]) == set(RELEVANT)

    assert hits >= 19


def test_constant_target_gives_zero_weights():
    data = _planted(0)
    ranking = rrelieff(data, ReliefConfig(), target=np.full(data.n_samples, 7.0))

    np.testing.assert_array_equal(ranking.weights, np.zeros(data.n_features))


def test_duplicated_features_share_weight():
    data = _planted(3, n=200)
    doubled = data.with_features(
        np.column_stack([data.features, data.features[:, 0]]),
        [*data.feature_names, "x1_copy"],
    )

    ranking = rrelieff(doubled, ReliefConfig())

    assert abs(ranking.weight_of("x1") - ranking.weight_of("x1_copy")) < 1e-12
