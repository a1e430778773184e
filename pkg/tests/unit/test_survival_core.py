"""Unit tests for partial likelihood, gradient and Breslow baseline."""
import math

import numpy as np
import pytest

from waitsurv.domain.errors import DimensionMismatchError, NoEventsError
from waitsurv.domain.models import BaselineHazard, SurvivalDataset
from waitsurv.survival import core


def _dataset(durations, events, features=None):
    durations = np.asarray(durations, dtype=float)
    if features is None:
        features = np.zeros((durations.shape[0], 1))
    return SurvivalDataset(
        features=features,
        feature_names=tuple(f"x{i + 1}" for i in range(np.asarray(features).shape[1])),
        durations=durations,
        events=events,
    )


def test_risk_sets_include_censored_sample_at_tied_event_time():
    data = _dataset([2.0, 2.0, 3.0, 1.0], [True, False, True, False])

    sets = core.risk_sets(data)

    assert [s.time for s in sets] == [2.0, 3.0]
    np.testing.assert_array_equal(sets[0].event_indices, [0])
    np.testing.assert_array_equal(sets[0].at_risk_indices, [0, 1, 2])
    np.testing.assert_array_equal(sets[1].at_risk_indices, [2])


def test_event_table_counts_tied_events():
    data = _dataset([1.0, 1.0, 2.0, 4.0], [True, True, True, False])

    table = core.event_table(data)

    np.testing.assert_array_equal(table.times, [1.0, 2.0])
    np.testing.assert_array_equal(table.event_counts, [2.0, 1.0])
    np.testing.assert_array_equal(table.at_risk_counts, [4, 2])


def test_nll_at_zero_scores_is_sum_of_log_risk_set_sizes(tiny_dataset):
    value = core.neg_log_partial_likelihood(tiny_dataset, np.zeros(3))

    assert value == pytest.approx(math.log(3) + math.log(2))


def test_nll_uses_breslow_ties():
    data = _dataset([1.0, 1.0, 2.0], [True, True, True])
    h = np.array([0.3, -0.2, 0.5])

    expected = -(
        (0.3 - 0.2) - 2 * np.log(np.exp(h).sum())
        + 0.5 - np.log(np.exp(0.5))
    )

    assert core.neg_log_partial_likelihood(data, h) == pytest.approx(expected)


def test_nll_stays_finite_for_large_scores():
    data = _dataset([1.0, 2.0, 3.0, 4.0], [True, True, False, True])

    value = core.neg_log_partial_likelihood(data, [700.0, 710.0, -700.0, 705.0])

    assert math.isfinite(value)


def test_gradient_matches_finite_differences(dataset_factory):
    data = dataset_factory(n=40, seed=5)
    rng = np.random.default_rng(1)
    h = rng.normal(size=data.n_samples)

    gradient = core.nll_gradient(data, h)
    eps = 1e-6
    numeric = np.empty_like(h)
    for i in range(h.shape[0]):
        up, down = h.copy(), h.copy()
        up[i] += eps
        down[i] -= eps
        numeric[i] = (
            core.neg_log_partial_likelihood(data, up) - core.neg_log_partial_likelihood(data, down)
        ) / (2 * eps)

    np.testing.assert_allclose(gradient, numeric, rtol=1e-5, atol=1e-7)


def test_gradient_sums_to_zero():
    # Shifting every score by a constant leaves the partial likelihood unchanged.
    data = _dataset([1.0, 2.0, 2.0, 5.0, 3.0], [True, True, False, True, False])

    gradient = core.nll_gradient(data, [0.1, -1.0, 2.0, 0.4, 0.0])

    assert gradient.sum() == pytest.approx(0.0, abs=1e-12)


def test_breslow_baseline_at_zero_scores(tiny_dataset):
    baseline = core.breslow_baseline(tiny_dataset, np.zeros(3))

    np.testing.assert_array_equal(baseline.event_times, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(baseline.cumulative_hazard, [1 / 3, 5 / 6, 11 / 6])


def test_breslow_hazard_is_non_decreasing_on_random_instances():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(2, 40))
        durations = np.round(rng.exponential(5.0, n), 0) + 1.0
        events = rng.uniform(size=n) < 0.7
        events[int(rng.integers(n))] = True
        scores = rng.normal(scale=2.0, size=n)

        baseline = core.breslow_baseline(_dataset(durations, events), scores)

        assert np.all(np.diff(baseline.cumulative_hazard) >= 0)
        assert np.all(np.diff(baseline.event_times) > 0)
        assert baseline.event_times.shape[0] == np.unique(durations[events]).shape[0]


def test_baseline_is_step_function():
    baseline = BaselineHazard(event_times=[1.0, 3.0], cumulative_hazard=[0.5, 1.5])

    np.testing.assert_array_equal(baseline.at([0.5, 1.0, 2.9, 3.0, 10.0]), [0.0, 0.5, 0.5, 1.5, 1.5])


def test_survival_function_and_median():
    baseline = BaselineHazard(event_times=[1.0, 2.0, 3.0], cumulative_hazard=[0.2, 0.5, 1.0])

    surv = core.survival_function(baseline, [0.0, math.log(2.0)], [2.0])
    median = core.median_survival_time(baseline, [0.0, math.log(2.0), -10.0])

    np.testing.assert_allclose(surv[:, 0], [math.exp(-0.5), math.exp(-1.0)])
    assert median[0] == 3.0
    assert median[1] == 2.0
    assert np.isinf(median[2])


def test_no_events_raises():
    data = _dataset([1.0, 2.0], [False, False])

    with pytest.raises(NoEventsError):
        core.neg_log_partial_likelihood(data, [0.0, 0.0])


def test_score_length_mismatch_raises(tiny_dataset):
    with pytest.raises(DimensionMismatchError):
        core.nll_gradient(tiny_dataset, [0.0, 0.0])


def test_early_censored_sample_does_not_change_likelihood():
    durations = [2.0, 3.0, 3.0, 5.0, 8.0]
    events = [True, False, True, True, False]
    h = np.array([0.4, -0.3, 1.2, 0.1, -0.8])
    base = _dataset(durations, events)
    extended = _dataset([*durations, 0.5], [*events, False])

    value = core.neg_log_partial_likelihood(extended, np.append(h, 3.0))

    assert value == pytest.approx(core.neg_log_partial_likelihood(base, h), rel=1e-12)
