"""Partial likelihood, gradient and Breslow baseline for the Cox model.

The hazard of sample i is H0'(t) * exp(h_i). Estimation uses the partial
likelihood, which removes the baseline: every distinct event time t_k
contributes its events' log-risks minus d_k times the log of the risk-set
denominator sum_{j: T_j >= t_k} exp(h_j) (Breslow's convention for ties).
A censored sample whose duration equals an event time is still at risk at
that time.

All denominators are computed as running log-sum-exp over samples sorted by
descending duration, so scores of magnitude ~700 stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from waitsurv.domain.errors import DimensionMismatchError
from waitsurv.domain.models import BaselineHazard, RiskScores, SurvivalDataset


@dataclass(frozen=True)
class RiskSet:
    time: float
    event_indices: np.ndarray
    at_risk_indices: np.ndarray


@dataclass(frozen=True)
class EventTable:
    """Sorted event-time structure shared by every likelihood routine.

    Attributes:
        times: Distinct event times, ascending (K,).
        event_counts: d_k, number of events at each time (K,).
        at_risk_counts: n_k, number of samples with duration >= t_k (K,).
        order: Sample indices by descending duration; the first n_k entries are
            the risk set of t_k.
        event_slot: For each sample, index k of its event time (-1 if censored).
        times_passed: For each sample, number of event times <= its duration.
    """

    times: np.ndarray
    event_counts: np.ndarray
    at_risk_counts: np.ndarray
    order: np.ndarray
    event_slot: np.ndarray
    times_passed: np.ndarray

    @property
    def n_times(self) -> int:
        return int(self.times.shape[0])


def event_table(dataset: SurvivalDataset) -> EventTable:
    dataset.require_events()
    durations = dataset.durations
    events = dataset.events

    times, event_counts = np.unique(durations[events], return_counts=True)
    sorted_durations = np.sort(durations, kind="stable")
    at_risk_counts = durations.shape[0] - np.searchsorted(sorted_durations, times, side="left")
    order = np.argsort(-durations, kind="stable")

    event_slot = np.full(durations.shape[0], -1, dtype=np.intp)
    event_slot[events] = np.searchsorted(times, durations[events], side="left")
    times_passed = np.searchsorted(times, durations, side="right")

    return EventTable(
        times=times,
        event_counts=event_counts.astype(np.float64),
        at_risk_counts=at_risk_counts.astype(np.intp),
        order=order,
        event_slot=event_slot,
        times_passed=times_passed.astype(np.intp),
    )


def risk_sets(dataset: SurvivalDataset) -> List[RiskSet]:
    """Explicit risk sets per distinct event time, ascending.

    Raises:
        NoEventsError: If no sample has an observed event.
    """
    table = event_table(dataset)
    sets = []
    for k, time in enumerate(table.times):
        event_indices = np.flatnonzero(table.event_slot == k)
        at_risk = np.sort(table.order[: table.at_risk_counts[k]])
        sets.append(RiskSet(time=float(time), event_indices=event_indices, at_risk_indices=at_risk))
    return sets


def _log_risk(dataset: SurvivalDataset, scores: RiskScores | Sequence[float] | np.ndarray) -> np.ndarray:
    log_risk = RiskScores.coerce(scores).log_risk
    if log_risk.shape[0] != dataset.n_samples:
        raise DimensionMismatchError(
            f"{log_risk.shape[0]} scores for {dataset.n_samples} samples"
        )
    return log_risk


def log_denominators(table: EventTable, log_risk: np.ndarray) -> np.ndarray:
    """log sum_{j in R(t_k)} exp(h_j) for every event time."""
    running = np.logaddexp.accumulate(log_risk[table.order])
    return running[table.at_risk_counts - 1]


def neg_log_partial_likelihood(
    dataset: SurvivalDataset, scores: RiskScores | Sequence[float] | np.ndarray
) -> float:
    """Negative Breslow log partial likelihood (not averaged over events)."""
    h = _log_risk(dataset, scores)
    table = event_table(dataset)
    log_den = log_denominators(table, h)
    events = dataset.events
    event_sums = np.bincount(
        table.event_slot[events], weights=h[events], minlength=table.n_times
    )
    return float(-np.sum(event_sums - table.event_counts * log_den))


def _cumulative_log_weights(table: EventTable, log_den: np.ndarray) -> np.ndarray:
    """A_k = log sum_{l <= k} d_l / exp(L_l)."""
    return np.logaddexp.accumulate(np.log(table.event_counts) - log_den)


def nll_gradient(
    dataset: SurvivalDataset, scores: RiskScores | Sequence[float] | np.ndarray
) -> np.ndarray:
    """d nll / d h_m = -event_m + exp(h_m) * sum_{t_k <= T_m} d_k / sum_{R(t_k)} exp(h)."""
    h = _log_risk(dataset, scores)
    table = event_table(dataset)
    log_den = log_denominators(table, h)
    cumulative = _cumulative_log_weights(table, log_den)

    passed = table.times_passed
    exposure = np.zeros_like(h)
    mask = passed > 0
    exposure[mask] = np.exp(h[mask] + cumulative[passed[mask] - 1])
    return exposure - dataset.events.astype(np.float64)


def breslow_baseline(
    dataset: SurvivalDataset, scores: RiskScores | Sequence[float] | np.ndarray
) -> BaselineHazard:
    """Breslow estimator H0(t) = sum_{t_k <= t} d_k / sum_{R(t_k)} exp(h)."""
    h = _log_risk(dataset, scores)
    table = event_table(dataset)
    log_den = log_denominators(table, h)
    increments = table.event_counts * np.exp(-log_den)
    return BaselineHazard(event_times=table.times, cumulative_hazard=np.cumsum(increments))


def survival_function(
    baseline: BaselineHazard,
    scores: RiskScores | Sequence[float] | np.ndarray,
    times: Sequence[float] | np.ndarray,
) -> np.ndarray:
    """S(t | x) = exp(-H0(t) * exp(h)) as an (n_samples, n_times) matrix."""
    h = RiskScores.coerce(scores).log_risk
    cumulative = baseline.at(np.asarray(times, dtype=np.float64).reshape(-1))
    return np.exp(-np.outer(np.exp(h), cumulative))


def median_survival_time(
    baseline: BaselineHazard, scores: RiskScores | Sequence[float] | np.ndarray
) -> np.ndarray:
    """First event time at which S(t | x) <= 0.5 per sample; +inf if never reached."""
    h = RiskScores.coerce(scores).log_risk
    thresholds = np.log(2.0) * np.exp(-h)
    positions = np.searchsorted(baseline.cumulative_hazard, thresholds, side="left")
    padded = np.concatenate((baseline.event_times, [np.inf]))
    return padded[positions]
