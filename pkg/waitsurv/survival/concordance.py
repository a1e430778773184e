"""Harrell's concordance index."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from waitsurv.domain.errors import DimensionMismatchError, NoComparablePairsError
from waitsurv.domain.models import RiskScores

_BLOCK_ROWS = 1024


def concordance_counts(
    durations: Sequence[float] | np.ndarray,
    events: Sequence[bool] | np.ndarray,
    scores: RiskScores | Sequence[float] | np.ndarray,
) -> tuple[int, int, int]:
    """(concordant, tied, comparable) pair counts.

    A pair (i, j) is comparable when sample i had the event and t_i < t_j;
    it is concordant when score_i > score_j and tied when the scores are equal.
    """
    t = np.asarray(durations, dtype=np.float64).reshape(-1)
    e = np.asarray(events).reshape(-1).astype(bool)
    s = RiskScores.coerce(scores).log_risk
    if not (t.shape == e.shape == s.shape):
        raise DimensionMismatchError(
            f"durations ({t.shape[0]}), events ({e.shape[0]}) and scores ({s.shape[0]}) differ in length"
        )

    concordant = tied = comparable = 0
    event_rows = np.flatnonzero(e)
    for start in range(0, event_rows.shape[0], _BLOCK_ROWS):
        rows = event_rows[start:start + _BLOCK_ROWS]
        pairs = t[rows, None] < t[None, :]
        diff = s[rows, None] - s[None, :]
        comparable += int(np.count_nonzero(pairs))
        concordant += int(np.count_nonzero(pairs & (diff > 0)))
        tied += int(np.count_nonzero(pairs & (diff == 0)))
    return concordant, tied, comparable


def c_index(
    durations: Sequence[float] | np.ndarray,
    events: Sequence[bool] | np.ndarray,
    scores: RiskScores | Sequence[float] | np.ndarray,
) -> float:
    """Fraction of comparable pairs ordered correctly; tied scores count one half.

    Higher scores mean higher risk, i.e. earlier events.

    Raises:
        NoComparablePairsError: If no pair is comparable (e.g. everything censored).
    """
    concordant, tied, comparable = concordance_counts(durations, events, scores)
    if comparable == 0:
        raise NoComparablePairsError()
    return (concordant + 0.5 * tied) / comparable
