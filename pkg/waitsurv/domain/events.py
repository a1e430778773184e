"""Domain events for cross-validation and hyperparameter search.

Events flow through the EventBus so the pipeline reports progress without
importing the UI layer.

See `infrastructure/event_bus.py` for the pub/sub mechanism.
"""

from typing import List, Optional

from pydantic import BaseModel

from waitsurv.domain.models import TrialRecord


class Event(BaseModel):
    """Base class for all domain events."""

    pass


class FoldScored(Event):
    """Emitted after a held-out fold has been scored."""

    fold_index: int
    n_folds: int
    c_index: float
    trial_index: Optional[int] = None


class SearchStarted(Event):
    budget: int
    pending: int
    resumed: int = 0


class TrialStarted(Event):
    trial_index: int
    seed: int


class TrialFinished(Event):
    """Emitted when a trial completed all folds."""

    record: TrialRecord


class TrialFailed(Event):
    """Emitted when a trial aborted (divergence, degenerate fold, ...)."""

    record: TrialRecord
    error_message: str


class SearchFinished(Event):
    best_trial_index: int
    best_c_index: float
    failed_trials: List[int] = []
