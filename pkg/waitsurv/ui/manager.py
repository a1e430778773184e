import logging

from waitsurv.domain.events import (
    FoldScored,
    SearchFinished,
    SearchStarted,
    TrialFailed,
    TrialFinished,
    TrialStarted,
)
from waitsurv.domain.models import TrialRecord
from waitsurv.infrastructure.event_bus import EventBus
from waitsurv.ui.state import SearchState, TrialLine

logger = logging.getLogger(__name__)


def describe_trial(record: TrialRecord) -> str:
    """Short architecture summary, e.g. "n=17 3x75 drop=0.10 bn=off lr=1.2e-04"."""
    model = record.model
    network = model["network"]
    widths = network["hidden_layers"]
    return (
        f"n={model['n_features']} {len(widths)}x{widths[0]} "
        f"drop={network['dropout_rate']:.2f} bn={'on' if network['batch_norm'] else 'off'} "
        f"lr={network['learning_rate']:.1e}"
    )


class UIManager:
    """Subscribes to EventBus and updates SearchState."""

    def __init__(self, bus: EventBus, state: SearchState):
        self.bus = bus
        self.state = state
        self._setup_subscriptions()

    def _setup_subscriptions(self):
        self.bus.subscribe(SearchStarted, self.on_search_started)
        self.bus.subscribe(TrialStarted, self.on_trial_started)
        self.bus.subscribe(FoldScored, self.on_fold_scored)
        self.bus.subscribe(TrialFinished, self.on_trial_finished)
        self.bus.subscribe(TrialFailed, self.on_trial_failed)
        self.bus.subscribe(SearchFinished, self.on_search_finished)

    def on_search_started(self, event: SearchStarted):
        self.state.start(event.budget, event.resumed)

    def on_trial_started(self, event: TrialStarted):
        self.state.trial_started(event.trial_index)

    def on_fold_scored(self, event: FoldScored):
        if event.trial_index is not None:
            self.state.fold_scored(event.trial_index, event.n_folds)

    def on_trial_finished(self, event: TrialFinished):
        record = event.record
        self.state.trial_done(
            TrialLine(
                trial_index=record.trial_index,
                mean_c_index=record.mean_c_index,
                summary=describe_trial(record),
            )
        )

    def on_trial_failed(self, event: TrialFailed):
        record = event.record
        self.state.trial_done(
            TrialLine(
                trial_index=record.trial_index,
                mean_c_index=None,
                summary=describe_trial(record),
                failed=True,
                error=event.error_message,
            )
        )

    def on_search_finished(self, event: SearchFinished):
        logger.debug("UI: search finished, best trial %d", event.best_trial_index)
        self.state.finish(event.best_trial_index, event.best_c_index)
