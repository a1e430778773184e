import threading
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional


@dataclass(frozen=True)
class TrialLine:
    """One finished (or failed) trial for the recent-trials feed."""

    trial_index: int
    mean_c_index: Optional[float]
    summary: str
    failed: bool = False
    error: Optional[str] = None


class SearchState:
    """Thread-safe search progress shared between the event handlers and the dashboard."""

    def __init__(self, recent_trials: int = 5):
        self._lock = threading.RLock()
        self.budget = 0
        self.resumed = 0
        self.completed = 0
        self.failed = 0
        self.running: Dict[int, int] = {}  # trial index -> folds scored
        self.n_folds = 0
        self.best_index: Optional[int] = None
        self.best_c_index: Optional[float] = None
        self.recent: Deque[TrialLine] = deque(maxlen=recent_trials)
        self.finished = False

    def start(self, budget: int, resumed: int) -> None:
        with self._lock:
            self.budget = budget
            self.resumed = resumed
            self.completed = resumed
            self.failed = 0
            self.running.clear()
            self.recent.clear()
            self.finished = False

    def trial_started(self, trial_index: int) -> None:
        with self._lock:
            self.running[trial_index] = 0

    def fold_scored(self, trial_index: int, n_folds: int) -> None:
        with self._lock:
            self.n_folds = n_folds
            if trial_index in self.running:
                self.running[trial_index] += 1

    def trial_done(self, line: TrialLine) -> None:
        with self._lock:
            self.running.pop(line.trial_index, None)
            self.completed += 1
            if line.failed:
                self.failed += 1
            elif self.best_c_index is None or line.mean_c_index > self.best_c_index:
                self.best_c_index = line.mean_c_index
                self.best_index = line.trial_index
            self.recent.appendleft(line)

    def finish(self, best_index: int, best_c_index: float) -> None:
        with self._lock:
            self.best_index = best_index
            self.best_c_index = best_c_index
            self.finished = True

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "budget": self.budget,
                "completed": self.completed,
                "failed": self.failed,
                "running": dict(self.running),
                "n_folds": self.n_folds,
                "best_index": self.best_index,
                "best_c_index": self.best_c_index,
                "recent": list(self.recent),
                "finished": self.finished,
            }

    @property
    def running_trials(self) -> List[int]:
        with self._lock:
            return sorted(self.running)
