import logging
import threading
import time
from typing import Optional

from rich.console import Console, Group
from rich.live import Live
from rich.panel import Panel
from rich.progress_bar import ProgressBar
from rich.table import Table
from rich.text import Text

from waitsurv.ui.state import SearchState

logger = logging.getLogger(__name__)


class SearchDashboard:
    """Live view of a random search: overall progress, running trials, recent results."""

    def __init__(self, state: SearchState, console: Optional[Console] = None):
        self.state = state
        self.console = console or Console()
        self._live: Optional[Live] = None
        self._refresh_thread: Optional[threading.Thread] = None
        self._stop_refresh = threading.Event()

    def create_display(self) -> Panel:
        snap = self.state.snapshot()
        budget = max(snap["budget"], 1)

        header = Table.grid(expand=True)
        header.add_column(ratio=1)
        header.add_column(justify="right")
        best = (
            f"best #{snap['best_index']}: {snap['best_c_index']:.4f}"
            if snap["best_c_index"] is not None
            else "best: -"
        )
        header.add_row(
            Text(f"{snap['completed']}/{snap['budget']} trials, {snap['failed']} failed"),
            Text(best, style="bold green"),
        )

        running = Table(show_header=False, box=None, padding=(0, 1))
        running.add_column(width=8)
        running.add_column(ratio=1)
        for index, folds in sorted(snap["running"].items()):
            running.add_row(
                f"#{index}",
                ProgressBar(total=max(snap["n_folds"], 1), completed=folds),
            )

        recent = Table(show_header=False, box=None, padding=(0, 1))
        recent.add_column(width=8)
        recent.add_column(width=8, justify="right")
        recent.add_column(ratio=1, overflow="ellipsis", no_wrap=True)
        for line in snap["recent"]:
            if line.failed:
                recent.add_row(f"#{line.trial_index}", Text("failed", style="red"), line.error or "")
            else:
                recent.add_row(f"#{line.trial_index}", f"{line.mean_c_index:.4f}", line.summary)

        title = "Search finished" if snap["finished"] else "Random search"
        return Panel(
            Group(header, ProgressBar(total=budget, completed=snap["completed"]), running, recent),
            title=title,
        )

    def _refresh_loop(self):
        while not self._stop_refresh.is_set():
            if self._live:
                try:
                    self._live.update(self.create_display())
                except Exception:
                    logger.exception("Dashboard refresh failed; search continues")
            time.sleep(0.5)

    def start(self):
        self._live = Live(self.create_display(), console=self.console, refresh_per_second=4)
        self._live.start()
        self._stop_refresh.clear()
        self._refresh_thread = threading.Thread(target=self._refresh_loop, daemon=True)
        self._refresh_thread.start()
        return self

    def stop(self):
        self._stop_refresh.set()
        if self._refresh_thread:
            self._refresh_thread.join(timeout=1.0)
        if self._live:
            try:
                self._live.update(self.create_display())
            except Exception:
                logger.exception("Dashboard final refresh failed")
            self._live.stop()

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.stop()
        return False
