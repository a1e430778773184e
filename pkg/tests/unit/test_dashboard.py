from rich.console import Console
from rich.panel import Panel

from waitsurv.ui.dashboard import SearchDashboard
from waitsurv.ui.state import SearchState, TrialLine


def _render(dashboard):
    console = Console(record=True, width=100)
    console.print(dashboard.create_display())
    return console.export_text()


def test_dashboard_initialization():
    state = SearchState()
    dashboard = SearchDashboard(state)

    assert dashboard.state is state
    assert isinstance(dashboard.create_display(), Panel)


def test_dashboard_shows_progress_and_best():
    state = SearchState()
    state.start(budget=4, resumed=1)
    state.trial_started(2)
    state.trial_done(TrialLine(1, 0.6123, "n=2 1x4 drop=0.00 bn=off lr=1.0e-03"))
    state.trial_done(TrialLine(3, None, "n=2", failed=True, error="diverged"))

    text = _render(SearchDashboard(state))

    assert "Random search" in text
    assert "3/4 trials, 1 failed" in text
    assert "best #1: 0.6123" in text
    assert "#2" in text
    assert "diverged" in text


def test_dashboard_title_after_finish():
    state = SearchState()
    state.start(budget=1, resumed=0)
    state.finish(best_index=0, best_c_index=0.5)

    assert "Search finished" in _render(SearchDashboard(state))


def test_dashboard_context_manager_stops_cleanly():
    state = SearchState()
    console = Console(record=True, width=80, force_terminal=False)

    with SearchDashboard(state, console=console) as dashboard:
        state.start(budget=1, resumed=0)

    assert dashboard._stop_refresh.is_set()
