from rich.console import Console

from waitsurv.domain.models import FeatureRanking
from waitsurv.pipeline.compare import ComparisonRow
from waitsurv.pipeline.runner import EvaluationRow
from waitsurv.ui.report import show_comparison, show_evaluation, show_ranking


def _console():
    return Console(record=True, width=120)


def test_ranking_table_escapes_markup():
    console = _console()
    show_ranking(console, FeatureRanking(("[bold]age", "lanes"), [0.2, 0.05]), limit=1)

    text = console.export_text()
    assert "[bold]age" in text
    assert "lanes" not in text


def test_comparison_table_formats_covariates():
    console = _console()
    show_comparison(
        console,
        [
            ComparisonRow("Linear CPH", 6.5, 0.61, [0.6, 0.62]),
            ComparisonRow("Deep CPH", 17.0, 0.66, [0.65, 0.67]),
        ],
    )

    text = console.export_text()
    assert "6.5" in text
    assert "17" in text and "17.0" not in text
    assert "0.6600" in text


def test_evaluation_table():
    console = _console()
    show_evaluation(console, [EvaluationRow("bundle", "deep", 3, 0.7)])

    assert "0.7000" in console.export_text()
