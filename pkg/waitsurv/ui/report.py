"""Console tables for command results.

Feature and level names come from user CSV headers, so they are escaped
before they reach Rich markup.
"""

import math
from typing import Iterable, Optional

from rich.console import Console
from rich.markup import escape
from rich.table import Table

from waitsurv.domain.models import FeatureRanking
from waitsurv.pipeline.compare import ComparisonRow
from waitsurv.pipeline.runner import EvaluationRow, LinearReport
from waitsurv.pipeline.search import SearchResult
from waitsurv.preprocess.describe import Description
from waitsurv.preprocess.synthetic import GroundTruth
from waitsurv.ui.manager import describe_trial


def _number(value: Optional[float], digits: int = 4) -> str:
    if value is None or math.isnan(value):
        return "-"
    return f"{value:.{digits}f}"


def _p_value(value: float) -> str:
    return "<0.001" if value < 0.001 else f"{value:.3f}"


def show_generated(console: Console, truth: GroundTruth) -> None:
    spec = truth.spec
    console.print(
        f"Generated [bold]{spec.n_samples}[/] samples x {spec.n_features} features "
        f"({spec.risk.kind} risk, {spec.baseline.kind} baseline), "
        f"censored {truth.realized_censoring_rate:.3f} (target {spec.censoring_rate:.3f})"
    )


def show_description(console: Console, description: Description, histogram_rows: int = 0) -> None:
    table = Table(title="Average waiting time per level")
    table.add_column("Variable")
    table.add_column("Level")
    table.add_column("N", justify="right")
    table.add_column("Mean wait (s)", justify="right")
    for row in description.levels:
        table.add_row(escape(row.variable), escape(row.level), str(row.count), _number(row.mean, 2))
    console.print(table)
    console.print(
        f"{description.n_rows} rows, {description.n_events} observed crossings, "
        f"{len(description.histogram)} histogram bins"
    )
    if histogram_rows:
        hist = Table(title="Waiting-time histogram")
        hist.add_column("Bin")
        hist.add_column("Count", justify="right")
        for b in description.histogram[:histogram_rows]:
            hist.add_row(escape(f"[{b.lower:g}, {b.upper:g})"), str(b.count))
        console.print(hist)


def show_linear(console: Console, report: LinearReport) -> None:
    model = report.model
    for removal in model.vif_removals:
        console.print(f"VIF screen removed [yellow]{escape(removal.feature)}[/] (VIF {removal.vif:.2f})")
    for step in model.eliminations:
        console.print(f"Backward elimination removed [yellow]{escape(step.feature)}[/] (p={step.p_value:.4f})")

    if model.fit is None:
        console.print("[bold yellow]No covariate is significant; null model[/]")
    else:
        table = Table(title="Linear Cox model")
        table.add_column("Covariate")
        table.add_column("Coefficient", justify="right")
        table.add_column("Hazard ratio", justify="right")
        table.add_column("Std. error", justify="right")
        table.add_column("p-value", justify="right")
        for row in model.coefficient_rows():
            table.add_row(
                escape(row["feature"]),
                _number(row["coefficient"]),
                _number(row["hazard_ratio"]),
                _number(row["standard_error"]),
                _p_value(row["p_value"]),
            )
        console.print(table)
    cv = report.cross_validation
    console.print(f"mean C-index ({len(cv.fold_c_indices)}-fold): [bold]{cv.mean_c_index:.2f}[/]")


def show_ranking(console: Console, ranking: FeatureRanking, limit: Optional[int] = None) -> None:
    table = Table(title="RReliefF feature ranking")
    table.add_column("Rank", justify="right")
    table.add_column("Feature")
    table.add_column("Weight", justify="right")
    rows = ranking.rows()
    for rank, name, weight in rows if limit is None else rows[:limit]:
        table.add_row(str(rank), escape(name), f"{weight:.5f}")
    console.print(table)


def show_search(console: Console, result: SearchResult) -> None:
    best = result.best
    console.print(
        f"{len(result.trials)} trials ({len(result.failed)} failed"
        f"{f', {result.resumed} resumed' if result.resumed else ''}); "
        f"best trial #{best.trial_index}: mean C-index [bold]{best.mean_c_index:.4f}[/]"
    )
    console.print(f"  {describe_trial(best)}")


def _comparison_table(title: str) -> Table:
    table = Table(title=title)
    table.add_column("Model")
    table.add_column("Number of covariates", justify="right")
    table.add_column("C-index", justify="right")
    return table


def show_evaluation(console: Console, rows: Iterable[EvaluationRow]) -> None:
    table = _comparison_table("Model evaluation")
    for row in rows:
        table.add_row(escape(row.model), str(row.covariates), f"{row.c_index:.4f}")
    console.print(table)


def show_comparison(console: Console, rows: Iterable[ComparisonRow]) -> None:
    table = _comparison_table("Comparing the models (cross-validated)")
    for row in rows:
        covariates = f"{row.covariates:g}" if float(row.covariates).is_integer() else f"{row.covariates:.1f}"
        table.add_row(escape(row.model), covariates, f"{row.mean_c_index:.4f}")
    console.print(table)
