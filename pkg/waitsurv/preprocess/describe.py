"""Descriptive statistics: mean waiting time per covariate level and a duration histogram."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import pandas as pd

from waitsurv.domain.errors import DataError
from waitsurv.domain.models import RawTable

logger = logging.getLogger(__name__)

MAX_HISTOGRAM_BINS = 10_000


@dataclass(frozen=True)
class LevelMean:
    variable: str
    level: str
    count: int
    mean: Optional[float]


@dataclass(frozen=True)
class HistogramBin:
    lower: float
    upper: float
    count: int


@dataclass(frozen=True)
class Description:
    n_rows: int
    n_events: int
    levels: List[LevelMean]
    histogram: List[HistogramBin]


def _format_level(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:g}"


def level_means(table: RawTable, max_numeric_levels: int = 10) -> List[LevelMean]:
    """Mean duration for every declared categorical level (and small-cardinality numeric values).

    Levels without rows report `mean=None`.
    """
    schema = table.schema
    durations = table.durations
    rows: List[LevelMean] = []
    for name in schema.covariate_columns:
        spec = schema.columns[name]
        values = table.columns[name]
        if spec.type == "categorical":
            keys = pd.Series(values, dtype=object)
            order = list(spec.levels)
        else:
            distinct = np.unique(values)
            if distinct.shape[0] > max_numeric_levels:
                continue
            keys = pd.Series([_format_level(v) for v in values], dtype=object)
            order = [_format_level(v) for v in distinct]
        grouped = (
            pd.DataFrame({"level": keys, "duration": durations})
            .groupby("level", sort=False)["duration"]
            .agg(["count", "mean"])
            .reindex(order)
        )
        for level, stats in grouped.iterrows():
            count = 0 if pd.isna(stats["count"]) else int(stats["count"])
            mean = None if count == 0 else float(stats["mean"])
            rows.append(LevelMean(variable=name, level=str(level), count=count, mean=mean))
    return rows


def duration_histogram(durations: np.ndarray, bin_width: float = 1.0) -> List[HistogramBin]:
    """Bins [k*w, (k+1)*w) from zero up to the longest duration.

    At most MAX_HISTOGRAM_BINS bins are produced; a wider span widens the bins.
    """
    if bin_width <= 0:
        raise DataError(f"bin width must be positive, got {bin_width}")
    if durations.shape[0] == 0:
        return []
    values = np.asarray(durations, dtype=np.float64)
    longest = float(values.max())
    if not longest / bin_width < MAX_HISTOGRAM_BINS:
        widened = longest / (MAX_HISTOGRAM_BINS - 1)
        logger.warning(
            "Histogram bin width %g would need more than %d bins; using %g",
            bin_width, MAX_HISTOGRAM_BINS, widened,
        )
        bin_width = widened
    indices = np.minimum(np.floor(values / bin_width).astype(np.int64), MAX_HISTOGRAM_BINS - 1)
    counts = np.bincount(indices)
    return [
        HistogramBin(lower=k * bin_width, upper=(k + 1) * bin_width, count=int(c))
        for k, c in enumerate(counts)
    ]


def describe(table: RawTable, bin_width: float = 1.0, max_numeric_levels: int = 10) -> Description:
    if table.n_rows == 0:
        raise DataError("cannot describe an empty table")
    return Description(
        n_rows=table.n_rows,
        n_events=int(table.events.sum()),
        levels=level_means(table, max_numeric_levels=max_numeric_levels),
        histogram=duration_histogram(table.durations, bin_width=bin_width),
    )
