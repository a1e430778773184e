"""Typed CSV ingestion against a declared column schema."""

import logging
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd

from waitsurv.domain.errors import DataError
from waitsurv.domain.models import RawTable, SurvivalDataset, TableSchema
from waitsurv.infrastructure.artifacts import write_csv

logger = logging.getLogger(__name__)

# Data row i (0-based) sits on file line i + 2; line 1 is the header.
_FIRST_DATA_LINE = 2

DURATION_COLUMN = "duration"
EVENT_COLUMN = "event"


def _read_frame(path: Path) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Data file not found: {path}")
    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError as exc:
        raise DataError(f"{path} is empty (no header row)") from exc
    return frame.fillna("").rename(columns=lambda name: str(name).strip())


def _parse_numeric(frame: pd.DataFrame, column: str, row_numbers: np.ndarray) -> np.ndarray:
    raw = frame[column].str.strip()
    values = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        position = int(bad[0])
        cell = raw.iloc[position]
        if cell == "":
            raise DataError("missing value", row=int(row_numbers[position]), column=column)
        raise DataError(
            f"cannot parse '{cell}' as a number",
            row=int(row_numbers[position]),
            column=column,
        )
    return values


def _parse_categorical(
    frame: pd.DataFrame, column: str, levels: List[str], row_numbers: np.ndarray
) -> np.ndarray:
    values = frame[column].str.strip()
    unknown = np.flatnonzero(~values.isin(levels).to_numpy())
    if unknown.size:
        position = int(unknown[0])
        raise DataError(
            f"unknown level '{values.iloc[position]}'; allowed levels: {', '.join(levels)}",
            row=int(row_numbers[position]),
            column=column,
        )
    return values.to_numpy(dtype=object)


def load_csv(path: Path, schema: TableSchema) -> RawTable:
    """Read a CSV with a header row and type every column per `schema`.

    Rows with an empty duration or event cell are dropped and reported in
    `rejected_rows` (file line numbers). Any other problem raises.

    Raises:
        FileNotFoundError: If the file does not exist.
        DataError: Unknown or missing columns, unparseable cells, undeclared
            categorical levels, non-positive durations, events outside {0, 1}.
    """
    frame = _read_frame(path)

    unknown = [name for name in frame.columns if name not in schema.columns]
    if unknown:
        raise DataError(f"unknown column(s) not declared in schema: {', '.join(unknown)}")
    missing = [name for name in schema.columns if name not in frame.columns]
    if missing:
        raise DataError(f"column(s) declared in schema but missing from file: {', '.join(missing)}")

    line_numbers = np.arange(len(frame), dtype=np.int64) + _FIRST_DATA_LINE
    blank = (frame.apply(lambda col: col.str.strip()) == "").all(axis=1).to_numpy()
    frame = frame.loc[~blank].reset_index(drop=True)
    line_numbers = line_numbers[~blank]
    if frame.empty:
        raise DataError(f"{path} has a header but no data rows")

    target_missing = (
        (frame[schema.duration_column].str.strip() == "")
        | (frame[schema.event_column].str.strip() == "")
    ).to_numpy()
    rejected = tuple(int(n) for n in line_numbers[target_missing])
    if rejected:
        logger.warning(
            "Rejected %d row(s) with missing duration/event: lines %s",
            len(rejected), ", ".join(str(n) for n in rejected),
        )
    frame = frame.loc[~target_missing].reset_index(drop=True)
    line_numbers = line_numbers[~target_missing]
    if frame.empty:
        raise DataError(f"{path}: every row lacks a duration or event")

    columns: Dict[str, np.ndarray] = {}
    for name, spec in schema.columns.items():
        if spec.type == "numeric":
            columns[name] = _parse_numeric(frame, name, line_numbers)
        else:
            columns[name] = _parse_categorical(frame, name, spec.levels, line_numbers)

    durations = columns[schema.duration_column]
    bad_duration = np.flatnonzero(durations <= 0)
    if bad_duration.size:
        position = int(bad_duration[0])
        raise DataError(
            f"duration must be positive, got {durations[position]:g}",
            row=int(line_numbers[position]),
            column=schema.duration_column,
        )
    events = columns[schema.event_column]
    bad_event = np.flatnonzero(~np.isin(events, (0.0, 1.0)))
    if bad_event.size:
        position = int(bad_event[0])
        raise DataError(
            f"event must be 0 or 1, got {events[position]:g}",
            row=int(line_numbers[position]),
            column=schema.event_column,
        )

    for array in columns.values():
        array.setflags(write=False)
    logger.info("Loaded %d rows from %s (%d rejected)", len(frame), path, len(rejected))
    return RawTable(
        schema=schema,
        columns=columns,
        row_numbers=line_numbers,
        rejected_rows=rejected,
    )


def write_dataset(path: Path, dataset: SurvivalDataset) -> None:
    """Encoded dataset as CSV: one column per feature, then duration and event."""
    frame = pd.DataFrame(dataset.features, columns=list(dataset.feature_names))
    frame[DURATION_COLUMN] = dataset.durations
    frame[EVENT_COLUMN] = dataset.events.astype(np.int64)
    write_csv(path, frame)
