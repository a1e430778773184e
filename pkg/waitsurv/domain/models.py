"""Domain models for waiting-time survival analysis.

Numeric containers (`SurvivalDataset`, `RiskScores`, `BaselineHazard`,
`FeatureRanking`, `RawTable`) are frozen dataclasses over read-only numpy arrays,
validated on construction. Schema, encoding and bookkeeping records are pydantic
models so they serialize straight to YAML.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from waitsurv.domain.errors import DataError, DimensionMismatchError, NoEventsError


def _frozen_array(values: Any, dtype: Any) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SurvivalDataset:
    """Covariates, waiting times and event indicators for a set of samples.

    Attributes:
        features: n_samples x n_features matrix.
        feature_names: Unique column identifiers.
        durations: Observed waiting time in seconds (strictly positive).
        events: True when the crossing was observed, False when right-censored.
    """

    features: np.ndarray
    feature_names: Tuple[str, ...]
    durations: np.ndarray
    events: np.ndarray

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64, copy=True)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        if features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        durations = np.array(self.durations, dtype=np.float64, copy=True).reshape(-1)
        events = np.array(self.events, copy=True).reshape(-1)
        if events.dtype != np.bool_:
            if not np.isin(events, (0, 1)).all():
                raise DataError("events must be 0/1 or boolean")
            events = events.astype(bool)
        names = tuple(str(name) for name in self.feature_names)

        n_samples = durations.shape[0]
        if features.shape[0] != n_samples or events.shape[0] != n_samples:
            raise DimensionMismatchError(
                f"features ({features.shape[0]}), durations ({n_samples}) and "
                f"events ({events.shape[0]}) must have the same length"
            )
        if len(names) != features.shape[1]:
            raise DimensionMismatchError(
                f"{len(names)} feature names for {features.shape[1]} feature columns"
            )
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        if not np.all(np.isfinite(durations)) or np.any(durations <= 0):
            raise DataError("durations must be strictly positive and finite")
        if not np.all(np.isfinite(features)):
            raise DataError("features contain non-finite values")

        for array in (features, durations, events):
            array.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return int(self.durations.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def event_count(self) -> int:
        return int(self.events.sum())

    def require_events(self) -> None:
        if self.event_count == 0:
            raise NoEventsError()

    def subset(self, indices: Sequence[int] | np.ndarray) -> "SurvivalDataset":
        idx = np.asarray(indices, dtype=np.intp)
        return SurvivalDataset(
            features=self.features[idx],
            feature_names=self.feature_names,
            durations=self.durations[idx],
            events=self.events[idx],
        )

    def select(self, names: Sequence[str]) -> "SurvivalDataset":
        """Keep only the named feature columns, in the order given."""
        positions = {name: i for i, name in enumerate(self.feature_names)}
        missing = [name for name in names if name not in positions]
        if missing:
            raise DataError(f"Unknown features: {', '.join(missing)}")
        columns = [positions[name] for name in names]
        return self.with_features(self.features[:, columns], names)

    def drop(self, name: str) -> "SurvivalDataset":
        return self.select([n for n in self.feature_names if n != name])

    def with_features(
        self, features: np.ndarray, names: Sequence[str]
    ) -> "SurvivalDataset":
        return SurvivalDataset(
            features=features,
            feature_names=tuple(names),
            durations=self.durations,
            events=self.events,
        )


@dataclass(frozen=True)
class RiskScores:
    """Per-sample log-risk h_i (linear predictor or network output)."""

    log_risk: np.ndarray

    def __post_init__(self):
        values = np.array(self.log_risk, dtype=np.float64, copy=True).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise DataError("risk scores must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "log_risk", values)

    def __len__(self) -> int:
        return int(self.log_risk.shape[0])

    @classmethod
    def coerce(cls, scores: "RiskScores | Sequence[float] | np.ndarray") -> "RiskScores":
        if isinstance(scores, RiskScores):
            return scores
        return cls(np.asarray(scores, dtype=np.float64))


@dataclass(frozen=True)
class BaselineHazard:
    """Breslow cumulative baseline hazard at each distinct event time."""

    event_times: np.ndarray
    cumulative_hazard: np.ndarray

    def __post_init__(self):
        times = _frozen_array(self.event_times, np.float64).reshape(-1)
        hazard = _frozen_array(self.cumulative_hazard, np.float64).reshape(-1)
        if times.shape != hazard.shape:
            raise DimensionMismatchError("event_times and cumulative_hazard lengths differ")
        if times.size and (np.any(times <= 0) or np.any(np.diff(times) <= 0)):
            raise DataError("event times must be positive and strictly increasing")
        if np.any(hazard < 0) or np.any(np.diff(hazard) < 0):
            raise DataError("cumulative hazard must be non-negative and non-decreasing")
        object.__setattr__(self, "event_times", times)
        object.__setattr__(self, "cumulative_hazard", hazard)

    def at(self, times: Sequence[float] | np.ndarray) -> np.ndarray:
        """Right-continuous step evaluation of H0; zero before the first event."""
        query = np.asarray(times, dtype=np.float64)
        positions = np.searchsorted(self.event_times, query, side="right")
        padded = np.concatenate(([0.0], self.cumulative_hazard))
        return padded[positions]


@dataclass(frozen=True)
class FeatureRanking:
    """Relief importance weights with a deterministic rank order.

    Rank order is descending weight; equal weights fall back to the feature name.
    """

    feature_names: Tuple[str, ...]
    weights: np.ndarray
    order: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        names = tuple(self.feature_names)
        weights = _frozen_array(self.weights, np.float64).reshape(-1)
        if len(names) != weights.shape[0]:
            raise DimensionMismatchError("one weight per feature is required")
        order = tuple(sorted(range(len(names)), key=lambda i: (-weights[i], names[i])))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "order", order)

    @property
    def ranked_names(self) -> List[str]:
        return [self.feature_names[i] for i in self.order]

    def weight_of(self, name: str) -> float:
        return float(self.weights[self.feature_names.index(name)])

    def rows(self) -> List[Tuple[int, str, float]]:
        """(rank, feature, weight) rows in rank order."""
        return [
            (rank, self.feature_names[i], float(self.weights[i]))
            for rank, i in enumerate(self.order, start=1)
        ]


class ColumnSpec(BaseModel):
    """Declared type of one input column."""

    model_config = ConfigDict(extra="forbid")

    type: Literal["numeric", "categorical"]
    levels: List[str] = Field(default_factory=list)

    @field_validator("levels", mode="before")
    @classmethod
    def normalize_levels(cls, v):
        if v is None:
            return []
        return [str(level).strip() for level in v]

    @model_validator(mode="after")
    def validate_levels(self):
        if self.type == "categorical":
            if len(self.levels) < 2:
                raise ValueError("categorical columns need at least two declared levels")
            if len(set(self.levels)) != len(self.levels):
                raise ValueError("categorical levels must be unique")
        elif self.levels:
            raise ValueError("numeric columns cannot declare levels")
        return self


class TableSchema(BaseModel):
    """Column type declarations plus duration/event designations."""

    model_config = ConfigDict(extra="forbid")

    duration_column: str
    event_column: str
    columns: Dict[str, ColumnSpec]

    @model_validator(mode="after")
    def validate_designations(self):
        for role, name in (
            ("duration_column", self.duration_column),
            ("event_column", self.event_column),
        ):
            spec = self.columns.get(name)
            if spec is None:
                raise ValueError(f"{role} '{name}' is not declared in columns")
            if spec.type != "numeric":
                raise ValueError(f"{role} '{name}' must be numeric")
        if self.duration_column == self.event_column:
            raise ValueError("duration_column and event_column must differ")
        return self

    @property
    def covariate_columns(self) -> List[str]:
        return [
            name
            for name in self.columns
            if name not in (self.duration_column, self.event_column)
        ]


@dataclass(frozen=True)
class RawTable:
    """Typed rows read from CSV.

    Numeric columns hold float64 arrays, categorical columns hold arrays of level
    strings. `row_numbers` are 1-based file line numbers (header is line 1).
    """

    schema: TableSchema
    columns: Dict[str, np.ndarray]
    row_numbers: np.ndarray
    rejected_rows: Tuple[int, ...] = ()

    @property
    def n_rows(self) -> int:
        return int(self.row_numbers.shape[0])

    @property
    def durations(self) -> np.ndarray:
        return self.columns[self.schema.duration_column]

    @property
    def events(self) -> np.ndarray:
        return self.columns[self.schema.event_column].astype(bool)


class EncodedColumn(BaseModel):
    """Encoding of one source column.

    Categorical columns drop `reference` and emit one indicator per remaining
    level, named "column: level". Numeric columns emit themselves, standardized
    with `mean`/`std` when those are set.
    """

    name: str
    kind: Literal["numeric", "categorical"]
    reference: Optional[str] = None
    levels: List[str] = Field(default_factory=list)
    emitted: List[str]
    mean: Optional[float] = None
    std: Optional[float] = None

    @model_validator(mode="after")
    def validate_scale(self):
        if self.std is not None and not self.std > 0:
            raise ValueError(f"standard deviation for '{self.name}' must be > 0")
        return self


class EncodingSpec(BaseModel):
    standardize: bool = True
    columns: List[EncodedColumn]

    @model_validator(mode="after")
    def validate_names(self):
        names = self.feature_names
        if len(names) != len(set(names)):
            raise ValueError("emitted feature names collide")
        return self

    @property
    def feature_names(self) -> List[str]:
        return [name for column in self.columns for name in column.emitted]


class TrialRecord(BaseModel):
    """Outcome of one random-search trial.

    `model` holds the sampled model settings as plain values; a settings
    object passed in is dumped to a mapping.
    """

    trial_index: int = Field(ge=0)
    seed: int
    model: Dict[str, Any]
    fold_c_indices: List[float] = Field(default_factory=list)
    mean_c_index: Optional[float] = None
    wall_time: float = Field(default=0.0, ge=0.0)
    status: Literal["ok", "failed"] = "ok"
    error: Optional[str] = None

    @field_validator("model", mode="before")
    @classmethod
    def dump_settings(cls, v: Any) -> Any:
        return v.model_dump() if isinstance(v, BaseModel) else v

    @model_validator(mode="after")
    def validate_mean(self):
        if self.status == "ok":
            if not self.fold_c_indices:
                raise ValueError("successful trials need fold C-indices")
            expected = float(np.mean(self.fold_c_indices))
            if self.mean_c_index is None:
                self.mean_c_index = expected
            elif abs(self.mean_c_index - expected) > 1e-12:
                raise ValueError("mean_c_index must be the mean of fold C-indices")
        return self


class RunManifest(BaseModel):
    """Everything needed to re-run a command and check its outputs."""

    command: str
    arguments: Dict[str, Any] = Field(default_factory=dict)
    config: Dict[str, Any] = Field(default_factory=dict)
    input_digests: Dict[str, str] = Field(default_factory=dict)
    output_digests: Dict[str, str] = Field(default_factory=dict)
    seed: int
    version: str
    started_at: datetime
    finished_at: Optional[datetime] = None
    status: Literal["ok", "failed"] = "ok"
    error: Optional[str] = None
