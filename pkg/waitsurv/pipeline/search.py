"""Random hyperparameter search over the RReliefF + deep Cox pipeline.

Trial i draws its configuration from `default_rng(derive_seed(seed, "search", i))`,
so the trial sequence does not depend on the number of workers or on how
far a previous run got. Every trial is cross-validated on the same folds.

The trial log is append-only and written by the calling thread in trial
order; a rerun with the same seed and space resumes after the last logged
trial.
"""

from __future__ import annotations

import concurrent.futures
import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from waitsurv.config.models import DeepModelConfig, NetworkConfig, ReliefConfig, SearchSpace
from waitsurv.domain.errors import FoldError, SearchError
from waitsurv.domain.events import (
    SearchFinished,
    SearchStarted,
    TrialFailed,
    TrialFinished,
    TrialStarted,
)
from waitsurv.domain.models import SurvivalDataset, TrialRecord
from waitsurv.infrastructure.artifacts import append_rows
from waitsurv.infrastructure.event_bus import EventBus
from waitsurv.pipeline.evaluation import cross_validate, kfold_split
from waitsurv.pipeline.models import DeepCoxPipeline, RankingCache
from waitsurv.pipeline.seeding import derive_seed

logger = logging.getLogger(__name__)

TRIAL_LOG = "trial_log.csv"
TRIAL_TIMING = "trial_timing.csv"

HYPERPARAMETERS = (
    "n_features",
    "n_layers",
    "layer_width",
    "dropout_rate",
    "batch_norm",
    "l2_coefficient",
    "learning_rate",
    "lr_decay",
    "momentum",
    "epochs",
    "inner_validation",
)


@dataclass
class SearchResult:
    best: TrialRecord
    trials: List[TrialRecord]
    folds: List[np.ndarray] = field(default_factory=list)
    resumed: int = 0

    @property
    def failed(self) -> List[int]:
        return [t.trial_index for t in self.trials if t.status == "failed"]


def trial_seed(master: int, trial_index: int) -> int:
    return derive_seed(master, "search", trial_index)


def sample_model_config(space: SearchSpace, rng: np.random.Generator, n_available: int) -> DeepModelConfig:
    """Draw one configuration; fields are sampled in a fixed order.

    The feature count is capped at `n_available`. All hidden layers share one width.
    """
    n_features = min(int(space.n_features.sample(rng)), n_available)
    n_layers = int(space.n_layers.sample(rng))
    width = int(space.layer_width.sample(rng))
    network = NetworkConfig(
        hidden_layers=[width] * n_layers,
        dropout_rate=float(space.dropout_rate.sample(rng)),
        batch_norm=bool(space.batch_norm.sample(rng)),
        l2_coefficient=float(space.l2_coefficient.sample(rng)),
        learning_rate=float(space.learning_rate.sample(rng)),
        lr_decay=float(space.lr_decay.sample(rng)),
        momentum=float(space.momentum.sample(rng)),
        epochs=int(space.epochs.sample(rng)),
    )
    return DeepModelConfig(
        network=network,
        n_features=max(1, n_features),
        inner_validation=space.inner_validation,
    )


def trial_model(record: TrialRecord) -> DeepModelConfig:
    """The model settings a trial ran with."""
    return DeepModelConfig.model_validate(record.model)


def hyperparameters(model: DeepModelConfig) -> Dict[str, Any]:
    network = model.network
    return {
        "n_features": model.n_features,
        "n_layers": len(network.hidden_layers),
        "layer_width": network.hidden_layers[0],
        "dropout_rate": network.dropout_rate,
        "batch_norm": network.batch_norm,
        "l2_coefficient": network.l2_coefficient,
        "learning_rate": network.learning_rate,
        "lr_decay": network.lr_decay,
        "momentum": network.momentum,
        "epochs": network.epochs,
        "inner_validation": model.inner_validation,
    }


def log_columns(k: int) -> List[str]:
    return [
        "trial_index",
        "seed",
        *HYPERPARAMETERS,
        *(f"fold_{i}" for i in range(k)),
        "mean_c_index",
        "status",
        "error",
    ]


def record_row(record: TrialRecord, k: int) -> Dict[str, Any]:
    row: Dict[str, Any] = {"trial_index": record.trial_index, "seed": record.seed}
    row.update(hyperparameters(trial_model(record)))
    for i in range(k):
        row[f"fold_{i}"] = record.fold_c_indices[i] if i < len(record.fold_c_indices) else None
    row["mean_c_index"] = record.mean_c_index
    row["status"] = record.status
    row["error"] = record.error
    return row


def _same_value(logged: Any, sampled: Any) -> bool:
    if isinstance(sampled, bool):
        return str(logged) == str(sampled)
    try:
        return math.isclose(float(logged), float(sampled), rel_tol=1e-12, abs_tol=0.0)
    except (TypeError, ValueError):
        return False


def read_trial_log(
    path: Path,
    space: SearchSpace,
    master_seed: int,
    k: int,
    n_available: int,
) -> List[TrialRecord]:
    """Trials already in `path`, checked against the configurations the seed would draw.

    Raises:
        SearchError: If the log was produced with another seed, space or fold count.
    """
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        return []
    frame = pd.read_csv(path, float_precision="round_trip", keep_default_na=True)
    expected = log_columns(k)
    if list(frame.columns) != expected:
        raise SearchError(
            f"{path}: columns do not match a {k}-fold search log; "
            "use another output directory or the original settings"
        )

    records: List[TrialRecord] = []
    for position, row in enumerate(frame.to_dict(orient="records")):
        index = int(row["trial_index"])
        if index != position:
            raise SearchError(f"{path}: trial {index} logged at position {position}")
        seed = trial_seed(master_seed, index)
        model = sample_model_config(space, np.random.default_rng(seed), n_available)
        sampled = hyperparameters(model)
        if int(row["seed"]) != seed or not all(
            _same_value(row[name], sampled[name]) for name in HYPERPARAMETERS
        ):
            raise SearchError(
                f"{path}: trial {index} does not match the configured seed and search space"
            )
        ok = row["status"] == "ok"
        folds = [float(row[f"fold_{i}"]) for i in range(k)] if ok else []
        error = row["error"] if isinstance(row["error"], str) else None
        records.append(
            TrialRecord(
                trial_index=index,
                seed=seed,
                model=model,
                fold_c_indices=folds,
                status="ok" if ok else "failed",
                error=error,
            )
        )
    return records


def best_trial(records: List[TrialRecord]) -> TrialRecord:
    """Highest mean C-index; the earliest trial wins ties.

    Raises:
        SearchError: If no trial succeeded.
    """
    ok = [r for r in records if r.status == "ok"]
    if not ok:
        raise SearchError(f"all {len(records)} trials failed")
    return max(ok, key=lambda r: (r.mean_c_index, -r.trial_index))


def _error_message(exc: BaseException) -> str:
    cause = exc.cause if isinstance(exc, FoldError) else exc
    return f"{type(cause).__name__}: {exc}"


class RandomSearch:
    """Runs trials on a thread pool, logging results in trial order."""

    def __init__(
        self,
        dataset: SurvivalDataset,
        space: SearchSpace,
        *,
        seed: int,
        k: int = 10,
        jobs: int = 1,
        relief: Optional[ReliefConfig] = None,
        bus: Optional[EventBus] = None,
        ranking_cache: Optional[RankingCache] = None,
    ):
        self.dataset = dataset
        self.space = space
        self.master_seed = seed
        self.search_seed = space.seed if space.seed is not None else seed
        self.k = k
        self.jobs = jobs
        self.relief = relief or ReliefConfig()
        self.bus = bus or EventBus()
        self.ranking_cache = ranking_cache or RankingCache()
        self.folds = kfold_split(
            dataset.n_samples, k, derive_seed(seed, "folds"), events=dataset.events
        )

    def _run_trial(self, index: int) -> TrialRecord:
        seed = trial_seed(self.search_seed, index)
        model = sample_model_config(self.space, np.random.default_rng(seed), self.dataset.n_features)
        self.bus.publish(TrialStarted(trial_index=index, seed=seed))
        pipeline = DeepCoxPipeline(model, self.relief, seed=seed, ranking_cache=self.ranking_cache)
        started = time.perf_counter()
        try:
            result = cross_validate(
                pipeline,
                self.dataset,
                self.k,
                folds=self.folds,
                bus=self.bus,
                trial_index=index,
            )
        except Exception as exc:
            return TrialRecord(
                trial_index=index,
                seed=seed,
                model=model,
                wall_time=time.perf_counter() - started,
                status="failed",
                error=_error_message(exc),
            )
        return TrialRecord(
            trial_index=index,
            seed=seed,
            model=model,
            fold_c_indices=result.fold_c_indices,
            wall_time=time.perf_counter() - started,
        )

    def _write(self, record: TrialRecord, out_dir: Optional[Path]) -> None:
        if record.status == "ok":
            logger.info("Trial %d: mean C-index %.4f", record.trial_index, record.mean_c_index)
            self.bus.publish(TrialFinished(record=record))
        else:
            logger.warning("Trial %d failed: %s", record.trial_index, record.error)
            self.bus.publish(TrialFailed(record=record, error_message=record.error or ""))
        if out_dir is None:
            return
        append_rows(out_dir / TRIAL_LOG, [record_row(record, self.k)], log_columns(self.k))
        append_rows(
            out_dir / TRIAL_TIMING,
            [{"trial_index": record.trial_index, "wall_time": record.wall_time}],
            ["trial_index", "wall_time"],
        )

    def run(self, out_dir: Optional[Path] = None) -> SearchResult:
        """Run the remaining trials of the budget.

        Raises:
            SearchError: If every trial failed, or the existing log belongs to another search.
        """
        out_dir = Path(out_dir) if out_dir is not None else None
        done: List[TrialRecord] = []
        if out_dir is not None:
            done = read_trial_log(
                out_dir / TRIAL_LOG,
                self.space,
                self.search_seed,
                self.k,
                self.dataset.n_features,
            )[: self.space.budget]
        resumed = len(done)
        if resumed:
            logger.info("Resuming search after %d logged trial(s)", resumed)

        pending = deque(range(resumed, self.space.budget))
        self.bus.publish(SearchStarted(budget=self.space.budget, pending=len(pending), resumed=resumed))
        finished: Dict[int, TrialRecord] = {}
        next_to_write = resumed
        in_flight: Dict[concurrent.futures.Future, int] = {}

        with concurrent.futures.ThreadPoolExecutor(max_workers=self.jobs) as executor:

            def submit_batch():
                while len(in_flight) < self.jobs and pending:
                    index = pending.popleft()
                    in_flight[executor.submit(self._run_trial, index)] = index

            submit_batch()
            try:
                while in_flight:
                    completed, _ = concurrent.futures.wait(
                        set(in_flight.keys()),
                        return_when=concurrent.futures.FIRST_COMPLETED,
                    )
                    for future in completed:
                        index = in_flight.pop(future)
                        finished[index] = future.result()
                    while next_to_write in finished:
                        record = finished.pop(next_to_write)
                        self._write(record, out_dir)
                        done.append(record)
                        next_to_write += 1
                    submit_batch()
            except KeyboardInterrupt:
                logger.info("Search interrupted after %d logged trial(s)", len(done))
                for future in list(in_flight.keys()):
                    future.cancel()
                executor.shutdown(wait=False, cancel_futures=True)
                raise

        best = best_trial(done)
        result = SearchResult(best=best, trials=done, folds=self.folds, resumed=resumed)
        self.bus.publish(
            SearchFinished(
                best_trial_index=best.trial_index,
                best_c_index=best.mean_c_index,
                failed_trials=result.failed,
            )
        )
        logger.info(
            "Best trial %d: mean C-index %.4f (%d failed)",
            best.trial_index, best.mean_c_index, len(result.failed),
        )
        return result


def random_search(
    dataset: SurvivalDataset,
    space: SearchSpace,
    *,
    seed: int,
    k: int = 10,
    jobs: int = 1,
    relief: Optional[ReliefConfig] = None,
    bus: Optional[EventBus] = None,
    out_dir: Optional[Path] = None,
) -> SearchResult:
    return RandomSearch(dataset, space, seed=seed, k=k, jobs=jobs, relief=relief, bus=bus).run(out_dir)
