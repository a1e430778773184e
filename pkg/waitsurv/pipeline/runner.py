"""Command runners and run manifests.

`execute` wraps every command: it sets up logging in the output directory,
digests the inputs, runs the command and writes `manifest.yaml` with the
resolved configuration and the digests of everything the command wrote.
`replay` re-runs a manifest into a new directory and checks the outputs match.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd
import yaml

from waitsurv import __version__
from waitsurv.config.loader import dump_yaml, load_schema, load_search_space, load_synthetic_spec
from waitsurv.config.models import AppConfig, ReliefConfig
from waitsurv.domain.errors import ArtifactError, ReproducibilityError
from waitsurv.domain.models import RunManifest, SurvivalDataset
from waitsurv.infrastructure.artifacts import digest_tree, sha256_file, write_csv, write_rows
from waitsurv.infrastructure.event_bus import EventBus
from waitsurv.infrastructure.logging import setup_logging
from waitsurv.pipeline.bundles import load_bundle, ranking_frame, save_bundle, score_table
from waitsurv.pipeline.compare import compare_models
from waitsurv.pipeline.evaluation import CrossValidationResult, cross_validate, kfold_split
from waitsurv.pipeline.models import DeepCoxPipeline, LinearCoxModel, LinearCoxPipeline, RankingCache
from waitsurv.pipeline.search import RandomSearch, SearchResult, trial_model
from waitsurv.pipeline.seeding import derive_seed
from waitsurv.preprocess.describe import describe
from waitsurv.preprocess.encoding import encode
from waitsurv.preprocess.io import load_csv
from waitsurv.preprocess.synthetic import generate_synthetic, write_synthetic
from waitsurv.selection.relieff import fold_averaged_ranking, rrelieff
from waitsurv.survival.concordance import c_index

logger = logging.getLogger(__name__)

MANIFEST = "manifest.yaml"
# Files whose content legitimately differs between identical runs.
VOLATILE_OUTPUTS = ("waitsurv*.log", MANIFEST, "trial_timing.csv")
# Arguments naming input files (or bundle directories) to digest.
INPUT_ARGUMENTS = ("data", "schema", "spec", "space", "bundles")


@dataclass
class CommandContext:
    config: AppConfig
    out_dir: Path
    bus: EventBus
    arguments: Dict[str, Any]

    @property
    def seed(self) -> int:
        return self.config.general.seed

    @property
    def folds(self) -> int:
        return self.config.general.folds

    def path(self, name: str) -> Path:
        value = self.arguments.get(name)
        if value is None:
            raise ValueError(f"missing required argument '{name}'")
        return Path(value)


@dataclass
class CommandResult:
    command: str
    out_dir: Path
    payload: Any = None
    outputs: Dict[str, str] = field(default_factory=dict)
    manifest: Optional[RunManifest] = None


@dataclass(frozen=True)
class LinearReport:
    model: LinearCoxModel
    cross_validation: CrossValidationResult


@dataclass(frozen=True)
class EvaluationRow:
    bundle: str
    model: str
    covariates: int
    c_index: float


def _load_dataset(ctx: CommandContext):
    schema = load_schema(ctx.path("schema"))
    table = load_csv(ctx.path("data"), schema)
    dataset, encoding = encode(table, standardize=False)
    return schema, table, dataset, encoding


def _relief(ctx: CommandContext) -> ReliefConfig:
    return ctx.config.relief.model_copy(update={"seed": derive_seed(ctx.seed, "relief")})


def _folds(ctx: CommandContext, dataset: SurvivalDataset) -> List[np.ndarray]:
    return kfold_split(dataset.n_samples, ctx.folds, derive_seed(ctx.seed, "folds"), events=dataset.events)


def _fold_rows(result: CrossValidationResult) -> List[Dict[str, Any]]:
    return [{"fold": i, "c_index": value} for i, value in enumerate(result.fold_c_indices)]


def run_generate(ctx: CommandContext) -> Any:
    spec = load_synthetic_spec(ctx.path("spec"))
    if ctx.arguments.get("seed") is not None:
        spec = spec.model_copy(update={"seed": int(ctx.arguments["seed"])})
    dataset, truth = generate_synthetic(spec)
    write_synthetic(dataset, truth, ctx.out_dir)
    return truth


def run_describe(ctx: CommandContext) -> Any:
    schema = load_schema(ctx.path("schema"))
    table = load_csv(ctx.path("data"), schema)
    settings = ctx.config.describe
    description = describe(table, settings.bin_width, settings.max_numeric_levels)
    write_rows(
        ctx.out_dir / "level_means.csv",
        (
            {"variable": row.variable, "level": row.level, "count": row.count, "mean_wait": row.mean}
            for row in description.levels
        ),
        ["variable", "level", "count", "mean_wait"],
    )
    write_rows(
        ctx.out_dir / "histogram.csv",
        ({"lower": b.lower, "upper": b.upper, "count": b.count} for b in description.histogram),
        ["lower", "upper", "count"],
    )
    return description


def run_fit_linear(ctx: CommandContext) -> Any:
    schema, _, dataset, encoding = _load_dataset(ctx)
    pipeline = LinearCoxPipeline(ctx.config.linear)
    cv = cross_validate(pipeline, dataset, ctx.folds, folds=_folds(ctx, dataset), bus=ctx.bus)
    write_rows(ctx.out_dir / "cv_scores.csv", _fold_rows(cv), ["fold", "c_index"])

    model = pipeline.fit(dataset)
    if model.fit is None:
        logger.warning("Backward elimination removed every covariate; bundling the null model")
    save_bundle(model, schema, encoding, ctx.out_dir / "bundle")
    if model.fit is not None:
        write_rows(ctx.out_dir / "coefficients.csv", model.coefficient_rows())
    write_rows(
        ctx.out_dir / "vif_removals.csv",
        ({"step": r.step, "feature": r.feature, "vif": r.vif} for r in model.vif_removals),
        ["step", "feature", "vif"],
    )
    write_rows(
        ctx.out_dir / "eliminations.csv",
        ({"step": s.step, "feature": s.feature, "p_value": s.p_value} for s in model.eliminations),
        ["step", "feature", "p_value"],
    )
    return LinearReport(model=model, cross_validation=cv)


def run_rank(ctx: CommandContext) -> Any:
    _, _, dataset, _ = _load_dataset(ctx)
    relief = _relief(ctx)
    if relief.per_fold:
        ranking = fold_averaged_ranking(dataset, _folds(ctx, dataset), relief)
    else:
        ranking = rrelieff(dataset, relief)
    write_csv(ctx.out_dir / "ranking.csv", ranking_frame(ranking))
    return ranking


def run_search(ctx: CommandContext) -> Any:
    schema, _, dataset, encoding = _load_dataset(ctx)
    space = load_search_space(ctx.path("space")) if ctx.arguments.get("space") else ctx.config.search
    if ctx.arguments.get("budget") is not None:
        space = space.model_copy(update={"budget": int(ctx.arguments["budget"])})
    relief = _relief(ctx)
    cache = RankingCache()
    search = RandomSearch(
        dataset,
        space,
        seed=ctx.seed,
        k=ctx.folds,
        jobs=ctx.config.general.jobs,
        relief=relief,
        bus=ctx.bus,
        ranking_cache=cache,
    )
    result: SearchResult = search.run(ctx.out_dir)

    best = result.best
    dump_yaml(best.model_dump(mode="json", exclude={"wall_time"}), ctx.out_dir / "best_trial.yaml")
    logger.info("Retraining trial %d on all %d rows", best.trial_index, dataset.n_samples)
    final = DeepCoxPipeline(trial_model(best), relief, seed=best.seed, ranking_cache=cache).fit(dataset)
    save_bundle(final, schema, encoding, ctx.out_dir / "bundle")
    return result


def run_evaluate(ctx: CommandContext) -> Any:
    bundles = [load_bundle(Path(p)) for p in ctx.arguments.get("bundles") or []]
    if not bundles:
        raise ValueError("evaluate needs at least one --bundle")
    data_path = ctx.path("data")
    scores: Dict[str, np.ndarray] = {}
    rows: List[EvaluationRow] = []
    durations = events = None
    for index, bundle in enumerate(bundles):
        table = load_csv(data_path, bundle.schema)
        predicted = score_table(bundle, table)
        durations, events = table.durations, table.events
        rows.append(
            EvaluationRow(
                bundle=str(bundle.path),
                model=bundle.label,
                covariates=len(bundle.model.covariates),
                c_index=c_index(durations, events, predicted),
            )
        )
        scores[f"bundle_{index}"] = predicted.log_risk

    frame = pd.DataFrame({"duration": durations, "event": events.astype(np.int64), **scores})
    write_csv(ctx.out_dir / "scores.csv", frame)
    write_rows(
        ctx.out_dir / "evaluation.csv",
        (row.__dict__ for row in rows),
        ["bundle", "model", "covariates", "c_index"],
    )
    return rows


def run_compare(ctx: CommandContext) -> Any:
    _, _, dataset, _ = _load_dataset(ctx)
    config = ctx.config.model_copy(update={"relief": _relief(ctx)})
    rows = compare_models(dataset, config, bus=ctx.bus)
    write_rows(ctx.out_dir / "comparison.csv", (row.as_dict() for row in rows))
    return rows


COMMANDS: Dict[str, Callable[[CommandContext], Any]] = {
    "generate": run_generate,
    "describe": run_describe,
    "fit-linear": run_fit_linear,
    "rank": run_rank,
    "search": run_search,
    "evaluate": run_evaluate,
    "compare": run_compare,
}


def digest_inputs(arguments: Dict[str, Any]) -> Dict[str, str]:
    digests: Dict[str, str] = {}
    for name in INPUT_ARGUMENTS:
        value = arguments.get(name)
        if value is None:
            continue
        for index, item in enumerate(value if isinstance(value, list) else [value]):
            path = Path(item)
            key = name if not isinstance(value, list) else f"{name}/{index}"
            if path.is_dir():
                for relative, digest in digest_tree(path, exclude=VOLATILE_OUTPUTS).items():
                    digests[f"{key}/{relative}"] = digest
            elif path.is_file():
                digests[key] = sha256_file(path)
            else:
                raise FileNotFoundError(f"Input not found: {path}")
    return digests


def _write_manifest(manifest: RunManifest, out_dir: Path) -> None:
    dump_yaml(manifest.model_dump(mode="json"), out_dir / MANIFEST)


def execute(
    command: str,
    arguments: Dict[str, Any],
    config: AppConfig,
    out_dir: Path,
    bus: Optional[EventBus] = None,
) -> CommandResult:
    """Run one command into `out_dir` and record its manifest (also on failure)."""
    if command not in COMMANDS:
        raise ValueError(f"Unknown command: {command}")
    out_dir = Path(out_dir)
    log_path = Path(config.general.log_path) if config.general.log_path else None
    setup_logging(out_dir, debug=config.general.debug, log_path=log_path)
    logger.info("waitsurv %s %s", __version__, command)

    manifest = RunManifest(
        command=command,
        arguments=arguments,
        config=config.model_dump(mode="json"),
        seed=config.general.seed,
        version=__version__,
        started_at=datetime.now(timezone.utc),
    )
    ctx = CommandContext(config=config, out_dir=out_dir, bus=bus or EventBus(), arguments=arguments)
    try:
        manifest.input_digests = digest_inputs(arguments)
        payload = COMMANDS[command](ctx)
    except BaseException as exc:
        manifest.status = "failed"
        manifest.error = f"{type(exc).__name__}: {exc}"
        manifest.finished_at = datetime.now(timezone.utc)
        logger.error("%s failed: %s", command, manifest.error)
        _write_manifest(manifest, out_dir)
        raise

    manifest.output_digests = digest_tree(out_dir, exclude=VOLATILE_OUTPUTS)
    manifest.finished_at = datetime.now(timezone.utc)
    _write_manifest(manifest, out_dir)
    logger.info("%s finished; %d output file(s)", command, len(manifest.output_digests))
    return CommandResult(
        command=command,
        out_dir=out_dir,
        payload=payload,
        outputs=dict(manifest.output_digests),
        manifest=manifest,
    )


def load_manifest(path: Path) -> RunManifest:
    path = Path(path)
    if not path.is_file():
        raise ArtifactError(f"Manifest not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    try:
        return RunManifest.model_validate(data)
    except ValueError as exc:
        raise ArtifactError(f"{path}: invalid manifest: {exc}") from exc


def replay(manifest_path: Path, out_dir: Path, bus: Optional[EventBus] = None) -> CommandResult:
    """Re-run a recorded command into `out_dir` and compare output digests.

    Raises:
        ReproducibilityError: If an input changed since the recorded run or an
            output differs from the recorded one.
    """
    recorded = load_manifest(manifest_path)
    if recorded.status != "ok":
        raise ArtifactError(f"{manifest_path}: cannot replay a failed run")
    current = digest_inputs(recorded.arguments)
    changed = sorted(
        k for k in set(current) | set(recorded.input_digests)
        if current.get(k) != recorded.input_digests.get(k)
    )
    if changed:
        raise ReproducibilityError(f"inputs changed since the recorded run: {', '.join(changed)}")

    out_dir = Path(out_dir)
    if (out_dir / MANIFEST).exists():
        raise ArtifactError(f"{out_dir} already holds a run; replay needs a fresh directory")
    config = AppConfig.model_validate(recorded.config)
    result = execute(recorded.command, recorded.arguments, config, out_dir, bus=bus)

    produced = result.outputs
    differing = sorted(
        k for k in set(produced) | set(recorded.output_digests)
        if produced.get(k) != recorded.output_digests.get(k)
    )
    if differing:
        raise ReproducibilityError(f"outputs differ from the recorded run: {', '.join(differing)}")
    logger.info("Replay of %s reproduced %d output file(s)", recorded.command, len(produced))
    return result
