"""End-to-end workflow: ingest, stage split, grid search, evaluation, explanation and the run manifest."""

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from stagesurv.attribution import (
    BackgroundSet,
    explanation_instances,
    lime_aggregate,
    lime_explain,
    presence_heatmap,
    select_lime_case,
    shap_summary,
)
from stagesurv.cohort import (
    CohortTable,
    FeatureSchema,
    LabeledRecord,
    ParseResult,
    Stage,
    cleaning_report,
    correlation_matrix,
    correlation_tsv,
    encode,
    label_records,
    parse_dataset,
    split_by_stage,
    stage_distribution,
)
from stagesurv.config import LimeMode, RunConfig
from stagesurv.const import (
    ARTIFACT_BEST_MODEL,
    ARTIFACT_CLEANING,
    ARTIFACT_CORRELATION,
    ARTIFACT_GRID_SEARCH,
    ARTIFACT_GROUP_COMPARISON,
    ARTIFACT_GROUP_TABLE_CSV,
    ARTIFACT_GROUP_TABLE_TEXT,
    ARTIFACT_LIME_CASE,
    ARTIFACT_MANIFEST,
    ARTIFACT_METRICS,
    ARTIFACT_METRICS_TABLE_CSV,
    ARTIFACT_METRICS_TABLE_TEXT,
    ARTIFACT_PRESENCE_LIME,
    ARTIFACT_PRESENCE_SHAP,
    ARTIFACT_ROC_PREFIX,
    ARTIFACT_SHAP_BEESWARM,
    ARTIFACT_SHAP_RANKING,
    ARTIFACT_SHAP_SVG,
    ARTIFACT_STAGES,
    COMBINED_STAGE_DIR,
    MANIFEST_FORMAT_VERSION,
)
from stagesurv.exceptions import (
    EXIT_OK,
    EXIT_PARTIAL,
    DataError,
    DataValidationError,
    FitError,
    StageSurvException,
    UndefinedMetricError,
)
from stagesurv.learners import LearnerKind, TrainedModel, dump_model, fit_model, load_model
from stagesurv.reporting import (
    MetricsTableRow,
    beeswarm_svg,
    beeswarm_tsv,
    cell_label,
    group_comparison_csv,
    group_comparison_frame,
    grid_search_csv,
    group_table_text,
    lime_case_json,
    metrics_csv,
    metrics_table_csv,
    metrics_table_frame,
    metrics_table_text,
    presence_tsv,
    ranking_tsv,
    roc_tsv,
)
from stagesurv.selection import GridResult, grid_search, roc_auc, stratified_kfold
from stagesurv.stats import compare_groups
from stagesurv.synth import generate_synth
from stagesurv.utils import NUMERIC_ERRORS, sha256_file

log = logging.getLogger(__name__)

SYNTH_COHORT_FILE = "cohort.csv"


class Phase(Enum):
    INGEST = "ingest"
    TRAIN = "train"
    EVALUATE = "evaluate"
    EXPLAIN = "explain"


ALL_PHASES = frozenset(Phase)


class StageStatus(Enum):
    OK = "ok"
    # some learners failed, the rest completed
    PARTIAL = "partial"
    SKIPPED = "skipped"
    FAILED = "failed"


class StageEntry(BaseModel):
    status: StageStatus
    reason: str | None = None
    rows: int = 0
    explained_learner: LearnerKind | None = None
    failed_learners: list[LearnerKind] = []


class ArtifactEntry(BaseModel):
    path: str
    sha256: str


class Manifest(BaseModel):
    format_version: int = MANIFEST_FORMAT_VERSION
    cancer_type: str
    seed: int
    phases: list[Phase]
    config: dict[str, Any]
    # modelling choices behind the reported numbers
    decisions: dict[str, Any]
    stages: dict[str, StageEntry]
    combined: StageEntry | None = None
    artifacts: list[ArtifactEntry]
    # values that differ between otherwise identical runs
    excluded: dict[str, str]


@dataclass
class Cohort:
    schema: FeatureSchema
    parsed: ParseResult
    labeled: list[LabeledRecord]
    excluded: int
    split: dict[Stage, list[LabeledRecord]]


@dataclass
class StageRun:
    label: str
    table: CohortTable | None = None
    entry: StageEntry = field(default_factory=lambda: StageEntry(status=StageStatus.OK))
    grids: dict[LearnerKind, GridResult] = field(default_factory=lambda: {})
    model: TrainedModel | None = None
    top_shap: list[str] = field(default_factory=lambda: [])
    top_lime: list[str] = field(default_factory=lambda: [])


@dataclass
class RunResult:
    out_dir: Path
    manifest: Manifest

    @property
    def complete(self) -> bool:
        entries = [*self.manifest.stages.values()]
        if self.manifest.combined is not None:
            entries.append(self.manifest.combined)
        return all(e.status == StageStatus.OK for e in entries)

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.complete else EXIT_PARTIAL


@dataclass
class RunOutput:
    """Output directory of one run. Tracks the files this run writes or reads back, so files left by earlier runs
    in the same directory stay out of the manifest."""

    root: Path
    touched: set[Path] = field(default_factory=lambda: set())

    def write(self, path: Path, text: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.touched.add(path)

    def record(self, path: Path) -> None:
        self.touched.add(path)


def ingest(config: RunConfig, schema: FeatureSchema, output: RunOutput) -> Cohort:
    """Read (or generate) the cohort, clean, label and split it, and write the ingest reports"""
    out = output.root
    if config.synth is not None:
        cohort = generate_synth(config.synth, schema)
        cohort.write(out / SYNTH_COHORT_FILE)
        output.record(out / SYNTH_COHORT_FILE)
        data = cohort.csv_bytes()
    else:
        assert config.input is not None
        try:
            data = config.input.read_bytes()
        except FileNotFoundError as e:
            raise DataError(f"Input not found: {config.input}") from e

    parsed = parse_dataset(data, schema)
    labeled, excluded = label_records(parsed.records, schema)
    split = split_by_stage(labeled, schema)

    output.write(out / ARTIFACT_CLEANING, "\n".join(cleaning_report(parsed, excluded)) + "\n")
    output.write(out / ARTIFACT_STAGES, "\n".join(stage_distribution(split, schema.cancer_type)) + "\n")

    if labeled:
        whole = encode(labeled, schema)
        if whole.n_rows >= 2:
            output.write(out / ARTIFACT_CORRELATION, correlation_tsv(correlation_matrix(whole)))
        comparisons = compare_groups(whole)
        output.write(out / ARTIFACT_GROUP_TABLE_CSV, group_comparison_csv(comparisons, schema.cancer_type))
        group_frame = group_comparison_frame(comparisons, schema.cancer_type)
        output.write(out / ARTIFACT_GROUP_TABLE_TEXT, group_table_text(group_frame))

    return Cohort(schema=schema, parsed=parsed, labeled=labeled, excluded=excluded, split=split)


def _stage_tables(config: RunConfig, cohort: Cohort, output: RunOutput) -> dict[Stage, StageRun]:
    runs: dict[Stage, StageRun] = {}
    for stage in config.stages:
        run = StageRun(label=stage.value)
        runs[stage] = run
        records = cohort.split[stage]
        run.entry.rows = len(records)
        if not records:
            run.entry = StageEntry(status=StageStatus.SKIPPED, reason="no records")
            log.warning(f"Skipping {stage.display_name} stage: no records")
            continue

        stage_dir = output.root / stage.value
        try:
            table = encode(records, cohort.schema)
            if table.n_rows >= 2:
                output.write(stage_dir / ARTIFACT_CORRELATION, correlation_tsv(correlation_matrix(table)))
            comparisons = group_comparison_csv(compare_groups(table), cohort.schema.cancer_type)
            output.write(stage_dir / ARTIFACT_GROUP_COMPARISON, comparisons)
        except (StageSurvException, *NUMERIC_ERRORS) as e:
            run.entry = StageEntry(status=StageStatus.FAILED, reason=f"{type(e).__name__}: {e}", rows=len(records))
            log.error(f"{stage.display_name} stage failed during encoding: {e}")
            continue
        run.table = table
    return runs


def _explained_learner(config: RunConfig, grids: dict[LearnerKind, GridResult]) -> LearnerKind:
    """The configured learner, or the highest mean AUC with ties going to the earlier learner"""
    if isinstance(config.explain_learner, LearnerKind):
        if config.explain_learner not in grids:
            raise FitError(f"Explained learner {config.explain_learner.display_name} has no fitted grid")
        return config.explain_learner
    order = list(LearnerKind)
    return max(grids, key=lambda k: (grids[k].best.mean_auc, -order.index(k)))


def _train(config: RunConfig, run: StageRun, stage_dir: Path, output: RunOutput) -> None:
    assert run.table is not None
    plan = stratified_kfold(run.table.labels, config.k_folds, config.seed)

    for grid in config.hyper_grids():
        try:
            run.grids[grid.learner] = grid_search(run.table, grid, plan, config.seed, config.n_jobs, config.threshold)
        except UndefinedMetricError as e:
            log.error(f"{run.label}: {e}")
            run.entry.failed_learners.append(grid.learner)
    if not run.grids:
        raise FitError("No learner could be fitted")
    if run.entry.failed_learners:
        run.entry.status = StageStatus.PARTIAL

    output.write(stage_dir / ARTIFACT_GRID_SEARCH, grid_search_csv(run.grids))

    learner = _explained_learner(config, run.grids)
    run.model = fit_model(run.table, run.grids[learner].best_config)
    run.entry.explained_learner = learner
    output.write(stage_dir / ARTIFACT_BEST_MODEL, dump_model(run.model))
    log.info(f"{run.label}: explaining {learner.display_name} ({run.grids[learner].best_config.describe()})")


def _evaluate(run: StageRun, stage_dir: Path, output: RunOutput) -> None:
    assert run.table is not None
    for learner, grid in run.grids.items():
        assert grid.best.oof_scores is not None
        curve, _ = roc_auc(grid.best.oof_scores, run.table.labels)
        output.write(stage_dir / f"{ARTIFACT_ROC_PREFIX}{learner.value}.tsv", roc_tsv(curve))
    output.write(stage_dir / ARTIFACT_METRICS, metrics_csv(run.grids))


def _load_stage_model(run: StageRun, stage_dir: Path, output: RunOutput) -> None:
    path = stage_dir / ARTIFACT_BEST_MODEL
    if not path.is_file():
        raise DataError(f"No trained model at {path}; run train first")
    run.model = load_model(path.read_text(encoding="utf-8"))
    output.record(path)
    run.entry.explained_learner = run.model.config.learner


def _explain(config: RunConfig, run: StageRun, stage_dir: Path, output: RunOutput, shap: bool = True) -> None:
    assert run.table is not None and run.model is not None and run.entry.explained_learner is not None
    settings = config.explainer
    model = run.model

    if shap:
        background = BackgroundSet.sample(run.table, settings.background_size, config.seed)
        instances = explanation_instances(run.table, settings.shap_instances, config.seed)
        summary = shap_summary(
            model, run.table, background, instances, settings.shap_samples, config.seed, config.n_jobs
        )
        run.top_shap = summary.top(settings.top_k)
        output.write(stage_dir / ARTIFACT_SHAP_RANKING, ranking_tsv(summary))
        output.write(stage_dir / ARTIFACT_SHAP_BEESWARM, beeswarm_tsv(summary))
        if settings.render_svg:
            output.write(stage_dir / ARTIFACT_SHAP_SVG, beeswarm_svg(summary))

    match settings.lime_mode:
        case LimeMode.SINGLE:
            case_id = select_lime_case(model, run.table)
            explanation = lime_explain(
                model,
                run.table.rows[case_id],
                run.table,
                settings.lime_samples,
                settings.top_k,
                config.seed,
                case_id,
                settings.kernel_width_factor,
                settings.ridge_penalty,
            )
            run.top_lime = [name for name, _ in explanation.top_features]
            output.write(stage_dir / ARTIFACT_LIME_CASE, lime_case_json(explanation, run.entry.explained_learner))
        case LimeMode.AGGREGATE:
            aggregate = lime_aggregate(
                model,
                run.table,
                settings.lime_cases,
                settings.lime_samples,
                settings.top_k,
                config.seed,
                settings.kernel_width_factor,
                settings.ridge_penalty,
                config.n_jobs,
            )
            run.top_lime = [name for name, _ in aggregate.top_features]
            output.write(stage_dir / ARTIFACT_LIME_CASE, lime_case_json(aggregate, run.entry.explained_learner))


def _process_stage(
    config: RunConfig, phases: frozenset[Phase], run: StageRun, stage_dir: Path, output: RunOutput
) -> None:
    """Run the requested phases on one stage, recording skips and failures instead of raising"""
    try:
        if Phase.TRAIN in phases:
            _train(config, run, stage_dir, output)
        if Phase.EVALUATE in phases:
            _evaluate(run, stage_dir, output)
        if Phase.EXPLAIN in phases:
            if run.model is None:
                _load_stage_model(run, stage_dir, output)
            _explain(config, run, stage_dir, output)
    except DataValidationError as e:
        run.entry.status = StageStatus.SKIPPED
        run.entry.reason = str(e)
        log.warning(f"Skipping {run.label} stage: {e}")
    except (StageSurvException, *NUMERIC_ERRORS) as e:
        run.entry.status = StageStatus.FAILED
        run.entry.reason = f"{type(e).__name__}: {e}"
        log.error(f"{run.label} stage failed: {e}")


def _combined_learner(config: RunConfig, runs: dict[Stage, StageRun]) -> LearnerKind | None:
    if isinstance(config.explain_learner, LearnerKind):
        return config.explain_learner
    scores: dict[LearnerKind, list[float]] = {}
    for run in runs.values():
        for learner, grid in run.grids.items():
            scores.setdefault(learner, []).append(grid.best.mean_auc)
    if not scores:
        return None
    order = list(LearnerKind)
    return max(scores, key=lambda k: (float(np.mean(scores[k])), -order.index(k)))


def _process_combined(
    config: RunConfig, phases: frozenset[Phase], cohort: Cohort, runs: dict[Stage, StageRun], output: RunOutput
) -> StageRun:
    """Fit and explain one model over every stage together; only the LIME case is reported"""
    run = StageRun(label=COMBINED_STAGE_DIR, entry=StageEntry(status=StageStatus.OK, rows=len(cohort.labeled)))
    stage_dir = output.root / COMBINED_STAGE_DIR
    try:
        if not cohort.labeled:
            raise DataValidationError("no records")
        run.table = encode(cohort.labeled, cohort.schema)
        if Phase.TRAIN in phases:
            learner = _combined_learner(config, runs)
            if learner is None:
                raise FitError("No stage produced a fitted learner")
            grid = next(g for g in config.hyper_grids() if g.learner == learner)
            plan = stratified_kfold(run.table.labels, config.k_folds, config.seed)
            result = grid_search(run.table, grid, plan, config.seed, config.n_jobs, config.threshold)
            run.model = fit_model(run.table, result.best_config)
            run.entry.explained_learner = learner
            output.write(stage_dir / ARTIFACT_BEST_MODEL, dump_model(run.model))
        elif Phase.EXPLAIN in phases:
            _load_stage_model(run, stage_dir, output)
        if Phase.EXPLAIN in phases:
            _explain(config, run, stage_dir, output, shap=False)
    except DataValidationError as e:
        run.entry = StageEntry(status=StageStatus.SKIPPED, reason=str(e), rows=run.entry.rows)
        log.warning(f"Skipping combined-stage explanation: {e}")
    except (StageSurvException, *NUMERIC_ERRORS) as e:
        run.entry = StageEntry(status=StageStatus.FAILED, reason=f"{type(e).__name__}: {e}", rows=run.entry.rows)
        log.error(f"Combined-stage explanation failed: {e}")
    return run


def _metrics_table_rows(cancer_type: str, config: RunConfig, runs: dict[Stage, StageRun]) -> list[MetricsTableRow]:
    rows: list[MetricsTableRow] = []
    for stage, run in runs.items():
        for learner in config.learners:
            grid = run.grids.get(learner)
            if grid is not None:
                rows.append(MetricsTableRow(cancer_type, stage.value, learner, grid.best.mean_metrics()))
            else:
                status = "skipped" if run.entry.status == StageStatus.SKIPPED else "failed"
                rows.append(MetricsTableRow(cancer_type, stage.value, learner, None, status))
    return rows


def _decisions(config: RunConfig) -> dict[str, Any]:
    return {
        "k_folds": config.k_folds,
        "threshold": config.threshold,
        "auc_aggregation": "unweighted mean of per-fold AUC",
        "metrics_source": "cross-validation means of the selected configuration",
        "roc_curves": "pooled out-of-fold scores of the selected configuration",
        "shapley_value_function": "interventional, background subsample",
        "background_size": config.explainer.background_size,
        "lime_kernel_width": f"{config.explainer.kernel_width_factor} * sqrt(d)",
        "lime_ridge_penalty": config.explainer.ridge_penalty,
        "lime_mode": config.explainer.lime_mode.value,
        "top_k": config.explainer.top_k,
        "group_test": "Welch two-sided t-test, raw units",
        "adaboost_base_learner": "depth-1 stump",
        "logistic_solver": "damped Newton",
        "fourth_learner": "symmetric-tree gradient boosting",
    }


def write_manifest(
    config: RunConfig,
    schema: FeatureSchema,
    phases: frozenset[Phase],
    runs: dict[Stage, StageRun],
    combined: StageRun | None,
    output: RunOutput,
) -> Manifest:
    """Hash every file this run wrote or read back, except the manifest itself"""
    out = output.root
    artifacts = [
        ArtifactEntry(path=p.relative_to(out).as_posix(), sha256=sha256_file(p))
        for p in sorted(output.touched)
        if p.name != ARTIFACT_MANIFEST
    ]
    manifest = Manifest(
        cancer_type=schema.cancer_type,
        seed=config.seed,
        phases=[p for p in Phase if p in phases],
        config=config.model_dump(mode="json"),
        decisions=_decisions(config),
        stages={stage.value: run.entry for stage, run in runs.items()},
        combined=combined.entry if combined is not None else None,
        artifacts=artifacts,
        excluded={"created_at": datetime.now(timezone.utc).isoformat()},
    )
    output.write(out / ARTIFACT_MANIFEST, manifest.model_dump_json(indent=2) + "\n")
    return manifest


def run_pipeline(config: RunConfig, phases: frozenset[Phase] = ALL_PHASES) -> RunResult:
    """Run the requested phases and write the artifact directory.

    A stage that is too small, or whose fitting fails, is recorded in the manifest and the remaining stages still
    run.
    """
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    output = RunOutput(out)
    schema = config.load_schema()
    log.info(f"Running {', '.join(p.value for p in Phase if p in phases)} for {schema.cancer_type} into {out}")

    cohort = ingest(config, schema, output)
    runs = _stage_tables(config, cohort, output)

    for stage, run in runs.items():
        if run.table is not None:
            _process_stage(config, phases, run, out / stage.value, output)

    if Phase.EVALUATE in phases:
        rows = _metrics_table_rows(schema.cancer_type, config, runs)
        output.write(out / ARTIFACT_METRICS_TABLE_CSV, metrics_table_csv(rows))
        output.write(out / ARTIFACT_METRICS_TABLE_TEXT, metrics_table_text(metrics_table_frame(rows), config.k_folds))

    if Phase.EXPLAIN in phases:
        shap_lists = {cell_label(schema.cancer_type, s): r.top_shap for s, r in runs.items() if r.top_shap}
        lime_lists = {cell_label(schema.cancer_type, s): r.top_lime for s, r in runs.items() if r.top_lime}
        top_k, d = config.explainer.top_k, len(schema.features)
        output.write(out / ARTIFACT_PRESENCE_SHAP, presence_tsv(presence_heatmap(shap_lists, top_k, d)))
        output.write(out / ARTIFACT_PRESENCE_LIME, presence_tsv(presence_heatmap(lime_lists, top_k, d)))

    combined: StageRun | None = None
    if config.explain_combined and phases & {Phase.TRAIN, Phase.EXPLAIN}:
        combined = _process_combined(config, phases, cohort, runs, output)

    manifest = write_manifest(config, schema, phases, runs, combined, output)
    result = RunResult(out_dir=out, manifest=manifest)
    if not result.complete:
        log.warning("Run finished with skipped or failed stages, see the manifest")
    return result


def read_manifest(out: Path) -> dict[str, Any]:
    return json.loads((out / ARTIFACT_MANIFEST).read_text(encoding="utf-8"))
