import logging
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import rankdata

from stagesurv.cohort import CohortTable, Stage, encode
from stagesurv.const import DEFAULT_K_FOLDS, DEFAULT_THRESHOLD
from stagesurv.exceptions import DataValidationError, StageSurvException, UndefinedMetricError
from stagesurv.learners import HyperGrid, LearnerKind, ModelConfig, fit_model
from stagesurv.utils import NUMERIC_ERRORS, FloatArray, IntArray, derive_rng

log = logging.getLogger(__name__)

# stream key of the fold shuffles, apart from per-tree streams
FOLD_STREAM = 7919

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "auc")


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignments: IntArray
    seed: int

    def test_indices(self, fold: int) -> IntArray:
        return np.nonzero(self.assignments == fold)[0]

    def train_indices(self, fold: int) -> IntArray:
        return np.nonzero(self.assignments != fold)[0]

    def splits(self) -> Iterator[tuple[IntArray, IntArray]]:
        for fold in range(self.k):
            yield self.train_indices(fold), self.test_indices(fold)


def stratified_kfold(labels: Sequence[int] | IntArray, k: int, seed: int) -> FoldPlan:
    """Shuffle each class with its own seeded stream and deal it round-robin over the folds.

    The dealing position carries over from one class to the next so fold sizes stay balanced.
    """
    y = np.asarray(labels, dtype=np.int64)
    if k < 2:
        raise DataValidationError(f"k must be at least 2, got {k}")

    if np.any((y != 0) & (y != 1)):
        raise DataValidationError("Labels must be 0 or 1")
    # a missing class counts as zero members
    counts = np.bincount(y, minlength=2)
    for c, count in enumerate(counts):
        if count < k:
            raise DataValidationError(f"Class {c} has {int(count)} members, fewer than k = {k} folds")

    assignments = np.full(len(y), -1, dtype=np.int64)
    offset = 0
    for c in range(2):
        members = np.nonzero(y == c)[0]
        shuffled = members[derive_rng(seed, FOLD_STREAM, int(c)).permutation(len(members))]
        assignments[shuffled] = (offset + np.arange(len(shuffled))) % k
        offset += len(shuffled)

    return FoldPlan(k=k, assignments=assignments, seed=seed)


@dataclass(frozen=True)
class MetricsRow:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float | None = None
    threshold: float = DEFAULT_THRESHOLD
    precision_degenerate: bool = False
    recall_degenerate: bool = False

    def values(self) -> tuple[float, ...]:
        return (self.accuracy, self.precision, self.recall, self.f1, self.auc if self.auc is not None else np.nan)


def thresholded_metrics(
    scores: Sequence[float] | FloatArray, labels: Sequence[int] | IntArray, threshold: float = DEFAULT_THRESHOLD
) -> MetricsRow:
    """Confusion-matrix metrics with "survived" as the positive class; a score at the threshold predicts positive"""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if len(s) != len(y) or len(s) == 0:
        raise DataValidationError("Scores and labels must be equal-length and nonempty")

    predicted = s >= threshold
    actual = y == 1
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    fn = int(np.sum(~predicted & actual))

    precision_degenerate = tp + fp == 0
    recall_degenerate = tp + fn == 0
    precision = 0.0 if precision_degenerate else tp / (tp + fp)
    recall = 0.0 if recall_degenerate else tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)

    return MetricsRow(
        accuracy=float(np.mean(predicted == actual)),
        precision=precision,
        recall=recall,
        f1=f1,
        threshold=threshold,
        precision_degenerate=precision_degenerate,
        recall_degenerate=recall_degenerate,
    )


@dataclass(frozen=True, eq=False)
class RocCurve:
    fpr: FloatArray
    tpr: FloatArray
    thresholds: FloatArray

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(float(f), float(t)) for f, t in zip(self.fpr, self.tpr)]

    @property
    def auc(self) -> float:
        return float(np.trapezoid(self.tpr, self.fpr))


def roc_auc(scores: Sequence[float] | FloatArray, labels: Sequence[int] | IntArray) -> tuple[RocCurve, float]:
    """ROC curve over descending unique scores, and AUC as the Mann-Whitney statistic"""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    n_pos = int(np.sum(y == 1))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC is undefined when only one class is present")

    ranks = rankdata(s, method="average")
    auc = (float(np.sum(ranks[y == 1])) - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)

    order = np.argsort(-s, kind="stable")
    sorted_scores = s[order]
    tps = np.cumsum(y[order] == 1)
    fps = np.cumsum(y[order] == 0)
    # last position of each distinct score
    last = np.r_[np.nonzero(np.diff(sorted_scores))[0], len(s) - 1]

    curve = RocCurve(
        fpr=np.r_[0.0, fps[last] / n_neg],
        tpr=np.r_[0.0, tps[last] / n_pos],
        thresholds=np.r_[np.inf, sorted_scores[last]],
    )
    return curve, auc


@dataclass
class ConfigResult:
    config: ModelConfig
    folds: list[MetricsRow] = field(default_factory=lambda: [])
    oof_scores: FloatArray | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def mean_auc(self) -> float:
        if self.failed or not self.folds:
            return float("nan")
        return float(np.mean([m.auc for m in self.folds if m.auc is not None]))

    def mean_metrics(self) -> MetricsRow:
        """Unweighted fold means of every metric"""
        return MetricsRow(
            accuracy=float(np.mean([m.accuracy for m in self.folds])),
            precision=float(np.mean([m.precision for m in self.folds])),
            recall=float(np.mean([m.recall for m in self.folds])),
            f1=float(np.mean([m.f1 for m in self.folds])),
            auc=self.mean_auc,
            threshold=self.folds[0].threshold,
            precision_degenerate=any(m.precision_degenerate for m in self.folds),
            recall_degenerate=any(m.recall_degenerate for m in self.folds),
        )


@dataclass
class GridResult:
    learner: LearnerKind
    results: list[ConfigResult]
    best_index: int

    @property
    def best(self) -> ConfigResult:
        return self.results[self.best_index]

    @property
    def best_config(self) -> ModelConfig:
        return self.best.config

    @property
    def failed(self) -> list[ConfigResult]:
        return [r for r in self.results if r.failed]


def _fold_tables(table: CohortTable, train: IntArray, test: IntArray) -> tuple[CohortTable, CohortTable]:
    """Split a table, refitting the encoding on the training part when the source records are available"""
    if not table.records:
        return table.subset(train), table.subset(test)
    train_table = encode([table.records[i] for i in train], table.schema)
    test_table = encode([table.records[i] for i in test], table.schema, train_table.stats)
    return train_table, test_table


def _evaluate_fold(
    table: CohortTable, config: ModelConfig, train: IntArray, test: IntArray, threshold: float
) -> tuple[MetricsRow, FloatArray] | str:
    try:
        train_table, test_table = _fold_tables(table, train, test)
        model = fit_model(train_table, config)
        scores = model.predict_proba(test_table.rows)
        _, auc = roc_auc(scores, test_table.labels)
        metrics = thresholded_metrics(scores, test_table.labels, threshold)
    except (StageSurvException, *NUMERIC_ERRORS) as e:
        return f"{type(e).__name__}: {e}"
    return replace(metrics, auc=auc), scores


def grid_search(
    table: CohortTable,
    grid: HyperGrid,
    plan: FoldPlan,
    seed: int,
    n_jobs: int = 1,
    threshold: float = DEFAULT_THRESHOLD,
) -> GridResult:
    """Cross-validate every grid point and select the highest mean fold AUC, earliest grid point on ties"""
    if len(plan.assignments) != table.n_rows:
        raise DataValidationError("Fold plan does not match the table")
    configs = grid.configs(seed)
    splits = list(plan.splits())

    outcomes = Parallel(n_jobs=n_jobs)(
        delayed(_evaluate_fold)(table, config, train, test, threshold) for config in configs for train, test in splits
    )

    results: list[ConfigResult] = []
    for i, config in enumerate(configs):
        result = ConfigResult(config=config)
        oof = np.full(table.n_rows, np.nan)
        for (_, test), outcome in zip(splits, outcomes[i * plan.k : (i + 1) * plan.k]):
            if isinstance(outcome, str):
                result.error = outcome
                break
            metrics, scores = outcome
            result.folds.append(metrics)
            oof[test] = scores

        if result.failed:
            log.warning(f"{grid.learner.display_name} config ({config.describe()}) failed: {result.error}")
        else:
            result.oof_scores = oof
            log.debug(f"{grid.learner.display_name} ({config.describe()}) mean AUC {result.mean_auc:.4f}")
        results.append(result)

    ranked = [(r.mean_auc, -i) for i, r in enumerate(results) if not r.failed]
    if not ranked:
        raise UndefinedMetricError(f"Every {grid.learner.display_name} grid config failed")
    best_index = -max(ranked)[1]

    log.info(
        f"{grid.learner.display_name}: best of {len(configs)} configs is ({configs[best_index].describe()}) "
        f"with mean AUC {results[best_index].mean_auc:.4f}"
    )
    return GridResult(learner=grid.learner, results=results, best_index=best_index)


@dataclass
class StageEvaluation:
    stage: Stage
    plan: FoldPlan | None = None
    grids: dict[LearnerKind, GridResult] = field(default_factory=lambda: {})
    skipped: str | None = None

    def metrics(self, learner: LearnerKind) -> MetricsRow | None:
        grid = self.grids.get(learner)
        return grid.best.mean_metrics() if grid is not None else None


def evaluate_stagewise(
    tables: Mapping[Stage, CohortTable],
    grids: Sequence[HyperGrid],
    seed: int,
    k: int = DEFAULT_K_FOLDS,
    n_jobs: int = 1,
) -> dict[Stage, StageEvaluation]:
    """Grid-search every learner on every stage cohort; stages too small for k folds are marked skipped"""
    out: dict[Stage, StageEvaluation] = {}
    for stage, table in tables.items():
        evaluation = StageEvaluation(stage=stage)
        out[stage] = evaluation
        try:
            evaluation.plan = stratified_kfold(table.labels, k, seed)
        except DataValidationError as e:
            evaluation.skipped = str(e)
            log.warning(f"Skipping {stage.display_name} stage: {e}")
            continue

        for grid in grids:
            try:
                evaluation.grids[grid.learner] = grid_search(table, grid, evaluation.plan, seed, n_jobs)
            except UndefinedMetricError as e:
                log.error(f"{stage.display_name} {grid.learner.display_name}: {e}")

    return out
