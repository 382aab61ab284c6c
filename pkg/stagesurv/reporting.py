"""Report files: the metrics table and survivor comparison table layouts, ROC and attribution exports, presence
matrices, and the cross-cancer report compiled from finished runs."""

import io
import json
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any
from xml.sax.saxutils import escape

import numpy as np
import pandas as pd

from stagesurv.attribution import AggregateExplanation, LocalExplanation, PresenceMatrix, ShapSummary, presence_heatmap
from stagesurv.cohort import Stage
from stagesurv.const import (
    ARTIFACT_GROUP_TABLE_CSV,
    ARTIFACT_GROUP_TABLE_TEXT,
    ARTIFACT_LIME_CASE,
    ARTIFACT_MANIFEST,
    ARTIFACT_METRICS_TABLE_CSV,
    ARTIFACT_METRICS_TABLE_TEXT,
    ARTIFACT_PRESENCE_LIME,
    ARTIFACT_PRESENCE_SHAP,
    ARTIFACT_SHAP_RANKING,
    DEFAULT_K_FOLDS,
    DEFAULT_TOP_K,
)
from stagesurv.exceptions import DataError
from stagesurv.learners import LearnerKind
from stagesurv.selection import GridResult, MetricsRow, RocCurve
from stagesurv.stats import GroupComparison
from stagesurv.utils import format_p_value

log = logging.getLogger(__name__)

METRICS_TABLE_TITLE = "Performance of ML models for survival prediction"
GROUP_TABLE_TITLE = "Comparison of mean values between survivors and non-survivors with p-values"
METRIC_HEADERS = ("Acc", "Prec", "Rec", "F1", "AUC")
METRIC_COLUMNS = ("acc", "prec", "rec", "f1", "auc")

SHORT_LABELS = {
    "Regional Nodes Examined": "Nodes Exam.",
    "Regional Nodes Positive": "Nodes Pos.",
}


def _csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n", float_format="%.6f")
    return buffer.getvalue()


def _read_csv(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, keep_default_na=False, na_values=[""], dtype={"stage": str, "cancer_type": str})
    except FileNotFoundError as e:
        raise DataError(f"Missing report input: {path}") from e


def cell_label(cancer_type: str, stage: Stage | str) -> str:
    name = stage.value if isinstance(stage, Stage) else stage
    return f"{cancer_type}/{name}"


# grid search and metrics table


def grid_search_csv(results: Mapping[LearnerKind, GridResult]) -> str:
    rows: list[dict[str, Any]] = []
    for learner, grid in results.items():
        for i, r in enumerate(grid.results):
            rows.append(
                {
                    "learner": learner.value,
                    "config": i,
                    "parameters": json.dumps(r.config.parameters, sort_keys=True),
                    "mean_auc": r.mean_auc,
                    "fold_aucs": " ".join(f"{m.auc:.6f}" for m in r.folds if m.auc is not None),
                    "selected": i == grid.best_index,
                    "error": r.error or "",
                }
            )
    columns = ["learner", "config", "parameters", "mean_auc", "fold_aucs", "selected", "error"]
    return _csv(pd.DataFrame(rows, columns=columns))


@dataclass(frozen=True)
class MetricsTableRow:
    cancer_type: str
    stage: str
    learner: LearnerKind
    metrics: MetricsRow | None
    # ok, skipped or failed
    status: str = "ok"


def metrics_table_frame(rows: Sequence[MetricsTableRow]) -> pd.DataFrame:
    records: list[dict[str, Any]] = []
    for row in rows:
        values = row.metrics.values() if row.metrics is not None else (math.nan,) * len(METRIC_COLUMNS)
        records.append(
            {
                "cancer_type": row.cancer_type,
                "stage": row.stage,
                "learner": row.learner.value,
                **dict(zip(METRIC_COLUMNS, values)),
                "status": row.status,
            }
        )
    return pd.DataFrame(records, columns=["cancer_type", "stage", "learner", *METRIC_COLUMNS, "status"])


def metrics_table_csv(rows: Sequence[MetricsTableRow]) -> str:
    return _csv(metrics_table_frame(rows))


def metrics_csv(results: Mapping[LearnerKind, GridResult]) -> str:
    """Cross-validation means of each learner's selected configuration"""
    records: list[dict[str, Any]] = []
    for learner, grid in results.items():
        metrics = grid.best.mean_metrics()
        records.append(
            {
                "learner": learner.value,
                **dict(zip(METRIC_COLUMNS, metrics.values())),
                "precision_degenerate": metrics.precision_degenerate,
                "recall_degenerate": metrics.recall_degenerate,
            }
        )
    columns = ["learner", *METRIC_COLUMNS, "precision_degenerate", "recall_degenerate"]
    return _csv(pd.DataFrame(records, columns=columns))


def metrics_table_text(frame: pd.DataFrame, k_folds: int | Sequence[int] = DEFAULT_K_FOLDS) -> str:
    """Rows are cancer type x stage, one column group of five metrics per learner. Runs combined with different
    fold counts list each K in the title."""
    folds = sorted({k_folds} if isinstance(k_folds, int) else set(k_folds))
    learners = [LearnerKind(tag) for tag in dict.fromkeys(frame["learner"])]
    group_width = 6 * len(METRIC_HEADERS)
    lead = f"{'Cancer':<12}{'Stage':<11}"

    lines = [f"{METRICS_TABLE_TITLE} ({'/'.join(str(k) for k in folds)}-fold cross-validation means)", ""]
    lines.append(lead + "".join(f"| {learner.display_name:<{group_width}}" for learner in learners))
    lines.append(" " * len(lead) + "".join("| " + "".join(f"{h:<6}" for h in METRIC_HEADERS) for _ in learners))

    for (cancer, stage), group in frame.groupby(["cancer_type", "stage"], sort=False):
        cells: list[str] = []
        for learner in learners:
            found = group[group["learner"] == learner.value]
            if found.empty or found.iloc[0]["status"] != "ok":
                status = "skipped" if found.empty else str(found.iloc[0]["status"])
                cells.append(f"| {status:<{group_width}}")
            else:
                row = found.iloc[0]
                cells.append("| " + "".join(f"{float(row[c]):<6.3f}" for c in METRIC_COLUMNS))
        lines.append(f"{str(cancer).capitalize():<12}{str(stage).capitalize():<11}" + "".join(cells))

    return "\n".join(line.rstrip() for line in lines) + "\n"


def roc_tsv(curve: RocCurve) -> str:
    lines = ["fpr\ttpr"] + [f"{f:.6f}\t{t:.6f}" for f, t in curve.points]
    return "\n".join(lines) + "\n"


# attributions


def ranking_tsv(summary: ShapSummary) -> str:
    lines = ["rank\tfeature\tmean_abs_phi"]
    lines += [f"{i}\t{name}\t{value:.8f}" for i, (name, value) in enumerate(summary.ranking(), start=1)]
    return "\n".join(lines) + "\n"


def read_ranking(path: Path, k: int = DEFAULT_TOP_K) -> list[str]:
    frame = pd.read_csv(path, sep="\t")
    return [str(name) for name in frame.sort_values("rank")["feature"].head(k)]


def beeswarm_tsv(summary: ShapSummary) -> str:
    lines = ["instance\tfeature\tnormalized_value\tphi"]
    lines += [f"{i}\t{name}\t{value:.6f}\t{phi:.8f}" for i, name, value, phi in summary.beeswarm()]
    return "\n".join(lines) + "\n"


def beeswarm_svg(summary: ShapSummary, width: int = 640, row_height: int = 28) -> str:
    """Minimal scatter of phi per feature, most important feature on top; color runs blue (low) to red (high)"""
    names = [name for name, _ in summary.ranking()]
    label_width = 180
    height = row_height * (len(names) + 1)
    span = float(np.abs(summary.phi).max()) or 1.0
    plot = width - label_width - 20

    def x_of(phi: float) -> float:
        return label_width + plot * (phi + span) / (2 * span)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" '
        'font-size="11">',
        f'<line x1="{x_of(0.0):.1f}" y1="0" x2="{x_of(0.0):.1f}" y2="{height - row_height}" stroke="#999"/>',
    ]
    for row, name in enumerate(names):
        j = summary.names.index(name)
        y = row_height * (row + 0.5)
        parts.append(f'<text x="4" y="{y + 4:.1f}">{escape(name)}</text>')
        for i in range(len(summary.instances)):
            v = float(summary.normalized_values[i, j])
            jitter = ((i * 7) % 11 - 5) * row_height / 16
            color = f"rgb({int(255 * v)},40,{int(255 * (1 - v))})"
            parts.append(
                f'<circle cx="{x_of(float(summary.phi[i, j])):.1f}" cy="{y + jitter:.1f}" r="2.5" fill="{color}"/>'
            )
    parts.append(f'<text x="{label_width}" y="{height - 8}">SHAP value (impact on survival probability)</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def lime_case_json(explanation: LocalExplanation | AggregateExplanation, learner: LearnerKind) -> str:
    match explanation:
        case LocalExplanation():
            document: dict[str, Any] = {"learner": learner.value, "mode": "single", **_local_document(explanation)}
        case AggregateExplanation():
            document = {
                "learner": learner.value,
                "mode": "aggregate",
                "top_features": [{"feature": n, "cases": c} for n, c in explanation.top_features],
                "cases": [_local_document(case) for case in explanation.cases],
            }
    return json.dumps(document, indent=2) + "\n"


def _local_document(explanation: LocalExplanation) -> dict[str, Any]:
    return {
        "instance_id": explanation.instance_id,
        "prediction": explanation.prediction,
        "baseline": explanation.baseline,
        "intercept": explanation.intercept,
        "top_features": [{"feature": n, "weight": w} for n, w in explanation.top_features],
        "fidelity": explanation.fidelity,
        "degenerate": explanation.degenerate,
        "kernel_width": explanation.kernel_width,
    }


def read_lime_features(path: Path) -> list[str]:
    document = json.loads(path.read_text(encoding="utf-8"))
    return [str(item["feature"]) for item in document["top_features"]]


def presence_tsv(matrix: PresenceMatrix) -> str:
    lines = ["\t".join(["feature", *matrix.columns])]
    for feature, row in zip(matrix.features, matrix.cells):
        lines.append("\t".join([feature, *(str(int(c)) for c in row)]))
    return "\n".join(lines) + "\n"


# survivor comparison table


def group_comparison_frame(comparisons: Sequence[GroupComparison], cancer_type: str) -> pd.DataFrame:
    return pd.DataFrame(
        [{"cancer_type": cancer_type, **asdict(c)} for c in comparisons],
        columns=[
            "cancer_type",
            "feature",
            "mean_survivors",
            "mean_nonsurvivors",
            "n_survivors",
            "n_nonsurvivors",
            "t_statistic",
            "degrees_of_freedom",
            "p_value",
            "available",
            "degenerate",
        ],
    )


def group_comparison_csv(comparisons: Sequence[GroupComparison], cancer_type: str) -> str:
    return _csv(group_comparison_frame(comparisons, cancer_type))


def group_table_text(frame: pd.DataFrame) -> str:
    """Survivor and non-survivor blocks with one row per cancer type; the p-Value column shows the largest
    per-feature p-value of that cancer type"""
    features = list(dict.fromkeys(frame["feature"]))
    headers = ["Cancer Type", *(SHORT_LABELS.get(f, f) for f in features), "p-Value"]
    widths = [max(12, len(h) + 2) for h in headers]

    def line(cells: Sequence[str]) -> str:
        return "".join(f"{c:<{w}}" for c, w in zip(cells, widths)).rstrip()

    lines = [GROUP_TABLE_TITLE, "", line(headers)]
    for title, column in (("Survivors", "mean_survivors"), ("Non-survivors", "mean_nonsurvivors")):
        lines.append(title)
        for cancer, group in frame.groupby("cancer_type", sort=False):
            by_feature = group.set_index("feature")
            means = [
                f"{float(by_feature.loc[f, column]):.1f}" if f in by_feature.index else "n/a" for f in features
            ]
            available = group[group["available"].astype(bool)]
            p = format_p_value(float(available["p_value"].max())) if len(available) == len(group) else "n/a"
            lines.append(line([str(cancer).capitalize(), *means, p]))

    return "\n".join(lines) + "\n"


# cross-cancer report


@dataclass(frozen=True)
class RunSummary:
    directory: Path
    cancer_type: str
    stages: list[str]
    k_folds: int


def read_run(directory: Path) -> RunSummary:
    manifest_path = directory / ARTIFACT_MANIFEST
    if not manifest_path.is_file():
        raise DataError(f"Run directory has no manifest: {directory}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    return RunSummary(
        directory=directory,
        cancer_type=str(manifest["cancer_type"]),
        stages=[name for name, entry in manifest["stages"].items() if entry["status"] != "skipped"],
        k_folds=int(manifest["decisions"]["k_folds"]),
    )


def compile_report(run_dirs: Sequence[Path], out: Path, top_k: int = DEFAULT_TOP_K) -> list[Path]:
    """Combine finished single-cancer runs into cross-cancer metrics, survivor comparison and presence tables"""
    runs = [read_run(d) for d in run_dirs]
    out.mkdir(parents=True, exist_ok=True)

    metrics_table = pd.concat([_read_csv(r.directory / ARTIFACT_METRICS_TABLE_CSV) for r in runs], ignore_index=True)
    group_table = pd.concat([_read_csv(r.directory / ARTIFACT_GROUP_TABLE_CSV) for r in runs], ignore_index=True)

    shap_lists: dict[str, list[str]] = {}
    lime_lists: dict[str, list[str]] = {}
    for run in runs:
        for stage in run.stages:
            ranking = run.directory / stage / ARTIFACT_SHAP_RANKING
            if ranking.is_file():
                shap_lists[cell_label(run.cancer_type, stage)] = read_ranking(ranking, top_k)
            case = run.directory / stage / ARTIFACT_LIME_CASE
            if case.is_file():
                lime_lists[cell_label(run.cancer_type, stage)] = read_lime_features(case)[:top_k]

    written = {
        ARTIFACT_METRICS_TABLE_CSV: _csv(metrics_table),
        ARTIFACT_METRICS_TABLE_TEXT: metrics_table_text(metrics_table, [r.k_folds for r in runs]),
        ARTIFACT_GROUP_TABLE_CSV: _csv(group_table),
        ARTIFACT_GROUP_TABLE_TEXT: group_table_text(group_table),
        ARTIFACT_PRESENCE_SHAP: presence_tsv(presence_heatmap(shap_lists, top_k)),
        ARTIFACT_PRESENCE_LIME: presence_tsv(presence_heatmap(lime_lists, top_k)),
    }
    paths: list[Path] = []
    for name, text in written.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        paths.append(path)

    log.info(f"Compiled report over {len(runs)} runs into {out}")
    return paths
