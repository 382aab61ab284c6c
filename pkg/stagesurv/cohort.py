import io
import logging
import math
import warnings
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass as std_dataclass, field
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Self

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator
from pydantic.dataclasses import dataclass

from stagesurv.const import FIVE_YEARS_MONTHS, ZERO_VARIANCE_TOL
from stagesurv.exceptions import ConfigError, DataError, DataValidationError, SchemaMismatchError
from stagesurv.utils import FloatArray, IntArray, format_count

log = logging.getLogger(__name__)


class FeatureKind(Enum):
    NUMERIC = "numeric"
    ORDINAL = "ordinal"
    NOMINAL = "nominal"


class VitalStatus(Enum):
    ALIVE = "alive"
    DEAD = "dead"


class SurvivalLabel(Enum):
    SURVIVED = "Survived"
    NOT_SURVIVED = "NotSurvived"
    EXCLUDED = "Excluded"


class Stage(Enum):
    LOCALIZED = "localized"
    REGIONAL = "regional"
    DISTANT = "distant"

    @property
    def display_name(self) -> str:
        return self.value.capitalize()


class FeatureSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    kind: FeatureKind


class LabelColumns(BaseModel):
    model_config = ConfigDict(frozen=True)

    vital_status: str = "Vital status recode"
    survival_months: str = "Survival months"
    cause_of_death: str = "Cause of death"


class FeatureSchema(BaseModel):
    """Declarative description of a SEER-shaped cohort: predictors, label columns and the stage code map."""

    model_config = ConfigDict(frozen=True)

    features: tuple[FeatureSpec, ...]
    label_columns: LabelColumns = LabelColumns()
    stage_column: str = "Summary Stage"
    stage_map: dict[str, Stage]
    cancer_type: str
    # cause-of-death values counted as death from the studied cancer, besides cancer_type itself
    cause_of_death_matches: tuple[str, ...] = ()

    @model_validator(mode="after")
    def _check_columns(self) -> Self:
        if not self.features:
            raise ValueError("schema needs at least one predictor feature")

        names = [f.name for f in self.features]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate feature names: {', '.join(duplicates)}")

        reserved = {
            self.label_columns.vital_status,
            self.label_columns.survival_months,
            self.label_columns.cause_of_death,
            self.stage_column,
        }
        overlap = sorted(reserved.intersection(names))
        if overlap:
            raise ValueError(f"label/stage columns used as predictors: {', '.join(overlap)}")

        return self

    @staticmethod
    def load(path: Path) -> "FeatureSchema":
        try:
            return FeatureSchema.model_validate_json(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigError(f"Schema config not found: {path}") from e
        except ValidationError as e:
            raise ConfigError(f"Invalid schema config {path}: {e}") from e

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def required_columns(self) -> list[str]:
        return [
            *self.feature_names,
            self.label_columns.vital_status,
            self.label_columns.survival_months,
            self.label_columns.cause_of_death,
            self.stage_column,
        ]

    def names_of_kind(self, *kinds: FeatureKind) -> list[str]:
        return [f.name for f in self.features if f.kind in kinds]

    def kind_of(self, name: str) -> FeatureKind:
        for f in self.features:
            if f.name == name:
                return f.kind
        raise KeyError(name)

    def stage_of(self, code: str) -> Stage:
        try:
            return self.stage_map[code]
        except KeyError:
            raise DataValidationError(f"Unknown stage code: {code!r}") from None


@dataclass(frozen=True)
class RawRecord:
    values: dict[str, str]
    vital_status: VitalStatus
    survival_months: int
    cause_of_death: str
    stage_code: str
    line: int = 0


@dataclass(frozen=True)
class LabeledRecord:
    record: RawRecord
    label: SurvivalLabel


@std_dataclass
class ParseResult:
    records: list[RawRecord]
    rows_read: int
    dropped: list[tuple[int, str]] = field(default_factory=lambda: [])

    @property
    def dropped_count(self) -> int:
        return len(self.dropped)


def _parse_vital_status(cell: str) -> VitalStatus | None:
    text = cell.strip().lower()
    if text.startswith("alive"):
        return VitalStatus.ALIVE
    if text.startswith("dead"):
        return VitalStatus.DEAD
    return None


def _row_problem(row: Mapping[str, str], schema: FeatureSchema) -> str | None:
    for column in schema.required_columns:
        if row[column] == "":
            return f"empty cell in column {column!r}"

    for name in schema.names_of_kind(FeatureKind.NUMERIC, FeatureKind.ORDINAL):
        try:
            value = float(row[name])
        except ValueError:
            return f"unparseable numeric value {row[name]!r} in column {name!r}"
        if not math.isfinite(value):
            return f"non-finite value {row[name]!r} in column {name!r}"

    months_cell = row[schema.label_columns.survival_months]
    try:
        months = int(months_cell)
    except ValueError:
        return f"unparseable survival months {months_cell!r}"
    if months < 0:
        return f"negative survival months {months}"

    if _parse_vital_status(row[schema.label_columns.vital_status]) is None:
        return f"unknown vital status {row[schema.label_columns.vital_status]!r}"

    return None


def _read_cells(source: BinaryIO) -> pd.DataFrame:
    # index_col=False stops a long first row from being read as an index; pandas then warns instead
    with warnings.catch_warnings():
        warnings.simplefilter("error", pd.errors.ParserWarning)
        try:
            return pd.read_csv(
                source, dtype=str, keep_default_na=False, na_filter=False, encoding="utf-8", index_col=False
            )
        except UnicodeDecodeError as e:
            raise DataError(f"Input is not valid UTF-8: byte {e.start}: {e.reason}") from e
        except pd.errors.EmptyDataError as e:
            raise DataError("Input is empty, expected a header row") from e
        except pd.errors.ParserWarning as e:
            raise DataError("Malformed CSV: a row has more fields than the header") from e
        except pd.errors.ParserError as e:
            raise DataError(f"Malformed CSV: {e}") from e


def parse_dataset(source: BinaryIO | bytes, schema: FeatureSchema) -> ParseResult:
    """Parse a UTF-8 CSV with a header row, keeping only rows where every schema column is usable"""
    if isinstance(source, bytes):
        source = io.BytesIO(source)

    frame = _read_cells(source)
    for column in schema.required_columns:
        if column not in frame.columns:
            raise SchemaMismatchError(column)

    cells = frame[schema.required_columns].to_numpy(dtype=str)
    columns = schema.required_columns
    result = ParseResult(records=[], rows_read=len(cells))

    for i, raw_cells in enumerate(cells):
        line = i + 2
        row = {column: str(cell).strip() for column, cell in zip(columns, raw_cells)}

        problem = _row_problem(row, schema)
        if problem is not None:
            log.info(f"Dropping line {line}: {problem}")
            result.dropped.append((line, problem))
            continue

        vital_status = _parse_vital_status(row[schema.label_columns.vital_status])
        assert vital_status is not None
        result.records.append(
            RawRecord(
                values={name: row[name] for name in schema.feature_names},
                vital_status=vital_status,
                survival_months=int(row[schema.label_columns.survival_months]),
                cause_of_death=row[schema.label_columns.cause_of_death],
                stage_code=row[schema.stage_column],
                line=line,
            )
        )

    if result.dropped:
        log.warning(f"Dropped {result.dropped_count} of {result.rows_read} rows with missing or invalid cells")
    log.info(f"Parsed {len(result.records)} records")

    return result


def label_survival(record: RawRecord, cancer_type: str, cause_matches: Iterable[str] = ()) -> SurvivalLabel:
    """Five-year survivability rule: alive at >= 60 months survived, death from the cancer before 60 months did not,
    everything else is excluded"""
    if record.survival_months < 0:
        raise DataValidationError(f"Survival months must be >= 0, got {record.survival_months}")

    matches = {cancer_type.strip().casefold(), *(c.strip().casefold() for c in cause_matches)}

    if record.survival_months >= FIVE_YEARS_MONTHS and record.vital_status == VitalStatus.ALIVE:
        return SurvivalLabel.SURVIVED
    if record.survival_months < FIVE_YEARS_MONTHS and record.cause_of_death.strip().casefold() in matches:
        return SurvivalLabel.NOT_SURVIVED
    return SurvivalLabel.EXCLUDED


def label_records(records: Iterable[RawRecord], schema: FeatureSchema) -> tuple[list[LabeledRecord], int]:
    """Label records and drop the excluded ones, returning the kept records and the exclusion count"""
    labeled: list[LabeledRecord] = []
    excluded = 0
    for record in records:
        label = label_survival(record, schema.cancer_type, schema.cause_of_death_matches)
        if label == SurvivalLabel.EXCLUDED:
            excluded += 1
            continue
        labeled.append(LabeledRecord(record=record, label=label))

    log.info(f"Labeled {len(labeled)} records, excluded {excluded}")
    return labeled, excluded


def split_by_stage(records: Sequence[LabeledRecord], schema: FeatureSchema) -> dict[Stage, list[LabeledRecord]]:
    unknown = sorted({r.record.stage_code for r in records if r.record.stage_code not in schema.stage_map})
    if unknown:
        raise DataValidationError(f"Unknown stage codes: {', '.join(repr(c) for c in unknown)}")

    split: dict[Stage, list[LabeledRecord]] = {stage: [] for stage in Stage}
    for r in records:
        split[schema.stage_map[r.record.stage_code]].append(r)

    for line in stage_distribution(split):
        log.info(line)

    return split


def stage_distribution(split: Mapping[Stage, Sequence[LabeledRecord]], cancer_type: str | None = None) -> list[str]:
    """Per-stage counts and shares, e.g. "Localized 33.1% (n = 17,582)" """
    total = sum(len(subset) for subset in split.values())
    lines: list[str] = []
    if cancer_type is not None:
        lines.append(f"{cancer_type.capitalize()} (n = {format_count(total)})")
    for stage in Stage:
        n = len(split.get(stage, []))
        share = 100.0 * n / total if total else 0.0
        lines.append(f"{stage.display_name} {share:.1f}% (n = {format_count(n)})")
    return lines


def cleaning_report(parsed: ParseResult, excluded: int) -> list[str]:
    lines = [f"line {line}: {reason}" for line, reason in parsed.dropped]
    lines += [
        f"rows read: {parsed.rows_read}",
        f"rows kept: {len(parsed.records)}",
        f"rows dropped: {parsed.dropped_count}",
        f"records excluded by labeling rule: {excluded}",
    ]
    return lines


@dataclass(frozen=True)
class EncodingStats:
    """Fitting-set state of an encoding: nominal categories (sorted) and per-column mean / population std"""

    categories: dict[str, tuple[str, ...]]
    means: dict[str, float]
    stds: dict[str, float]


@dataclass(frozen=True)
class EncodedColumn:
    source: str
    name: str


def _column_values(records: Sequence[LabeledRecord], name: str) -> FloatArray:
    return np.array([float(r.record.values[name]) for r in records], dtype=np.float64)


def fit_encoding(records: Sequence[LabeledRecord], schema: FeatureSchema) -> EncodingStats:
    if not records:
        raise DataValidationError("Cannot fit an encoding on an empty cohort")

    categories: dict[str, tuple[str, ...]] = {}
    means: dict[str, float] = {}
    stds: dict[str, float] = {}
    for spec in schema.features:
        if spec.kind == FeatureKind.NOMINAL:
            categories[spec.name] = tuple(sorted({r.record.values[spec.name] for r in records}))
            continue

        values = _column_values(records, spec.name)
        mean = float(np.mean(values))
        std = float(np.std(values))
        if std <= ZERO_VARIANCE_TOL * max(1.0, abs(mean)):
            log.warning(f"Column {spec.name!r} has zero variance, clamping its std to 1")
            std = 1.0
        means[spec.name] = mean
        stds[spec.name] = std

    return EncodingStats(categories=categories, means=means, stds=stds)


def _columns_for(schema: FeatureSchema, stats: EncodingStats) -> list[EncodedColumn]:
    columns: list[EncodedColumn] = []
    for spec in schema.features:
        if spec.kind == FeatureKind.NOMINAL:
            columns += [EncodedColumn(spec.name, f"{spec.name}={c}") for c in stats.categories[spec.name]]
        else:
            columns.append(EncodedColumn(spec.name, spec.name))
    return columns


@std_dataclass(frozen=True, eq=False)
class CohortTable:
    """Encoded design matrix with survival labels and stage tags. Arrays are read-only after construction."""

    schema: FeatureSchema
    columns: tuple[EncodedColumn, ...]
    rows: FloatArray
    raw_rows: FloatArray
    labels: IntArray
    stages: tuple[Stage, ...]
    stats: EncodingStats
    records: tuple[LabeledRecord, ...] = ()

    def __post_init__(self) -> None:
        n = self.rows.shape[0]
        if not (self.raw_rows.shape == self.rows.shape and len(self.labels) == n and len(self.stages) == n):
            raise DataValidationError("Row, label and stage counts must agree")
        if self.rows.shape[1] != len(self.columns):
            raise DataValidationError("Column count does not match the encoded column list")
        for array in (self.rows, self.raw_rows, self.labels):
            array.flags.writeable = False

    @staticmethod
    def from_matrix(
        rows: FloatArray,
        labels: Sequence[int] | IntArray,
        names: Sequence[str] | None = None,
        stage: Stage = Stage.LOCALIZED,
    ) -> "CohortTable":
        """Wrap an already-encoded numeric matrix, every column treated as a numeric feature"""
        rows = np.array(rows, dtype=np.float64)
        if rows.ndim != 2:
            raise DataValidationError("Expected a 2-D matrix")
        names = list(names) if names is not None else [f"x{j}" for j in range(rows.shape[1])]
        schema = FeatureSchema(
            features=tuple(FeatureSpec(name=n, kind=FeatureKind.NUMERIC) for n in names),
            stage_map={s.value: s for s in Stage},
            cancer_type="synthetic",
        )
        stats = EncodingStats(categories={}, means={n: 0.0 for n in names}, stds={n: 1.0 for n in names})
        return CohortTable(
            schema=schema,
            columns=tuple(EncodedColumn(n, n) for n in names),
            rows=rows,
            raw_rows=rows.copy(),
            labels=np.array(labels, dtype=np.int64),
            stages=tuple(stage for _ in range(rows.shape[0])),
            stats=stats,
        )

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def feature_count(self) -> int:
        return self.rows.shape[1]

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def groups(self) -> list[tuple[str, IntArray]]:
        """Encoded column indices per source feature, in schema order"""
        out: list[tuple[str, IntArray]] = []
        for name in self.schema.feature_names:
            idx = np.array([j for j, c in enumerate(self.columns) if c.source == name], dtype=np.int64)
            if len(idx):
                out.append((name, idx))
        return out

    def column_index(self, name: str) -> int:
        return self.column_names.index(name)

    def subset(self, indices: Sequence[int] | IntArray) -> "CohortTable":
        idx = np.asarray(indices, dtype=np.int64)
        return CohortTable(
            schema=self.schema,
            columns=self.columns,
            rows=self.rows[idx].copy(),
            raw_rows=self.raw_rows[idx].copy(),
            labels=self.labels[idx].copy(),
            stages=tuple(self.stages[i] for i in idx),
            stats=self.stats,
            records=tuple(self.records[i] for i in idx) if self.records else (),
        )


def encode(
    records: Sequence[LabeledRecord], schema: FeatureSchema, fit_stats: EncodingStats | None = None
) -> CohortTable:
    """Encode labeled records into a design matrix.

    Without fit_stats the encoding is fitted on these records; with fit_stats (transform mode) categories unseen at
    fit time encode to all-zero indicators.
    """
    stats = fit_stats if fit_stats is not None else fit_encoding(records, schema)
    columns = _columns_for(schema, stats)
    n = len(records)

    blocks: list[FloatArray] = []
    for spec in schema.features:
        if spec.kind == FeatureKind.NOMINAL:
            categories = stats.categories[spec.name]
            position = {c: j for j, c in enumerate(categories)}
            block = np.zeros((n, len(categories)), dtype=np.float64)
            for i, r in enumerate(records):
                j = position.get(r.record.values[spec.name])
                if j is not None:
                    block[i, j] = 1.0
            blocks.append(block)
        else:
            blocks.append(_column_values(records, spec.name).reshape(n, 1))

    raw = np.hstack(blocks) if blocks else np.zeros((n, 0))
    rows = raw.copy()
    for j, column in enumerate(columns):
        if schema.kind_of(column.source) == FeatureKind.NUMERIC:
            rows[:, j] = (raw[:, j] - stats.means[column.source]) / stats.stds[column.source]

    labels: list[int] = []
    for r in records:
        if r.label == SurvivalLabel.EXCLUDED:
            raise DataValidationError(f"Excluded record from line {r.record.line} cannot enter a cohort table")
        labels.append(1 if r.label == SurvivalLabel.SURVIVED else 0)

    return CohortTable(
        schema=schema,
        columns=tuple(columns),
        rows=rows,
        raw_rows=raw,
        labels=np.array(labels, dtype=np.int64),
        stages=tuple(schema.stage_of(r.record.stage_code) for r in records),
        stats=stats,
        records=tuple(records),
    )


@std_dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    names: tuple[str, ...]
    values: FloatArray

    def is_defined(self, name: str) -> bool:
        j = self.names.index(name)
        return not math.isnan(self.values[j, j])


def correlation_matrix(table: CohortTable, features: Sequence[str] | None = None) -> CorrelationMatrix:
    """Pearson correlations of numeric features in raw units. Zero-variance columns are reported as NaN."""
    names = list(features) if features is not None else table.schema.names_of_kind(FeatureKind.NUMERIC)
    if table.n_rows < 2:
        raise DataValidationError("Correlation needs at least 2 rows")

    x = np.column_stack([table.raw_rows[:, table.column_index(n)] for n in names]) if names else np.zeros((0, 0))
    means = x.mean(axis=0)
    centered = x - means
    norms = np.sqrt((centered**2).sum(axis=0))
    defined = norms > ZERO_VARIANCE_TOL * np.sqrt(table.n_rows) * np.maximum(1.0, np.abs(means))
    for name, ok in zip(names, defined):
        if not ok:
            log.warning(f"Column {name!r} has zero variance, its correlations are undefined")

    safe = np.where(defined, norms, 1.0)
    corr = (centered.T @ centered) / np.outer(safe, safe)
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    corr[~defined, :] = np.nan
    corr[:, ~defined] = np.nan

    return CorrelationMatrix(names=tuple(names), values=corr)


def correlation_tsv(matrix: CorrelationMatrix) -> str:
    lines = ["\t".join(["feature", *matrix.names])]
    for name, row in zip(matrix.names, matrix.values):
        cells = ["NA" if math.isnan(v) else f"{v:.6f}" for v in row]
        lines.append("\t".join([name, *cells]))
    return "\n".join(lines) + "\n"

