"""Synthetic SEER-shaped cohorts with a planted logistic survival signal."""

import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Self

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from stagesurv.cohort import (
    FeatureKind,
    FeatureSchema,
    RawRecord,
    Stage,
    SurvivalLabel,
    VitalStatus,
    label_survival,
)
from stagesurv.const import FIVE_YEARS_MONTHS
from stagesurv.exceptions import ConfigError, StageSurvException
from stagesurv.utils import FloatArray, derive_rng, log_odds, sigmoid

log = logging.getLogger(__name__)

ALIVE_CAUSE = "Alive"
OTHER_CAUSE = "Other cause of death"
MAX_FOLLOW_UP_MONTHS = 180


class FeatureProfile(BaseModel):
    """Marginal distribution of one generated column.

    Numeric columns are clipped, rounded Gaussians; ordinal and nominal columns draw from `levels` with `weights`.
    """

    model_config = ConfigDict(frozen=True)

    mean: float = 0.0
    std: float = Field(default=1.0, ge=0)
    low: float = -math.inf
    high: float = math.inf
    decimals: int = Field(default=0, ge=0)
    levels: tuple[str, ...] = ()
    weights: tuple[float, ...] | None = None

    @model_validator(mode="after")
    def _check_levels(self) -> Self:
        if self.weights is not None and len(self.weights) != len(self.levels):
            raise ValueError("weights must match levels")
        return self

    @property
    def probabilities(self) -> FloatArray:
        w = np.ones(len(self.levels)) if self.weights is None else np.asarray(self.weights, dtype=np.float64)
        return w / w.sum()


DEFAULT_PROFILES: dict[str, FeatureProfile] = {
    "Age": FeatureProfile(mean=66.0, std=13.0, low=18.0, high=100.0),
    "Regional Nodes Examined": FeatureProfile(mean=14.0, std=9.0, low=0.0, high=90.0),
    "Regional Nodes Positive": FeatureProfile(mean=3.0, std=4.0, low=0.0, high=60.0),
    "Tumor Size": FeatureProfile(mean=40.0, std=25.0, low=1.0, high=300.0),
    "Extension": FeatureProfile(levels=("100", "200", "300", "400", "500", "600", "700", "800")),
    "Grade": FeatureProfile(levels=("1", "2", "3", "4", "9"), weights=(0.15, 0.45, 0.25, 0.05, 0.10)),
    "Lymph Nodes": FeatureProfile(levels=("0", "100", "200", "300", "800"), weights=(0.5, 0.2, 0.15, 0.1, 0.05)),
    "Marital Status": FeatureProfile(levels=("1", "2", "3", "4", "5", "9")),
    "Radiation": FeatureProfile(levels=("0", "1", "2", "3", "4", "5"), weights=(0.7, 0.1, 0.05, 0.05, 0.05, 0.05)),
    "Surgery Code": FeatureProfile(levels=("0", "20", "30", "40", "50", "60", "80", "90")),
    "Behavior Code": FeatureProfile(levels=("2", "3"), weights=(0.05, 0.95)),
    "Histologic Type": FeatureProfile(levels=("8140", "8480", "8490", "8020", "8262", "8240")),
    "Metastasis at Diagnosis": FeatureProfile(levels=("0", "10", "40", "60"), weights=(0.7, 0.1, 0.1, 0.1)),
    "Primary Site": FeatureProfile(levels=("C180", "C182", "C187", "C199", "C209")),
    "Race": FeatureProfile(
        levels=("White", "Black", "Asian or Pacific Islander", "American Indian/Alaska Native"),
        weights=(0.75, 0.12, 0.11, 0.02),
    ),
    "Sequence Number": FeatureProfile(levels=("00", "01", "02"), weights=(0.7, 0.2, 0.1)),
    "Sex": FeatureProfile(levels=("Male", "Female")),
}


def _generic_profile(kind: FeatureKind) -> FeatureProfile:
    match kind:
        case FeatureKind.NUMERIC:
            return FeatureProfile(mean=50.0, std=10.0)
        case FeatureKind.ORDINAL:
            return FeatureProfile(levels=("0", "1", "2", "3", "4"))
        case FeatureKind.NOMINAL:
            return FeatureProfile(levels=("A", "B", "C"))


class SynthSpec(BaseModel):
    """Generator settings.

    Coefficients are log-odds of death per standardized feature, so a positive value pushes toward NotSurvived.
    `base_rate` is the survival probability when every coefficient is zero and `noise_scale` the standard deviation
    of Gaussian noise on the linear predictor.
    """

    model_config = ConfigDict(frozen=True)

    n_per_stage: dict[Stage, int] = Field(default_factory=lambda: {s: 1000 for s in Stage})
    coefficients: dict[Stage, dict[str, float]] = {}
    noise_scale: float = Field(default=0.0, ge=0)
    base_rate: float = Field(default=0.5, gt=0, lt=1)
    # extra rows per stage that the labeling rule excludes, as a share of n
    excluded_fraction: float = Field(default=0.0, ge=0, lt=1)
    profiles: dict[str, FeatureProfile] = {}
    seed: int

    def profile(self, name: str, kind: FeatureKind) -> FeatureProfile:
        if name in self.profiles:
            return self.profiles[name]
        return DEFAULT_PROFILES.get(name, _generic_profile(kind))


@dataclass(frozen=True, eq=False)
class SynthCohort:
    frame: pd.DataFrame
    labels: list[SurvivalLabel]
    stages: list[Stage]
    # generator probability of death, NaN for excluded rows
    death_probability: FloatArray

    def csv_bytes(self) -> bytes:
        buffer = io.StringIO()
        self.frame.to_csv(buffer, index=False, lineterminator="\n")
        return buffer.getvalue().encode("utf-8")

    def write(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.csv_bytes())


def _check_coefficients(spec: SynthSpec, schema: FeatureSchema) -> None:
    for stage, coefficients in spec.coefficients.items():
        for name in coefficients:
            if name not in schema.feature_names:
                raise ConfigError(f"Coefficient for {stage.value} references unknown feature {name!r}")
            if schema.kind_of(name) == FeatureKind.NOMINAL:
                raise ConfigError(f"Coefficient for {stage.value} references nominal feature {name!r}")


def _draw_column(profile: FeatureProfile, kind: FeatureKind, n: int, rng: np.random.Generator) -> list[str]:
    if kind == FeatureKind.NUMERIC and not profile.levels:
        values = np.clip(rng.normal(profile.mean, profile.std, size=n), profile.low, profile.high)
        values = np.round(values, profile.decimals)
        if profile.decimals == 0:
            return [str(int(v)) for v in values]
        return [f"{v:.{profile.decimals}f}" for v in values]
    if not profile.levels:
        raise ConfigError(f"Profile for a {kind.value} feature needs levels")
    return [profile.levels[i] for i in rng.choice(len(profile.levels), size=n, p=profile.probabilities)]


def _standardized(cells: list[str]) -> FloatArray:
    values = np.array([float(c) for c in cells], dtype=np.float64)
    std = float(values.std())
    return (values - values.mean()) / std if std > 0 else np.zeros(len(values))


def _stage_code(schema: FeatureSchema, stage: Stage) -> str:
    codes = sorted(code for code, s in schema.stage_map.items() if s == stage)
    if not codes:
        raise ConfigError(f"Stage map has no code for {stage.value}")
    return codes[0]


def _back_fill(label: SurvivalLabel, schema: FeatureSchema, rng: np.random.Generator) -> tuple[str, int, str]:
    """Vital status, months and cause of death that the labeling rule maps back to `label`"""
    match label:
        case SurvivalLabel.SURVIVED:
            return "Alive", int(rng.integers(FIVE_YEARS_MONTHS, MAX_FOLLOW_UP_MONTHS + 1)), ALIVE_CAUSE
        case SurvivalLabel.NOT_SURVIVED:
            return "Dead", int(rng.integers(0, FIVE_YEARS_MONTHS)), schema.cancer_type
        case SurvivalLabel.EXCLUDED:
            # censored alive before five years, or an early death from another cause
            if rng.random() < 0.5:
                return "Alive", int(rng.integers(0, FIVE_YEARS_MONTHS)), ALIVE_CAUSE
            return "Dead", int(rng.integers(0, FIVE_YEARS_MONTHS)), OTHER_CAUSE


def generate_synth(spec: SynthSpec, schema: FeatureSchema) -> SynthCohort:
    """Draw a schema-valid cohort whose survival follows the planted logistic model"""
    _check_coefficients(spec, schema)
    death_causes = {schema.cancer_type.casefold(), *(c.casefold() for c in schema.cause_of_death_matches)}
    if OTHER_CAUSE.casefold() in death_causes:
        raise ConfigError(f"Cause {OTHER_CAUSE!r} cannot count as death from {schema.cancer_type}")

    columns: dict[str, list[str]] = {name: [] for name in schema.required_columns}
    labels: list[SurvivalLabel] = []
    stages: list[Stage] = []
    probabilities: list[float] = []
    intercept = log_odds(1.0 - spec.base_rate)

    for stage_index, stage in enumerate(Stage):
        n = spec.n_per_stage.get(stage, 0)
        n_excluded = int(round(n * spec.excluded_fraction))
        total = n + n_excluded
        if total == 0:
            continue
        rng = derive_rng(spec.seed, stage_index)

        cells = {f.name: _draw_column(spec.profile(f.name, f.kind), f.kind, total, rng) for f in schema.features}

        eta = np.full(n, intercept)
        for name, beta in spec.coefficients.get(stage, {}).items():
            eta += beta * _standardized(cells[name][:n])
        if spec.noise_scale > 0:
            eta += rng.normal(0.0, spec.noise_scale, size=n)
        p_death = sigmoid(eta)
        died = rng.random(n) < p_death

        stage_labels = [SurvivalLabel.NOT_SURVIVED if d else SurvivalLabel.SURVIVED for d in died]
        stage_labels += [SurvivalLabel.EXCLUDED] * n_excluded
        code = _stage_code(schema, stage)

        for i, label in enumerate(stage_labels):
            vital, months, cause = _back_fill(label, schema, rng)
            record = RawRecord(
                values={name: cells[name][i] for name in schema.feature_names},
                vital_status=VitalStatus.ALIVE if vital == "Alive" else VitalStatus.DEAD,
                survival_months=months,
                cause_of_death=cause,
                stage_code=code,
            )
            if label_survival(record, schema.cancer_type, schema.cause_of_death_matches) != label:
                raise StageSurvException(f"Back-filled record does not reproduce label {label.value}")

            for name in schema.feature_names:
                columns[name].append(cells[name][i])
            columns[schema.label_columns.vital_status].append(vital)
            columns[schema.label_columns.survival_months].append(str(months))
            columns[schema.label_columns.cause_of_death].append(cause)
            columns[schema.stage_column].append(code)

        labels += stage_labels
        stages += [stage] * total
        probabilities += [*p_death.tolist(), *([math.nan] * n_excluded)]
        log.info(f"Generated {total} {stage.value} rows: {int(died.sum())} deaths, {n_excluded} excluded")

    return SynthCohort(
        frame=pd.DataFrame(columns, columns=schema.required_columns),
        labels=labels,
        stages=stages,
        death_probability=np.array(probabilities, dtype=np.float64),
    )
