import json
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import pytest

from stagesurv.cohort import CohortTable, FeatureKind, FeatureSchema, FeatureSpec, Stage
from stagesurv.config import RunConfig
from stagesurv.pipeline import RunResult, run_pipeline
from stagesurv.utils import sigmoid

CONFIG_DIR = Path(__file__).parent.parent / "config"

STAGE_CODES = {Stage.LOCALIZED: "Localized", Stage.REGIONAL: "Regional", Stage.DISTANT: "Distant"}

# one point per learner, small enough for desk-scale runs
TINY_GRIDS: dict[str, dict[str, list[Any]]] = {
    "lr": {"C": [1.0], "class_weight": ["balanced"]},
    "rf": {
        "n_estimators": [8],
        "max_depth": [3],
        "min_samples_split": [2],
        "min_samples_leaf": [2],
        "class_weight": ["balanced"],
    },
    "ada": {"n_estimators": [10], "learning_rate": [1.0], "algorithm": ["SAMME"]},
    "gbdt": {"iterations": [10], "depth": [2], "learning_rate": [0.1], "l2_leaf_reg": [3], "class_weights": [[1, 1]]},
}

TINY_EXPLAINER: dict[str, Any] = {
    "background_size": 10,
    "shap_samples": 64,
    "shap_instances": 6,
    "lime_samples": 200,
}


def make_schema(cancer_type: str = "colorectal") -> FeatureSchema:
    return FeatureSchema(
        features=(
            FeatureSpec(name="Age", kind=FeatureKind.NUMERIC),
            FeatureSpec(name="Tumor Size", kind=FeatureKind.NUMERIC),
            FeatureSpec(name="Grade", kind=FeatureKind.ORDINAL),
            FeatureSpec(name="Sex", kind=FeatureKind.NOMINAL),
        ),
        stage_map={code: stage for stage, code in STAGE_CODES.items()},
        cancer_type=cancer_type,
    )


@pytest.fixture
def small_schema() -> FeatureSchema:
    return make_schema()


def outcome_columns(survived: bool, cancer_type: str) -> dict[str, str]:
    if survived:
        return {"Vital status recode": "Alive", "Survival months": "72", "Cause of death": "Alive"}
    return {"Vital status recode": "Dead", "Survival months": "20", "Cause of death": cancer_type}


def cohort_rows(
    rng: np.random.Generator,
    n: int,
    stage: Stage,
    cancer_type: str = "colorectal",
    survived: list[bool] | None = None,
) -> list[dict[str, str]]:
    """Rows of the small schema; older patients with larger tumors die more often unless outcomes are given"""
    age = np.round(rng.normal(65.0, 12.0, size=n))
    size = np.round(rng.normal(40.0, 15.0, size=n).clip(1.0, None))
    grade = rng.integers(1, 5, size=n)
    sex = rng.choice(["Male", "Female"], size=n)
    if survived is None:
        p_death = sigmoid(1.5 * (age - 65.0) / 12.0 + 0.8 * (size - 40.0) / 15.0)
        survived = list(rng.random(n) >= p_death)

    return [
        {
            "Age": str(int(age[i])),
            "Tumor Size": str(int(size[i])),
            "Grade": str(int(grade[i])),
            "Sex": str(sex[i]),
            **outcome_columns(bool(survived[i]), cancer_type),
            "Summary Stage": STAGE_CODES[stage],
        }
        for i in range(n)
    ]


def write_csv(path: Path, schema: FeatureSchema, rows: list[dict[str, str]]) -> Path:
    pd.DataFrame(rows, columns=schema.required_columns).to_csv(path, index=False)
    return path


def write_run_config(directory: Path, **fields: Any) -> Path:
    path = directory / "run.json"
    path.write_text(json.dumps(fields, indent=2), encoding="utf-8")
    return path


def small_run_config(
    directory: Path,
    cancer_type: str = "colorectal",
    sizes: dict[Stage, int] | None = None,
    rows: list[dict[str, str]] | None = None,
    **overrides: Any,
) -> Path:
    """Schema, cohort CSV and run config of a tiny hand-built cohort, all written under `directory`.

    `rows` replaces the generated cohort.
    """
    directory.mkdir(parents=True, exist_ok=True)
    schema = make_schema(cancer_type)
    (directory / "schema.json").write_text(schema.model_dump_json(indent=2), encoding="utf-8")

    if rows is None:
        rng = np.random.default_rng(11)
        rows = []
        for stage, n in (sizes or {s: 80 for s in Stage}).items():
            rows += cohort_rows(rng, n, stage, cancer_type)
    write_csv(directory / "cohort.csv", schema, rows)

    fields: dict[str, Any] = {
        "schema_config": "schema.json",
        "input": "cohort.csv",
        "seed": 5,
        "output_dir": "out",
        "grids": TINY_GRIDS,
        "explainer": TINY_EXPLAINER,
        **overrides,
    }
    return write_run_config(directory, **fields)


def linear_table(n: int = 200, d: int = 3, seed: int = 0) -> CohortTable:
    """Gaussian features with survival driven by the first two columns"""
    rng = np.random.default_rng(seed)
    rows = rng.normal(size=(n, d))
    labels = (rng.random(n) < sigmoid(2.0 * rows[:, 0] - 1.0 * rows[:, 1])).astype(np.int64)
    return CohortTable.from_matrix(rows, labels)


@pytest.fixture(scope="session")
def synth_run(tmp_path_factory: pytest.TempPathFactory) -> RunResult:
    """One full pipeline run over a synthetic colorectal cohort with the bundled 17-feature schema"""
    directory = tmp_path_factory.mktemp("synth_run")
    path = write_run_config(
        directory,
        schema_config=str(CONFIG_DIR / "colorectal.json"),
        seed=3,
        output_dir="out",
        synth={
            "n_per_stage": {"localized": 150, "regional": 150, "distant": 150},
            "base_rate": 0.5,
            "excluded_fraction": 0.1,
            "coefficients": {stage: {"Age": 1.5, "Tumor Size": 1.0} for stage in ("localized", "regional", "distant")},
        },
        grids=TINY_GRIDS,
        explainer={**TINY_EXPLAINER, "render_svg": True},
    )
    return run_pipeline(RunConfig.load(path))
