import logging
from enum import Enum
from pathlib import Path
from typing import Any, Literal, Self

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from stagesurv.cohort import FeatureSchema, Stage
from stagesurv.const import (
    DEFAULT_BACKGROUND_SIZE,
    DEFAULT_GRIDS,
    DEFAULT_K_FOLDS,
    DEFAULT_KERNEL_WIDTH_FACTOR,
    DEFAULT_LIME_AGGREGATE_CASES,
    DEFAULT_LIME_SAMPLES,
    DEFAULT_RIDGE_PENALTY,
    DEFAULT_SHAP_INSTANCES,
    DEFAULT_SHAP_SAMPLES,
    DEFAULT_THRESHOLD,
    DEFAULT_TOP_K,
)
from stagesurv.exceptions import ConfigError
from stagesurv.learners import HyperGrid, LearnerKind
from stagesurv.synth import SynthSpec

log = logging.getLogger(__name__)


class LimeMode(Enum):
    # the lowest-survival patient only
    SINGLE = "single"
    # top features counted over the lowest-survival patients
    AGGREGATE = "aggregate"


class ExplainerSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    background_size: int = Field(default=DEFAULT_BACKGROUND_SIZE, ge=1)
    shap_samples: int = Field(default=DEFAULT_SHAP_SAMPLES, ge=4)
    shap_instances: int = Field(default=DEFAULT_SHAP_INSTANCES, ge=1)
    lime_samples: int = Field(default=DEFAULT_LIME_SAMPLES, ge=10)
    top_k: int = Field(default=DEFAULT_TOP_K, ge=1)
    kernel_width_factor: float = Field(default=DEFAULT_KERNEL_WIDTH_FACTOR, gt=0)
    ridge_penalty: float = Field(default=DEFAULT_RIDGE_PENALTY, gt=0)
    lime_mode: LimeMode = LimeMode.SINGLE
    lime_cases: int = Field(default=DEFAULT_LIME_AGGREGATE_CASES, ge=1)
    render_svg: bool = False


def _default_grids() -> dict[LearnerKind, dict[str, list[Any]]]:
    return {LearnerKind(tag): {k: list(v) for k, v in axes.items()} for tag, axes in DEFAULT_GRIDS.items()}


class RunConfig(BaseModel):
    """One pipeline run over one cancer type. Relative paths resolve against the config file's directory."""

    model_config = ConfigDict(frozen=True)

    input: Path | None = None
    synth: SynthSpec | None = None
    schema_config: Path
    k_folds: int = Field(default=DEFAULT_K_FOLDS, ge=2)
    threshold: float = Field(default=DEFAULT_THRESHOLD, gt=0, lt=1)
    grids: dict[LearnerKind, dict[str, list[Any]]] = Field(default_factory=_default_grids)
    learners: tuple[LearnerKind, ...] = tuple(LearnerKind)
    stages: tuple[Stage, ...] = tuple(Stage)
    explainer: ExplainerSettings = ExplainerSettings()
    explain_learner: LearnerKind | Literal["best"] = "best"
    # fit and explain a model on all stages together
    explain_combined: bool = True
    output_dir: Path = Path("runs/latest")
    seed: int
    n_jobs: int = 1

    @model_validator(mode="before")
    @classmethod
    def _synth_seed(cls, data: Any) -> Any:
        """A synth block without its own seed takes the run seed"""
        if isinstance(data, dict) and isinstance(data.get("synth"), dict) and "seed" in data:
            synth = dict(data["synth"])  # type: ignore
            synth.setdefault("seed", data["seed"])
            return {**data, "synth": synth}
        return data

    @model_validator(mode="after")
    def _check(self) -> Self:
        if (self.input is None) == (self.synth is None):
            raise ValueError("exactly one of input and synth must be given")
        self.hyper_grids()
        if isinstance(self.explain_learner, LearnerKind) and self.explain_learner not in self.learners:
            raise ValueError(f"explain_learner {self.explain_learner.value} is not among the selected learners")
        return self

    @staticmethod
    def load(path: Path) -> "RunConfig":
        try:
            config = RunConfig.model_validate_json(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigError(f"Run config not found: {path}") from e
        except ValidationError as e:
            raise ConfigError(f"Invalid run config {path}: {e}") from e
        return config.resolve(path.parent)

    def resolve(self, base: Path) -> "RunConfig":
        def under(p: Path) -> Path:
            return p if p.is_absolute() else base / p

        return self.model_copy(
            update={
                "input": under(self.input) if self.input is not None else None,
                "schema_config": under(self.schema_config),
                "output_dir": under(self.output_dir),
            }
        )

    def with_overrides(
        self,
        seed: int | None = None,
        output_dir: Path | None = None,
        stages: tuple[Stage, ...] | None = None,
        learners: tuple[LearnerKind, ...] | None = None,
        n_jobs: int | None = None,
    ) -> "RunConfig":
        """Apply command-line overrides, validating the result like a loaded config"""
        update: dict[str, Any] = {}
        if seed is not None:
            update["seed"] = seed
            if self.synth is not None:
                update["synth"] = self.synth.model_copy(update={"seed": seed})
        if output_dir is not None:
            update["output_dir"] = output_dir
        if stages is not None:
            update["stages"] = stages
        if learners is not None:
            update["learners"] = learners
            if isinstance(self.explain_learner, LearnerKind) and self.explain_learner not in learners:
                update["explain_learner"] = "best"
        if n_jobs is not None:
            update["n_jobs"] = n_jobs
        if not update:
            return self

        try:
            return RunConfig.model_validate({**self.model_dump(), **update})
        except ValidationError as e:
            raise ConfigError(f"Invalid command-line override: {e}") from e

    def hyper_grids(self) -> list[HyperGrid]:
        """Grids of the selected learners; a learner missing from `grids` uses its default grid"""
        return [
            HyperGrid(learner=learner, axes=self.grids[learner])
            if learner in self.grids
            else HyperGrid.default_for(learner)
            for learner in self.learners
        ]

    def load_schema(self) -> FeatureSchema:
        return FeatureSchema.load(self.schema_config)
