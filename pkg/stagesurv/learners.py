import itertools
import json
import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass as std_dataclass
from enum import Enum
from typing import Any, Self

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic.dataclasses import dataclass
from scipy.special import expit

from stagesurv.cohort import CohortTable
from stagesurv.const import (
    BASE_RATE_CLAMP,
    DEFAULT_GRIDS,
    LOGISTIC_GRADIENT_TOL,
    LOGISTIC_MAX_ITER,
    MODEL_FORMAT_VERSION,
)
from stagesurv.exceptions import ConfigError, DataValidationError, DimensionError, FitError
from stagesurv.trees import DecisionTree, FeatureBins, ObliviousTree, TreeParams, grow_oblivious_tree, grow_tree
from stagesurv.utils import FloatArray, IntArray, clamp_probability, derive_rng, log_odds, sigmoid

log = logging.getLogger(__name__)


class LearnerKind(Enum):
    LOGISTIC_REGRESSION = "lr"
    RANDOM_FOREST = "rf"
    ADABOOST = "ada"
    SYM_GBDT = "gbdt"

    @property
    def display_name(self) -> str:
        match self:
            case LearnerKind.LOGISTIC_REGRESSION:
                return "Logistic Regression"
            case LearnerKind.RANDOM_FOREST:
                return "Random Forest"
            case LearnerKind.ADABOOST:
                return "AdaBoost"
            case LearnerKind.SYM_GBDT:
                return "SymGBDT"


LEARNER_AXES: dict[LearnerKind, tuple[str, ...]] = {
    LearnerKind.LOGISTIC_REGRESSION: ("C", "class_weight"),
    LearnerKind.RANDOM_FOREST: ("n_estimators", "max_depth", "min_samples_split", "min_samples_leaf", "class_weight"),
    LearnerKind.ADABOOST: ("n_estimators", "learning_rate", "algorithm"),
    LearnerKind.SYM_GBDT: ("iterations", "depth", "learning_rate", "l2_leaf_reg", "class_weights"),
}


class ClassWeightMode(Enum):
    UNIFORM = "uniform"
    BALANCED = "balanced"
    BALANCED_SUBSAMPLE = "balanced_subsample"
    MANUAL = "manual"


@dataclass(frozen=True)
class ClassWeights:
    w0: float = Field(gt=0)
    w1: float = Field(gt=0)
    mode: ClassWeightMode = ClassWeightMode.UNIFORM

    def sample_weights(self, labels: IntArray) -> FloatArray:
        return np.where(labels == 1, self.w1, self.w0).astype(np.float64)


def compute_class_weights(
    labels: Sequence[int] | IntArray, mode: ClassWeightMode, manual: tuple[float, float] | None = None
) -> ClassWeights:
    """Per-class weights; balanced gives w_c = n / (2 * n_c)"""
    y = np.asarray(labels, dtype=np.int64)
    match mode:
        case ClassWeightMode.UNIFORM:
            return ClassWeights(w0=1.0, w1=1.0, mode=mode)
        case ClassWeightMode.MANUAL:
            if manual is None:
                raise ConfigError("Manual class weights need a (w0, w1) pair")
            return ClassWeights(w0=float(manual[0]), w1=float(manual[1]), mode=mode)
        case ClassWeightMode.BALANCED | ClassWeightMode.BALANCED_SUBSAMPLE:
            n = len(y)
            n1 = int(y.sum())
            n0 = n - n1
            if n0 == 0 or n1 == 0:
                raise FitError("Balanced class weights need both classes present")
            return ClassWeights(w0=n / (2.0 * n0), w1=n / (2.0 * n1), mode=mode)


def class_weight_from_param(value: Any) -> tuple[ClassWeightMode, tuple[float, float] | None]:
    """Grid value → weight mode: None, "balanced", "balanced_subsample" or a [w0, w1] pair"""
    match value:
        case None | "uniform":
            return ClassWeightMode.UNIFORM, None
        case "balanced":
            return ClassWeightMode.BALANCED, None
        case "balanced_subsample":
            return ClassWeightMode.BALANCED_SUBSAMPLE, None
        case [w0, w1]:
            return ClassWeightMode.MANUAL, (float(w0), float(w1))
        case _:
            raise ConfigError(f"Unsupported class weight value: {value!r}")


class ModelConfig(BaseModel):
    """One learner with one chosen point of its grid"""

    model_config = ConfigDict(frozen=True)

    learner: LearnerKind
    parameters: dict[str, Any] = {}
    seed: int

    @model_validator(mode="after")
    def _check_parameters(self) -> Self:
        unknown = sorted(set(self.parameters) - set(LEARNER_AXES[self.learner]))
        if unknown:
            raise ValueError(f"unknown parameters for {self.learner.value}: {', '.join(unknown)}")
        return self

    def get(self, name: str, default: Any) -> Any:
        return self.parameters.get(name, default)

    def describe(self) -> str:
        return ", ".join(f"{k}={json.dumps(v)}" for k, v in self.parameters.items())


class HyperGrid(BaseModel):
    """Parameter axes of one learner, expanded as a Cartesian product in declared order"""

    model_config = ConfigDict(frozen=True)

    learner: LearnerKind
    axes: dict[str, list[Any]]

    @model_validator(mode="after")
    def _check_axes(self) -> Self:
        unknown = sorted(set(self.axes) - set(LEARNER_AXES[self.learner]))
        if unknown:
            raise ValueError(f"unknown grid axes for {self.learner.value}: {', '.join(unknown)}")
        empty = sorted(name for name, values in self.axes.items() if not values)
        if empty:
            raise ValueError(f"empty grid axes: {', '.join(empty)}")
        return self

    @staticmethod
    def default_for(learner: LearnerKind) -> "HyperGrid":
        return HyperGrid(learner=learner, axes={k: list(v) for k, v in DEFAULT_GRIDS[learner.value].items()})

    def configs(self, seed: int) -> list[ModelConfig]:
        names = list(self.axes)
        return [
            ModelConfig(learner=self.learner, parameters=dict(zip(names, point)), seed=seed)
            for point in itertools.product(*(self.axes[n] for n in names))
        ]


@std_dataclass(frozen=True, eq=False)
class TrainedModel(ABC):
    config: ModelConfig
    feature_count: int

    @abstractmethod
    def _proba(self, rows: FloatArray) -> FloatArray: ...

    @abstractmethod
    def state(self) -> dict[str, Any]: ...

    def predict_proba(self, rows: FloatArray) -> FloatArray:
        """Survival probability for every row of an encoded matrix"""
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != self.feature_count:
            raise DimensionError(self.feature_count, rows.shape[-1] if rows.ndim else 0)
        return np.clip(self._proba(rows), 0.0, 1.0)

    def __call__(self, rows: FloatArray) -> FloatArray:
        return self.predict_proba(rows)


def predict_proba(model: TrainedModel, row: Sequence[float] | FloatArray) -> float:
    x = np.asarray(row, dtype=np.float64)
    if x.ndim != 1 or len(x) != model.feature_count:
        raise DimensionError(model.feature_count, int(x.size))
    return float(model.predict_proba(x.reshape(1, -1))[0])


@std_dataclass(frozen=True, eq=False)
class LogisticModel(TrainedModel):
    coef: FloatArray
    intercept: float
    converged: bool = True

    def decision_function(self, rows: FloatArray) -> FloatArray:
        return rows @ self.coef + self.intercept

    def _proba(self, rows: FloatArray) -> FloatArray:
        return sigmoid(self.decision_function(rows))

    def state(self) -> dict[str, Any]:
        return {"coef": self.coef.tolist(), "intercept": self.intercept, "converged": self.converged}


@std_dataclass(frozen=True, eq=False)
class ForestModel(TrainedModel):
    trees: tuple[DecisionTree, ...]

    def _proba(self, rows: FloatArray) -> FloatArray:
        total = np.zeros(rows.shape[0])
        for tree in self.trees:
            total += tree.predict_value(rows)[:, 1]
        return total / len(self.trees)

    def state(self) -> dict[str, Any]:
        return {"trees": [t.state() for t in self.trees]}


class BoostAlgorithm(Enum):
    SAMME = "SAMME"
    SAMME_R = "SAMME.R"


@std_dataclass(frozen=True, eq=False)
class AdaBoostModel(TrainedModel):
    """Boosted stumps. Margins are in half-log-odds units, probability = logistic(2 * margin)."""

    algorithm: BoostAlgorithm
    stumps: tuple[DecisionTree, ...]
    stage_weights: FloatArray

    def margin(self, rows: FloatArray) -> FloatArray:
        total = np.zeros(rows.shape[0])
        for stump, weight in zip(self.stumps, self.stage_weights):
            total += weight * _stage_output(stump, rows, self.algorithm)
        return total

    def _proba(self, rows: FloatArray) -> FloatArray:
        return sigmoid(2.0 * self.margin(rows))

    def state(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm.value,
            "stumps": [s.state() for s in self.stumps],
            "stage_weights": self.stage_weights.tolist(),
        }


@std_dataclass(frozen=True, eq=False)
class SymGBDTModel(TrainedModel):
    base_score: float
    learning_rate: float
    trees: tuple[ObliviousTree, ...]

    def raw_score(self, rows: FloatArray) -> FloatArray:
        score = np.full(rows.shape[0], self.base_score)
        for tree in self.trees:
            score += self.learning_rate * tree.predict(rows)
        return score

    def _proba(self, rows: FloatArray) -> FloatArray:
        return sigmoid(self.raw_score(rows))

    def state(self) -> dict[str, Any]:
        return {
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "trees": [t.state() for t in self.trees],
        }


def _check_training_input(table: CohortTable, both_classes: bool) -> None:
    if table.n_rows == 0:
        raise FitError("Cannot fit on an empty table")
    if not np.all(np.isfinite(table.rows)):
        raise FitError("Feature matrix contains non-finite values")
    if both_classes and len(np.unique(table.labels)) < 2:
        raise FitError("Training labels need at least one sample of each class")


def _external_weights(n: int, sample_weight: FloatArray | None) -> FloatArray:
    """Extra per-sample weights normalized to mean 1, so a global rescaling has no effect"""
    if sample_weight is None:
        return np.ones(n)
    w = np.asarray(sample_weight, dtype=np.float64)
    if w.shape != (n,) or not np.all(w > 0):
        raise DataValidationError("Sample weights must be positive, one per row")
    return w / w.mean()


# logistic regression


def logistic_objective(theta: FloatArray, rows: FloatArray, labels: IntArray, weights: FloatArray, c: float) -> float:
    """0.5 * |beta|^2 + C * sum w_i log(1 + exp(-y_i z_i)) with y in {-1, +1}; theta = (beta, intercept)"""
    z = rows @ theta[:-1] + theta[-1]
    signed = 2.0 * labels - 1.0
    return float(0.5 * theta[:-1] @ theta[:-1] + c * np.sum(weights * np.logaddexp(0.0, -signed * z)))


def logistic_gradient(
    theta: FloatArray, rows: FloatArray, labels: IntArray, weights: FloatArray, c: float
) -> FloatArray:
    z = rows @ theta[:-1] + theta[-1]
    residual = c * weights * (expit(z) - labels)
    grad = np.empty_like(theta)
    grad[:-1] = theta[:-1] + rows.T @ residual
    grad[-1] = residual.sum()
    return grad


def _logistic_hessian(theta: FloatArray, rows: FloatArray, weights: FloatArray, c: float) -> FloatArray:
    z = rows @ theta[:-1] + theta[-1]
    p = expit(z)
    curvature = c * weights * p * (1.0 - p)
    augmented = np.hstack([rows, np.ones((rows.shape[0], 1))])
    hessian = augmented.T @ (augmented * curvature[:, None])
    hessian[np.arange(rows.shape[1]), np.arange(rows.shape[1])] += 1.0
    return hessian


def fit_logistic(
    table: CohortTable,
    weights: ClassWeights,
    c: float,
    seed: int = 0,
    sample_weight: FloatArray | None = None,
    config: ModelConfig | None = None,
) -> LogisticModel:
    """Damped Newton iterations on the weighted L2-penalized logistic objective, intercept unpenalized"""
    _check_training_input(table, both_classes=True)
    if c <= 0:
        raise ConfigError(f"C must be positive, got {c}")

    rows, labels = table.rows, table.labels
    w = weights.sample_weights(labels) * _external_weights(table.n_rows, sample_weight)
    theta = np.zeros(table.feature_count + 1)
    objective = logistic_objective(theta, rows, labels, w, c)

    converged = False
    iteration = 0
    for iteration in range(1, LOGISTIC_MAX_ITER + 1):
        grad = logistic_gradient(theta, rows, labels, w, c)
        if np.max(np.abs(grad)) < LOGISTIC_GRADIENT_TOL:
            converged = True
            break

        hessian = _logistic_hessian(theta, rows, w, c)
        try:
            step = np.linalg.solve(hessian, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hessian, grad, rcond=None)[0]

        # backtracking line search
        scale = 1.0
        while scale > 1e-10:
            candidate = theta - scale * step
            candidate_objective = logistic_objective(candidate, rows, labels, w, c)
            if candidate_objective <= objective - 1e-4 * scale * float(grad @ step):
                break
            scale /= 2.0
        else:
            # no further decrease available at machine precision
            converged = np.max(np.abs(grad)) < LOGISTIC_GRADIENT_TOL * 1e3
            break

        theta, objective = candidate, candidate_objective

    if not converged:
        log.warning(f"Logistic solver stopped after {iteration} iterations without reaching the gradient tolerance")
    log.debug(f"Logistic fit C={c} finished in {iteration} iterations, objective {objective:.6g}")

    if config is None:
        config = ModelConfig(
            learner=LearnerKind.LOGISTIC_REGRESSION,
            parameters={"C": c, "class_weight": _class_weight_param(weights)},
            seed=seed,
        )
    return LogisticModel(
        config=config,
        feature_count=table.feature_count,
        coef=theta[:-1].copy(),
        intercept=float(theta[-1]),
        converged=converged,
    )


def _class_weight_param(weights: ClassWeights) -> Any:
    match weights.mode:
        case ClassWeightMode.UNIFORM:
            return None
        case ClassWeightMode.MANUAL:
            return [weights.w0, weights.w1]
        case _:
            return weights.mode.value


# random forest


def _class_weights_or_uniform(
    labels: IntArray, mode: ClassWeightMode, manual: tuple[float, float] | None
) -> ClassWeights:
    if mode in (ClassWeightMode.BALANCED, ClassWeightMode.BALANCED_SUBSAMPLE) and len(np.unique(labels)) < 2:
        return ClassWeights(w0=1.0, w1=1.0)
    return compute_class_weights(labels, mode, manual)


def _grow_forest_tree(
    table: CohortTable,
    weights: FloatArray,
    mode: ClassWeightMode,
    params: TreeParams,
    seed: int,
    index: int,
) -> DecisionTree:
    rng = derive_rng(seed, index)
    sample = rng.integers(0, table.n_rows, size=table.n_rows)
    labels = table.labels[sample]
    sample_weights = weights[sample]
    if mode == ClassWeightMode.BALANCED_SUBSAMPLE:
        sample_weights = sample_weights * _class_weights_or_uniform(labels, mode, None).sample_weights(labels)
    return grow_tree(table.rows[sample], labels, sample_weights, params, rng)


def fit_random_forest(
    table: CohortTable, config: ModelConfig, sample_weight: FloatArray | None = None, n_jobs: int = 1
) -> ForestModel:
    """Bagged Gini trees over sqrt(d) candidate features per node; probability is the mean leaf class frequency"""
    _check_training_input(table, both_classes=False)

    n_estimators = int(config.get("n_estimators", 100))
    max_depth = config.get("max_depth", None)
    params = TreeParams(
        max_depth=int(max_depth) if max_depth is not None else None,
        min_samples_split=int(config.get("min_samples_split", 2)),
        min_samples_leaf=int(config.get("min_samples_leaf", 1)),
        max_features=max(1, int(math.sqrt(table.feature_count))),
    )
    mode, manual = class_weight_from_param(config.get("class_weight", None))

    weights = _external_weights(table.n_rows, sample_weight)
    if mode != ClassWeightMode.BALANCED_SUBSAMPLE:
        weights = weights * _class_weights_or_uniform(table.labels, mode, manual).sample_weights(table.labels)

    trees = Parallel(n_jobs=n_jobs)(
        delayed(_grow_forest_tree)(table, weights, mode, params, config.seed, i) for i in range(n_estimators)
    )
    log.debug(f"Random forest fitted {n_estimators} trees ({config.describe()})")

    return ForestModel(config=config, feature_count=table.feature_count, trees=tuple(trees))


# adaboost


def _stage_output(stump: DecisionTree, rows: FloatArray, algorithm: BoostAlgorithm) -> FloatArray:
    proba = stump.predict_value(rows)
    match algorithm:
        case BoostAlgorithm.SAMME:
            return np.where(proba[:, 1] > proba[:, 0], 1.0, -1.0)
        case BoostAlgorithm.SAMME_R:
            p = clamp_probability(proba)
            return 0.5 * (np.log(p[:, 1]) - np.log(p[:, 0]))


def samme_stage_weight(error: float, learning_rate: float = 1.0, n_classes: int = 2) -> float:
    return learning_rate * (math.log((1.0 - error) / error) + math.log(n_classes - 1))


def fit_adaboost(table: CohortTable, config: ModelConfig, sample_weight: FloatArray | None = None) -> AdaBoostModel:
    """AdaBoost over depth-1 stumps with SAMME (discrete) or SAMME.R (real) stage outputs"""
    _check_training_input(table, both_classes=True)

    n_estimators = int(config.get("n_estimators", 50))
    learning_rate = float(config.get("learning_rate", 1.0))
    algorithm = BoostAlgorithm(config.get("algorithm", "SAMME"))
    stump_params = TreeParams(max_depth=1)

    rows, labels = table.rows, table.labels
    signed = 2.0 * labels - 1.0
    weights = _external_weights(table.n_rows, sample_weight)
    weights = weights / weights.sum()

    stumps: list[DecisionTree] = []
    stage_weights: list[float] = []
    for round_ in range(n_estimators):
        stump = grow_tree(rows, labels, weights, stump_params)
        proba = stump.predict_value(rows)
        miss = (proba[:, 1] > proba[:, 0]).astype(np.int64) != labels
        error = float(weights[miss].sum() / weights.sum())

        if error >= 0.5:
            log.debug(f"AdaBoost stopped at round {round_}: weighted error {error:.4f} is no better than chance")
            break

        stumps.append(stump)
        if error == 0.0:
            stage_weights.append(1.0 if algorithm == BoostAlgorithm.SAMME else learning_rate)
            log.debug(f"AdaBoost stopped at round {round_}: stump separates the training set")
            break

        match algorithm:
            case BoostAlgorithm.SAMME:
                alpha = samme_stage_weight(error, learning_rate)
                stage_weights.append(alpha)
                weights = weights * np.exp(alpha * miss)
            case BoostAlgorithm.SAMME_R:
                stage_weights.append(learning_rate)
                weights = weights * np.exp(-learning_rate * signed * _stage_output(stump, rows, algorithm))
        weights = weights / weights.sum()

    return AdaBoostModel(
        config=config,
        feature_count=table.feature_count,
        algorithm=algorithm,
        stumps=tuple(stumps),
        stage_weights=np.array(stage_weights, dtype=np.float64),
    )


# symmetric-tree gradient boosting


def weighted_logloss(scores: FloatArray, labels: IntArray, weights: FloatArray) -> float:
    """sum w_i * (log(1 + exp(F_i)) - y_i * F_i) over raw scores F"""
    return float(np.sum(weights * (np.logaddexp(0.0, scores) - labels * scores)))


def logloss_gradients(scores: FloatArray, labels: IntArray, weights: FloatArray) -> tuple[FloatArray, FloatArray]:
    p = clamp_probability(sigmoid(scores))
    return weights * (p - labels), weights * p * (1.0 - p)


def fit_symgbdt(table: CohortTable, config: ModelConfig, sample_weight: FloatArray | None = None) -> SymGBDTModel:
    """Gradient boosting of oblivious trees with Newton leaf values and L2 leaf regularization"""
    _check_training_input(table, both_classes=False)

    iterations = int(config.get("iterations", 100))
    depth = int(config.get("depth", 6))
    learning_rate = float(config.get("learning_rate", 0.03))
    l2 = float(config.get("l2_leaf_reg", 3.0))
    mode, manual = class_weight_from_param(config.get("class_weights", None))

    rows, labels = table.rows, table.labels
    w = _external_weights(table.n_rows, sample_weight)
    w = w * _class_weights_or_uniform(labels, mode, manual).sample_weights(labels)

    positive_rate = float(np.sum(w * labels) / np.sum(w))
    positive_rate = min(max(positive_rate, BASE_RATE_CLAMP), 1.0 - BASE_RATE_CLAMP)
    base_score = log_odds(positive_rate)

    trees: list[ObliviousTree] = []
    if len(np.unique(labels)) < 2:
        log.warning("Single-class training labels, fitting a constant model")
    elif learning_rate > 0.0:
        bins = FeatureBins.of(rows)
        scores = np.full(table.n_rows, base_score)
        for _ in range(iterations):
            grad, hess = logloss_gradients(scores, labels, w)
            tree = grow_oblivious_tree(rows, bins, grad, hess, depth, l2)
            trees.append(tree)
            scores += learning_rate * tree.predict(rows)
        log.debug(f"SymGBDT fitted {iterations} trees, final logloss {weighted_logloss(scores, labels, w):.6g}")

    return SymGBDTModel(
        config=config,
        feature_count=table.feature_count,
        base_score=base_score,
        learning_rate=learning_rate,
        trees=tuple(trees),
    )


def fit_model(table: CohortTable, config: ModelConfig, sample_weight: FloatArray | None = None) -> TrainedModel:
    match config.learner:
        case LearnerKind.LOGISTIC_REGRESSION:
            mode, manual = class_weight_from_param(config.get("class_weight", None))
            weights = compute_class_weights(table.labels, mode, manual)
            return fit_logistic(table, weights, float(config.get("C", 1.0)), config.seed, sample_weight, config)
        case LearnerKind.RANDOM_FOREST:
            return fit_random_forest(table, config, sample_weight)
        case LearnerKind.ADABOOST:
            return fit_adaboost(table, config, sample_weight)
        case LearnerKind.SYM_GBDT:
            return fit_symgbdt(table, config, sample_weight)


# serialization


class ModelDocument(BaseModel):
    format_version: int
    learner: LearnerKind
    parameters: dict[str, Any]
    seed: int
    feature_count: int
    state: dict[str, Any]


def dump_model(model: TrainedModel) -> str:
    document = ModelDocument(
        format_version=MODEL_FORMAT_VERSION,
        learner=model.config.learner,
        parameters=model.config.parameters,
        seed=model.config.seed,
        feature_count=model.feature_count,
        state=model.state(),
    )
    # float repr round-trips exactly through the json module
    return json.dumps(document.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def load_model(text: str) -> TrainedModel:
    document = ModelDocument.model_validate(json.loads(text))
    if document.format_version != MODEL_FORMAT_VERSION:
        raise DataValidationError(f"Unsupported model format version {document.format_version}")

    config = ModelConfig(learner=document.learner, parameters=document.parameters, seed=document.seed)
    state = document.state
    match document.learner:
        case LearnerKind.LOGISTIC_REGRESSION:
            return LogisticModel(
                config=config,
                feature_count=document.feature_count,
                coef=np.array(state["coef"], dtype=np.float64),
                intercept=float(state["intercept"]),
                converged=bool(state["converged"]),
            )
        case LearnerKind.RANDOM_FOREST:
            return ForestModel(
                config=config,
                feature_count=document.feature_count,
                trees=tuple(DecisionTree.from_state(t) for t in state["trees"]),
            )
        case LearnerKind.ADABOOST:
            return AdaBoostModel(
                config=config,
                feature_count=document.feature_count,
                algorithm=BoostAlgorithm(state["algorithm"]),
                stumps=tuple(DecisionTree.from_state(s) for s in state["stumps"]),
                stage_weights=np.array(state["stage_weights"], dtype=np.float64),
            )
        case LearnerKind.SYM_GBDT:
            return SymGBDTModel(
                config=config,
                feature_count=document.feature_count,
                base_score=float(state["base_score"]),
                learning_rate=float(state["learning_rate"]),
                trees=tuple(ObliviousTree.from_state(t) for t in state["trees"]),
            )
