"""Constants for the stage-specific survivability workflow."""

from typing import Any

FIVE_YEARS_MONTHS = 60

DEFAULT_K_FOLDS = 5
DEFAULT_THRESHOLD = 0.5

# logistic solver
LOGISTIC_MAX_ITER = 1000
LOGISTIC_GRADIENT_TOL = 1e-6

PROBABILITY_CLAMP = 1e-12

# relative to max(1, |mean|)
ZERO_VARIANCE_TOL = 1e-12
BASE_RATE_CLAMP = 1e-6

# explainers
DEFAULT_BACKGROUND_SIZE = 100
DEFAULT_SHAP_SAMPLES = 512
DEFAULT_SHAP_INSTANCES = 50
DEFAULT_LIME_SAMPLES = 5000
DEFAULT_TOP_K = 5
DEFAULT_KERNEL_WIDTH_FACTOR = 0.75
DEFAULT_RIDGE_PENALTY = 1.0
DEFAULT_LIME_AGGREGATE_CASES = 10
EXACT_SHAPLEY_MAX_PLAYERS = 12
KERNEL_RIDGE_FALLBACK = 1e-8
LIME_MIN_KERNEL_WEIGHT = 1e-12

MODEL_FORMAT_VERSION = 1
MANIFEST_FORMAT_VERSION = 1

# default search grids, keyed by learner tag
DEFAULT_GRIDS: dict[str, dict[str, list[Any]]] = {
    "lr": {
        "C": [0.001, 0.01, 0.1, 1, 10],
        "class_weight": [None, "balanced"],
    },
    "rf": {
        "n_estimators": [100, 200],
        "max_depth": [3, 5, 7],
        "min_samples_split": [2, 5],
        "min_samples_leaf": [1, 2, 4],
        "class_weight": ["balanced", "balanced_subsample"],
    },
    "ada": {
        "n_estimators": [50, 100, 200],
        "learning_rate": [0.01, 0.1, 1.0],
        "algorithm": ["SAMME", "SAMME.R"],
    },
    "gbdt": {
        "iterations": [100, 200],
        "depth": [3, 5, 7],
        "learning_rate": [0.03, 0.1],
        "l2_leaf_reg": [1, 3, 5],
        "class_weights": [[1, 1], [1, 3], [1, 5]],
    },
}

# per-stage artifact names
ARTIFACT_GRID_SEARCH = "grid_search.csv"
ARTIFACT_BEST_MODEL = "best_model.json"
ARTIFACT_METRICS = "metrics.csv"
ARTIFACT_ROC_PREFIX = "roc_"
ARTIFACT_SHAP_RANKING = "shap_ranking.tsv"
ARTIFACT_SHAP_BEESWARM = "shap_beeswarm.tsv"
ARTIFACT_SHAP_SVG = "shap_beeswarm.svg"
ARTIFACT_LIME_CASE = "lime_case.json"
ARTIFACT_GROUP_COMPARISON = "group_comparison.csv"
ARTIFACT_CORRELATION = "correlation.tsv"

# run-level artifact names
ARTIFACT_MANIFEST = "manifest.json"
ARTIFACT_CLEANING = "cleaning.txt"
ARTIFACT_STAGES = "stages.txt"
ARTIFACT_METRICS_TABLE_CSV = "metrics_table.csv"
ARTIFACT_METRICS_TABLE_TEXT = "metrics_table.txt"
ARTIFACT_GROUP_TABLE_CSV = "group_comparison_table.csv"
ARTIFACT_GROUP_TABLE_TEXT = "group_comparison_table.txt"
ARTIFACT_PRESENCE_SHAP = "presence_shap.tsv"
ARTIFACT_PRESENCE_LIME = "presence_lime.tsv"

COMBINED_STAGE_DIR = "all"
