"""Model explanations over encoded cohort rows.

Shapley players are groups of encoded columns, by default one group per source feature so that the indicator columns
of a nominal feature are switched on and off together. Coalition values are interventional: columns outside the
coalition take the values of each background row and the model output is averaged over the background.
"""

import logging
import math
from collections import Counter
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from stagesurv.cohort import CohortTable, FeatureKind
from stagesurv.const import (
    DEFAULT_BACKGROUND_SIZE,
    DEFAULT_KERNEL_WIDTH_FACTOR,
    DEFAULT_LIME_SAMPLES,
    DEFAULT_RIDGE_PENALTY,
    DEFAULT_SHAP_SAMPLES,
    DEFAULT_TOP_K,
    EXACT_SHAPLEY_MAX_PLAYERS,
    KERNEL_RIDGE_FALLBACK,
    LIME_MIN_KERNEL_WEIGHT,
)
from stagesurv.exceptions import DataValidationError, ExplanationError
from stagesurv.utils import BoolArray, FloatArray, IntArray, derive_rng

log = logging.getLogger(__name__)

# maps a batch of encoded rows to one output per row
ModelFn = Callable[[FloatArray], FloatArray]

# rows per model call while evaluating coalitions
_BATCH_ROWS = 1 << 16

# random stream keys
_BACKGROUND_STREAM = 1
_SHAP_INSTANCE_STREAM = 2
_KERNEL_STREAM = 3
_LIME_STREAM = 4


@dataclass(frozen=True, eq=False)
class Attribution:
    names: tuple[str, ...]
    contributions: FloatArray
    baseline: float
    prediction: float
    # set when the kernel regression needed the ridge fallback
    regularized: bool = False

    @property
    def efficiency_gap(self) -> float:
        return float(self.contributions.sum() - (self.prediction - self.baseline))

    def of(self, name: str) -> float:
        return float(self.contributions[self.names.index(name)])


@dataclass(frozen=True, eq=False)
class BackgroundSet:
    rows: FloatArray
    indices: IntArray
    seed: int

    @property
    def size(self) -> int:
        return self.rows.shape[0]

    @staticmethod
    def sample(table: CohortTable, size: int = DEFAULT_BACKGROUND_SIZE, seed: int = 0) -> "BackgroundSet":
        """Seeded subsample of the table's rows, without replacement"""
        if table.n_rows == 0:
            raise DataValidationError("Background needs a nonempty cohort")
        n = min(size, table.n_rows)
        indices = np.sort(derive_rng(seed, _BACKGROUND_STREAM).choice(table.n_rows, size=n, replace=False))
        return BackgroundSet(rows=table.rows[indices].copy(), indices=indices.astype(np.int64), seed=seed)

    @staticmethod
    def of_rows(rows: FloatArray, seed: int = 0) -> "BackgroundSet":
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        return BackgroundSet(rows=rows, indices=np.arange(rows.shape[0], dtype=np.int64), seed=seed)


@dataclass(frozen=True)
class Players:
    names: tuple[str, ...]
    groups: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.groups)

    @staticmethod
    def columns(n_columns: int, names: Sequence[str] | None = None) -> "Players":
        names = names if names is not None else [f"x{j}" for j in range(n_columns)]
        return Players(names=tuple(names), groups=tuple((j,) for j in range(n_columns)))

    @staticmethod
    def sources(table: CohortTable) -> "Players":
        groups = table.groups
        return Players(names=tuple(n for n, _ in groups), groups=tuple(tuple(int(j) for j in idx) for _, idx in groups))

    def column_owner(self, n_columns: int) -> IntArray:
        """Player index of every encoded column"""
        owner = np.full(n_columns, -1, dtype=np.int64)
        for p, group in enumerate(self.groups):
            owner[list(group)] = p
        if np.any(owner < 0):
            raise ExplanationError("Every encoded column must belong to exactly one player")
        return owner


def _resolve_players(players: Players | None, n_columns: int) -> Players:
    return players if players is not None else Players.columns(n_columns)


def coalition_values(
    model_fn: ModelFn, x: FloatArray, background: BackgroundSet, players: Players, masks: BoolArray
) -> FloatArray:
    """v(S) for each boolean coalition mask (rows of `masks`, one column per player)"""
    owner = players.column_owner(len(x))
    column_masks = np.asarray(masks, dtype=bool)[:, owner]
    bg = background.rows
    per_batch = max(1, _BATCH_ROWS // bg.shape[0])

    values = np.empty(column_masks.shape[0])
    for start in range(0, column_masks.shape[0], per_batch):
        chunk = column_masks[start : start + per_batch]
        batch = np.where(chunk[:, None, :], x[None, None, :], bg[None, :, :])
        out = np.asarray(model_fn(batch.reshape(-1, len(x))), dtype=np.float64)
        values[start : start + len(chunk)] = out.reshape(len(chunk), bg.shape[0]).mean(axis=1)
    return values


def _all_masks(d: int) -> BoolArray:
    codes = np.arange(1 << d, dtype=np.int64)
    return ((codes[:, None] >> np.arange(d)) & 1).astype(bool)


def exact_shapley(
    model_fn: ModelFn, x: FloatArray, background: BackgroundSet, players: Players | None = None
) -> Attribution:
    """Shapley values by enumerating every coalition, at most 12 players"""
    x = np.asarray(x, dtype=np.float64)
    players = _resolve_players(players, len(x))
    d = players.size
    if d > EXACT_SHAPLEY_MAX_PLAYERS:
        raise ExplanationError(
            f"Exact enumeration supports at most {EXACT_SHAPLEY_MAX_PLAYERS} players, got {d}; use kernel_shapley"
        )

    masks = _all_masks(d)
    v = coalition_values(model_fn, x, background, players, masks)
    sizes = masks.sum(axis=1)
    weight = np.array([math.factorial(s) * math.factorial(d - s - 1) / math.factorial(d) for s in range(d)])

    codes = np.arange(1 << d)
    phi = np.empty(d)
    for i in range(d):
        without = codes[(codes >> i) & 1 == 0]
        phi[i] = float(np.sum(weight[sizes[without]] * (v[without | (1 << i)] - v[without])))

    return Attribution(names=players.names, contributions=phi, baseline=float(v[0]), prediction=float(v[-1]))


def shapley_kernel_weight(d: int, s: int) -> float:
    return (d - 1) / (math.comb(d, s) * s * (d - s))


def _sample_coalitions(d: int, n: int, rng: np.random.Generator) -> tuple[BoolArray, FloatArray]:
    """n coalitions drawn from the Shapley kernel: a size with probability proportional to (d-1)/(s(d-s)), then a
    uniform subset of that size. Every draw carries unit regression weight."""
    sizes = np.arange(1, d)
    size_p = (d - 1) / (sizes * (d - sizes))
    size_p = size_p / size_p.sum()

    masks = np.zeros((n, d), dtype=bool)
    for row, s in enumerate(rng.choice(sizes, size=n, p=size_p)):
        masks[row, rng.choice(d, size=int(s), replace=False)] = True
    return masks, np.ones(n)


def kernel_shapley(
    model_fn: ModelFn,
    x: FloatArray,
    background: BackgroundSet,
    n_samples: int = DEFAULT_SHAP_SAMPLES,
    seed: int = 0,
    players: Players | None = None,
) -> Attribution:
    """Kernel-weighted least squares estimate of Shapley values under the efficiency constraint.

    When n_samples covers all 2^d coalitions they are enumerated with their exact kernel weights, which reproduces the
    exact values.
    """
    x = np.asarray(x, dtype=np.float64)
    players = _resolve_players(players, len(x))
    d = players.size
    if n_samples < 2 * d + 2:
        raise ExplanationError(f"Kernel Shapley needs at least {2 * d + 2} samples for {d} players, got {n_samples}")

    ends = coalition_values(model_fn, x, background, players, np.array([[False] * d, [True] * d]))
    baseline, prediction = float(ends[0]), float(ends[1])
    delta = prediction - baseline
    if d == 1:
        return Attribution(
            names=players.names, contributions=np.array([delta]), baseline=baseline, prediction=prediction
        )

    if d < 63 and n_samples >= (1 << d):
        masks = _all_masks(d)[1:-1]
        sizes = masks.sum(axis=1)
        weights = np.array([shapley_kernel_weight(d, int(s)) for s in sizes])
    else:
        masks, weights = _sample_coalitions(d, n_samples - 2, derive_rng(seed, _KERNEL_STREAM))

    v = coalition_values(model_fn, x, background, players, masks)
    z = masks.astype(np.float64)

    # substitute phi_last = delta - sum(others)
    a = z[:, :-1] - z[:, -1:]
    b = v - baseline - z[:, -1] * delta
    lhs = a.T @ (a * weights[:, None])
    rhs = a.T @ (weights * b)

    regularized = np.linalg.matrix_rank(lhs) < lhs.shape[0]
    if regularized:
        log.warning(f"Kernel Shapley system is singular, solving with ridge penalty {KERNEL_RIDGE_FALLBACK}")
        lhs = lhs + KERNEL_RIDGE_FALLBACK * np.eye(lhs.shape[0])
    head = np.linalg.solve(lhs, rhs)

    phi = np.r_[head, delta - head.sum()]
    return Attribution(
        names=players.names, contributions=phi, baseline=baseline, prediction=prediction, regularized=regularized
    )


@dataclass(frozen=True, eq=False)
class ShapSummary:
    """Per-instance attributions of source features with the data behind a beeswarm plot"""

    names: tuple[str, ...]
    instances: IntArray
    phi: FloatArray
    # per (instance, feature) feature value min-max scaled over the explained instances
    normalized_values: FloatArray
    baseline: float

    @property
    def mean_abs(self) -> FloatArray:
        return np.abs(self.phi).mean(axis=0)

    def ranking(self) -> list[tuple[str, float]]:
        """Features by descending mean |phi|, ties kept in schema order"""
        scores = self.mean_abs
        order = sorted(range(len(self.names)), key=lambda j: -scores[j])
        return [(self.names[j], float(scores[j])) for j in order]

    def top(self, k: int = DEFAULT_TOP_K) -> list[str]:
        return [name for name, _ in self.ranking()[:k]]

    def beeswarm(self) -> list[tuple[int, str, float, float]]:
        return [
            (int(instance), name, float(self.normalized_values[i, j]), float(self.phi[i, j]))
            for i, instance in enumerate(self.instances)
            for j, name in enumerate(self.names)
        ]


def feature_values(table: CohortTable, instances: IntArray) -> FloatArray:
    """Raw value per source feature; nominal features give the index of their category"""
    columns: list[FloatArray] = []
    for name, idx in table.groups:
        if table.schema.kind_of(name) == FeatureKind.NOMINAL:
            block = table.raw_rows[np.ix_(instances, idx)]
            columns.append(np.where(block.max(axis=1) > 0, block.argmax(axis=1), -1).astype(np.float64))
        else:
            columns.append(table.raw_rows[instances, idx[0]])
    return np.column_stack(columns)


def min_max_normalize(values: FloatArray) -> FloatArray:
    """Scale every column to [0, 1]; constant columns map to 0.5"""
    lo, hi = values.min(axis=0), values.max(axis=0)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (values - lo) / safe, 0.5)


def _explain_one(
    model_fn: ModelFn, x: FloatArray, background: BackgroundSet, players: Players, n_samples: int, seed: int, i: int
) -> Attribution:
    if players.size <= EXACT_SHAPLEY_MAX_PLAYERS:
        return exact_shapley(model_fn, x, background, players)
    return kernel_shapley(model_fn, x, background, n_samples, int(derive_rng(seed, i).integers(1 << 31)), players)


def shap_summary(
    model_fn: ModelFn,
    table: CohortTable,
    background: BackgroundSet,
    instances: Sequence[int] | IntArray | None = None,
    n_samples: int = DEFAULT_SHAP_SAMPLES,
    seed: int = 0,
    n_jobs: int = 1,
) -> ShapSummary:
    """Source-feature attributions for the given instances (all rows by default).

    Exact enumeration is used up to 12 source features, the kernel estimate beyond that.
    """
    if table.n_rows == 0:
        raise DataValidationError("Cannot summarize attributions of an empty cohort")
    idx = np.arange(table.n_rows) if instances is None else np.asarray(instances, dtype=np.int64)
    players = Players.sources(table)

    attributions = Parallel(n_jobs=n_jobs)(
        delayed(_explain_one)(model_fn, table.rows[i], background, players, n_samples, seed, int(i)) for i in idx
    )
    phi = np.vstack([a.contributions for a in attributions])
    log.debug(f"Explained {len(idx)} instances over {players.size} features")

    return ShapSummary(
        names=players.names,
        instances=idx,
        phi=phi,
        normalized_values=min_max_normalize(feature_values(table, idx)),
        baseline=attributions[0].baseline,
    )


def explanation_instances(table: CohortTable, count: int, seed: int) -> IntArray:
    """Seeded sorted subsample of row indices to explain"""
    if count >= table.n_rows:
        return np.arange(table.n_rows, dtype=np.int64)
    return np.sort(derive_rng(seed, _SHAP_INSTANCE_STREAM).choice(table.n_rows, size=count, replace=False))


@dataclass(frozen=True)
class LocalExplanation:
    instance_id: int
    prediction: float
    baseline: float
    intercept: float
    top_features: tuple[tuple[str, float], ...]
    fidelity: float
    # model output did not vary over the perturbations
    degenerate: bool = False
    kernel_width: float = 0.0

    def weight(self, name: str) -> float:
        return dict(self.top_features).get(name, 0.0)


def _weighted_ridge(z: FloatArray, y: FloatArray, w: FloatArray, penalty: float) -> tuple[FloatArray, float]:
    """Ridge with an unpenalized intercept, solved on weighted-centered data"""
    total = w.sum()
    z_mean = (w[:, None] * z).sum(axis=0) / total
    y_mean = float((w * y).sum() / total)
    zc = z - z_mean
    yc = y - y_mean
    lhs = zc.T @ (zc * w[:, None]) + penalty * np.eye(z.shape[1])
    coef = np.linalg.solve(lhs, zc.T @ (w * yc))
    return coef, y_mean - float(z_mean @ coef)


def _perturb(
    x: FloatArray, table: CohortTable, n_samples: int, rng: np.random.Generator
) -> tuple[FloatArray, FloatArray, list[str]]:
    """Perturbed encoded rows plus their interpretable form: standardized deviation from x for numeric and
    ordinal features, 1 when a nominal feature keeps the category of x"""
    samples = np.repeat(x[None, :], n_samples, axis=0)
    interpretable: list[FloatArray] = []
    names: list[str] = []

    for name, idx in table.groups:
        names.append(name)
        if table.schema.kind_of(name) == FeatureKind.NOMINAL:
            frequencies = table.rows[:, idx].mean(axis=0)
            frequencies = frequencies / frequencies.sum()
            drawn = rng.choice(len(idx), size=n_samples, p=frequencies)
            block = np.zeros((n_samples, len(idx)))
            block[np.arange(n_samples), drawn] = 1.0
            samples[:, idx] = block
            own = int(np.argmax(x[idx])) if x[idx].max() > 0 else -1
            interpretable.append((drawn == own).astype(np.float64))
        else:
            j = int(idx[0])
            std = float(table.rows[:, j].std())
            if std > 0:
                samples[:, j] = x[j] + rng.normal(0.0, std, size=n_samples)
                interpretable.append((samples[:, j] - x[j]) / std)
            else:
                interpretable.append(np.zeros(n_samples))

    return samples, np.column_stack(interpretable), names


def lime_explain(
    model_fn: ModelFn,
    x: FloatArray,
    table: CohortTable,
    n_samples: int = DEFAULT_LIME_SAMPLES,
    k: int = DEFAULT_TOP_K,
    seed: int = 0,
    instance_id: int = 0,
    kernel_width_factor: float = DEFAULT_KERNEL_WIDTH_FACTOR,
    ridge_penalty: float = DEFAULT_RIDGE_PENALTY,
) -> LocalExplanation:
    """Local linear surrogate around x fitted on kernel-weighted perturbations.

    Features are perturbed with the training distribution of `table`; the K source features with the largest weights
    of a full ridge fit are kept and the surrogate is refitted on them.
    """
    if n_samples < 10 * k:
        raise ExplanationError(f"LIME needs at least {10 * k} samples for K = {k}, got {n_samples}")
    x = np.asarray(x, dtype=np.float64)
    if len(x) != table.feature_count:
        raise DataValidationError(f"Instance has {len(x)} columns, cohort has {table.feature_count}")

    rng = derive_rng(seed, _LIME_STREAM, instance_id)
    samples, z, names = _perturb(x, table, n_samples, rng)
    d = z.shape[1]
    k = min(k, d)

    nominal = np.array([table.schema.kind_of(n) == FeatureKind.NOMINAL for n in names])
    distance_sq = np.sum(np.where(nominal, 1.0 - z, z) ** 2, axis=1)

    width = kernel_width_factor * math.sqrt(d)
    weights = np.exp(-distance_sq / width**2)
    if np.all(weights < LIME_MIN_KERNEL_WEIGHT):
        width *= 2.0
        log.warning(f"LIME kernel weights vanished, doubling the kernel width to {width:.4f}")
        weights = np.exp(-distance_sq / width**2)
        if np.all(weights < LIME_MIN_KERNEL_WEIGHT):
            raise ExplanationError("LIME kernel weights vanished even after doubling the kernel width")

    y = np.asarray(model_fn(samples), dtype=np.float64)
    prediction = float(np.asarray(model_fn(x[None, :]))[0])

    full, _ = _weighted_ridge(z, y, weights, ridge_penalty)
    chosen = sorted(np.argsort(-np.abs(full), kind="stable")[:k].tolist())
    coef, intercept = _weighted_ridge(z[:, chosen], y, weights, ridge_penalty)

    y_mean = float((weights * y).sum() / weights.sum())
    ss_tot = float(np.sum(weights * (y - y_mean) ** 2))
    degenerate = bool(np.ptp(y) == 0.0)
    if degenerate:
        fidelity = 0.0
    else:
        residual = y - (intercept + z[:, chosen] @ coef)
        fidelity = max(0.0, 1.0 - float(np.sum(weights * residual**2)) / ss_tot)

    ranked = sorted(zip(chosen, coef), key=lambda item: -abs(item[1]))
    return LocalExplanation(
        instance_id=instance_id,
        prediction=prediction,
        baseline=float(y.mean()),
        intercept=intercept,
        top_features=tuple((names[j], float(w)) for j, w in ranked),
        fidelity=fidelity,
        degenerate=degenerate,
        kernel_width=width,
    )


def select_lime_case(model_fn: ModelFn, table: CohortTable) -> int:
    """Row with the lowest predicted survival probability, lowest index on ties"""
    if table.n_rows == 0:
        raise DataValidationError("Cannot select a case from an empty cohort")
    return int(np.argmin(np.asarray(model_fn(table.rows))))


def lowest_survival_cases(model_fn: ModelFn, table: CohortTable, count: int) -> list[int]:
    scores = np.asarray(model_fn(table.rows))
    return [int(i) for i in np.argsort(scores, kind="stable")[:count]]


@dataclass(frozen=True)
class AggregateExplanation:
    cases: tuple[LocalExplanation, ...]
    # feature, number of cases listing it
    top_features: tuple[tuple[str, int], ...]


def lime_aggregate(
    model_fn: ModelFn,
    table: CohortTable,
    n_cases: int,
    n_samples: int = DEFAULT_LIME_SAMPLES,
    k: int = DEFAULT_TOP_K,
    seed: int = 0,
    kernel_width_factor: float = DEFAULT_KERNEL_WIDTH_FACTOR,
    ridge_penalty: float = DEFAULT_RIDGE_PENALTY,
    n_jobs: int = 1,
) -> AggregateExplanation:
    """Explain the n lowest-survival cases and keep the K features listed most often.

    Ties go to the larger mean |weight|, then schema order.
    """
    ids = lowest_survival_cases(model_fn, table, n_cases)
    cases = Parallel(n_jobs=n_jobs)(
        delayed(lime_explain)(
            model_fn, table.rows[i], table, n_samples, k, seed, i, kernel_width_factor, ridge_penalty
        )
        for i in ids
    )

    counts: Counter[str] = Counter()
    magnitude: dict[str, list[float]] = {}
    for case in cases:
        for name, w in case.top_features:
            counts[name] += 1
            magnitude.setdefault(name, []).append(abs(w))

    order = [name for name, _ in table.groups]
    ranked = sorted(counts, key=lambda n: (-counts[n], -float(np.mean(magnitude[n])), order.index(n)))
    top = tuple((name, counts[name]) for name in ranked[: min(k, len(order))])
    return AggregateExplanation(cases=tuple(cases), top_features=top)


@dataclass(frozen=True, eq=False)
class PresenceMatrix:
    features: tuple[str, ...]
    columns: tuple[str, ...]
    cells: IntArray = field(repr=False)

    def column(self, label: str) -> dict[str, int]:
        j = self.columns.index(label)
        return {f: int(self.cells[i, j]) for i, f in enumerate(self.features)}

    def row_total(self, feature: str) -> int:
        return int(self.cells[self.features.index(feature)].sum())


def presence_heatmap(
    top_lists: Mapping[str, Sequence[str]], top_k: int = DEFAULT_TOP_K, feature_count: int | None = None
) -> PresenceMatrix:
    """Binary feature x column matrix of top-K membership, rows by descending presence count then name.

    With `feature_count` (source features d) every list must hold exactly min(K, d) names, otherwise at most K.
    """
    expected = min(top_k, feature_count) if feature_count is not None else None
    for label, names in top_lists.items():
        duplicates = sorted({n for n in names if list(names).count(n) > 1})
        if duplicates:
            raise DataValidationError(f"Top-{top_k} list of {label} repeats {', '.join(duplicates)}")
        if len(names) > top_k or (expected is not None and len(names) != expected):
            want = f"exactly {expected}" if expected is not None else f"at most {top_k}"
            raise DataValidationError(f"Top-{top_k} list of {label} has {len(names)} entries, expected {want}")

    counts: Counter[str] = Counter(n for names in top_lists.values() for n in names)
    features = sorted(counts, key=lambda n: (-counts[n], n))
    columns = list(top_lists)

    cells = np.zeros((len(features), len(columns)), dtype=np.int64)
    for j, label in enumerate(columns):
        for name in top_lists[label]:
            cells[features.index(name), j] = 1

    return PresenceMatrix(features=tuple(features), columns=tuple(columns), cells=cells)
