import logging
import math
from collections.abc import Sequence

import numpy as np
from pydantic.dataclasses import dataclass
from scipy.special import betainc

from stagesurv.cohort import CohortTable, FeatureKind
from stagesurv.exceptions import DataValidationError
from stagesurv.utils import FloatArray

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float
    # both samples constant, the test statistic carries no information
    degenerate: bool = False


def student_t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)"""
    if math.isinf(t):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def student_t_cdf(t: float, df: float) -> float:
    tail = 0.5 * student_t_sf2(t, df)
    return 1.0 - tail if t > 0 else tail


def welch_t_test(sample_a: Sequence[float] | FloatArray, sample_b: Sequence[float] | FloatArray) -> WelchResult:
    """Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom"""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise DataValidationError(f"Welch test needs at least 2 values per sample, got {len(a)} and {len(b)}")

    mean_a, mean_b = float(a.mean()), float(b.mean())
    va = float(a.var(ddof=1)) / len(a)
    vb = float(b.var(ddof=1)) / len(b)

    if va + vb == 0.0:
        df = float(len(a) + len(b) - 2)
        if mean_a == mean_b:
            return WelchResult(t=0.0, df=df, p=1.0, degenerate=True)
        return WelchResult(t=math.copysign(math.inf, mean_a - mean_b), df=df, p=0.0, degenerate=True)

    t = (mean_a - mean_b) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (len(a) - 1) + vb**2 / (len(b) - 1))
    return WelchResult(t=t, df=df, p=min(1.0, max(0.0, student_t_sf2(t, df))))


@dataclass(frozen=True)
class GroupComparison:
    feature: str
    mean_survivors: float
    mean_nonsurvivors: float
    n_survivors: int
    n_nonsurvivors: int
    t_statistic: float = math.nan
    degrees_of_freedom: float = math.nan
    p_value: float = math.nan
    available: bool = True
    degenerate: bool = False


def _mean(values: FloatArray) -> float:
    return float(values.mean()) if len(values) else math.nan


def compare_groups(table: CohortTable, features: Sequence[str] | None = None) -> list[GroupComparison]:
    """Survivor vs non-survivor means and Welch p-values per numeric feature, in raw units"""
    names = list(features) if features is not None else table.schema.names_of_kind(FeatureKind.NUMERIC)
    survived = table.labels == 1

    comparisons: list[GroupComparison] = []
    for name in names:
        values = table.raw_rows[:, table.column_index(name)]
        a, b = values[survived], values[~survived]
        base = {
            "feature": name,
            "mean_survivors": _mean(a),
            "mean_nonsurvivors": _mean(b),
            "n_survivors": len(a),
            "n_nonsurvivors": len(b),
        }
        if len(a) < 2 or len(b) < 2:
            log.warning(f"Comparison of {name!r} unavailable: group sizes {len(a)} and {len(b)}")
            comparisons.append(GroupComparison(**base, available=False))
            continue

        result = welch_t_test(a, b)
        comparisons.append(
            GroupComparison(
                **base,
                t_statistic=result.t,
                degrees_of_freedom=result.df,
                p_value=result.p,
                degenerate=result.degenerate,
            )
        )

    return comparisons
