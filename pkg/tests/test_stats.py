import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma

from stagesurv.cohort import CohortTable
from stagesurv.exceptions import DataValidationError
from stagesurv.stats import compare_groups, student_t_cdf, student_t_sf2, welch_t_test


def _t_pdf(t: float, df: float) -> float:
    norm = gamma((df + 1) / 2) / (math.sqrt(df * math.pi) * gamma(df / 2))
    return norm * (1 + t * t / df) ** (-(df + 1) / 2)


def test_tail_probability_against_the_density():
    expected = 2 * quad(_t_pdf, 1.0, math.inf, args=(10.0,))[0]
    assert student_t_sf2(1.0, 10.0) == pytest.approx(expected, abs=1e-10)
    assert student_t_sf2(1.0, 10.0) == pytest.approx(0.3409, abs=1e-4)


def test_tail_probability_shape():
    assert student_t_sf2(0.0, 7.0) == 1.0
    assert student_t_sf2(2.0, 7.0) == student_t_sf2(-2.0, 7.0)
    assert student_t_sf2(3.0, 7.0) < student_t_sf2(2.0, 7.0) < student_t_sf2(1.0, 7.0)
    assert student_t_sf2(math.inf, 3.0) == 0.0


def test_cdf():
    assert student_t_cdf(0.0, 5.0) == pytest.approx(0.5)
    assert student_t_cdf(1.5, 5.0) + student_t_cdf(-1.5, 5.0) == pytest.approx(1.0)


@pytest.mark.parametrize("df", [1.0, 5.0, 10.0, 100.0])
def test_cdf_against_the_density(df):
    for t in np.linspace(-6.0, 6.0, 25):
        half = quad(_t_pdf, 0.0, abs(t), args=(df,), epsabs=1e-13, epsrel=1e-13)[0]
        expected = 0.5 + math.copysign(half, t)
        assert student_t_cdf(float(t), df) == pytest.approx(expected, abs=1e-8)


def test_identical_samples():
    result = welch_t_test([1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0])
    assert result.t == 0.0
    assert result.p == 1.0
    assert result.df == pytest.approx(6.0)


def test_grossly_separated_samples():
    rng = np.random.default_rng(0)
    result = welch_t_test(rng.normal(0.0, 1.0, 200), rng.normal(5.0, 1.0, 200))
    assert result.t < 0
    assert result.p < 1e-10


def test_welch_statistic_by_hand():
    a, b = [1.0, 2.0, 3.0], [2.0, 4.0, 6.0, 8.0]
    va, vb = 1.0 / 3, (20.0 / 3) / 4
    result = welch_t_test(a, b)

    assert result.t == pytest.approx((2.0 - 5.0) / math.sqrt(va + vb))
    assert result.df == pytest.approx((va + vb) ** 2 / (va**2 / 2 + vb**2 / 3))
    assert result.p == pytest.approx(student_t_sf2(result.t, result.df))
    assert welch_t_test(b, a).p == pytest.approx(result.p)


def test_welch_swapping_samples_flips_only_the_sign():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.normal(rng.normal(), rng.uniform(0.5, 3.0), size=int(rng.integers(2, 60)))
        b = rng.normal(rng.normal(), rng.uniform(0.5, 3.0), size=int(rng.integers(2, 60)))
        forward, backward = welch_t_test(a, b), welch_t_test(b, a)

        assert backward.t == pytest.approx(-forward.t, rel=1e-12)
        assert backward.df == pytest.approx(forward.df, rel=1e-12)
        assert backward.p == pytest.approx(forward.p, rel=1e-12)


def test_constant_samples():
    same = welch_t_test([3.0, 3.0, 3.0], [3.0, 3.0])
    assert (same.t, same.p, same.degenerate) == (0.0, 1.0, True)

    apart = welch_t_test([1.0, 1.0], [2.0, 2.0, 2.0])
    assert apart.t == -math.inf
    assert apart.p == 0.0
    assert apart.degenerate


def test_too_small_sample():
    with pytest.raises(DataValidationError):
        welch_t_test([1.0], [1.0, 2.0])


def test_compare_groups():
    rows = np.array([[60.0, 1.0], [62.0, 2.0], [64.0, 3.0], [70.0, 4.0], [74.0, 6.0], [78.0, 5.0]])
    table = CohortTable.from_matrix(rows, [1, 1, 1, 0, 0, 0], names=["Age", "Tumor Size"])

    age, size = compare_groups(table)

    assert age.feature == "Age"
    assert age.mean_survivors == 62.0 and age.mean_nonsurvivors == 74.0
    assert (age.n_survivors, age.n_nonsurvivors) == (3, 3)
    assert age.t_statistic == pytest.approx(welch_t_test([60, 62, 64], [70, 74, 78]).t)
    assert age.available and not age.degenerate
    assert size.p_value < 0.05


def test_compare_groups_with_a_lone_nonsurvivor():
    table = CohortTable.from_matrix(np.array([[1.0], [2.0], [3.0]]), [1, 1, 0], names=["Age"])
    (age,) = compare_groups(table)
    assert not age.available
    assert math.isnan(age.p_value)
    assert age.mean_nonsurvivors == 3.0
