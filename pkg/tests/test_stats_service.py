import numpy as np
import pytest
from scipy import integrate, stats

from app.core.errors import DegenerateDataError, InvalidParameterError
from app.schemas.stats import Stratum
from app.services.stats_service import (
    association_table,
    build_table,
    chi2_quantile,
    chi2_sf,
    cramers_v,
    pearson_chi2_stratum,
)

# class C1 of the two-class worked example: (yhat, d) cell counts
C1_COUNTS = {(1, 1): 178, (1, 0): 433, (0, 1): 92, (0, 0): 124}


def arrays_from_counts(counts: dict[tuple[int, int], int]) -> tuple[np.ndarray, np.ndarray]:
    a, b = [], []
    for (u, v), count in counts.items():
        a.extend([u] * count)
        b.extend([v] * count)
    return np.array(a), np.array(b)


def closed_form(n11: int, n10: int, n01: int, n00: int) -> float:
    n = n11 + n10 + n01 + n00
    r1, r0, c1, c0 = n11 + n10, n01 + n00, n11 + n01, n10 + n00
    return n * (n11 * n00 - n10 * n01) ** 2 / (r1 * r0 * c1 * c0)


def test_worked_example_class_statistic():
    a, b = arrays_from_counts(C1_COUNTS)
    table = build_table(a, b)

    assert table.stratum("all").counts == ((178, 433), (92, 124))
    result = pearson_chi2_stratum(table.strata[0])
    assert result.statistic == pytest.approx(13.15, abs=0.01)
    assert result.dof == 1
    assert result.p_value < 0.05


def test_worked_example_global_statistic():
    a, b = arrays_from_counts(C1_COUNTS)
    first = pearson_chi2_stratum(build_table(a, b).strata[0]).statistic
    total = first + 3.24

    assert total == pytest.approx(16.39, abs=0.02)
    assert chi2_quantile(0.95, 2) == pytest.approx(5.99, abs=0.01)
    assert total > chi2_quantile(0.95, 2)
    assert chi2_sf(total, 2) < 0.05


def test_chi2_quantiles():
    assert chi2_quantile(0.95, 1) == pytest.approx(3.84, abs=0.01)
    assert chi2_quantile(0.95, 2) == pytest.approx(5.99, abs=0.01)
    assert chi2_quantile(0.90, 1) == pytest.approx(stats.chi2.ppf(0.90, 1), abs=1e-9)


@pytest.mark.parametrize("dof", range(1, 11))
def test_chi2_sf_matches_scipy(dof):
    for x in np.linspace(0.0, 50.0, 101):
        assert chi2_sf(float(x), dof) == pytest.approx(stats.chi2.sf(x, dof), abs=1e-7)


@pytest.mark.parametrize("dof", range(2, 11))
def test_chi2_sf_matches_quadrature(dof):
    for x in (0.5, 1.0, 3.84, 7.5, 12.0, 25.0, 50.0):
        tail, _ = integrate.quad(lambda t: stats.chi2.pdf(t, dof), x, np.inf, epsabs=1e-12, epsrel=1e-12)
        assert chi2_sf(x, dof) == pytest.approx(tail, abs=1e-7)


def test_chi2_sf_boundaries():
    assert chi2_sf(0.0, 1) == 1.0
    assert chi2_sf(1e4, 3) == pytest.approx(0.0, abs=1e-300)


def test_quantile_inverts_sf():
    for dof in (1, 2, 5):
        for p in (0.5, 0.9, 0.95, 0.99):
            assert chi2_sf(chi2_quantile(p, dof), dof) == pytest.approx(1.0 - p, abs=1e-9)


def test_chi2_invalid_arguments():
    with pytest.raises(InvalidParameterError):
        chi2_sf(1.0, 0)
    with pytest.raises(InvalidParameterError):
        chi2_sf(-1.0, 1)
    with pytest.raises(InvalidParameterError):
        chi2_quantile(1.0, 1)


def test_pearson_matches_closed_form_on_random_tables():
    gen = np.random.default_rng(11)
    for _ in range(1000):
        n11, n10, n01, n00 = (int(value) for value in gen.integers(0, 25, size=4))
        stratum = Stratum(label="s", counts=((n11, n10), (n01, n00)))
        if stratum.total == 0:
            continue
        result = pearson_chi2_stratum(stratum)
        if 0 in stratum.row_totals or 0 in stratum.column_totals:
            assert result.degenerate
            assert (result.statistic, result.dof, result.p_value) == (0.0, 0, 1.0)
        else:
            assert result.statistic == pytest.approx(closed_form(n11, n10, n01, n00), rel=1e-9, abs=1e-9)


def test_degenerate_and_empty_strata():
    degenerate = pearson_chi2_stratum(Stratum(label="s", counts=((5, 7), (0, 0))))
    assert degenerate.degenerate
    assert degenerate.p_value == 1.0

    with pytest.raises(DegenerateDataError):
        pearson_chi2_stratum(Stratum(label="s", counts=((0, 0), (0, 0))))


def test_proportional_counts_give_zero_statistic():
    result = pearson_chi2_stratum(Stratum(label="s", counts=((10, 20), (5, 10))))
    assert result.statistic == 0.0
    assert result.p_value == 1.0


def test_build_table_strata_sorted():
    a = np.array([1, 0, 1, 1, 0, 0])
    b = np.array([1, 1, 0, 1, 0, 1])
    table = build_table(a, b, strata=np.array(["y", "x", "y", "x", "x", "y"]))

    assert [stratum.label for stratum in table.strata] == ["x", "y"]
    assert table.stratum("x").counts == ((1, 0), (1, 1))
    assert table.stratum("y").counts == ((1, 1), (1, 0))
    assert table.n == 6


def test_build_table_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        build_table([1, 0], [1, 0, 1])
    with pytest.raises(InvalidParameterError):
        build_table([1, 2], [1, 0])
    with pytest.raises(InvalidParameterError):
        build_table([1, 0], [1, 0], strata=["a"])


def test_cramers_v_extremes():
    x = ["a", "b", "c"] * 20
    assert cramers_v(x, x) == pytest.approx(1.0)
    assert cramers_v(["a", "a", "b", "b"], [0, 1, 0, 1]) == pytest.approx(0.0)
    with pytest.raises(DegenerateDataError):
        cramers_v(["a", "a"], [0, 1])


def test_cramers_v_symmetric_and_label_free():
    gen = np.random.default_rng(9)
    x = gen.choice(["own", "rent", "free"], size=300, p=[0.5, 0.3, 0.2])
    y = np.where(gen.random(300) < np.where(x == "own", 0.7, 0.4), "good", "bad")
    value = cramers_v(x, y)
    relabelled = {"own": "z", "rent": "a", "free": "m"}

    assert 0.0 < value < 1.0
    assert cramers_v(y, x) == pytest.approx(value, rel=1e-12)
    assert cramers_v([relabelled[level] for level in x], y) == pytest.approx(value, rel=1e-12)
    assert cramers_v(x, np.where(y == "good", 0, 1)) == pytest.approx(value, rel=1e-12)


def test_association_table(synthetic):
    associations = association_table(synthetic)

    assert [item.feature for item in associations] == ["Income", "Duration", "Housing", "Phone"]
    for item in associations:
        assert 0.0 <= item.v_target <= 1.0
        assert 0.0 <= item.v_protected <= 1.0
    phone = next(item for item in associations if item.feature == "Phone")
    housing = next(item for item in associations if item.feature == "Housing")
    assert phone.v_protected > housing.v_protected


def test_association_table_on_subset(synthetic):
    rows = np.arange(0, synthetic.n, 2)
    assert len(association_table(synthetic, rows=rows)) == 4
