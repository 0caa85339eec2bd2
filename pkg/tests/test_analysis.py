"""CCA/PWCCA properties and the experiment statistics."""

from itertools import product

import numpy as np
import pytest

from pairview.analysis import cca, mann_whitney_u, mean_ci95, pwcca
from pairview.errors import ContractError, DegenerateInputError

from oracles import mann_whitney_exact_oracle


# ---------------------------------------------------------------------------
# CCA / PWCCA
# ---------------------------------------------------------------------------


def test_cca_self_correlation_all_ones():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(200, 12))
    rho, _, _ = cca(x, x)
    assert np.allclose(rho, 1.0, atol=1e-6)


def test_cca_invariance_under_invertible_maps():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(300, 10))
    for seed in range(3):
        a = np.random.default_rng(100 + seed).normal(size=(10, 10))
        a += 10 * np.eye(10)  # comfortably invertible
        rho, _, _ = cca(x, x @ a)
        assert np.allclose(rho, 1.0, atol=1e-4)


def test_cca_independent_gaussians_low_correlation():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(2000, 10))
    y = rng.normal(size=(2000, 10))
    rho, _, _ = cca(x, y)
    assert rho.max() < 0.2


def test_cca_variates_are_maximally_correlated_directions():
    rng = np.random.default_rng(3)
    shared = rng.normal(size=(500, 3))
    x = np.concatenate([shared, rng.normal(size=(500, 4))], axis=1)
    y = np.concatenate([shared @ rng.normal(size=(3, 3)), rng.normal(size=(500, 5))], axis=1)
    rho, wx, wy = cca(x, y)
    assert (rho[:3] > 0.95).all()
    hx = (x - x.mean(0)) @ wx
    hy = (y - y.mean(0)) @ wy
    for i in range(3):
        c = np.corrcoef(hx[:, i], hy[:, i])[0, 1]
        assert abs(c) == pytest.approx(rho[i], abs=1e-6)


def test_cca_errors():
    rng = np.random.default_rng(4)
    with pytest.raises(ContractError):
        cca(rng.normal(size=(1, 3)), rng.normal(size=(1, 3)))
    const = np.ones((50, 4))
    with pytest.raises(DegenerateInputError):
        cca(const, rng.normal(size=(50, 4)))


def test_pwcca_self_is_one():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(400, 16))
    report = pwcca(x, x)
    assert report.score == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.diff(report.correlations) <= 1e-9)  # descending
    assert report.weights.sum() == pytest.approx(1.0, abs=1e-9)
    assert (report.weights >= 0).all()


def test_pwcca_random_baseline_window():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(1000, 128))
    y = rng.normal(size=(1000, 128))
    report = pwcca(x, y)
    assert 0.25 <= report.score <= 0.55


def test_pwcca_bounded_by_top_correlation():
    rng = np.random.default_rng(7)
    for seed in range(5):
        r = np.random.default_rng(seed)
        x = r.normal(size=(300, 20))
        y = 0.5 * x @ r.normal(size=(20, 15)) + r.normal(size=(300, 15))
        report = pwcca(x, y)
        assert report.score <= report.correlations[0] + 1e-9


def test_pwcca_weighting_view_is_first_argument():
    rng = np.random.default_rng(8)
    shared = rng.normal(size=(500, 4))
    x = np.concatenate([shared, 0.05 * rng.normal(size=(500, 12))], axis=1)
    y = np.concatenate([shared, rng.normal(size=(500, 12))], axis=1)
    ab = pwcca(x, y).score
    ba = pwcca(y, x).score
    assert ab != ba  # asymmetric by construction


# ---------------------------------------------------------------------------
# Mann-Whitney U
# ---------------------------------------------------------------------------


def test_mw_identical_multisets():
    res = mann_whitney_u([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert res.u == 4.5  # n1 n2 / 2
    assert res.p_value == 1.0


def test_mw_all_constant_zero_variance():
    res = mann_whitney_u([2.0] * 4, [2.0] * 4)
    assert res.u == 8.0
    assert res.p_value == 1.0


def test_mw_disjoint_small_case_exact():
    res = mann_whitney_u([1, 2, 3], [4, 5, 6])
    assert res.method == "exact"
    assert res.u == 0.0
    assert res.p_value == pytest.approx(0.1, abs=1e-12)


def test_mw_exact_matches_enumeration_all_small_sizes():
    rng = np.random.default_rng(9)
    for n1, n2 in product(range(1, 6), range(1, 6)):
        values = rng.permutation(np.arange(1.0, n1 + n2 + 1.0))
        a, b = values[:n1], values[n1:]
        got = mann_whitney_u(a, b)
        assert got.method == "exact"
        want = mann_whitney_exact_oracle(list(a), list(b))
        assert got.p_value == pytest.approx(want, abs=1e-12), (n1, n2)


def test_mw_two_sided_symmetry():
    rng = np.random.default_rng(10)
    for _ in range(20):
        a = rng.normal(size=rng.integers(2, 12))
        b = rng.normal(loc=0.3, size=rng.integers(2, 12))
        assert mann_whitney_u(a, b).p_value == pytest.approx(
            mann_whitney_u(b, a).p_value, abs=1e-12)


def test_mw_exact_vs_normal_agreement_at_ten_vs_ten():
    rng = np.random.default_rng(11)
    for seed in range(10):
        r = np.random.default_rng(200 + seed)
        a = r.normal(size=10)
        b = r.normal(loc=0.8, size=10)
        exact = mann_whitney_u(a, b, method="exact").p_value
        approx = mann_whitney_u(a, b, method="normal").p_value
        assert abs(exact - approx) < 0.02


def test_mw_auto_uses_normal_when_large_or_tied():
    rng = np.random.default_rng(12)
    res = mann_whitney_u(rng.normal(size=12), rng.normal(size=12))
    assert res.method == "normal-approx"
    res_tied = mann_whitney_u([1.0, 1.0, 2.0], [2.0, 3.0, 4.0])
    assert res_tied.method == "normal-approx"


def test_mw_bounds_and_errors():
    rng = np.random.default_rng(13)
    for _ in range(10):
        a = rng.normal(size=5)
        b = rng.normal(size=7)
        res = mann_whitney_u(a, b)
        assert 0 <= res.u <= 35
        assert 0 < res.p_value <= 1
    with pytest.raises(ContractError):
        mann_whitney_u([], [1.0])
    with pytest.raises(ContractError):
        mann_whitney_u([1.0, 1.0], [1.0], method="exact")


def test_mw_significance_threshold():
    res = mann_whitney_u(list(range(10)), list(range(20, 30)))
    assert res.significant
    assert res.alpha == 0.05


# ---------------------------------------------------------------------------
# confidence intervals
# ---------------------------------------------------------------------------


def test_ci_constant_samples():
    mean, half = mean_ci95([0.4] * 6)
    assert mean == pytest.approx(0.4)
    assert half == 0.0


def test_ci_two_sample_closed_form():
    mean, half = mean_ci95([0.0, 1.0])
    assert mean == pytest.approx(0.5)
    # t(0.975, df=1) * s / sqrt(2) = 12.7062 * 0.70711 / 1.41421
    assert half == pytest.approx(6.35310, abs=1e-4)


def test_ci_ten_sample_multiplier():
    rng = np.random.default_rng(14)
    halves = []
    for seed in range(30):
        samples = np.random.default_rng(300 + seed).normal(size=10)
        _, half = mean_ci95(samples)
        halves.append(half)
    expected = 2.262157 / np.sqrt(10)
    assert np.mean(halves) == pytest.approx(expected, rel=0.2)


def test_ci_needs_two_samples():
    with pytest.raises(ContractError):
        mean_ci95([1.0])
