import math

import numpy as np
import pytest

import soundshap as ss


@pytest.fixture
def uniform_square():
    grid = ss.Grid([[0.0, 1.0], [0.0, 1.0]])
    dist = ss.DiscreteDistribution(grid, [0.25] * 4)
    return grid, dist


def test_product_example(uniform_square):
    grid, dist = uniform_square
    f = ss.product_function(grid)
    report = ss.shap_all(dist, f, [1, 1])
    assert report.base_value == pytest.approx(0.25)
    assert report.per_feature == pytest.approx([0.375, 0.375])
    assert ss.value_function(dist, f, [1, 1], ss.FeatureSubset.single(0, 2)) == pytest.approx(0.5)


def test_extended_distribution_idempotent():
    data = ss.Dataset([[0, 0], [1, 1], [1, 1], [0, 1]])
    grid, mu = ss.empirical_distribution(data)
    star = ss.extended_distribution(mu)
    star2 = ss.extended_distribution(star)
    assert star.mass == pytest.approx(star2.mass, abs=1e-14)
    for j in range(grid.dim):
        assert ss.marginal(mu, j) == pytest.approx(ss.marginal(star, j), abs=1e-14)


def test_kernelshap_limit_matches_exact():
    rng = np.random.default_rng(5)
    grid = ss.Grid([[0.0, 1.0, 2.0], [0.0, 1.0], [0.0, 1.0]])
    mass = rng.random(grid.num_cells)
    mass /= mass.sum()
    dist = ss.DiscreteDistribution(grid, mass.tolist())
    f = ss.TabularFunction(grid, rng.random(grid.num_cells).tolist())
    x = [1, 0, 1]
    limit = ss.kernelshap_limit(dist, f, x)
    exact = ss.shap_all(dist, f, x)
    assert limit.per_feature == pytest.approx(exact.per_feature, abs=1e-9)
    assert sum(limit.per_feature) == pytest.approx(limit.sum_target, abs=1e-9)


def test_counterexample_pipeline():
    grid = ss.Grid([[0.0, 1.0, 2.0], [0.0, 1.0, 2.0]])
    mask = ss.ring_support(3, 3, 0.2, 0.4)
    report = ss.find_counterexample(grid, mask, 0)
    assert report.found
    assert report.max_abs_shap_on_support <= 1e-8
    assert report.max_abs_shap_on_extended >= 1e-6
    assert report.objective_value >= 0.5
    # The aggregate over the data support hides the dependence.
    mu = ss.uniform_on_mask(grid, mask)
    star = ss.extended_distribution(mu)
    assert ss.aggregate_shap(mu, mu, report.f, 0) <= 1e-8
    assert ss.aggregate_shap(star, star, report.f, 0) > 1e-6

    # Full-extended constraints admit no counterexample.
    none = ss.find_counterexample(grid, mask, 0, full_extended=True, threshold=1e-8)
    assert not none.found


def test_reconstruction_bound():
    rng = np.random.default_rng(11)
    grid = ss.Grid([[0.0, 1.0], [0.0, 1.0, 2.0]])
    mass = rng.random(grid.num_cells)
    mass /= mass.sum()
    star = ss.extended_distribution(ss.DiscreteDistribution(grid, mass.tolist()))
    f = ss.TabularFunction(grid, rng.random(grid.num_cells).tolist())
    g = ss.reconstruct_determined(star, f, 0)
    others = ss.FeatureSubset(0b10, 2)
    assert ss.is_determined(g, others, ss.support_mask(star), 1e-8).determined
    dist2 = sum(
        m * (a - b) ** 2 for m, a, b in zip(star.mass, f.values, g.values)
    )
    assert dist2 <= 4 * ss.aggregate_shap(star, star, f, 0) + 1e-9


def test_scramble_determinism():
    data = ss.Dataset([[0, 5], [1, 6], [2, 7], [3, 8]])
    a = ss.scramble_columns(data, 17)
    b = ss.scramble_columns(data, 17)
    assert a.rows == b.rows
    for j in range(2):
        assert sorted(r[j] for r in a.rows) == sorted(r[j] for r in data.rows)


def test_m_matrix_numpy_interop():
    report = ss.subset_moment_matrix(3)
    M = np.asarray(report.matrix)
    assert M.shape == (3, 3)
    assert M[0, 0] == pytest.approx(0.5)
    assert M[0, 1] == pytest.approx(1 / 6)
    assert report.q_closed_form == pytest.approx(1 / 3)


def test_spectrum_and_operators():
    grid = ss.Grid([[0.0, 1.0], [0.0, 1.0]])
    dist = ss.DiscreteDistribution(grid, [0.4, 0.1, 0.2, 0.3])
    ops = ss.shap_operator_matrices(dist, 0)
    report = ss.spectrum_check(ops.include_feature, 2)
    assert not report.violation
    assert report.min_real >= 0.5 - 1e-8
    series = ss.derived_series(dist, 3)
    assert series.vanish_level is not None and series.vanish_level <= 3


def test_simplex_roundtrip():
    p = ss.LPProblem.box01(np.ones(2), np.ones((1, 2)), np.array([1.0]))
    sol = ss.solve_lp(p)
    assert sol.status == ss.LpStatus.OPTIMAL
    assert sol.objective == pytest.approx(1.0)


def test_check_battery_subset():
    results = ss.run_checks(["subset-moments"], seed=0)
    assert len(results) == 1
    assert results[0].pass_
