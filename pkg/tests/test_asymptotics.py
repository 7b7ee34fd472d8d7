import math

import numpy as np
import pytest

from ergphase.asymptotics import (
    TABLE_ROWS,
    Region,
    degeneracy_report,
    er_comparison,
    psi_approx,
    region,
    standard_tables,
    theta_approx,
    u_approx_closed_form,
)
from ergphase.distributions import bernoulli, beta, cumulant, uniform
from ergphase.exceptions import DomainError, UnsupportedDistribution
from ergphase.variational import ModelParams, maximizers, psi_infinity


SYMMETRIC = [bernoulli(0.5), uniform(), beta(2, 2)]


def shrinking(errors, floor=1e-10):
    # Exponentially small errors end up at rounding level; those count as converged.
    return all(b < a or b < floor for a, b in zip(errors, errors[1:]))


def test_region():
    assert region(ModelParams(-2.0, -4.0)) is Region.SPARSE
    assert region(ModelParams(-4.0, -6.0)) is Region.SPARSE
    assert region(ModelParams(1.0, 1.0)) is Region.NEARLY_COMPLETE
    assert region(ModelParams(-5.0, 6.0)) is Region.NEARLY_COMPLETE
    with pytest.raises(DomainError):
        region(ModelParams(-3.0, 3.0))


@pytest.mark.parametrize(
    "params, expected",
    [
        (ModelParams(-2.0, -4.0), -4.0),
        (ModelParams(3.0, 2.0), 14.0),
        (ModelParams(1.0, 1.0), 6.0),
        (ModelParams(1.0, 1.0, 3), 8.0),
    ],
)
def test_theta_approx(params, expected):
    assert theta_approx(params) == expected


def test_theta_approx_on_the_dividing_line():
    with pytest.raises(DomainError):
        theta_approx(ModelParams(-2.0, 2.0, 3))


@pytest.mark.parametrize(
    "dist, params, expected",
    [
        (bernoulli(0.5), ModelParams(-2.0, -4.0), math.exp(-4.0)),
        (bernoulli(0.5), ModelParams(1.0, 1.0), 1 - math.exp(-6.0)),
        (uniform(), ModelParams(-4.0, -6.0), 0.125),
        (uniform(), ModelParams(3.0, 2.0), 1 - 1 / 14),
    ],
)
def test_u_approx_closed_form(dist, params, expected):
    assert u_approx_closed_form(dist, params) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("dist", [beta(2, 2), bernoulli(0.3), beta(2, 5)])
def test_u_approx_isnt_universal(dist):
    with pytest.raises(UnsupportedDistribution):
        u_approx_closed_form(dist, ModelParams(-2.0, -4.0))


def test_psi_approx():
    assert psi_approx(uniform(), ModelParams(3.0, 2.0)) == 5.0
    assert psi_approx(uniform(), ModelParams(3.0, 2.0, 3)) == 5.0
    sparse = ModelParams(-2.0, -4.0)
    expected = 4.0 * (math.exp(-4.0) / (1 + math.exp(-4.0))) ** 2 + cumulant(bernoulli(0.5), -4.0) / 2
    assert psi_approx(bernoulli(0.5), sparse) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("dist", SYMMETRIC)
def test_theta_ratio_tends_to_one_when_sparse(dist):
    errors = []
    for t in (5.0, 10.0, 20.0, 40.0):
        report = degeneracy_report(dist, ModelParams(-2.0 * t, t))
        assert report.region is Region.SPARSE
        errors.append(report.theta_error)
    assert shrinking(errors)
    assert errors[-1] < 0.05


@pytest.mark.parametrize("dist", SYMMETRIC)
@pytest.mark.parametrize("direction", [(0.0, 1.0), (-0.5, 1.0)])
def test_theta_ratio_tends_to_one_when_nearly_complete(dist, direction):
    errors = []
    for t in (5.0, 10.0, 20.0, 40.0):
        params = ModelParams(direction[0] * t, direction[1] * t)
        report = degeneracy_report(dist, params)
        assert report.region is Region.NEARLY_COMPLETE
        errors.append(report.theta_error)
    assert shrinking(errors)
    assert errors[-1] < 0.05


@pytest.mark.parametrize("dist", SYMMETRIC)
def test_psi_ratio_tends_to_one_when_nearly_complete(dist):
    ratios = []
    for t in (1.0, 2.0, 4.0, 8.0):
        params = ModelParams(3.0 * t, 2.0 * t)
        ratios.append(psi_infinity(dist, params) / psi_approx(dist, params))
    gaps = [abs(ratio - 1) for ratio in ratios]
    assert shrinking(gaps)
    assert gaps[-1] < 0.1


@pytest.mark.parametrize("dist", SYMMETRIC)
def test_sparse_psi_approaches_its_approximation(dist):
    gaps = []
    for t in (2.0, 4.0, 8.0):
        params = ModelParams(-2.0 * t, -t)
        gaps.append(abs(psi_infinity(dist, params) - psi_approx(dist, params)))
    assert shrinking(gaps)


def test_u_isnt_universal():
    params = ModelParams(-6.0, -6.0)
    u_bernoulli = maximizers(bernoulli(0.5), params).u_values[0]
    u_uniform = maximizers(uniform(), params).u_values[0]
    assert abs(u_bernoulli - u_uniform) > 1e-6


@pytest.mark.parametrize("dist", SYMMETRIC)
@pytest.mark.parametrize("beta2", [0.5, 3.0])
def test_free_energy_is_nonnegative_without_edge_weight(dist, beta2):
    assert psi_infinity(dist, ModelParams(0.0, beta2)) >= 0.0


class TestErComparison:
    def test_coincide_without_interaction(self):
        comparison = er_comparison(ModelParams(0.7, 0.0))
        assert comparison.psi_exp == comparison.psi_er
        assert comparison.gap == 0.0

    def test_nearly_complete_gap(self):
        comparison = er_comparison(ModelParams(1.0, 1.0))
        assert comparison.u == pytest.approx(0.998, abs=0.0005)
        assert comparison.gap == pytest.approx(-comparison.u**2, abs=1e-12)
        assert comparison.gap == pytest.approx(-0.996, abs=0.001)

    @pytest.mark.parametrize("u", [0.01, 0.3, 0.9])
    @pytest.mark.parametrize("p", [2, 3])
    def test_gap_identity(self, u, p):
        params = ModelParams(-1.0, 2.5, p)
        comparison = er_comparison(params, u)
        assert comparison.gap == pytest.approx((1 - p) * 2.5 * u**p, abs=1e-12)
        assert comparison.psi_er == pytest.approx(math.log1p(math.exp(2 * comparison.beta_prime)) / 2, abs=1e-12)

    def test_matches_free_energy(self):
        rng = np.random.default_rng(42)
        for beta1, beta2 in zip(rng.uniform(-4.0, 1.0, 20), rng.uniform(0.0, 1.5, 20)):
            params = ModelParams(beta1, beta2)
            comparison = er_comparison(params)
            assert comparison.psi_exp_probability == pytest.approx(
                psi_infinity(bernoulli(0.5), params), abs=1e-8
            )

    def test_domain(self):
        with pytest.raises(DomainError):
            er_comparison(ModelParams(1.0, -1.0))
        with pytest.raises(DomainError):
            er_comparison(ModelParams(1.0, 1.0), 1.0)


@pytest.fixture(scope="module")
def tables():
    return standard_tables()


@pytest.mark.parametrize(
    "index, theta_opt, u_opt",
    [(0, -4.23, 0.014), (1, 5.99, 0.998), (2, -10.32, 0.097), (3, 13.40, 0.925)],
)
def test_published_rows(tables, index, theta_opt, u_opt):
    report = tables[index]
    assert report.theta_opt == pytest.approx(theta_opt, abs=0.01)
    assert report.u_opt == pytest.approx(u_opt, abs=0.001)
    assert float(report.as_row()[2]) == pytest.approx(theta_opt, abs=0.01)


def test_rows_follow_the_table_definition(tables):
    assert len(tables) == len(TABLE_ROWS)
    for report, (spec, beta1, beta2) in zip(tables, TABLE_ROWS):
        assert str(report.dist) == spec
        assert (report.params.beta1, report.params.beta2) == (beta1, beta2)


def test_report_fields(tables):
    report = tables[2]
    assert report.region is Region.SPARSE
    assert report.theta_approx == -8.0
    assert report.u_approx == 0.125
    assert report.theta_error == pytest.approx(abs(-8.0 - report.theta_opt) / abs(report.theta_opt))
    row = report.as_row()
    assert row[:2] == ["-4", "-6"]
    assert row[3] == "0.097"
    assert row[5] == "0.125"
    assert row[-1] == "sparse"


def test_report_without_closed_form():
    report = degeneracy_report(beta(2, 2), ModelParams(3.0, 2.0))
    assert report.u_approx is None
    assert report.u_error is None
    assert report.as_row()[5] == ""
    assert report.region is Region.NEARLY_COMPLETE
