import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergphase.distributions import (
    Kind,
    assumption_zero_count,
    assumption_zeros,
    bernoulli,
    beta,
    cumulant,
    cumulant_derivatives,
    discrete,
    parse_distribution,
    sample_weight,
    sample_weights,
    theta_limit,
    uniform,
)
from ergphase.exceptions import (
    DegenerateDistribution,
    DomainError,
    InvalidDistribution,
    InvalidSpec,
    OverflowGuard,
    UnsupportedDistribution,
)


SYMMETRIC = [bernoulli(0.5), uniform(), beta(2, 2)]

thetas = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


def test_bernoulli_cumulant_is_log_of_mgf():
    dist = bernoulli(0.3)
    for theta in (-5.0, -0.1, 0.7, 12.0):
        expected = math.log(0.7 + 0.3 * math.exp(theta))
        assert cumulant(dist, theta) == pytest.approx(expected, rel=1e-14)


def test_uniform_cumulant_is_log_of_mgf():
    dist = uniform()
    for theta in (-30.0, -1.0, 0.15, 0.5, 3.0, 40.0):
        expected = math.log(math.expm1(theta) / theta)
        assert cumulant(dist, theta) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("dist", SYMMETRIC + [bernoulli(0.2), discrete({0: 0.2, 0.3: 0.5, 1: 0.3})])
def test_derivatives_at_zero_are_moments(dist):
    k0, k1, k2, k3 = cumulant_derivatives(dist, 0.0)
    assert k0 == 0.0
    assert k1 == pytest.approx(dist.mean, abs=1e-12)
    assert k2 == pytest.approx(dist.variance, abs=1e-12)


def test_beta_moments():
    dist = beta(2, 2)
    assert dist.mean == 0.5
    assert dist.variance == pytest.approx(1 / 20)
    assert cumulant_derivatives(dist, 0.0).k2 == pytest.approx(1 / 20, abs=1e-12)


@pytest.mark.parametrize("dist", [bernoulli(0.5), uniform(), bernoulli(0.1)])
def test_closed_form_matches_numeric_path(dist):
    theta = np.linspace(-50.0, 50.0, 401)
    closed = cumulant_derivatives(dist, theta, method="closed")
    numeric = cumulant_derivatives(dist, theta, method="numeric")
    for c, n in zip(closed, numeric):
        np.testing.assert_allclose(c, n, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("dist", [bernoulli(0.5), uniform(), bernoulli(0.1)])
def test_closed_form_matches_numeric_path_closely(dist):
    theta = np.linspace(-30.0, 30.0, 241)
    closed = cumulant_derivatives(dist, theta, method="closed")
    numeric = cumulant_derivatives(dist, theta, method="numeric")
    for c, n in zip(closed, numeric):
        np.testing.assert_allclose(c, n, rtol=1e-10, atol=1e-12)


def test_uniform_series_joins_closed_form():
    dist = uniform()
    below = cumulant_derivatives(dist, np.array([0.2 - 1e-12]))
    above = cumulant_derivatives(dist, np.array([0.2 + 1e-12]))
    for b, a in zip(below, above):
        np.testing.assert_allclose(b, a, rtol=1e-9, atol=1e-12)


def test_discrete_with_two_atoms_is_bernoulli():
    theta = np.linspace(-20.0, 20.0, 81)
    for d, b in zip(
        cumulant_derivatives(discrete({0: 0.5, 1: 0.5}), theta),
        cumulant_derivatives(bernoulli(0.5), theta),
    ):
        np.testing.assert_allclose(d, b, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("dist", SYMMETRIC)
@given(theta=thetas)
@settings(deadline=None, max_examples=50)
def test_symmetric_cumulant_reflection(dist, theta):
    # X and 1 - X have the same law, so K(-theta) = K(theta) - theta.
    assert cumulant(dist, -theta) == pytest.approx(cumulant(dist, theta) - theta, abs=1e-9)


@pytest.mark.parametrize("dist", SYMMETRIC + [beta(2, 5), discrete({0.1: 0.6, 0.9: 0.4})])
def test_cumulant_is_convex_and_mean_increasing(dist):
    theta = np.linspace(-20.0, 20.0, 401)
    _, k1, k2, _ = cumulant_derivatives(dist, theta)
    assert np.all(k2 > 0)
    assert np.all(np.diff(k1) > 0)
    lo, hi = dist.support
    assert np.all((k1 > lo) & (k1 < hi))


def test_scalar_and_array_shapes():
    dist = uniform()
    scalar = cumulant_derivatives(dist, 1.5)
    assert all(isinstance(value, float) for value in scalar)
    array = cumulant_derivatives(dist, np.zeros((2, 3)))
    assert all(value.shape == (2, 3) for value in array)


def test_derivatives_match_finite_differences():
    dist = beta(2, 5)
    theta, h = 3.0, 1e-4
    k0, k1, k2, k3 = cumulant_derivatives(dist, np.array([theta - h, theta, theta + h]))
    assert (k0[2] - k0[0]) / (2 * h) == pytest.approx(k1[1], rel=1e-6)
    assert (k1[2] - k1[0]) / (2 * h) == pytest.approx(k2[1], rel=1e-6)
    assert (k2[2] - k2[0]) / (2 * h) == pytest.approx(k3[1], rel=1e-5)


def test_large_tilts_stay_finite():
    for dist in [bernoulli(0.5), discrete({0: 0.5, 1: 0.5}), beta(2, 2)]:
        k0, k1, k2, k3 = cumulant_derivatives(dist, np.array([-650.0, 650.0]))
        assert np.all(np.isfinite(k0)) and np.all(np.isfinite(k1))
        assert np.all(np.isfinite(k2)) and np.all(np.isfinite(k3))


@pytest.mark.parametrize(
    "dist, tilt, tol",
    [
        (bernoulli(0.5), 40.0, 1e-3),
        (discrete({0: 0.5, 1: 0.5}), 40.0, 1e-3),
        (discrete({0: 0.25, 0.5: 0.5, 1: 0.25}), 40.0, 1e-3),
        # Densities decay like 1/|theta| in the tilt.
        (uniform(), 200.0, 5e-2),
        (beta(2, 2), 200.0, 5e-2),
    ],
)
def test_large_tilts_concentrate_on_the_endpoints(dist, tilt, tol):
    low = cumulant_derivatives(dist, -tilt)
    assert 0.0 < low.k1 < tol
    assert 0.0 < low.k2 < tol
    high = cumulant_derivatives(dist, tilt)
    assert abs(high.k1 - 1.0) < tol
    assert 0.0 < high.k2 < tol


def test_overflow_guard():
    with pytest.raises(OverflowGuard) as raised:
        cumulant(beta(2, 2), 701.0)
    assert raised.value.limit == 700.0
    with pytest.raises(OverflowGuard):
        cumulant(bernoulli(0.5), -701.0, method="numeric")
    # The closed forms are written with exp(-|theta|) and go further.
    assert cumulant(uniform(), 5000.0) == pytest.approx(5000.0 - math.log(5000.0))
    assert theta_limit(uniform()) == 1e4
    assert theta_limit(uniform(), "numeric") == 700.0


def test_non_finite_theta():
    with pytest.raises(DomainError):
        cumulant(uniform(), math.nan)
    with pytest.raises(DomainError):
        cumulant(uniform(), np.array([0.0, math.inf]))


def test_closed_form_unavailable_for_beta():
    with pytest.raises(UnsupportedDistribution):
        cumulant(beta(2, 3), 1.0, method="closed")


def test_quadrature_node_cap_is_logged(caplog):
    # The density of beta(0.3, 0.3) is singular at both ends.
    dist = beta(0.3, 0.3, quadrature_nodes=4096)
    with caplog.at_level(logging.WARNING, logger="ergphase.distributions"):
        value = cumulant_derivatives(dist, 1.0)
    assert math.isfinite(value.k1)
    assert "stopped at 16384 nodes" in caplog.text


@pytest.mark.parametrize(
    "factory",
    [
        lambda: bernoulli(0.0),
        lambda: bernoulli(1.0),
        lambda: discrete({0.4: 1.0}),
        lambda: discrete({0.4: 1.0, 0.6: 0.0}),
    ],
)
def test_degenerate_distributions(factory):
    with pytest.raises(DegenerateDistribution):
        factory()


@pytest.mark.parametrize(
    "factory",
    [
        lambda: beta(0, 1),
        lambda: beta(1, -2),
        lambda: discrete({0: 0.5, 1.5: 0.5}),
        lambda: discrete({0: 0.5, 1: 0.6}),
    ],
)
def test_invalid_distributions(factory):
    with pytest.raises(InvalidDistribution):
        factory()


def test_symmetry_declaration():
    assert bernoulli(0.5).symmetric
    assert not bernoulli(0.4).symmetric
    assert beta(3, 3).symmetric
    assert not beta(2, 3).symmetric
    assert discrete({0: 0.25, 0.5: 0.5, 1: 0.25}).symmetric
    assert not discrete({0: 0.25, 0.4: 0.5, 1: 0.25}).symmetric


@pytest.mark.parametrize(
    "spec, kind, mean",
    [
        ("bernoulli:q=0.5", Kind.BERNOULLI, 0.5),
        ("bernoulli:q=0.25", Kind.BERNOULLI, 0.25),
        ("uniform", Kind.UNIFORM, 0.5),
        (" beta:a=2,b=2 ", Kind.BETA, 0.5),
        ("beta:b=6,a=2", Kind.BETA, 0.25),
        ("discrete:0=0.5,1=0.5", Kind.DISCRETE, 0.5),
        ("discrete:0=0.2,0.5=0.3,1=0.5", Kind.DISCRETE, 0.65),
    ],
)
def test_parse_distribution(spec, kind, mean):
    dist = parse_distribution(spec)
    assert dist.kind is kind
    assert dist.mean == pytest.approx(mean)
    assert parse_distribution(str(dist)) == dist


@pytest.mark.parametrize(
    "spec",
    [
        "",
        "bernoulli",
        "bernoulli:q=2",
        "bernoulli:q=0",
        "bernoulli:p=0.5",
        "bernoulli:q=0.5,q=0.5",
        "bernoulli:q=nan",
        "beta:a=2",
        "beta:a=x,b=2",
        "uniform:a=1",
        "gamma:k=1",
        "discrete:0=1",
        "discrete:0=0.5,0=0.5",
        "discrete:0=0.5;1=0.5",
    ],
)
def test_parse_distribution_rejects(spec):
    with pytest.raises(InvalidSpec):
        parse_distribution(spec)


@pytest.mark.parametrize("dist", SYMMETRIC + [beta(2, 5), bernoulli(0.1)])
def test_sample_weights(dist):
    rng = np.random.default_rng(1)
    weights = sample_weights(dist, rng, 100_000)
    assert weights.shape == (100_000,)
    assert np.all((weights >= 0) & (weights <= 1))
    assert weights.mean() == pytest.approx(dist.mean, abs=0.01)
    assert weights.var() == pytest.approx(dist.variance, abs=0.01)
    assert 0.0 <= sample_weight(dist, rng) <= 1.0


def test_sample_weights_discrete_atoms():
    dist = discrete({0.2: 0.5, 0.7: 0.5})
    weights = sample_weights(dist, np.random.default_rng(0), 1000)
    assert set(np.unique(weights)) == {0.2, 0.7}


@pytest.mark.parametrize("dist", SYMMETRIC)
def test_single_assumption_zero_at_origin_for_symmetric_p2(dist):
    zeros = assumption_zeros(dist, 2)
    assert len(zeros) == 1
    assert zeros[0] == pytest.approx(0.0, abs=1e-9)


def test_assumption_zero_for_bernoulli_p3():
    # h = s^2 (1 - s) (2 - 3 s) with s = K'(theta) vanishes at s = 2/3.
    zeros = assumption_zeros(bernoulli(0.5), 3)
    assert zeros == [pytest.approx(math.log(2.0), abs=1e-9)]


@pytest.mark.parametrize("dist", SYMMETRIC + [beta(2, 5), bernoulli(0.3)])
@pytest.mark.parametrize("p", [2, 3])
def test_assumption_zero_count(dist, p):
    assert assumption_zero_count(dist, p) == 1


def test_assumption_zero_count_with_explicit_range():
    assert assumption_zero_count(bernoulli(0.5), 2, -30.0, 30.0, 10_000) == 1
    assert assumption_zero_count(bernoulli(0.5), 2, 1.0, 30.0, 10_000) == 0


@pytest.mark.parametrize(
    "args",
    [(1, -40.0, 40.0, 10_000), (2, 5.0, 5.0, 10_000), (2, -1.0, 1.0, 10)],
)
def test_assumption_zero_count_domain(args):
    p, lo, hi, grid = args
    with pytest.raises(DomainError):
        assumption_zero_count(bernoulli(0.5), p, lo, hi, grid)
