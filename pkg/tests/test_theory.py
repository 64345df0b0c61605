import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from efebo.errors import ConfigError, DegenerateQuadratic, NoiseVarZero, SignConditionViolated
from efebo.theory import (
    LinearizationPoint,
    LocalExpansion,
    cross_entropy_monte_carlo,
    efe_bias,
    efe_objective,
    eig_identity_check,
    expected_kl_monte_carlo,
    kalman_identity_check,
    lcb_linearization,
    local_argmax,
    local_neighborhood,
    objective_gradient,
    quadratic_model_coeffs,
    ucb_linearization,
    unbiased_tau_sq,
)


def _expansion(
    *, g: float, v2: float, tau_sq: float, v0: float = 1.0, noise_var: float = 0.0
) -> LocalExpansion:
    return LocalExpansion(m=1.0, v0=v0, g=g, v2=v2, noise_var=noise_var, tau_sq=tau_sq)


@pytest.mark.parametrize(
    ("kwargs",),
    (
        ({"mu0": 0.0, "sigma0": 0.0, "y_star": 1.0, "tau_sq": 1.0},),
        ({"mu0": 0.0, "sigma0": 1.0, "y_star": 1.0, "tau_sq": 0.0},),
        ({"mu0": 0.0, "sigma0": 1.0, "y_star": 1.0, "tau_sq": 1.0, "noise_var": -0.1},),
    ),
)
def test_invalid_linearization_point(kwargs: dict[str, float]) -> None:
    with pytest.raises(ConfigError):
        LinearizationPoint(**kwargs)


def test_invalid_local_expansion() -> None:
    with pytest.raises(ConfigError):
        _expansion(g=1.0, v2=0.0, tau_sq=1.0, v0=0.0)
    with pytest.raises(ConfigError):
        _expansion(g=1.0, v2=0.0, tau_sq=-1.0)


# -- Linearization


def test_lcb_linearization() -> None:
    pt = LinearizationPoint(mu0=0.0, sigma0=1.0, y_star=1.0, tau_sq=1.0)
    coeffs = lcb_linearization(pt)
    assert (coeffs.a, coeffs.b, coeffs.beta) == pytest.approx((-1.0, 1.0, 1.0))

    fd_a, fd_b = objective_gradient(pt, epistemic=False)
    assert fd_a == pytest.approx(-1.0, abs=1e-6)
    assert fd_b == pytest.approx(1.0, abs=1e-6)


def test_lcb_beta_does_not_depend_on_tau_sq() -> None:
    base = lcb_linearization(LinearizationPoint(mu0=0.5, sigma0=0.3, y_star=2.0, tau_sq=1.5))
    doubled = lcb_linearization(LinearizationPoint(mu0=0.5, sigma0=0.3, y_star=2.0, tau_sq=3.0))
    assert doubled.a == pytest.approx(base.a / 2.0)
    assert doubled.b == pytest.approx(base.b / 2.0)
    assert doubled.beta == pytest.approx(base.beta)


@pytest.mark.parametrize(("y_star",), ((0.0,), (-1.0,)))
def test_lcb_sign_condition(y_star: float) -> None:
    with pytest.raises(SignConditionViolated):
        lcb_linearization(LinearizationPoint(mu0=0.0, sigma0=1.0, y_star=y_star, tau_sq=1.0))


def test_ucb_linearization() -> None:
    coeffs = ucb_linearization(LinearizationPoint(mu0=0.0, sigma0=1.0, y_star=3.0, tau_sq=4.0))
    assert (coeffs.a, coeffs.b, coeffs.beta) == pytest.approx((-0.75, -0.75, 1.0))


def test_ucb_linearization_matches_finite_differences() -> None:
    pt = LinearizationPoint(mu0=0.0, sigma0=0.8, y_star=3.0, tau_sq=4.0, noise_var=0.36)
    coeffs = ucb_linearization(pt)
    assert coeffs.a == pytest.approx(-0.75)
    assert coeffs.b == pytest.approx(0.8 * (0.25 - 1.0))
    fd_a, fd_b = objective_gradient(pt, epistemic=True)
    assert fd_a == pytest.approx(coeffs.a, rel=1e-6)
    assert fd_b == pytest.approx(coeffs.b, rel=1e-6)


def test_ucb_at_unbiased_tau_sq_is_greedy() -> None:
    pt = LinearizationPoint(mu0=0.0, sigma0=0.5, y_star=1.0, tau_sq=1.0, noise_var=0.75)
    coeffs = ucb_linearization(pt)
    assert coeffs.b == pytest.approx(0.0, abs=1e-15)
    assert coeffs.beta == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize(
    ("mu0", "tau_sq"),
    (
        (2.0, 4.0),
        (0.0, 0.5),
    ),
)
def test_ucb_sign_conditions(mu0: float, tau_sq: float) -> None:
    with pytest.raises(SignConditionViolated):
        ucb_linearization(LinearizationPoint(mu0=mu0, sigma0=1.0, y_star=1.0, tau_sq=tau_sq))


def test_efe_objective_needs_noise_for_epistemic_value() -> None:
    pt = LinearizationPoint(mu0=0.0, sigma0=1.0, y_star=1.0, tau_sq=1.0)
    assert efe_objective(0.0, 1.0, pt, epistemic=False) == pytest.approx(1.0)
    with pytest.raises(NoiseVarZero):
        efe_objective(0.0, 1.0, pt, epistemic=True)


# -- Information gain


@pytest.mark.parametrize(
    ("var_latent", "noise_var", "expected"),
    (
        (1.0, 1.0, 0.5 * math.log(2.0)),
        (4.0, 1.0, 0.5 * math.log(5.0)),
    ),
)
def test_eig_identity_examples(var_latent: float, noise_var: float, expected: float) -> None:
    epistemic, mutual_information = eig_identity_check(var_latent, noise_var)
    assert epistemic == pytest.approx(expected)
    assert mutual_information == pytest.approx(expected)


@settings(max_examples=1000, deadline=None)
@given(log_var=st.floats(-3.0, 3.0), log_noise=st.floats(-3.0, 3.0))
def test_eig_identity(log_var: float, log_noise: float) -> None:
    epistemic, mutual_information = eig_identity_check(10.0**log_var, 10.0**log_noise)
    assert abs(epistemic - mutual_information) < 1e-12


def test_eig_identity_needs_latent_variance() -> None:
    with pytest.raises(ConfigError):
        eig_identity_check(0.0, 1.0)


def test_kalman_identity() -> None:
    analytic, mc = kalman_identity_check(1.0, 1.0, 10**6, np.random.default_rng(0))
    assert analytic == 0.5
    assert abs(mc - 0.5) < 5e-3
    assert kalman_identity_check(0.0, 1.0, 10, np.random.default_rng(0)) == (0.0, 0.0)


@pytest.mark.parametrize("var_latent", (0.1, 1.0, 10.0))
@pytest.mark.parametrize("noise_var", (0.1, 1.0, 10.0))
def test_expected_kl_closed_form(var_latent: float, noise_var: float) -> None:
    mc = expected_kl_monte_carlo(var_latent, noise_var, 10**6, np.random.default_rng(1))
    assert abs(mc - 0.5 * math.log1p(var_latent / noise_var)) < 5e-3


def test_cross_entropy_closed_form() -> None:
    mc = cross_entropy_monte_carlo(0.0, 1.0, 1.0, 2.0, 10**6, np.random.default_rng(2))
    assert abs(mc - (1.0 + 1.0) / 4.0) < 5e-3


# -- Local convergence


def test_quadratic_model_coeffs() -> None:
    lin, quad = quadratic_model_coeffs(_expansion(g=2.0, v2=0.5, tau_sq=1.0))
    assert lin == 0.0
    assert quad == pytest.approx(-1.0)

    assert quadratic_model_coeffs(_expansion(g=0.0, v2=0.5, tau_sq=1.0)) == (0.0, 0.0)

    lin, quad = quadratic_model_coeffs(_expansion(g=1.0, v2=2.0, tau_sq=2.0))
    assert lin == pytest.approx(0.25)
    assert quad == pytest.approx(0.0, abs=1e-15)


def test_efe_bias_degenerate_quadratic() -> None:
    with pytest.raises(DegenerateQuadratic):
        efe_bias(_expansion(g=1.0, v2=2.0, tau_sq=2.0))


def test_efe_bias_vanishes_at_unbiased_tau_sq() -> None:
    exp = _expansion(g=0.7, v2=-0.3, tau_sq=1.25, v0=1.0, noise_var=0.25)
    assert unbiased_tau_sq(exp) == 1.25
    assert exp.delta == 0.0
    assert efe_bias(exp) == 0.0


def test_efe_bias_without_slope() -> None:
    exp = _expansion(g=0.0, v2=1.0, tau_sq=1.0 / 1.1)
    assert exp.delta == pytest.approx(0.1)
    assert efe_bias(exp) == 0.0


def test_efe_bias_is_the_stationary_point_of_the_quadratic_model() -> None:
    exp = _expansion(g=1.0, v2=0.0, tau_sq=2.0)
    assert exp.delta == -0.5
    bias = efe_bias(exp)
    assert bias == pytest.approx(0.5, abs=1e-10)

    lin, quad = quadratic_model_coeffs(exp)
    h = local_argmax(lambda hs: lin * hs + quad * hs * hs, radius=1.0, n=2001)
    assert h == pytest.approx(bias, abs=1e-3)


def test_efe_bias_changes_sign_across_unbiased_tau_sq() -> None:
    exp = _expansion(g=0.5, v2=0.2, tau_sq=1.0, v0=0.8, noise_var=0.2)
    below = efe_bias(_expansion(g=0.5, v2=0.2, tau_sq=0.99, v0=0.8, noise_var=0.2))
    above = efe_bias(_expansion(g=0.5, v2=0.2, tau_sq=1.01, v0=0.8, noise_var=0.2))
    assert abs(efe_bias(exp)) < 1e-12
    assert below * above < 0


def test_local_neighborhood() -> None:
    assert local_neighborhood(_expansion(g=0.0, v2=0.0, tau_sq=1.0)) == 0.01
    assert local_neighborhood(_expansion(g=4.0, v2=0.0, tau_sq=1.0)) == pytest.approx(0.0025)
    assert local_neighborhood(_expansion(g=0.5, v2=0.0, tau_sq=1.0)) == 0.01


def test_local_argmax() -> None:
    assert local_argmax(lambda hs: -((hs - 0.35) ** 2), radius=1.0, n=11) == pytest.approx(0.4)
    assert local_argmax(lambda hs: np.zeros_like(hs), radius=1.0, n=5) == -1.0
