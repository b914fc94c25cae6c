import math

import numpy as np
import pytest
from scipy.special import betaln, gamma, gammaln

from bergman.errors import DomainError
from bergman.forelli_rudin import (
    IntegralKind,
    Regime,
    circle_integral,
    circle_integral_closed,
    forelli_rudin,
    forelli_rudin_scan,
    regime,
)


def series(eps, delta, rho, terms=20_000):
    """pi sum ((c)_n / n!)^2 rho^2n B(n + 1, 1 - eps) with c = (2 - eps - delta) / 2."""
    c = (2.0 - eps - delta) / 2.0
    n = np.arange(terms, dtype=float)
    log_terms = 2 * (gammaln(n + c) - gammaln(c) - gammaln(n + 1)) + 2 * n * math.log(rho) + betaln(n + 1, 1 - eps)
    return math.pi * math.fsum(np.exp(log_terms))


@pytest.mark.parametrize("rho", [0.5, 0.9, 0.99])
def test_logarithmic_case_in_closed_form(rho):
    result = forelli_rudin(0.0, 0.0, rho)
    expected = math.pi / rho ** 2 * -math.log1p(-rho * rho)
    assert result.value == pytest.approx(expected, rel=1e-8)
    assert result.ratio == pytest.approx(math.pi / rho ** 2, rel=1e-8)


@pytest.mark.parametrize("eps,delta", [(0.0, 1.0), (0.0, -0.5), (0.5, 0.0), (0.5, -0.25)])
@pytest.mark.parametrize("rho", [0.9, 0.99])
def test_area_integral_matches_power_series(eps, delta, rho):
    result = forelli_rudin(eps, delta, rho)
    assert result.converged
    assert result.value == pytest.approx(series(eps, delta, rho), rel=1e-7)


def test_regimes():
    assert regime(1.0) == Regime.BOUNDED
    assert regime(0.0) == Regime.LOGARITHMIC
    assert regime(-0.5) == Regime.POWER


def test_bounded_regime_stays_between_pi_and_two_pi():
    # a_{0,1}(0) = pi and int_D |1 - eta|^-1 dV < 2 pi
    values = forelli_rudin_scan(0.0, 1.0)
    assert all(math.pi < v.ratio < 2 * math.pi for v in values)
    assert all(v.regime == Regime.BOUNDED for v in values)


def test_power_regime_ratio_approaches_its_limit():
    values = forelli_rudin_scan(0.0, -0.5)
    limit = math.pi * gamma(0.5) / gamma(1.25) ** 2
    assert values[-1].ratio == pytest.approx(limit, rel=0.1)
    assert all(v.regime == Regime.POWER for v in values)


def test_weighted_log_regime_grows_like_the_log():
    values = forelli_rudin_scan(0.5, 0.0)
    assert all(b.value > a.value for a, b in zip(values, values[1:]))
    assert all(v.regime == Regime.LOGARITHMIC for v in values)


@pytest.mark.parametrize("delta", [1.0, 0.0, -0.5])
@pytest.mark.parametrize("rho", [0.5, 0.99, 0.999])
def test_circle_integral_matches_hypergeometric_form(delta, rho):
    value, _ = circle_integral(delta, rho)
    assert value == pytest.approx(circle_integral_closed(delta, rho), rel=1e-8)


def test_circle_kind_through_the_entry_point():
    result = forelli_rudin(0.0, 1.0, 0.5j, IntegralKind.CIRCLE)
    assert result.value == pytest.approx(2 * math.pi)
    assert result.kind == IntegralKind.CIRCLE


def test_argument_errors():
    with pytest.raises(DomainError):
        forelli_rudin(0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        forelli_rudin(1.0, 0.0, 0.5)
