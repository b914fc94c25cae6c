import math

import numpy as np
import pytest

from bergman.errors import DomainError
from bergman.sweeps import (
    compare_log_weight_norm,
    disc_weak11_sweep,
    fit_growth,
    hartogs_orlicz_sweep,
    polydisc_orlicz_check,
    weak11_failure_sweep,
    weak43_failure_sweep,
    weak44_bound_check,
    weighted_weak_check,
)


def test_fit_growth_recovers_lines():
    x = np.linspace(1.0, 5.0, 9)
    fit = fit_growth(x, 2 * x + 1, "x", "y")
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.r_squared == pytest.approx(1.0)
    power = fit_growth(x, 3 * x ** 0.5, "x", "y", log_x=True, log_y=True)
    assert power.slope == pytest.approx(0.5)
    assert power.tail_slope == pytest.approx(0.5)
    with pytest.raises(DomainError):
        fit_growth([1.0], [1.0], "x", "y")


@pytest.mark.slow
def test_weak11_ratio_grows_logarithmically():
    result = weak11_failure_sweep()
    assert not result.flagged
    assert result.summary["monotone"] == 1.0
    fit = result.fits["ratio"]
    assert fit.slope > 0
    assert fit.r_squared > 0.95


def test_disc_contrast_stays_bounded():
    result = disc_weak11_sweep()
    assert not result.flagged
    assert result.summary["max_ratio"] < 1.0


def test_weak11_rejects_bad_s():
    with pytest.raises(DomainError):
        weak11_failure_sweep([0.5, 1.0])
    with pytest.raises(DomainError):
        weak11_failure_sweep([0.9, 0.5])


def test_weak43_ratio_grows_like_lambda_to_one_thirtieth():
    result = weak43_failure_sweep()
    assert not result.flagged
    assert result.fits["ratio"].tail_slope == pytest.approx(1.0 / 30.0, abs=0.005)
    assert result.summary["constant_over_quoted"] == pytest.approx(2.0, rel=1e-6)
    assert result.summary["coupled"] == 1.0


def test_weak43_at_fixed_p_decays():
    # P f_2 = 1/z2, so the ratio is a multiple of lam^(4/3 - 4)
    result = weak43_failure_sweep(np.geomspace(10.0, 1e3, 9), p=2.0)
    assert result.fits["ratio"].slope == pytest.approx(-8.0 / 3.0, rel=1e-9)
    assert result.summary["coupled"] == 0.0


def test_weak43_coupling_needs_four_decades():
    with pytest.raises(DomainError):
        weak43_failure_sweep(np.geomspace(1e2, 1e5, 7))


@pytest.mark.slow
def test_weak44_ratios_show_no_trend():
    result = weak44_bound_check()
    assert math.isfinite(result.summary["suite_max"])
    assert result.summary["max_abs_slope"] < 0.01


def test_log_weight_at_one_third_fails():
    result = weighted_weak_check(1.0 / 3.0, "log")
    assert result.experiment == "weighted"
    assert result.fits["ratio"].tail_slope == pytest.approx(1.0 / 30.0, abs=0.005)
    assert result.fits["norm_growth"].r_squared > 0.95


@pytest.mark.parametrize("eps,kind", [(0.2, "power"), (0.5, "log")])
def test_admissible_weights_give_decaying_ratios(eps, kind):
    result = weighted_weak_check(eps, kind, lam_grid=np.geomspace(10.0, 1e3, 9))
    assert math.isfinite(result.summary["suite_max"])
    assert all(fit.slope <= 1e-9 for fit in result.fits.values())


@pytest.mark.parametrize("eps,kind", [(0.0, "power"), (0.2, "log"), (0.5, "tent")])
def test_weighted_check_validation(eps, kind):
    with pytest.raises(DomainError):
        weighted_weak_check(eps, kind)


def test_hartogs_orlicz_slope_follows_alpha():
    alpha = 1.0 / 3.0
    result = hartogs_orlicz_sweep(alpha)
    assert result.summary["expected_slope"] == pytest.approx(1.0 / 30.0 - 0.3)
    assert result.fits["ratio"].slope < 0
    assert result.fits["ratio"].tail_slope == pytest.approx(result.summary["expected_slope"], abs=0.02)


def test_log_weight_norm_formula_matches_quadrature():
    formula, quadrature = compare_log_weight_norm()
    assert quadrature == pytest.approx(formula, rel=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("k", [0, 1])
def test_polydisc_orlicz_ratios_do_not_grow(k):
    s_grid = [1.0 - 2.0 ** -m for m in range(3, 9)]
    result = polydisc_orlicz_check(k, s_list=s_grid)
    assert result.summary["k"] == k
    assert math.isfinite(result.summary["weak_max"])
    assert all(r.ratio > 0 for r in result.rows if r.kind == "mapping")
    # L log+ L ratios level off while the L^1 ratios on the same grid keep climbing
    orlicz = result.fits["f_s"]
    assert orlicz.slope < 0.05
    assert abs(orlicz.tail_slope) < 0.15
    contrast = weak11_failure_sweep(s_grid).fits["ratio"]
    assert contrast.slope > 0.3
    assert contrast.slope > 3 * abs(orlicz.tail_slope)


def test_polydisc_orlicz_needs_integer_k():
    with pytest.raises(DomainError):
        polydisc_orlicz_check(0.5)
