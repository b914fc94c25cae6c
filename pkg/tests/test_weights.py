import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from bergman.errors import DomainError
from bergman.geometry import UNIT_DISC, lens_area, sample
from bergman.norms import WeightSpec
from bergman.weights import (
    IteratedLogWeight,
    TentSpec,
    bb_constant,
    bb_constant_iterated,
    default_centers,
    h_values,
    iterated_log_eval,
    iterated_log_integral,
    power_weight,
    radial_weight,
    tent_contains,
    tent_volume,
)


def test_tent_over_origin_is_the_disc():
    tent = TentSpec(0)
    assert tent.height == 1.0
    assert tent_volume(tent) == pytest.approx(math.pi)
    assert tent_contains(tent, [0.0, 0.99j, 1.0]).tolist() == [True, True, False]


def test_tent_volume_matches_sampled_fraction():
    tent = TentSpec(0.5j)
    count = 100_000
    points = sample(UNIT_DISC, count, seed=21).points[:, 0]
    fraction = tent_contains(tent, points).mean()
    expected = tent_volume(tent) / math.pi
    sigma = math.sqrt(expected * (1 - expected) / count)
    assert abs(fraction - expected) < 4 * sigma
    assert tent_volume(tent) == pytest.approx(lens_area(1.0, 1.0, 0.5))


def test_tent_center_must_be_inside():
    with pytest.raises(DomainError):
        TentSpec(1.0)


def test_default_centers():
    centers = default_centers()
    assert len(centers) == 33
    assert centers[0] == 0
    assert max(abs(c) for c in centers) == pytest.approx(0.999)


def test_iterated_log_integral_j1():
    # 2 pi int_0^inf (1 + t)^-2 dt
    assert iterated_log_integral(IteratedLogWeight(1, -2.0)) == pytest.approx(2 * math.pi, rel=1e-6)


def test_iterated_log_integral_j2():
    # v = log(2 + t) turns the h_2 tail into (1 + v)^-2
    value, _ = quad(lambda v: math.exp(v) / (math.expm1(v) * (1 + v) ** 2), math.log(2.0), math.inf, epsrel=1e-12)
    assert iterated_log_integral(IteratedLogWeight(2, -2.0)) == pytest.approx(2 * math.pi * value, rel=1e-6)


def test_iterated_log_eval_and_h_values():
    w = IteratedLogWeight(1, -2.0)
    r = math.exp(-1.0)
    assert iterated_log_eval(w, r) == pytest.approx(r ** -2 / 4)
    assert h_values(2, 1.0) == pytest.approx([1.0, math.log(2.0) + 1.0])
    with pytest.raises(DomainError):
        iterated_log_eval(w, 0.0)
    with pytest.raises(DomainError):
        h_values(1, 1.5j)


@pytest.mark.parametrize("j,alpha", [(1, -1.0), (0, -2.0)])
def test_iterated_log_weight_validation(j, alpha):
    with pytest.raises(DomainError):
        IteratedLogWeight(j, alpha)


def test_small_power_weight_is_in_b43():
    result = bb_constant(power_weight(1.0 / 3.0), 4.0 / 3.0)
    assert result.converged
    assert math.isfinite(result.value)
    # Jensen keeps every tent product at or above one
    assert result.value >= 1.0
    assert len(result.rows) == len(default_centers())


def test_large_power_weight_fails_b43():
    # the dual weight |w|^-2 is not locally integrable at the origin
    result = bb_constant(power_weight(2.0 / 3.0), 4.0 / 3.0)
    assert result.diverged
    assert math.isinf(result.value)
    assert result.center == 0


@pytest.mark.slow
@pytest.mark.parametrize("j", [1, 2])
def test_iterated_weights_have_finite_b43(j):
    result = bb_constant_iterated(j, -2.0)
    assert not result.diverged
    assert math.isfinite(result.value)
    assert result.p == pytest.approx(4.0 / 3.0)


def test_bb_constant_argument_errors():
    with pytest.raises(DomainError):
        bb_constant(power_weight(0.1), 1.0)
    opaque = WeightSpec(lambda pts: np.ones(len(pts)), "opaque")
    with pytest.raises(DomainError):
        bb_constant(opaque, 4.0 / 3.0)
    with pytest.raises(DomainError):
        bb_constant(power_weight(0.1), 4.0 / 3.0, center_grid=[])


def test_tents_shrink_along_a_ray():
    phase = np.exp(0.7j)
    radii = np.linspace(0.0, 0.99, 34)
    volumes = [tent_volume(TentSpec(r * phase)) for r in radii]
    assert all(b < a for a, b in zip(volumes, volumes[1:]))
    pts = sample(UNIT_DISC, 20_000, seed=4).points[:, 0]
    for inner, outer in zip(radii[1:], radii[2:]):
        small = tent_contains(TentSpec(outer * phase), pts)
        large = tent_contains(TentSpec(inner * phase), pts)
        assert not np.any(small & ~large)


def test_h_values_are_at_least_one_and_move_toward_the_fixed_point():
    # h -> log(h + 1) + 1 has one fixed point; iterates approach it monotonically
    fixed = brentq(lambda h: math.log(h + 1.0) + 1.0 - h, 1.5, 3.0)
    for r in np.geomspace(1e-12, 1.0, 40):
        hs = h_values(6, r)
        assert min(hs) >= 1.0
        for a, b in zip(hs, hs[1:]):
            assert (b - a) * (a - fixed) <= 1e-12
            if a >= fixed:
                assert b <= a
    assert h_values(2, 1.0)[1] > h_values(2, 1.0)[0]


def _scaled_power_weight(c, gamma):
    return radial_weight(lambda r: c * r ** gamma, f"{c:g}|z1|^{gamma:g}", 0, gamma, lambda t: np.full_like(t, math.log(c)))


def test_bb_constant_ignores_scaling():
    centers = [0j, 0.5, 0.9j, -0.99]
    plain = bb_constant(power_weight(1.0 / 3.0), 4.0 / 3.0, centers)
    scaled = bb_constant(_scaled_power_weight(7.0, 1.0 / 3.0), 4.0 / 3.0, centers)
    assert scaled.value == pytest.approx(plain.value, rel=1e-9)


def test_bb_ratio_depends_only_on_center_modulus():
    centers = [0.9 * np.exp(1j * theta) for theta in (0.0, 1.0, 2.5, math.pi, 5.0)]
    result = bb_constant(power_weight(-0.5), 1.5, centers)
    ratios = [row.ratio for row in result.rows]
    assert ratios == pytest.approx([ratios[0]] * len(ratios), rel=1e-12)
