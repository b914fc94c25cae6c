import math

import numpy as np
import pytest

from bergman.errors import DomainError
from bergman.families import (
    CounterexampleFamily,
    Coupling,
    FamilyKind,
    HartogsWeight,
    automorphism_samples,
    bidisc_superlevel_measure,
    closed_form_projection,
    disc_superlevel_measure,
    family_eval,
    family_handle,
    family_norm_power,
    hartogs_orlicz_modular,
    lambda_from_s,
    projection_constant,
    s_from_lambda,
)
from bergman.geometry import BIDISC, HARTOGS_TRIANGLE, CPoint, sample
from bergman.norms import lp_norm
from bergman.special import exp_integral_e1


@pytest.mark.parametrize("p", [1.4, 1.5, 2.0, 3.0])
def test_projection_constant_closed_form_matches_quadrature(p):
    family = CounterexampleFamily.fp_hartogs(p)
    closed = projection_constant(family)
    direct = projection_constant(family, "quadrature")
    assert closed.value == pytest.approx(direct.value, rel=1e-9)
    assert closed.value == pytest.approx(2 * closed.quoted_value, rel=1e-14)


def test_projection_constant_of_the_log_variant():
    family = CounterexampleFamily.fp_log_hartogs(2.0)
    # beta = 2 at p = 2
    expected = 2 * math.exp(2.0) * exp_integral_e1(2.0)
    assert projection_constant(family).value == pytest.approx(expected, rel=1e-12)
    assert projection_constant(family, "quadrature").value == pytest.approx(expected, rel=1e-9)


def test_projection_constant_errors():
    with pytest.raises(DomainError):
        projection_constant(CounterexampleFamily.fs_disc(0.5))
    with pytest.raises(DomainError):
        projection_constant(CounterexampleFamily.fp_hartogs(2.0), "guess")


def test_exponents_at_p_two():
    family = CounterexampleFamily.fp_hartogs(2.0)
    assert family.p == pytest.approx(2.0)
    assert family.beta == pytest.approx(2.0)
    assert family.p_conj == pytest.approx(2.0)
    assert family.gamma == pytest.approx(1.0)


def test_family_validation():
    with pytest.raises(DomainError):
        CounterexampleFamily.fs_bidisc(1.0)
    with pytest.raises(DomainError):
        CounterexampleFamily.fp_hartogs(4.0 / 3.0)


def test_coupling_helpers():
    assert lambda_from_s(s_from_lambda(250.0)) == pytest.approx(250.0, rel=1e-13)
    member = CounterexampleFamily.coupled(FamilyKind.FP_HARTOGS, Coupling.P_FROM_LAMBDA_POWER, 1e3)
    assert member.delta == pytest.approx(1e3 ** -0.9, rel=1e-12)
    assert member.lam == 1e3
    # exp(-lam^0.9) underflows; the log offset does not
    deep = CounterexampleFamily.coupled(FamilyKind.FP_HARTOGS, Coupling.P_FROM_LAMBDA_EXP, 1e6)
    assert deep.log_offset == pytest.approx(-(1e6 ** 0.9))
    assert math.isfinite(deep.log_beta)


@pytest.mark.parametrize(
    "kind,coupling,lam",
    [
        (FamilyKind.FP_HARTOGS, Coupling.LAMBDA_FROM_S, 10.0),
        (FamilyKind.FS_BIDISC, Coupling.P_FROM_LAMBDA_POWER, 10.0),
        (FamilyKind.FS_BIDISC, Coupling.LAMBDA_FROM_S, 0.05),
        (FamilyKind.FS_BIDISC, Coupling.NONE, 10.0),
        (FamilyKind.FP_HARTOGS, Coupling.P_FROM_LAMBDA_POWER, -1.0),
    ],
)
def test_bad_couplings(kind, coupling, lam):
    with pytest.raises(DomainError):
        CounterexampleFamily.coupled(kind, coupling, lam)


def test_family_eval_and_closed_form_projection():
    assert family_eval(CounterexampleFamily.fp_hartogs(2.0), CPoint.of(0, 0.5)) == pytest.approx(2.0)
    assert closed_form_projection(CounterexampleFamily.fs_disc(0.5), CPoint.of(0)) == pytest.approx(1.0)
    c = projection_constant(CounterexampleFamily.fp_hartogs(2.0)).value
    z = CPoint.of(0.1, 0.4j)
    assert closed_form_projection(CounterexampleFamily.fp_hartogs(2.0), z) == pytest.approx(c / 0.4j)


def test_automorphism_samples_preserve_mass():
    moduli = automorphism_samples(0.5)
    assert moduli.weights.sum() == pytest.approx(math.pi, rel=1e-10)
    assert (moduli.weights * moduli.values).sum() == pytest.approx(math.pi, rel=1e-10)


def test_bidisc_superlevel_below_the_minimum_is_everything():
    s = 0.5
    value, _ = bidisc_superlevel_measure(s, 0.5 * (1 + s) ** -4)
    assert value == pytest.approx(math.pi ** 2, rel=1e-6)


def test_bidisc_superlevel_matches_sampling():
    s, lam, count = 0.5, 4.0, 200_000
    pts = sample(BIDISC, count, seed=17).points
    image = np.abs(1 - s * pts[:, 0]) ** -2 * np.abs(1 - s * pts[:, 1]) ** -2
    fraction = (image > lam).mean()
    sigma = math.sqrt(fraction * (1 - fraction) / count)
    value, _ = bidisc_superlevel_measure(s, lam)
    assert abs(value / math.pi ** 2 - fraction) < 4 * sigma


def test_disc_superlevel_limits():
    assert disc_superlevel_measure(0.5, 0.1) == pytest.approx(math.pi)
    assert disc_superlevel_measure(0.5, 5.0) == 0.0


def test_weighted_closed_form_matches_quadrature():
    family = CounterexampleFamily.fp_log_hartogs(2.0)
    weight = HartogsWeight("log", 1.0 / 3.0)
    norm = lp_norm(family_handle(family), HARTOGS_TRIANGLE, 4.0 / 3.0, weight=weight.spec())
    assert norm.value ** (4.0 / 3.0) == pytest.approx(family_norm_power(family, 4.0 / 3.0, weight), rel=1e-6)


def test_nonintegrable_power_is_infinite():
    assert math.isinf(family_norm_power(CounterexampleFamily.fp_hartogs(2.0), 4.0))
    with pytest.raises(DomainError):
        family_norm_power(CounterexampleFamily.fs_disc(0.5))
    with pytest.raises(DomainError):
        HartogsWeight("tent")


def test_orlicz_modular_decreases():
    phi = hartogs_orlicz_modular(CounterexampleFamily.fp_hartogs(1.5), 1.0 / 3.0)
    values = [phi(lam) for lam in (0.25, 0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(values, values[1:]))
    with pytest.raises(DomainError):
        hartogs_orlicz_modular(CounterexampleFamily.fp_hartogs(1.5), 0.0)
    with pytest.raises(DomainError):
        hartogs_orlicz_modular(CounterexampleFamily.fp_log_hartogs(1.5), 0.5)
