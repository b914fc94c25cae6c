import itertools
import math

import numpy as np
import pytest

from bergman.errors import DomainError
from bergman.families import CounterexampleFamily, family_handle, image_family_handle, projection_constant
from bergman.functions import FunctionHandle, constant, laurent_polynomial, monomial, product_handle
from bergman.geometry import BIDISC, HARTOGS_TRIANGLE, UNIT_DISC, CPoint, integrate, quadrature_rule
from bergman.projector import (
    MonomialIndex,
    SpectralCoefficients,
    admissible_indices,
    eval_projection,
    evaluate_coefficients,
    image_handle,
    monomial_norm_sq,
    project_abs,
    project_quadrature,
    project_series,
    suggested_truncation,
)


@pytest.mark.parametrize(
    "domain,exponents,expected",
    [
        (UNIT_DISC, (3,), math.pi / 4),
        (BIDISC, (1, 2), math.pi ** 2 / 6),
        (HARTOGS_TRIANGLE, (0, -1), math.pi ** 2),
        (HARTOGS_TRIANGLE, (1, 0), math.pi ** 2 / 6),
    ],
)
def test_monomial_norms(domain, exponents, expected):
    assert monomial_norm_sq(domain, MonomialIndex(exponents)) == pytest.approx(expected, rel=1e-15)


def test_inadmissible_indices_are_rejected():
    with pytest.raises(DomainError):
        monomial_norm_sq(HARTOGS_TRIANGLE, MonomialIndex((0, -2)))
    with pytest.raises(DomainError):
        monomial_norm_sq(UNIT_DISC, MonomialIndex((-1,)))
    assert len(admissible_indices(BIDISC, 3)) == 10


@pytest.mark.parametrize("domain", [UNIT_DISC, BIDISC])
def test_series_reproduces_holomorphic_polynomials(domain, rng):
    indices = [idx.exponents for idx in admissible_indices(domain, 8)]
    coefficients = rng.normal(size=len(indices)) + 1j * rng.normal(size=len(indices))
    zeros = (0,) * domain.dimension
    f = laurent_polynomial({(e, zeros): c for e, c in zip(indices, coefficients)}, domain.dimension)
    coeffs = project_series(domain, f, 8)
    errors = [abs(coeffs.coefficient(*e) - c) for e, c in zip(indices, coefficients)]
    assert max(errors) < 1e-10


def test_series_kills_antiholomorphic_parts():
    f = laurent_polynomial({((0,), (1,)): 1.0, ((0,), (0,)): 2.0, ((1,), (1,)): 1.0}, 1)
    coeffs = project_series(UNIT_DISC, f, 6)
    # P conj(z) = 0 and P |z|^2 = 1/2
    assert coeffs.coefficient(0) == pytest.approx(2.5, abs=1e-13)
    assert np.allclose(coeffs.values[1:], 0.0, atol=1e-13)


def test_fs_projection_matches_closed_form(bidisc_points):
    family = CounterexampleFamily.fs_bidisc(0.5)
    coeffs = project_series(BIDISC, family_handle(family), 64)
    series = evaluate_coefficients(coeffs, bidisc_points)
    exact = image_family_handle(family)(bidisc_points)
    assert np.max(np.abs(series - exact) / np.abs(exact)) < 1e-6


def test_fp_projection_is_a_multiple_of_inverse_z2(hartogs_points):
    family = CounterexampleFamily.fp_hartogs(1.5)
    coeffs = project_series(HARTOGS_TRIANGLE, family_handle(family), 8)
    scaled = evaluate_coefficients(coeffs, hartogs_points) * hartogs_points[:, 1]
    spread = np.max(np.abs(scaled - scaled[0])) / abs(scaled[0])
    assert spread < 1e-8
    constant_ = projection_constant(family)
    assert scaled[0].real == pytest.approx(constant_.value, rel=1e-6)
    # the half-sized constant travels alongside
    assert constant_.value / constant_.quoted_value == pytest.approx(2.0)


def test_factored_and_direct_series_agree():
    f = laurent_polynomial({((1,), (2,)): 1.0, ((3,), (0,)): 0.5j}, 1)
    direct = project_series(BIDISC, laurent_polynomial({((1, 2), (2, 0)): 1.0, ((3, 2), (0, 0)): 0.5j}, 2), 8)
    factored = project_series(BIDISC, product_handle(f, monomial((2,))), 8)
    assert np.allclose(direct.dense, factored.dense, atol=1e-12)


def test_fft_path_matches_polar_path():
    polar = laurent_polynomial({((2, 1), (0, 1)): 1.0, ((0, 1), (0, 0)): -2.0}, 2)
    opaque = FunctionHandle(polar.evaluator, 2, label="opaque")
    rule = quadrature_rule(BIDISC, 16, 16)
    a = project_series(BIDISC, polar, 6, rule)
    b = project_series(BIDISC, opaque, 6, rule)
    assert np.allclose(a.dense, b.dense, atol=1e-12)


def test_quadrature_path_agrees_with_series():
    family = CounterexampleFamily.fs_disc(0.5)
    f = family_handle(family)
    coeffs = project_series(UNIT_DISC, f, 64)
    for z in (CPoint.of(0.0), CPoint.of(0.4 - 0.3j), CPoint.of(-0.6j)):
        direct = project_quadrature(UNIT_DISC, f, z)
        assert direct.converged
        assert direct.value == pytest.approx(eval_projection(coeffs, z), rel=1e-6)


def test_absolute_projection_dominates():
    f = family_handle(CounterexampleFamily.fs_disc(0.3))
    coeffs = project_series(UNIT_DISC, f, 48)
    for z in (0.1, 0.5j, -0.3 + 0.4j, 0.7):
        point = CPoint.of(z)
        assert project_abs(UNIT_DISC, f, point).value >= abs(eval_projection(coeffs, point)) * (1 - 1e-9)


def test_coefficients_round_trip_through_dict():
    coeffs = project_series(HARTOGS_TRIANGLE, laurent_polynomial({((1, 0), (0, 2)): 1.0}, 2), 4)
    restored = SpectralCoefficients.from_dict(coeffs.to_dict())
    assert restored.truncation == coeffs.truncation
    assert np.allclose(restored.dense, coeffs.dense)


def test_image_handle_records_a_lone_monomial():
    coeffs = project_series(HARTOGS_TRIANGLE, constant(3.0, 2), 4)
    image = image_handle(coeffs)
    assert image.monomial is not None
    assert image.monomial.exponents == (0, 0)
    assert image.monomial.coefficient == pytest.approx(3.0)


def test_suggested_truncation_grows_toward_the_boundary():
    assert suggested_truncation(0.5) == 16
    assert suggested_truncation(0.9) > suggested_truncation(0.5)
    assert suggested_truncation(1 - 1e-9) == 512


def test_eval_projection_rejects_exterior_points():
    coeffs = project_series(UNIT_DISC, constant(1.0), 2)
    with pytest.raises(DomainError):
        eval_projection(coeffs, CPoint.of(1.5))


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        project_series(BIDISC, constant(1.0), 2)


def _random_disc_polynomial(rng, degree=3):
    return laurent_polynomial(
        {((a,), (b,)): complex(rng.normal(), rng.normal()) for a in range(degree + 1) for b in range(degree + 1)}, 1,
    )


def _inner(f, g, rule):
    h = FunctionHandle(lambda pts: f.evaluator(pts) * np.conj(g.evaluator(pts)), 1)
    return integrate(h, rule).value


def test_projection_is_self_adjoint_on_the_disc(rng):
    rule = quadrature_rule(UNIT_DISC, 32, 32)
    for _ in range(3):
        f, g = _random_disc_polynomial(rng), _random_disc_polynomial(rng)
        pf = image_handle(project_series(UNIT_DISC, f, 8, rule))
        pg = image_handle(project_series(UNIT_DISC, g, 8, rule))
        assert _inner(pf, g, rule) == pytest.approx(_inner(f, pg, rule), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("domain", [UNIT_DISC, BIDISC])
def test_projection_is_idempotent(domain, rng):
    d = domain.dimension
    exponents = list(itertools.product(range(3), repeat=d))
    f = laurent_polynomial(
        {(a, b): complex(rng.normal(), rng.normal()) for a in exponents for b in exponents}, d,
    )
    once = project_series(domain, f, 8)
    twice = project_series(domain, image_handle(once), 8)
    assert np.allclose(twice.dense, once.dense, atol=1e-10)


def _rotated(pts, rng):
    return pts * np.exp(1j * rng.uniform(0.0, 2 * math.pi, size=pts.shape[1]))[None, :]


def test_modulus_of_projection_is_rotation_invariant(bidisc_points, hartogs_points, rng):
    radial = laurent_polynomial({((1, 1), (1, 1)): 1.0, ((0, 2), (0, 2)): 0.5, ((0, 0), (0, 0)): -0.25}, 2)
    for domain, f, pts in (
        (BIDISC, radial, bidisc_points),
        (HARTOGS_TRIANGLE, family_handle(CounterexampleFamily.fp_hartogs(1.5)), hartogs_points),
    ):
        coeffs = project_series(domain, f, 8)
        before = np.abs(evaluate_coefficients(coeffs, pts))
        after = np.abs(evaluate_coefficients(coeffs, _rotated(pts, rng)))
        assert np.allclose(after, before, rtol=1e-12)
