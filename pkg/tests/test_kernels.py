import math

import numpy as np
import pytest

from bergman.errors import DomainError
from bergman.functions import FunctionHandle, monomial, product_handle
from bergman.geometry import BIDISC, HARTOGS_TRIANGLE, PUNCTURED_DISC, UNIT_DISC, CPoint, integrate, quadrature_rule, sample
from bergman.kernels import abs_kernel, bergman_kernel_values, kernel
from bergman.projector import project_quadrature


def test_disc_kernel_at_origin():
    assert kernel(UNIT_DISC, CPoint.of(0), CPoint.of(0)).value == pytest.approx(1 / math.pi)


def test_punctured_disc_shares_the_disc_kernel():
    z, w = CPoint.of(0.3 + 0.2j), CPoint.of(-0.1 + 0.5j)
    assert kernel(PUNCTURED_DISC, z, w).value == pytest.approx(kernel(UNIT_DISC, z, w).value, rel=1e-15)


def test_bidisc_kernel_is_a_product():
    z, w = CPoint.of(0.2, -0.4j), CPoint.of(0.5 + 0.1j, 0.3)
    expected = kernel(UNIT_DISC, CPoint.of(0.2), CPoint.of(0.5 + 0.1j)).value
    expected *= kernel(UNIT_DISC, CPoint.of(-0.4j), CPoint.of(0.3)).value
    assert kernel(BIDISC, z, w).value == pytest.approx(expected, rel=1e-14)
    assert kernel(BIDISC, CPoint.of(0, 0), CPoint.of(0, 0)).value == pytest.approx(1 / math.pi ** 2)


def test_hartogs_kernel_on_the_axis():
    r = math.sqrt(0.5)
    value = kernel(HARTOGS_TRIANGLE, CPoint.of(0, r), CPoint.of(0, r)).value
    assert value == pytest.approx(8 / math.pi ** 2, rel=1e-14)


@pytest.mark.parametrize("domain", [UNIT_DISC, BIDISC, HARTOGS_TRIANGLE])
def test_kernel_is_hermitian(domain):
    pts = sample(domain, 10, seed=5).points
    qts = sample(domain, 10, seed=6).points
    forward = bergman_kernel_values(domain, pts, qts)
    backward = bergman_kernel_values(domain, qts, pts)
    assert np.allclose(forward, np.conj(backward), rtol=1e-13, atol=0)


def test_kernel_diagonal_is_positive(hartogs_points):
    diagonal = bergman_kernel_values(HARTOGS_TRIANGLE, hartogs_points, hartogs_points)
    assert np.all(diagonal.real > 0)
    assert np.allclose(diagonal.imag, 0.0, atol=1e-12 * np.abs(diagonal).max())


@pytest.mark.parametrize("s", [0.3, 0.6])
def test_norm_reproducing_identity_on_bidisc(s):
    # int |K((s, s); w)|^2 dV(w) = K((s, s); (s, s)), one disc factor at a time
    def squared(pts):
        return (np.abs(1.0 - s * np.conj(pts[:, 0])) ** -4 / math.pi ** 2).astype(complex)

    factor = FunctionHandle(squared, 1, singularity=s)
    f = product_handle(factor, factor)
    value = integrate(f, quadrature_rule(BIDISC, 48, 96, singularity=s)).value.real
    expected = bergman_kernel_values(BIDISC, CPoint.of(s, s), CPoint.of(s, s))[0].real
    assert value == pytest.approx(expected, rel=1e-4)


def test_abs_kernel_matches_modulus():
    z, w = CPoint.of(0.5j), CPoint.of(-0.7)
    assert abs_kernel(UNIT_DISC, z, w) == pytest.approx(abs(kernel(UNIT_DISC, z, w).value))


def test_boundary_and_dimension_errors():
    with pytest.raises(DomainError):
        kernel(UNIT_DISC, CPoint.of(1.0), CPoint.of(0))
    with pytest.raises(DomainError):
        kernel(UNIT_DISC, CPoint.of(0, 0), CPoint.of(0))
    with pytest.raises(DomainError):
        kernel(HARTOGS_TRIANGLE, CPoint.of(0.5, 0.5), CPoint.of(0, 0.5))


@pytest.mark.parametrize(
    "domain,z,exponents",
    [(UNIT_DISC, CPoint.of(0.3 + 0.2j), (a,)) for a in range(9)]
    + [(HARTOGS_TRIANGLE, CPoint.of(0.1 + 0.05j, 0.5 - 0.2j), e) for e in ((0, -1), (0, 0), (2, -1), (3, 2), (8, -3), (8, 0))],
)
def test_kernel_reproduces_monomials(domain, z, exponents):
    result = project_quadrature(domain, monomial(exponents), z)
    expected = complex(np.prod(np.asarray(z.coords) ** np.asarray(exponents)))
    assert abs(result.value - expected) < 1e-8
