import math
import os
import sys

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from moebius.transforms import MoebiusTransform, compose, involution_at
from spaces.discspace import SpaceError
from spaces.polyspace import (
    PolyFunction,
    TensorSpace,
    compose_series,
    faa_di_bruno,
    graded_multi_indices,
    inner_product,
    kernel_derivative_section,
    multiplier_matrix,
    tensor_kernel_eval,
    to_orthonormal,
)

SEED = 20240331


def test_graded_lex_order():
    assert graded_multi_indices(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert graded_multi_indices(3, 1) == [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]


@pytest.mark.parametrize("d,N", [(1, 5), (2, 6), (3, 4)])
def test_dimension(d, N):
    space = TensorSpace((1.0,) * d, N)
    assert space.dim == len(space.indices) == math.comb(N + d, d)


def test_tensor_gram():
    space = TensorSpace((1.0, 2.0), 3)
    # ||z1 z2||^2 = 1 * 1/2
    assert space.gram[space.position[(1, 1)]] == pytest.approx(0.5)
    assert space.gram[space.position[(0, 3)]] == pytest.approx(math.factorial(3) / math.factorial(4))
    assert space.is_tensor


def test_invalid_spaces():
    with pytest.raises(SpaceError):
        TensorSpace((1.0, 0.0), 3)
    with pytest.raises(SpaceError):
        TensorSpace.from_gram((1.0, 1.0), 1, {(0, 0): 1.0, (1, 0): 1.0})
    with pytest.raises(ValueError):
        TensorSpace((1.0, 1.0), 2).kernel_section((0.1, 1.0))


def test_noise_keeps_constant_and_bounds():
    space = TensorSpace((1.0, 2.0), 6)
    noisy = space.with_noise(1e-3, SEED)
    ratio = noisy.gram / space.gram
    assert ratio[0] == 1.0
    assert np.all(np.abs(ratio - 1.0) <= 1e-3)
    assert not noisy.is_tensor
    assert np.array_equal(noisy.gram, space.with_noise(1e-3, SEED).gram)


def test_truncated_kernel_approaches_tensor_kernel():
    space = TensorSpace((1.0, 2.0), 40)
    z, w = (0.2 + 0.1j, -0.1j), (0.15, 0.2 - 0.05j)
    assert abs(space.truncated_kernel(z, w) - tensor_kernel_eval((1.0, 2.0), z, w)) < 1e-14


def test_kernel_section_reproduces():
    space = TensorSpace((0.5, 1.5), 5)
    f = PolyFunction.from_terms(space, {(0, 0): 1.0, (2, 1): -0.5j, (0, 5): 2.0, (3, 2): 1.0})
    w = (0.3 - 0.2j, 0.4j)
    assert abs(inner_product(f, space.kernel_section(w), space) - f(w)) < 1e-12


def test_kernel_derivative_section_order_zero_is_kernel():
    space = TensorSpace((1.0, 2.0), 6)
    assert np.allclose(kernel_derivative_section(space, 0, 0.3j).coeffs, space.kernel_section(0.3j).coeffs)


def test_kernel_derivative_section_reproduces_derivative():
    space = TensorSpace((1.0, 1.5), 6)
    f = PolyFunction.from_terms(space, {(2, 0): 1.0, (3, 1): 2.0, (1, 1): -1.0})
    w = 0.25 + 0.1j
    # d_1^2 f(w, w) = 2 + 12 w^2
    assert abs(inner_product(f, kernel_derivative_section(space, 2, w), space) - (2 + 12 * w * w)) < 1e-12


def test_times_and_swap():
    space = TensorSpace((1.0, 1.0), 3)
    f = space.monomial((1, 0)).times({(1, 0): 1.0, (0, 1): -1.0})
    assert f.terms() == {(2, 0): 1.0, (1, 1): -1.0}
    assert f.swapped().terms() == {(0, 2): 1.0, (1, 1): -1.0}
    with pytest.raises(SpaceError):
        space.monomial((3, 0)).times({(0, 1): 1.0})


@seed(SEED)
@settings(deadline=None, max_examples=40)
@given(z=st.complex_numbers(max_magnitude=2.0))
def test_faa_di_bruno_on_a_power(z):
    # f(u) = u^2, phi(z) = z^3, so (f o phi)(z) = z^6
    u = z ** 3
    f_derivs = [u * u, 2 * u, 2.0, 0.0, 0.0]
    phi_derivs = [z ** 3, 3 * z ** 2, 6 * z, 6.0, 0.0]
    for j, expected in [(0, z ** 6), (1, 6 * z ** 5), (2, 30 * z ** 4), (3, 120 * z ** 3), (4, 360 * z ** 2)]:
        assert abs(faa_di_bruno(f_derivs, phi_derivs, j) - expected) <= 1e-9 * max(1.0, abs(expected))


def test_faa_di_bruno_needs_enough_derivatives():
    with pytest.raises(ValueError):
        faa_di_bruno([1.0, 1.0], [0.0, 1.0], 2)


def test_compose_series():
    # (z + z^2)^2 = z^2 + 2 z^3 + z^4
    assert np.allclose(compose_series([0, 0, 1], [0, 1, 1], 3), [0, 0, 1, 2])
    assert np.allclose(compose_series([3.0], [0.5, 1.0], 2), [3.0, 0, 0])


def test_rotation_multiplier_is_diagonal():
    space, theta = TensorSpace((1.0, 2.0), 4), 0.7
    matrix = multiplier_matrix(space, MoebiusTransform.rotation(theta))
    expected = np.exp(1j * theta * (1.5 + space.degrees))
    assert np.allclose(matrix, np.diag(expected), atol=1e-14)


def test_multiplier_respects_cocycle_on_constants():
    space, phi = TensorSpace((1.0, 2.0), 30), involution_at(0.2 + 0.1j)
    column = multiplier_matrix(space, phi)[:, 0]
    point = (0.1, -0.15j)
    image = PolyFunction(column, space)(point)
    assert abs(image - space.cocycle(phi, point)) < 1e-12


def test_orthonormal_change_of_basis():
    space = TensorSpace((1.0, 3.0), 3)
    shift = space.coordinate_shift(0)
    orthonormal = to_orthonormal(space, shift)
    k = space.position[(1, 0)]
    # ||z1^2|| / ||z1|| for lambda_1 = 1
    assert orthonormal[space.position[(2, 0)], k] == pytest.approx(1.0)
    assert orthonormal[space.position[(1, 1)], space.position[(0, 1)]] == pytest.approx(1.0)
    shift2 = to_orthonormal(space, space.coordinate_shift(1))
    assert shift2[space.position[(0, 1)], 0] == pytest.approx(math.sqrt(1 / 3))


def _moebius_derivatives(phi, u, order):
    # phi^(i)(u) = e^{i theta}(1 - |a|^2) i! conj(a)^(i-1) / (1 - conj(a) u)^(i+1)
    abar = np.conj(phi.a)
    values = [phi(u)]
    for i in range(1, order + 1):
        values.append(phi.unimodular * (1 - abs(phi.a) ** 2) * math.factorial(i) * abar ** (i - 1)
                      / (1 - abar * u) ** (i + 1))
    return values


@seed(SEED)
@settings(deadline=None, max_examples=30)
@given(
    theta=st.floats(min_value=0.0, max_value=6.28),
    psi_theta=st.floats(min_value=0.0, max_value=6.28),
    r=st.floats(min_value=0.0, max_value=0.7),
    s=st.floats(min_value=0.0, max_value=0.7),
)
def test_faa_di_bruno_matches_composed_taylor_series(theta, psi_theta, r, s):
    phi = MoebiusTransform(theta, r * np.exp(0.5j))
    psi = MoebiusTransform(psi_theta, s * np.exp(-1.2j))
    order = 5
    phi_derivs = _moebius_derivatives(phi, psi(0j), order)
    psi_derivs = [math.factorial(k) * c for k, c in enumerate(psi.taylor_coefficients(order))]
    composed = compose(phi, psi).taylor_coefficients(order)
    for j in range(order + 1):
        expected = math.factorial(j) * composed[j]
        assert abs(faa_di_bruno(phi_derivs, psi_derivs, j) - expected) < 1e-9 * max(1.0, abs(expected))


@pytest.mark.parametrize("w", [(0.2 + 0.1j, -0.3j), (0.0, 0.4), (-0.35, 0.1 + 0.2j)])
def test_kernel_derivative_section_matches_finite_differences(w):
    space = TensorSpace((1.0, 2.5), 7)
    f = PolyFunction.from_terms(space, {(0, 0): 0.5, (1, 0): -1.0, (3, 2): 2.0j, (2, 5): 1.0, (7, 0): 0.3})
    h = 1e-4

    def along_first(t):
        return f((w[0] + t, w[1]))

    first = (along_first(h) - along_first(-h)) / (2 * h)
    second = (along_first(h) - 2 * along_first(0.0) + along_first(-h)) / (h * h)
    assert abs(inner_product(f, kernel_derivative_section(space, 1, w), space) - first) < 1e-6
    assert abs(inner_product(f, kernel_derivative_section(space, 2, w), space) - second) < 1e-4
