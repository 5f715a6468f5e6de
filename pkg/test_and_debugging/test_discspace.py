import cmath
import os
import sys

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from moebius.transforms import MoebiusTransform, cocycle_eval, compose, involution_at
from spaces.discspace import (
    DiscFunction,
    SpaceError,
    WeightedDiscSpace,
    discrete_series_matrix,
    kernel_eval,
    kernel_transform_check,
    kernel_vector_action,
    monomial_norm_sq,
    norm_sq_sequence,
    shift_weights,
    truncated_kernel_eval,
)

SEED = 20240331

lambdas = st.floats(min_value=0.1, max_value=8.0)


def test_monomial_norms_known_values():
    # lambda = 1 is the Hardy space, lambda = 2 the Bergman space
    assert [monomial_norm_sq(1.0, n) for n in range(5)] == pytest.approx([1.0] * 5)
    assert [monomial_norm_sq(2.0, n) for n in range(5)] == pytest.approx([1 / (n + 1) for n in range(5)])


@seed(SEED)
@settings(deadline=None, max_examples=40)
@given(lam=lambdas)
def test_norm_sequence_matches_closed_form(lam):
    sequence = norm_sq_sequence(lam, 30)
    expected = [monomial_norm_sq(lam, n) for n in range(31)]
    assert np.allclose(sequence, expected, rtol=1e-10, atol=0)


def test_invalid_lambda():
    with pytest.raises(SpaceError):
        monomial_norm_sq(0.0, 1)
    with pytest.raises(SpaceError):
        WeightedDiscSpace(-1.0, 4)


@seed(SEED)
@settings(deadline=None, max_examples=40)
@given(lam=lambdas, r=st.floats(min_value=0.0, max_value=0.5), t=st.floats(min_value=0.0, max_value=6.28))
def test_truncated_kernel_converges(lam, r, t):
    z, w = r * cmath.exp(1j * t), 0.5 * cmath.exp(-0.3j)
    full = kernel_eval(lam, z, w)
    assert abs(truncated_kernel_eval(lam, z, w, 200) - full) < 1e-10 * abs(full)


def test_shift_weights():
    assert np.allclose(shift_weights(2.0, 6), np.sqrt((np.arange(6) + 1) / (np.arange(6) + 2)))
    assert np.allclose(shift_weights(1.0, 6), 1.0)
    with pytest.raises(SpaceError):
        shift_weights(1.0, 0)


def test_kernel_section_reproduces():
    space = WeightedDiscSpace(1.5, 6)
    f = DiscFunction([1.0, -2.0, 0.5j, 0, 3.0, 0, 1.0], space)
    w = 0.4 - 0.3j
    assert abs(f.inner(space.kernel_section(w)) - f(w)) < 1e-12


def test_rotation_acts_diagonally():
    lam, theta = 3.0, 0.7
    matrix = discrete_series_matrix(lam, MoebiusTransform.rotation(theta), 6)
    expected = np.exp(1j * theta * (lam / 2 + np.arange(7)))
    assert np.allclose(np.diag(matrix), expected, atol=1e-14)
    assert np.allclose(matrix - np.diag(np.diag(matrix)), 0, atol=1e-14)


def test_discrete_series_columns():
    lam, phi, N = 2.5, MoebiusTransform(1.1, 0.4 - 0.2j), 60
    matrix = discrete_series_matrix(lam, phi, N)
    z = 0.1 + 0.05j
    powers = z ** np.arange(N + 1)
    for k in range(4):
        expected = cocycle_eval(lam, phi, z) * phi(z) ** k
        assert abs(powers @ matrix[:, k] - expected) < 1e-12


def test_orthonormal_rescaling():
    lam, phi, N = 1.5, involution_at(0.3), 8
    monomial = discrete_series_matrix(lam, phi, N)
    orthonormal = discrete_series_matrix(lam, phi, N, orthonormal=True)
    norms = np.sqrt(norm_sq_sequence(lam, N))
    assert np.allclose(orthonormal, norms[:, None] * monomial / norms[None, :])


@seed(SEED)
@settings(deadline=None, max_examples=50)
@given(
    lam=lambdas,
    theta=st.floats(min_value=0.0, max_value=6.28),
    a=st.floats(min_value=0.0, max_value=0.7),
    z=st.floats(min_value=-0.7, max_value=0.7),
    w=st.floats(min_value=-0.7, max_value=0.7),
)
def test_kernel_transformation_law(lam, theta, a, z, w):
    phi = MoebiusTransform(theta, a * cmath.exp(0.4j))
    z, w = complex(z, z / 2), complex(w / 2, -w)
    assert kernel_transform_check(lam, phi, z, w) < 1e-9 * abs(kernel_eval(lam, z, w))


def test_kernel_vector_action():
    lam, phi, w = 2.0, involution_at(0.2j), 0.1 + 0.1j
    scalar, point = kernel_vector_action(lam, phi, w)
    assert point == pytest.approx(phi(w))
    assert abs(abs(scalar) - abs(cocycle_eval(lam, phi, w))) < 1e-14


@seed(SEED)
@settings(deadline=None, max_examples=30)
@given(
    lam=lambdas,
    theta=st.floats(min_value=0.0, max_value=6.28),
    r=st.floats(min_value=0.0, max_value=0.6),
    s=st.floats(min_value=0.0, max_value=0.6),
)
def test_kernel_vector_action_is_projective(lam, theta, r, s):
    phi = MoebiusTransform(theta, r * cmath.exp(0.9j))
    psi = involution_at(s * cmath.exp(-0.3j))
    chi = compose(phi, psi)
    ratios = []
    for w in (0j, 0.3 - 0.1j, -0.2j):
        inner_scalar, moved = kernel_vector_action(lam, psi, w)
        outer_scalar, point = kernel_vector_action(lam, phi, moved)
        scalar, expected_point = kernel_vector_action(lam, chi, w)
        assert abs(point - expected_point) < 1e-10
        ratios.append(inner_scalar * outer_scalar / scalar)
    # one unimodular constant for every kernel vector
    assert abs(abs(ratios[0]) - 1.0) < 1e-9
    assert max(abs(q - ratios[0]) for q in ratios) < 1e-9


@seed(SEED)
@settings(deadline=None, max_examples=25)
@given(
    lam=st.floats(min_value=0.5, max_value=4.0),
    theta=st.floats(min_value=0.0, max_value=6.28),
    r=st.floats(min_value=0.0, max_value=0.4),
)
def test_discrete_series_is_nearly_unitary(lam, theta, r):
    matrix = discrete_series_matrix(lam, MoebiusTransform(theta, r * cmath.exp(2.1j)), 80, orthonormal=True)
    leading = matrix[:, :6]
    assert np.allclose(leading.conj().T @ leading, np.eye(6), atol=1e-9)


@seed(SEED)
@settings(deadline=None, max_examples=40)
@given(lam=lambdas.filter(lambda x: abs(x - 1.0) > 1e-3))
def test_shift_weights_are_monotone(lam):
    weights = shift_weights(lam, 30)
    steps = np.diff(weights)
    if lam > 1:
        assert np.all(steps > 0) and np.all(weights < 1)
    else:
        assert np.all(steps < 0) and np.all(weights > 1)
    assert abs(weights[-1] - 1.0) < abs(weights[0] - 1.0)
