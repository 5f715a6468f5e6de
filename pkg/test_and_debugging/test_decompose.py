import cmath
import math
import os
import sys

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from decompose.filtration import (
    SummandError,
    completeness_check,
    expected_dimension,
    gamma_map,
    reducing_check,
    summand_bases,
    summand_basis,
    summand_nonempty,
    truncation_exactness_check,
    vanishing_filtration_basis,
)
from decompose.kernels import (
    LADDER_GRID,
    cocycle_identity_check,
    cocycle_parameter,
    diagonal_cocycle,
    f_factor,
    identify_lambda,
    involution_identity_residual,
    k00_oracle,
    projection_oracle,
    restricted_kernel,
    summand_diagonal,
    two_route_agreement,
    verify_summand_kernel,
)
from moebius.transforms import MoebiusTransform, involution_at
from spaces.discspace import kernel_eval
from spaces.polyspace import TensorSpace

SEED = 20240331


# Filtration and summands

def test_first_summand_vector():
    space = TensorSpace((1.0, 1.0), 4)
    basis = summand_basis(space, 1)
    u = basis.vectors[0]
    assert basis.degrees[0] == 1
    assert u.terms() == pytest.approx({(1, 0): 1 / math.sqrt(2), (0, 1): -1 / math.sqrt(2)})
    assert gamma_map(basis, u).coeffs[0] == pytest.approx(1 / math.sqrt(2))


@pytest.mark.parametrize("lambdas", [(1.0, 1.0), (1.0, 2.0), (0.5, 3.0)])
def test_graded_dimensions(lambdas):
    N = 6
    space = TensorSpace(lambdas, N)
    for m in range(N + 1):
        assert summand_basis(space, m).graded_dims == [1 if d >= m else 0 for d in range(N + 1)]


@pytest.mark.parametrize("lambdas", [(1.0, 2.0), (0.7, 0.7)])
def test_completeness(lambdas):
    space = TensorSpace(lambdas, 7)
    total, defect = completeness_check(summand_bases(space))
    assert total == space.dim == expected_dimension(space, 7)
    assert defect < 1e-12


def test_completeness_with_noisy_gram():
    space = TensorSpace((1.0, 2.0), 6).with_noise(1e-3, SEED)
    total, defect = completeness_check(summand_bases(space))
    assert total == space.dim
    assert defect < 1e-10


@pytest.mark.parametrize("parity,empty_parity", [("symmetric", 1), ("antisymmetric", 0)])
def test_parity_summands(parity, empty_parity):
    N = 6
    space = TensorSpace((1.0, 1.0), N)
    bases = summand_bases(space, N, parity)
    for basis in bases:
        assert basis.is_empty == (basis.m % 2 == empty_parity)
    total, defect = completeness_check(bases)
    assert total == expected_dimension(space, N, parity)
    assert defect < 1e-12


def test_parity_needs_symmetric_space():
    with pytest.raises(SummandError):
        summand_basis(TensorSpace((1.0, 2.0), 4), 0, parity="symmetric")
    with pytest.raises(SummandError):
        summand_basis(TensorSpace((1.0, 1.0), 4), 0, parity="odd")


def test_summand_index_range():
    space = TensorSpace((1.0, 1.0), 4)
    with pytest.raises(SummandError):
        summand_basis(space, -1)
    beyond = summand_basis(space, 5)
    assert beyond.is_empty and beyond.truncated
    with pytest.raises(SummandError):
        vanishing_filtration_basis(space, 5)


def test_gamma_map_rejects_functions_outside_summand():
    space = TensorSpace((1.0, 1.0), 4)
    basis = summand_basis(space, 1)
    with pytest.raises(SummandError):
        gamma_map(basis, space.monomial((1, 0)))
    # the extension formula still applies
    assert gamma_map(basis, space.monomial((1, 0)), strict=False).coeffs[0] == pytest.approx(1.0)


def test_truncation_is_exact():
    space = TensorSpace((1.0, 2.0), 6)
    for m in range(6):
        assert truncation_exactness_check(summand_basis(space, m)) < 1e-12


@pytest.mark.parametrize("phi", [MoebiusTransform.rotation(1.3), involution_at(0.3), MoebiusTransform(0.4, 0.2 - 0.3j)])
def test_summands_reduce_the_representation(phi):
    space = TensorSpace((1.0, 2.0), 6)
    assert reducing_check(summand_bases(space), phi) < 1e-9


def test_nonempty_criterion_agrees_with_basis():
    space = TensorSpace((1.0, 2.0), 6)
    for m in range(4):
        result = summand_nonempty(space, m, points=(0.2 + 0j, 0.1j))
        assert result["at_origin"] and result["agrees_with_basis"] and not result["disagreement"]


def test_nonempty_criterion_on_empty_parity_summand():
    space = TensorSpace((1.0, 1.0), 6)
    basis = summand_basis(space, 1, parity="symmetric")
    result = summand_nonempty(space, 1, basis)
    assert not result["at_origin"] and result["agrees_with_basis"]


# Kernels of the restricted spaces

def test_k00_values():
    assert k00_oracle((1.0, 1.0), 0) == pytest.approx(1.0)
    assert k00_oracle((1.0, 1.0), 1) == pytest.approx(0.5)
    assert k00_oracle((1.0, 2.0), 1) == pytest.approx(2 / 3)
    assert k00_oracle((1.0, 2.0), 2) == pytest.approx(1.2)


@pytest.mark.parametrize("lambdas", [(1.0, 1.0), (1.0, 2.0), (0.5, 1.5)])
def test_kernel_at_origin_three_ways(lambdas):
    space = TensorSpace(lambdas, 8)
    for m in range(4):
        direct = restricted_kernel(space, m, 0j, 0j).real
        assert direct == pytest.approx(k00_oracle(lambdas, m), rel=1e-12)
        assert direct == pytest.approx(projection_oracle(space, m), rel=1e-12)


@seed(SEED)
@settings(deadline=None, max_examples=20)
@given(lam=st.floats(min_value=0.2, max_value=10.0))
def test_identify_lambda_on_bergman_kernels(lam):
    assert identify_lambda(lambda z: kernel_eval(lam, z, z).real) == pytest.approx(lam, abs=1e-6)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_parameter_ladder(m):
    space = TensorSpace((1.0, 2.0), 16)
    basis = summand_basis(space, m)
    assert identify_lambda(summand_diagonal(space, m, basis), LADDER_GRID) == pytest.approx(3.0 + 2 * m, abs=1e-5)


def test_f_factor_is_one_for_tensor_spaces():
    space = TensorSpace((1.0, 2.0), 8)
    basis0 = summand_basis(space, 0)
    for z in (0j, 0.3 + 0.1j, -0.4j):
        assert abs(f_factor(space, z, basis0) - 1.0) < 1e-12


@pytest.mark.parametrize("m", [1, 2, 3])
def test_summand_kernel_law(m):
    space = TensorSpace((1.0, 2.0), 10)
    assert verify_summand_kernel(space, m, lambda_hat=3.0) < 1e-10 * max(1.0, k00_oracle((1.0, 2.0), m))


def test_two_routes_agree():
    space = TensorSpace((1.0, 2.0), 8)
    for m in range(4):
        assert two_route_agreement(space, m) < 1e-10


def test_summand_kernel_rejects_points_outside_disc():
    space = TensorSpace((1.0, 1.0), 4)
    with pytest.raises(SummandError):
        restricted_kernel(space, 0, 1.0, 0j)


def test_ambient_cocycle_identity():
    space = TensorSpace((1.0, 2.5), 4)
    points = [(0j, 0j), (0.1, 0.2j), (-0.3 + 0.1j, 0.4), (0.5j, -0.2)]
    for phi, psi in [(involution_at(0.3), MoebiusTransform(2.0, 0.4j)), (MoebiusTransform(5.5, -0.6), involution_at(0.2 - 0.5j))]:
        assert cocycle_identity_check(space.cocycle, phi, psi, points) < 1e-9


@pytest.mark.parametrize("m", [0, 1, 2])
def test_involution_identity(m):
    space = TensorSpace((1.0, 2.0), 16)
    assert involution_identity_residual(space, m, 0.1 - 0.05j) < 1e-10


@seed(SEED)
@settings(deadline=None, max_examples=30)
@given(theta=st.floats(min_value=-3.0, max_value=3.0), m=st.integers(min_value=0, max_value=4))
def test_diagonal_cocycle_of_a_rotation(theta, m):
    space = TensorSpace((1.0, 1.0), 4)
    z = 0.3 - 0.2j
    value = diagonal_cocycle(space, m, MoebiusTransform.rotation(theta), z)
    assert abs(value - cmath.exp(1j * theta * (1 + m))) < 1e-12


@pytest.mark.parametrize("twist", [lambda z: 1 + z / 3, lambda z: cmath.exp(0.4 * z - 0.2j * z * z)])
def test_curvature_ignores_holomorphic_factors(twist):
    # log |F|^2 is harmonic, so |F|^2 K has the curvature of K
    lam = 2.5
    assert identify_lambda(lambda z: abs(twist(z)) ** 2 * kernel_eval(lam, z, z).real) == pytest.approx(lam, abs=1e-6)
    space = TensorSpace((1.0, 2.0), 16)
    basis = summand_basis(space, 1)
    diagonal = summand_diagonal(space, 1, basis)
    assert identify_lambda(lambda z: abs(twist(z)) ** 2 * diagonal(z), LADDER_GRID) == pytest.approx(5.0, abs=1e-5)


def test_summand_kernel_defaults_to_cocycle_exponent():
    # small degree bounds blur the curvature estimate but not the kernel law
    space = TensorSpace((1.0, 1.0), 6)
    assert cocycle_parameter(space) == 2.0
    for m in range(3):
        assert verify_summand_kernel(space, m) < 1e-10 * max(1.0, k00_oracle((1.0, 1.0), m))
    with pytest.raises(SummandError):
        cocycle_parameter(TensorSpace((1.0, 1.0, 1.0), 3))
