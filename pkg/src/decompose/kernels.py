"""
Reproducing kernels K_m of the restricted spaces A_m = Gamma_m(S_m), parameter
identification by curvature, the F factor and the cocycle identities.
"""

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np

from decompose.filtration import (
    SubspaceBasis,
    SummandError,
    diagonal_power_terms,
    summand_basis,
)
from moebius.transforms import MoebiusTransform, compose, derivative, involution_at
from spaces.discspace import pochhammer, truncated_kernel_eval
from spaces.polyspace import TensorSpace, inner_product, kernel_derivative_section

logger = logging.getLogger(__name__)

DEFAULT_GRID = (0j, 0.2 + 0j, -0.2 + 0j, 0.2j, -0.2j, 0.2 + 0.2j)
LADDER_GRID = tuple(0.5 * z for z in DEFAULT_GRID)
KERNEL_GRID = (0j, 0.4 + 0j, -0.4 + 0j, 0.4j, -0.4j, 0.28 + 0.28j, 0.1 - 0.3j)
CURVATURE_STEP = 1e-3


def _bidisc_basis(space: TensorSpace, m: int, N: Optional[int], basis: Optional[SubspaceBasis]) -> SubspaceBasis:
    if basis is None:
        basis = summand_basis(space, m, N)
    if basis.space.d != 2:
        raise SummandError("summand kernels on the disc need a bidisc space")
    return basis


def _gamma_values(basis: SubspaceBasis, z: complex) -> np.ndarray:
    return np.array([sum(c * z ** t for (t,), c in image.items()) for image in basis.gamma_images], dtype=complex)


def restricted_kernel(
    space: TensorSpace,
    m: int,
    z: complex,
    w: complex,
    N: Optional[int] = None,
    basis: Optional[SubspaceBasis] = None,
) -> complex:
    """K_m(z, w) = sum_d (Gamma_m u_d)(z) conj((Gamma_m u_d)(w)) over an orthonormal basis of S_m"""
    basis = _bidisc_basis(space, m, N, basis)
    if abs(z) >= 1 or abs(w) >= 1:
        raise SummandError("kernel points must lie in the open disc")
    return complex(np.sum(_gamma_values(basis, z) * np.conj(_gamma_values(basis, w))))


def cross_route_kernel(
    space: TensorSpace,
    m: int,
    z: complex,
    w: complex,
    N: Optional[int] = None,
    basis: Optional[SubspaceBasis] = None,
) -> complex:
    """<P_m conj(d_1)^m K(., (w, w)), P_m conj(d_1)^m K(., (z, z))> computed in H"""
    basis = _bidisc_basis(space, m, N, basis)
    section_w = basis.project(kernel_derivative_section(space, m, w))
    section_z = basis.project(kernel_derivative_section(space, m, z))
    return inner_product(section_w, section_z, space)


def two_route_agreement(space: TensorSpace, m: int, basis: Optional[SubspaceBasis] = None,
                        grid: Sequence[complex] = KERNEL_GRID) -> float:
    basis = _bidisc_basis(space, m, None, basis)
    return max(
        abs(restricted_kernel(space, m, z, w, basis=basis) - cross_route_kernel(space, m, z, w, basis=basis))
        for z in grid for w in grid
    )


def k00_oracle(lambdas: Sequence[float], m: int) -> float:
    """K_m(0, 0) = m! / sum_k C(m, k)/((lambda_1)_k (lambda_2)_{m-k}) for tensor spaces"""
    lam1, lam2 = lambdas
    total = sum(math.comb(m, k) / (pochhammer(lam1, k) * pochhammer(lam2, m - k)) for k in range(m + 1))
    return math.factorial(m) / total


def projection_oracle(space: TensorSpace, m: int) -> float:
    """||projection of conj(d_1)^m K(., 0) onto (z_1 - z_2)^m||^2, brute force"""
    section = kernel_derivative_section(space, m, 0j)
    v = space.monomial((0,) * space.d).times(diagonal_power_terms(m, space.d))
    return abs(inner_product(section, v, space)) ** 2 / inner_product(v, v, space).real


def _curvature(log_kernel: Callable[[float, float], float], x: float, y: float, h: float) -> float:
    # one quarter of the five-point Laplacian
    centre = log_kernel(x, y)
    total = log_kernel(x + h, y) + log_kernel(x - h, y) + log_kernel(x, y + h) + log_kernel(x, y - h) - 4 * centre
    return total / (4 * h * h)


def identify_lambda(
    kernel_on_diagonal: Callable[[complex], float],
    grid: Optional[Sequence[complex]] = None,
    step: float = CURVATURE_STEP,
) -> float:
    """
    Mean over the grid of (1 - |z|^2)^2 d dbar log K(z, z).

    d dbar is a quarter of the Laplacian in (Re z, Im z). The five-point
    stencil is evaluated at steps h and h/2 and the two are combined by
    Richardson extrapolation, (4 L(h/2) - L(h))/3, which cancels the O(h^2)
    term of the stencil error.
    """
    grid = DEFAULT_GRID if grid is None else grid

    def log_kernel(x: float, y: float) -> float:
        value = kernel_on_diagonal(complex(x, y))
        value = float(np.real(value))
        if not value > 0:
            raise SummandError(f"kernel is not positive at {complex(x, y)}: {value}")
        return math.log(value)

    estimates = []
    for z in grid:
        coarse = _curvature(log_kernel, z.real, z.imag, step)
        fine = _curvature(log_kernel, z.real, z.imag, step / 2)
        estimates.append((1 - abs(z) ** 2) ** 2 * (4 * fine - coarse) / 3)
    return float(np.mean(estimates))


def summand_diagonal(space: TensorSpace, m: int, basis: Optional[SubspaceBasis] = None) -> Callable[[complex], float]:
    """z -> K_m(z, z) for use with identify_lambda"""
    basis = _bidisc_basis(space, m, None, basis)
    return lambda z: float(np.sum(np.abs(_gamma_values(basis, z)) ** 2))


def cocycle_parameter(space: TensorSpace) -> float:
    """lambda_1 + lambda_2: the diagonal restriction of the ambient cocycle is c^(lambda_1 + lambda_2)"""
    if space.d != 2:
        raise SummandError("summand kernels on the disc need a bidisc space")
    return float(sum(space.lambdas))


def f_factor(space: TensorSpace, z: complex, basis0: Optional[SubspaceBasis] = None) -> complex:
    """F(z) = K_0(z, 0)/sqrt(K_0(0, 0)), so F(0) > 0"""
    basis0 = _bidisc_basis(space, 0, None, basis0)
    k00 = restricted_kernel(space, 0, 0j, 0j, basis=basis0).real
    if not k00 > 0:
        raise SummandError(f"K_0(0, 0) must be positive, got {k00}")
    return restricted_kernel(space, 0, z, 0j, basis=basis0) / math.sqrt(k00)


def verify_summand_kernel(
    space: TensorSpace,
    m: int,
    N: Optional[int] = None,
    lambda_hat: Optional[float] = None,
    basis: Optional[SubspaceBasis] = None,
    basis0: Optional[SubspaceBasis] = None,
    grid: Sequence[complex] = KERNEL_GRID,
) -> float:
    """
    sup_grid |K_m(z, w) - (K_m(0,0)/K_0(0,0)) F(z) B^(lambda_hat + 2m)(z, w) conj(F(w))|.

    lambda_hat defaults to lambda_1 + lambda_2, the exponent of the ambient
    cocycle. K_m retains the degrees 0..N-m in z conj(w), so B is truncated at
    the same degree.
    """
    basis = _bidisc_basis(space, m, N, basis)
    if basis.is_empty:
        raise SummandError(f"summand {m} is empty")
    basis0 = _bidisc_basis(space, 0, basis.degree_bound, basis0)
    if lambda_hat is None:
        lambda_hat = cocycle_parameter(space)
    k00 = restricted_kernel(space, 0, 0j, 0j, basis=basis0).real
    km00 = restricted_kernel(space, m, 0j, 0j, basis=basis).real
    degree = basis.degree_bound - m
    f_values = {z: f_factor(space, z, basis0) for z in grid}
    worst = 0.0
    for z in grid:
        for w in grid:
            predicted = (km00 / k00) * f_values[z] * truncated_kernel_eval(lambda_hat + 2 * m, z, w, degree) * np.conj(f_values[w])
            worst = max(worst, abs(restricted_kernel(space, m, z, w, basis=basis) - predicted))
    return float(worst)


def cocycle_identity_check(
    c: Callable[[MoebiusTransform, Sequence[complex]], complex],
    phi: MoebiusTransform,
    psi: MoebiusTransform,
    sample_points: Sequence[Sequence[complex]],
) -> float:
    """
    r(x) = c(phi psi, x) / (c(phi, psi x) c(psi, x)) must be a unimodular constant.

    Returns the larger of max |r(x) - r(x_0)| and ||r(x_0)| - 1|.
    """
    chi = compose(phi, psi)
    ratios = []
    for x in sample_points:
        moved = [psi(xi) for xi in x]
        denominator = c(phi, moved) * c(psi, x)
        if abs(denominator) < 1e-300:
            raise ZeroDivisionError(f"cocycle vanishes at {x}")
        ratios.append(c(chi, x) / denominator)
    ratios = np.asarray(ratios)
    deviation = float(np.max(np.abs(ratios - ratios[0])))
    modulus_defect = abs(abs(ratios[0]) - 1.0)
    if modulus_defect > 1e-9:
        logger.warning("cocycle ratio is not unimodular: |r(x0)| = %.12f", abs(ratios[0]))
    return max(deviation, modulus_defect)


def diagonal_cocycle(space: TensorSpace, m: int, phi: MoebiusTransform, z: complex) -> complex:
    """c_m(phi, z) = c(phi, (z, z)) phi'(z)^m"""
    return space.cocycle(phi, [z] * space.d) * derivative(phi, z) ** m


def involution_identity_residual(space: TensorSpace, m: int, z: complex,
                                 basis: Optional[SubspaceBasis] = None) -> float:
    """|K_m(z, z) - c_m(phi_z, z) K_m(0, 0) conj(c_m(phi_z, z))|"""
    basis = _bidisc_basis(space, m, None, basis)
    phi_z = involution_at(z)
    cm = diagonal_cocycle(space, m, phi_z, z)
    km00 = restricted_kernel(space, m, 0j, 0j, basis=basis)
    return float(abs(restricted_kernel(space, m, z, z, basis=basis) - cm * km00 * np.conj(cm)))
