"""
Truncated weighted Bergman spaces A^(lambda)(D): monomial norms, kernels
B^(lambda), the shift M^(lambda) and discrete-series matrices.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln, poch

from moebius.transforms import (
    MoebiusTransform,
    check_in_disc,
    cocycle_eval,
    cocycle_taylor_coefficients,
)

logger = logging.getLogger(__name__)


class SpaceError(ValueError):
    """Raised for invalid space parameters or mismatched functions."""


def _check_lambda(lam: float):
    if not lam > 0:
        raise SpaceError(f"lambda must be positive, got {lam}")


def pochhammer(lam: float, n: int) -> float:
    """Rising factorial (lambda)_n"""
    return float(poch(lam, n))


def monomial_norm_sq(lam: float, n: int) -> float:
    """||z^n||^2 = n!/(lambda)_n in A^(lambda)(D)"""
    _check_lambda(lam)
    if n < 0:
        raise SpaceError(f"monomial degree must be nonnegative, got {n}")
    return float(np.exp(gammaln(n + 1) + gammaln(lam) - gammaln(lam + n)))


def norm_sq_sequence(lam: float, degree: int) -> np.ndarray:
    """[||z^n||^2 for n = 0..degree] built from the ratio (n+1)/(lambda+n)"""
    _check_lambda(lam)
    ratios = np.ones(degree + 1)
    n = np.arange(degree)
    ratios[1:] = (n + 1) / (lam + n)
    return np.cumprod(ratios)


def kernel_eval(lam: float, z, w):
    """B^(lambda)(z, w) = (1 - z conj(w))^{-lambda}, principal branch"""
    _check_lambda(lam)
    zz = check_in_disc(z, "z")
    ww = check_in_disc(w, "w")
    value = np.exp(-lam * np.log(1.0 - zz * np.conj(ww)))
    return complex(value) if np.ndim(value) == 0 else value


def truncated_kernel_eval(lam: float, z, w, degree: int):
    """sum_{n <= degree} (lambda)_n/n! (z conj(w))^n"""
    zz = check_in_disc(z, "z")
    ww = check_in_disc(w, "w")
    coeffs = 1.0 / norm_sq_sequence(lam, degree)
    value = np.polynomial.polynomial.polyval(zz * np.conj(ww), coeffs)
    return complex(value) if np.ndim(value) == 0 else value


def shift_weights(lam: float, N: int) -> np.ndarray:
    """Weights ||z^{n+1}|| / ||z^n|| of M^(lambda), n = 0..N-1"""
    _check_lambda(lam)
    if N < 1:
        raise SpaceError(f"need at least one weight, got N={N}")
    n = np.arange(N)
    return np.sqrt((n + 1) / (lam + n))


@dataclass(frozen=True)
class WeightedDiscSpace:
    lam: float
    degree_bound: int

    def __post_init__(self):
        _check_lambda(self.lam)
        if self.degree_bound < 0:
            raise SpaceError(f"degree bound must be nonnegative, got {self.degree_bound}")

    @property
    def norm_sq(self) -> np.ndarray:
        return norm_sq_sequence(self.lam, self.degree_bound)

    @property
    def kernel_coefficients(self) -> np.ndarray:
        return 1.0 / self.norm_sq

    def kernel_section(self, w: complex) -> "DiscFunction":
        """Coefficients of the truncated kernel B_N(., w)"""
        check_in_disc(w, "w")
        n = np.arange(self.degree_bound + 1)
        return DiscFunction(self.kernel_coefficients * np.conj(w) ** n, self)


@dataclass
class DiscFunction:
    """Taylor coefficients at 0 of a polynomial on the disc"""

    coeffs: np.ndarray
    space: Optional[WeightedDiscSpace] = field(default=None)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.coeffs)

    def inner(self, other: "DiscFunction") -> complex:
        if self.space is None:
            raise SpaceError("inner product needs a WeightedDiscSpace")
        if self.coeffs.shape != other.coeffs.shape:
            raise SpaceError("coefficient vectors have different lengths")
        return complex(np.sum(self.coeffs * np.conj(other.coeffs) * self.space.norm_sq))


def discrete_series_matrix(
    lam: float,
    phi: MoebiusTransform,
    N: int,
    orthonormal: bool = False,
) -> np.ndarray:
    """
    Truncation of D^+_lambda(phi^{-1}): column k holds the Taylor coefficients
    of c^(lambda)(phi, z) phi(z)^k up to degree N.

    With orthonormal=True the matrix is expressed in e_n = z^n/||z^n||.
    """
    _check_lambda(lam)
    phi_coeffs = phi.taylor_coefficients(N)
    column = cocycle_taylor_coefficients(lam, phi, N)
    matrix = np.zeros((N + 1, N + 1), dtype=complex)
    for k in range(N + 1):
        matrix[:, k] = column
        column = np.convolve(column, phi_coeffs)[: N + 1]
    if orthonormal:
        norms = np.sqrt(norm_sq_sequence(lam, N))
        matrix = norms[:, None] * matrix / norms[None, :]
    return matrix


def kernel_transform_check(lam: float, phi: MoebiusTransform, z: complex, w: complex) -> float:
    """|B(z, w) - c(phi, z) B(phi z, phi w) conj(c(phi, w))|"""
    lhs = kernel_eval(lam, z, w)
    rhs = cocycle_eval(lam, phi, z) * kernel_eval(lam, phi(z), phi(w)) * np.conj(cocycle_eval(lam, phi, w))
    return float(abs(lhs - rhs))


def kernel_vector_action(lam: float, phi: MoebiusTransform, w: complex):
    """Image of K(., w) as (scalar, point): conj(c(phi, w)) K(., phi(w))"""
    return np.conj(cocycle_eval(lam, phi, w)), phi(w)
