"""
Disc automorphisms z -> e^{i theta}(z - a)/(1 - conj(a) z), their derivatives,
the holomorphic branch of log phi' and the power cocycles c^(lambda).
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
IDENTITY_TOL = 1e-14

ComplexLike = Union[complex, float, np.ndarray]


class DiscDomainError(ValueError):
    """Raised when a point or parameter leaves the open unit disc."""


def check_in_disc(z: ComplexLike, name: str = "z") -> np.ndarray:
    """Return z as an array, rejecting anything with |z| >= 1"""
    arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(arr) >= 1.0):
        raise DiscDomainError(f"{name} must lie in the open unit disc, got {z!r}")
    return arr


def _unwrap(value: np.ndarray, like: ComplexLike):
    # scalars in, scalars out
    return complex(value) if np.ndim(like) == 0 else value


@dataclass(frozen=True)
class MoebiusTransform:
    """phi(z) = e^{i theta}(z - a)/(1 - conj(a) z) with theta in [0, 2pi) and |a| < 1"""

    theta: float = 0.0
    a: complex = 0j

    def __post_init__(self):
        a = complex(self.a)
        if abs(a) >= 1.0:
            raise DiscDomainError(f"Moebius parameter a must satisfy |a| < 1, got {a}")
        theta = float(self.theta) % TWO_PI
        if theta < IDENTITY_TOL or TWO_PI - theta < IDENTITY_TOL:
            theta = 0.0
        if abs(a) < IDENTITY_TOL:
            a = 0j
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "a", a)

    @classmethod
    def identity(cls) -> "MoebiusTransform":
        return cls(0.0, 0j)

    @classmethod
    def rotation(cls, theta: float) -> "MoebiusTransform":
        return cls(theta, 0j)

    @property
    def unimodular(self) -> complex:
        return cmath.exp(1j * self.theta)

    @property
    def folded_theta(self) -> float:
        """theta folded into (-pi, pi]"""
        return self.theta - TWO_PI if self.theta > math.pi else self.theta

    def is_identity(self) -> bool:
        return abs(self.a) < IDENTITY_TOL and min(self.theta, TWO_PI - self.theta) < IDENTITY_TOL

    def __call__(self, z: ComplexLike):
        arr = check_in_disc(z)
        value = self.unimodular * (arr - self.a) / (1.0 - np.conj(self.a) * arr)
        return _unwrap(value, z)

    def inverse(self) -> "MoebiusTransform":
        # phi^{-1}(w) = e^{-i theta}(w + a e^{i theta})/(1 + conj(a) e^{-i theta} w)
        return MoebiusTransform(-self.theta, -self.a * self.unimodular)

    def taylor_coefficients(self, degree: int) -> np.ndarray:
        """First degree+1 Taylor coefficients of phi at 0"""
        coeffs = np.zeros(degree + 1, dtype=complex)
        coeffs[0] = -self.unimodular * self.a
        if degree >= 1:
            abar = np.conj(self.a)
            powers = abar ** np.arange(degree)
            coeffs[1:] = self.unimodular * (1.0 - abs(self.a) ** 2) * powers
        return coeffs


def compose(phi: MoebiusTransform, psi: MoebiusTransform) -> MoebiusTransform:
    """Return chi = phi o psi in canonical (theta, a) form"""
    e_phi, e_psi = phi.unimodular, psi.unimodular
    # entries of the product of [[e, -e a], [-conj(a), 1]] matrices
    p = e_phi * e_psi + e_phi * phi.a * np.conj(psi.a)
    q = -e_phi * e_psi * psi.a - e_phi * phi.a
    s = np.conj(phi.a) * e_psi * psi.a + 1.0
    a = -q / p
    theta = cmath.phase(p / s)
    return MoebiusTransform(theta, complex(a))


def involution_at(z: complex) -> MoebiusTransform:
    """The involution phi_z(w) = (z - w)/(1 - conj(z) w), swapping z and 0"""
    check_in_disc(z)
    return MoebiusTransform(math.pi, complex(z))


def derivative(phi: MoebiusTransform, z: ComplexLike):
    """phi'(z) = e^{i theta}(1 - |a|^2)/(1 - conj(a) z)^2"""
    arr = check_in_disc(z)
    value = phi.unimodular * (1.0 - abs(phi.a) ** 2) / (1.0 - np.conj(phi.a) * arr) ** 2
    return _unwrap(value, z)


def log_derivative(phi: MoebiusTransform, z: ComplexLike):
    """
    Holomorphic branch of log phi'(z).

    i*theta' + ln(1 - |a|^2) - 2 Log(1 - conj(a) z) with theta' in (-pi, pi]
    and Log the principal logarithm; Re(1 - conj(a) z) > 0 on the disc.
    """
    arr = check_in_disc(z)
    value = (
        1j * phi.folded_theta
        + math.log(1.0 - abs(phi.a) ** 2)
        - 2.0 * np.log(1.0 - np.conj(phi.a) * arr)
    )
    return _unwrap(value, z)


def cocycle_eval(lam: float, phi: MoebiusTransform, z: ComplexLike):
    """c^(lambda)(phi, z) = exp((lambda/2) log phi'(z))"""
    if lam <= 0:
        raise DiscDomainError(f"lambda must be positive, got {lam}")
    value = np.exp(0.5 * lam * np.asarray(log_derivative(phi, z)))
    return _unwrap(value, z)


def cocycle_taylor_coefficients(lam: float, phi: MoebiusTransform, degree: int) -> np.ndarray:
    """Taylor coefficients at 0 of z -> c^(lambda)(phi, z) up to the given degree"""
    if lam <= 0:
        raise DiscDomainError(f"lambda must be positive, got {lam}")
    constant = cmath.exp(0.5 * lam * (1j * phi.folded_theta + math.log(1.0 - abs(phi.a) ** 2)))
    # (1 - x)^{-lambda} = sum (lambda)_n / n! x^n
    n = np.arange(degree + 1)
    ratios = np.ones(degree + 1)
    ratios[1:] = (lam + n[:-1]) / n[1:]
    binomial = np.cumprod(ratios)
    return constant * binomial * np.conj(phi.a) ** n
