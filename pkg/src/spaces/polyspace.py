"""
Truncated reproducing-kernel spaces on D^d with diagonal monomial Gram weights.

Multi-indices of total degree <= N are stored in graded-lexicographic order:
degree first, then descending in the first coordinate, e.g. for d = 2
(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from moebius.transforms import MoebiusTransform, check_in_disc, cocycle_eval
from spaces.discspace import (
    SpaceError,
    discrete_series_matrix,
    kernel_eval,
    norm_sq_sequence,
)

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]


def graded_multi_indices(d: int, N: int) -> List[MultiIndex]:
    """All multi-indices in d variables with total degree <= N, graded-lex"""
    indices = []
    for t in range(N + 1):
        block = [alpha for alpha in itertools.product(range(t, -1, -1), repeat=d) if sum(alpha) == t]
        indices.extend(sorted(block, reverse=True))
    return indices


@dataclass(frozen=True)
class TensorSpace:
    """
    Truncated RKHS on D^d.

    `lambdas` are the exponents of the ambient cocycle prod_i c^(lambda_i);
    unless `custom_gram` is given the Gram weights are the tensor-product ones
    prod_i alpha_i!/(lambda_i)_{alpha_i}.
    """

    lambdas: Tuple[float, ...]
    degree_bound: int
    custom_gram: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        if len(self.lambdas) < 1:
            raise SpaceError("need at least one variable")
        if any(not lam > 0 for lam in self.lambdas):
            raise SpaceError(f"all lambdas must be positive, got {self.lambdas}")
        if self.degree_bound < 0:
            raise SpaceError(f"degree bound must be nonnegative, got {self.degree_bound}")
        if self.custom_gram is not None:
            gram = np.asarray(self.custom_gram, dtype=float)
            if gram.shape != (self.dim,) or np.any(gram <= 0):
                raise SpaceError("custom Gram must hold one positive weight per multi-index")

    @classmethod
    def from_gram(cls, lambdas: Sequence[float], degree_bound: int, gram: Dict[MultiIndex, float]) -> "TensorSpace":
        """Diagonal-Gram space with explicit monomial weights and cocycle exponents `lambdas`"""
        indices = graded_multi_indices(len(lambdas), degree_bound)
        missing = [alpha for alpha in indices if alpha not in gram]
        if missing:
            raise SpaceError(f"Gram weights missing for {missing[:3]}...")
        return cls(tuple(lambdas), degree_bound, tuple(float(gram[alpha]) for alpha in indices))

    def with_noise(self, eps: float, seed: int) -> "TensorSpace":
        """Same space with every Gram weight scaled by 1 + eps*u, u uniform in [-1, 1]"""
        rng = np.random.default_rng(seed)
        factors = 1.0 + eps * rng.uniform(-1.0, 1.0, size=self.dim)
        factors[0] = 1.0
        return TensorSpace(self.lambdas, self.degree_bound, tuple(self.gram * factors))

    @property
    def d(self) -> int:
        return len(self.lambdas)

    @cached_property
    def indices(self) -> List[MultiIndex]:
        return graded_multi_indices(self.d, self.degree_bound)

    @cached_property
    def position(self) -> Dict[MultiIndex, int]:
        return {alpha: k for k, alpha in enumerate(self.indices)}

    @property
    def dim(self) -> int:
        return math.comb(self.degree_bound + self.d, self.d)

    @cached_property
    def index_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=int).reshape(len(self.indices), self.d)

    @cached_property
    def degrees(self) -> np.ndarray:
        return self.index_array.sum(axis=1)

    @cached_property
    def gram(self) -> np.ndarray:
        if self.custom_gram is not None:
            return np.asarray(self.custom_gram, dtype=float)
        weights = np.ones(self.dim)
        for i, lam in enumerate(self.lambdas):
            weights *= norm_sq_sequence(lam, self.degree_bound)[self.index_array[:, i]]
        return weights

    @property
    def is_tensor(self) -> bool:
        return self.custom_gram is None

    def monomial_swap_gram(self, i: int = 0, j: int = 1) -> np.ndarray:
        """Gram weights read through the exchange of variables i and j"""
        swapped = self.index_array.copy()
        swapped[:, [i, j]] = swapped[:, [j, i]]
        return self.gram[[self.position[tuple(int(x) for x in alpha)] for alpha in swapped]]

    def monomial(self, alpha: MultiIndex) -> "PolyFunction":
        return PolyFunction.from_terms(self, {tuple(alpha): 1.0})

    def zero(self) -> "PolyFunction":
        return PolyFunction(np.zeros(self.dim, dtype=complex), self)

    def cocycle(self, phi: MoebiusTransform, point: Sequence[complex]) -> complex:
        """Ambient cocycle prod_i c^(lambda_i)(phi, x_i)"""
        point = self._check_point(point)
        value = 1.0 + 0j
        for lam, x in zip(self.lambdas, point):
            value *= cocycle_eval(lam, phi, x)
        return value

    def kernel_section(self, w: Sequence[complex]) -> "PolyFunction":
        """Truncated kernel K_N(., w)"""
        w = self._check_point(w)
        powers = np.prod(np.conj(np.asarray(w))[None, :] ** self.index_array, axis=1)
        return PolyFunction(powers / self.gram, self)

    def truncated_kernel(self, z: Sequence[complex], w: Sequence[complex]) -> complex:
        return self.kernel_section(w)(z)

    def coordinate_shift(self, i: int) -> np.ndarray:
        """Monomial-coordinate matrix of f -> z_i f, dropping degree N+1"""
        if not 0 <= i < self.d:
            raise SpaceError(f"coordinate index {i + 1} out of range for d={self.d}")
        shift = np.zeros((self.dim, self.dim))
        for col, alpha in enumerate(self.indices):
            target = alpha[:i] + (alpha[i] + 1,) + alpha[i + 1:]
            row = self.position.get(target)
            if row is not None:
                shift[row, col] = 1.0
        return shift

    def _check_point(self, point) -> np.ndarray:
        if np.ndim(point) == 0:
            point = [point] * self.d
        point = np.asarray(point, dtype=complex)
        if point.shape != (self.d,):
            raise SpaceError(f"expected a point in D^{self.d}, got shape {point.shape}")
        check_in_disc(point, "point")
        return point


@dataclass
class PolyFunction:
    """Coefficient vector over the graded multi-indices of a TensorSpace"""

    coeffs: np.ndarray
    space: TensorSpace

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.space.dim,):
            raise SpaceError(f"expected {self.space.dim} coefficients, got {self.coeffs.shape}")

    @classmethod
    def from_terms(cls, space: TensorSpace, terms: Dict[MultiIndex, complex]) -> "PolyFunction":
        coeffs = np.zeros(space.dim, dtype=complex)
        for alpha, value in terms.items():
            if sum(alpha) > space.degree_bound:
                raise SpaceError(f"monomial {alpha} exceeds degree bound {space.degree_bound}")
            coeffs[space.position[tuple(alpha)]] += value
        return cls(coeffs, space)

    def terms(self) -> Dict[MultiIndex, complex]:
        return {alpha: c for alpha, c in zip(self.space.indices, self.coeffs) if c != 0}

    def __call__(self, point: Sequence[complex]) -> complex:
        point = np.asarray(point, dtype=complex)
        powers = np.prod(point[None, :] ** self.space.index_array, axis=1)
        return complex(np.sum(self.coeffs * powers))

    def __add__(self, other: "PolyFunction") -> "PolyFunction":
        _check_same_space(self, other)
        return PolyFunction(self.coeffs + other.coeffs, self.space)

    def __sub__(self, other: "PolyFunction") -> "PolyFunction":
        _check_same_space(self, other)
        return PolyFunction(self.coeffs - other.coeffs, self.space)

    def scaled(self, factor: complex) -> "PolyFunction":
        return PolyFunction(self.coeffs * factor, self.space)

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self, self.space).real, 0.0))

    def degree(self) -> int:
        nonzero = np.nonzero(self.coeffs)[0]
        return int(self.space.degrees[nonzero].max()) if len(nonzero) else -1

    def times(self, terms: Dict[MultiIndex, complex]) -> "PolyFunction":
        """Product with a polynomial given by its terms; raises if the degree bound is exceeded"""
        product: Dict[MultiIndex, complex] = {}
        for alpha, c in self.terms().items():
            for beta, b in terms.items():
                gamma = tuple(x + y for x, y in zip(alpha, beta))
                product[gamma] = product.get(gamma, 0) + c * b
        return PolyFunction.from_terms(self.space, {g: v for g, v in product.items() if v != 0})

    def swapped(self, i: int = 0, j: int = 1) -> "PolyFunction":
        """f(..., z_j, ..., z_i, ...): exchange two variables"""
        terms = {}
        for alpha, c in self.terms().items():
            beta = list(alpha)
            beta[i], beta[j] = beta[j], beta[i]
            terms[tuple(beta)] = c
        return PolyFunction.from_terms(self.space, terms)


def _check_same_space(f: PolyFunction, g: PolyFunction):
    if f.space.dim != g.space.dim or f.space.d != g.space.d:
        raise SpaceError("functions live in spaces of different shape")


def tensor_kernel_eval(lambdas: Sequence[float], z: Sequence[complex], w: Sequence[complex]) -> complex:
    """prod_i B^(lambda_i)(z_i, w_i)"""
    if len(z) != len(lambdas) or len(w) != len(lambdas):
        raise SpaceError("points must have one coordinate per lambda")
    value = 1.0 + 0j
    for lam, zi, wi in zip(lambdas, z, w):
        value *= kernel_eval(lam, zi, wi)
    return value


def inner_product(f: PolyFunction, g: PolyFunction, space: TensorSpace) -> complex:
    """sum_alpha f_alpha conj(g_alpha) gram_alpha"""
    if f.coeffs.shape != (space.dim,) or g.coeffs.shape != (space.dim,):
        raise SpaceError("coefficient vectors do not match the space")
    return complex(np.sum(f.coeffs * np.conj(g.coeffs) * space.gram))


def kernel_derivative_section(space: TensorSpace, m: int, w) -> PolyFunction:
    """
    conj(d_1)^m K(., w) truncated to total degree <= N, evaluated at the
    diagonal point (w, ..., w) when w is a scalar.
    """
    if m < 0 or m > space.degree_bound:
        raise SpaceError(f"derivative order {m} outside [0, {space.degree_bound}]")
    w = space._check_point(w)
    alpha = space.index_array
    first = alpha[:, 0]
    valid = first >= m
    falling = np.zeros(space.dim)
    falling[valid] = [math.perm(int(i), m) for i in first[valid]]
    shifted = alpha.copy()
    shifted[:, 0] = np.where(valid, first - m, 0)
    powers = np.prod(np.conj(w)[None, :] ** shifted, axis=1)
    return PolyFunction(np.where(valid, falling * powers / space.gram, 0), space)


def _partition_multiplicities(j: int):
    """Yield (l_1, ..., l_j) with sum k*l_k = j"""

    def rec(k: int, remaining: int):
        if k > j:
            if remaining == 0:
                yield ()
            return
        for l in range(remaining // k + 1):
            for rest in rec(k + 1, remaining - k * l):
                yield (l,) + rest

    yield from rec(1, j)


def faa_di_bruno(f_derivs: Sequence[complex], phi_derivs: Sequence[complex], j: int) -> complex:
    """
    j-th derivative of f o phi from f^(i)(phi(z)) and phi^(k)(z), i, k <= j.
    """
    if j < 0:
        raise ValueError(f"derivative order must be nonnegative, got {j}")
    if len(f_derivs) < j + 1 or len(phi_derivs) < j + 1:
        raise ValueError(f"need derivatives up to order {j} of both f and phi")
    if j == 0:
        return complex(f_derivs[0])
    total = 0j
    for ls in _partition_multiplicities(j):
        coefficient = math.factorial(j)
        term = 1.0 + 0j
        for k, l in enumerate(ls, start=1):
            coefficient //= math.factorial(l)
            term *= (phi_derivs[k] / math.factorial(k)) ** l
        total += coefficient * f_derivs[sum(ls)] * term
    return total


def compose_series(f_coeffs: Sequence[complex], phi_coeffs: Sequence[complex], degree: int) -> np.ndarray:
    """Taylor coefficients of f o phi up to `degree` for a polynomial f (Horner)"""
    phi_coeffs = np.asarray(phi_coeffs, dtype=complex)[: degree + 1]
    result = np.zeros(degree + 1, dtype=complex)
    for c in reversed(list(f_coeffs)):
        result = np.convolve(result, phi_coeffs)[: degree + 1]
        result[0] += c
    return result


def multiplier_matrix(space: TensorSpace, phi: MoebiusTransform) -> np.ndarray:
    """
    Monomial-coordinate matrix of f -> c(phi, .)(f o phi) on P_N.

    The cocycle is the ambient prod_i c^(lambda_i), so the operator is the
    tensor product of one-variable discrete-series matrices; entries with
    total degrees <= N are exact.
    """
    N = space.degree_bound
    idx = space.index_array
    matrix = np.ones((space.dim, space.dim), dtype=complex)
    for i, lam in enumerate(space.lambdas):
        single = discrete_series_matrix(lam, phi, N)
        matrix *= single[np.ix_(idx[:, i], idx[:, i])]
    return matrix


def to_orthonormal(space: TensorSpace, matrix: np.ndarray) -> np.ndarray:
    """Express a monomial-coordinate operator in the basis z^alpha/||z^alpha||"""
    norms = np.sqrt(space.gram)
    return norms[:, None] * matrix / norms[None, :]
