"""
The diagonal-vanishing filtration M_m, its summands S_m = M_{m-1} (-) M_m and the
restriction maps Gamma_m f = d_1^m f |_{x_1 = x_2}.

f lies in M_k exactly when (x_1 - x_2)^{k+1} divides f, and every M_k is a
direct sum of its torus-weight pieces (weight = (alpha_1 + alpha_2, alpha_3, ...)).
Since the Gram is diagonal in monomials these pieces are mutually orthogonal,
so S_m is computed one weight class at a time and total-degree truncation is
exact.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from spaces.discspace import DiscFunction
from spaces.polyspace import (
    MultiIndex,
    PolyFunction,
    TensorSpace,
    graded_multi_indices,
    inner_product,
    kernel_derivative_section,
    multiplier_matrix,
)

logger = logging.getLogger(__name__)

PARITIES = ("symmetric", "antisymmetric")
DEPENDENCE_TOL = 1e-10
SPAN_TOL = 1e-9


class SummandError(ValueError):
    """Raised for invalid summand requests or functions outside a summand."""


def _resolve_degree(space: TensorSpace, N: Optional[int]) -> int:
    if N is None:
        return space.degree_bound
    if N > space.degree_bound:
        raise SummandError(f"degree {N} exceeds the space's degree bound {space.degree_bound}")
    return N


def _check_parity(space: TensorSpace, parity: Optional[str]):
    if parity is None:
        return
    if parity not in PARITIES:
        raise SummandError(f"parity must be one of {PARITIES}, got {parity!r}")
    if space.d != 2 or not np.allclose(space.gram, space.monomial_swap_gram()):
        raise SummandError("parity subspaces need a bidisc space symmetric under z1 <-> z2")


def diagonal_power_terms(m: int, d: int) -> Dict[MultiIndex, float]:
    """Terms of (x_1 - x_2)^m in d variables"""
    pad = (0,) * (d - 2)
    return {(k, m - k) + pad: math.comb(m, k) * (-1) ** (m - k) for k in range(m + 1)}


def torus_weight(alpha: MultiIndex) -> Tuple[int, ...]:
    return (alpha[0] + alpha[1],) + tuple(alpha[2:])


def apply_parity(f: PolyFunction, parity: Optional[str]) -> PolyFunction:
    if parity is None:
        return f
    sign = 1.0 if parity == "symmetric" else -1.0
    return (f + f.swapped().scaled(sign)).scaled(0.5)


def vanishing_filtration_basis(space: TensorSpace, m: int, N: Optional[int] = None) -> List[PolyFunction]:
    """
    Spanning set {(x_1 - x_2)^m x^beta : |beta| <= N - m} of M_{m-1} within P_N
    (M_{-1} is the whole space).
    """
    N = _resolve_degree(space, N)
    if m < 0 or m > N:
        raise SummandError(f"filtration index {m} outside [0, {N}]")
    factor = diagonal_power_terms(m, space.d)
    return [space.monomial(beta).times(factor) for beta in graded_multi_indices(space.d, N - m)]


def gram_schmidt(
    vectors: Sequence[PolyFunction],
    space: TensorSpace,
    against: Sequence[PolyFunction] = (),
    tol: float = DEPENDENCE_TOL,
) -> List[PolyFunction]:
    """
    Modified Gram-Schmidt with a second orthogonalization pass.

    Vectors are first made orthogonal to the orthonormal list `against`; a
    vector whose residual falls below tol times its original norm is dropped.
    """
    basis = list(against)
    produced = []
    for v in vectors:
        original = v.norm()
        if original == 0:
            continue
        residual = v
        for _ in range(2):
            for q in basis:
                residual = residual - q.scaled(inner_product(residual, q, space))
        norm = residual.norm()
        if norm <= tol * original:
            continue
        unit = residual.scaled(1.0 / norm)
        basis.append(unit)
        produced.append(unit)
    return produced


def gamma_coefficients(f: PolyFunction, m: int) -> Dict[MultiIndex, complex]:
    """
    Terms of d_1^m f restricted to x_2 = x_1, as a polynomial in
    (x_1, x_3, ..., x_d).
    """
    image: Dict[MultiIndex, complex] = defaultdict(complex)
    for alpha, c in f.terms().items():
        if alpha[0] < m:
            continue
        beta = (alpha[0] - m + alpha[1],) + tuple(alpha[2:])
        image[beta] += c * math.perm(alpha[0], m)
    return {beta: c for beta, c in image.items() if c != 0}


def restrict_derivative(f: PolyFunction, m: int) -> DiscFunction:
    """The extension f -> d_1^m f(z, z) on all of P_N (bidisc)"""
    if f.space.d != 2:
        raise SummandError("one-variable restriction needs a bidisc space")
    coeffs = np.zeros(max(f.space.degree_bound - m, 0) + 1, dtype=complex)
    for (t,), c in gamma_coefficients(f, m).items():
        coeffs[t] += c
    return DiscFunction(coeffs)


@dataclass
class SubspaceBasis:
    """Orthonormal basis of S_m within P_N, one block per torus weight"""

    m: int
    space: TensorSpace
    degree_bound: int
    vectors: List[PolyFunction] = field(default_factory=list)
    weights: List[Tuple[int, ...]] = field(default_factory=list)
    parity: Optional[str] = None
    truncated: bool = False

    @property
    def graded_dims(self) -> List[int]:
        dims = [0] * (self.degree_bound + 1)
        for weight in self.weights:
            dims[sum(weight)] += 1
        return dims

    @property
    def degrees(self) -> List[int]:
        return [sum(weight) for weight in self.weights]

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def is_empty(self) -> bool:
        return not self.vectors

    @cached_property
    def matrix(self) -> np.ndarray:
        """Columns are the coefficient vectors of the basis"""
        if self.is_empty:
            return np.zeros((self.space.dim, 0), dtype=complex)
        return np.column_stack([v.coeffs for v in self.vectors])

    def coordinates(self, f: PolyFunction) -> np.ndarray:
        """<f, u_k> for each basis vector u_k"""
        return self.matrix.conj().T @ (self.space.gram * f.coeffs)

    def project(self, f: PolyFunction) -> PolyFunction:
        return PolyFunction(self.matrix @ self.coordinates(f), self.space)

    def span_residual(self, f: PolyFunction) -> float:
        return (f - self.project(f)).norm()

    @cached_property
    def gamma_images(self) -> List[Dict[MultiIndex, complex]]:
        return [gamma_coefficients(u, self.m) for u in self.vectors]


def summand_basis(
    space: TensorSpace,
    m: int,
    N: Optional[int] = None,
    parity: Optional[str] = None,
) -> SubspaceBasis:
    """
    Orthonormal basis of (M_{m-1} cap P_N) (-) (M_m cap P_N), restricted to the
    symmetric or antisymmetric functions when `parity` is given.

    Each basis vector is phase-normalized so that the leading coefficient of its
    Gamma_m image is positive real.
    """
    N = _resolve_degree(space, N)
    _check_parity(space, parity)
    if m < 0:
        raise SummandError(f"summand index must be nonnegative, got {m}")
    if m > N:
        logger.warning("summand %d requested above degree bound %d; returning empty basis", m, N)
        return SubspaceBasis(m, space, N, parity=parity, truncated=True)

    upper = _by_weight(vanishing_filtration_basis(space, m, N), parity)
    lower = _by_weight(vanishing_filtration_basis(space, m + 1, N), parity) if m + 1 <= N else {}

    basis = SubspaceBasis(m, space, N, parity=parity)
    for weight in sorted(upper, key=lambda w: (sum(w), tuple(-x for x in w))):
        inner = gram_schmidt(lower.get(weight, []), space)
        for u in gram_schmidt(upper[weight], space, against=inner):
            basis.vectors.append(_phase_normalized(u, m))
            basis.weights.append(weight)
    logger.debug("summand %d (parity=%s): graded dims %s", m, parity, basis.graded_dims)
    return basis


def _by_weight(vectors: List[PolyFunction], parity: Optional[str]) -> Dict[Tuple[int, ...], List[PolyFunction]]:
    grouped: Dict[Tuple[int, ...], List[PolyFunction]] = defaultdict(list)
    for v in vectors:
        v = apply_parity(v, parity)
        terms = v.terms()
        if not terms:
            continue
        grouped[torus_weight(next(iter(terms)))].append(v)
    return grouped


def _phase_normalized(u: PolyFunction, m: int) -> PolyFunction:
    image = gamma_coefficients(u, m)
    if not image:
        return u
    lead = max(image.values(), key=abs)
    return u.scaled(np.conj(lead) / abs(lead))


def gamma_map(basis: SubspaceBasis, f: PolyFunction, strict: bool = True) -> DiscFunction:
    """
    Gamma_m f = d_1^m f(z, z) for f in S_m (bidisc).

    With strict=False the membership check is skipped and the coefficient
    formula is applied to any polynomial.
    """
    if strict:
        residual = basis.span_residual(f)
        if residual > SPAN_TOL:
            raise SummandError(f"function lies outside S_{basis.m} (projection residual {residual:.3e})")
    return restrict_derivative(f, basis.m)


def summand_bases(space: TensorSpace, N: Optional[int] = None, parity: Optional[str] = None) -> List[SubspaceBasis]:
    N = _resolve_degree(space, N)
    return [summand_basis(space, m, N, parity) for m in range(N + 1)]


def completeness_check(bases: Sequence[SubspaceBasis]) -> Tuple[int, float]:
    """Total dimension of the summands and the orthonormality defect of their union"""
    vectors = [v for basis in bases for v in basis.vectors]
    if not vectors:
        return 0, 0.0
    space = vectors[0].space
    stacked = np.column_stack([v.coeffs for v in vectors])
    gram_matrix = stacked.conj().T @ (space.gram[:, None] * stacked)
    defect = float(np.max(np.abs(gram_matrix - np.eye(len(vectors)))))
    return len(vectors), defect


def expected_dimension(space: TensorSpace, N: int, parity: Optional[str] = None) -> int:
    """dim P_N, or of its symmetric / antisymmetric part"""
    full = math.comb(N + space.d, space.d)
    if parity is None:
        return full
    diagonal = N // 2 + 1  # monomials z1^i z2^i
    symmetric = (full + diagonal) // 2
    return symmetric if parity == "symmetric" else full - symmetric


def truncation_exactness_check(basis: SubspaceBasis) -> float:
    """max |<u, v>| over summand vectors u and the spanning set v of M_m cap P_N"""
    if basis.is_empty or basis.m + 1 > basis.degree_bound:
        return 0.0
    spanning = [apply_parity(v, basis.parity) for v in vanishing_filtration_basis(basis.space, basis.m + 1, basis.degree_bound)]
    worst = 0.0
    for v in spanning:
        scale = max(v.norm(), 1.0)
        worst = max(worst, float(np.max(np.abs(basis.coordinates(v)))) / scale)
    return worst


def reducing_check(bases: Sequence[SubspaceBasis], phi) -> float:
    """
    Largest component of c(phi, .)(u o phi), u in S_m, inside S_m' for m' != m.

    The multiplier matrix is exact at every retained degree and each S_m is a
    sum of homogeneous pieces, so no truncation tail enters.
    """
    nonempty = [b for b in bases if not b.is_empty]
    if not nonempty:
        return 0.0
    space = nonempty[0].space
    operator = multiplier_matrix(space, phi)
    worst = 0.0
    for source in nonempty:
        images = operator @ source.matrix
        for target in nonempty:
            if target.m == source.m:
                continue
            block = target.matrix.conj().T @ (space.gram[:, None] * images)
            worst = max(worst, float(np.linalg.norm(block, axis=0).max()))
    return worst


def summand_nonempty(
    space: TensorSpace,
    m: int,
    basis: Optional[SubspaceBasis] = None,
    points: Sequence[complex] = (0j,),
    tol: float = 1e-10,
) -> Dict[str, object]:
    """
    Non-emptiness criterion ||P_m conj(d_1)^m K(., (w, w))|| > tol, tested at
    (0, 0) and at the diagonal sample `points`.
    """
    if basis is None:
        basis = summand_basis(space, m)
    norms = [basis.project(kernel_derivative_section(space, m, w)).norm() for w in points]
    at_origin = basis.project(kernel_derivative_section(space, m, 0j)).norm() > tol
    on_diagonal = any(n > tol for n in norms)
    if at_origin != on_diagonal:
        logger.warning("summand %d: non-emptiness at (0,0) is %s but on the diagonal sample is %s",
                       m, at_origin, on_diagonal)
    return {
        "at_origin": at_origin,
        "on_diagonal": on_diagonal,
        "agrees_with_basis": at_origin == (not basis.is_empty),
        "disagreement": at_origin != on_diagonal,
    }
