"""
The multiplication pair (M_z1, M_z2) on truncated tensor spaces: invariance of
the diagonal filtration, block-triangular structure, diagonal blocks as
weighted Bergman shifts, and the covariance of the pair under the cocycle
representation.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import null_space

from decompose.filtration import summand_bases, torus_weight, vanishing_filtration_basis
from moebius.transforms import MoebiusTransform, cocycle_eval
from reports.models import DiagonalRecord, HomogeneousReport, IntertwiningRecord
from spaces.discspace import SpaceError, shift_weights
from spaces.polyspace import PolyFunction, TensorSpace, multiplier_matrix, to_orthonormal

logger = logging.getLogger(__name__)

BASES = ("monomial", "summand")
COVARIANCE_DEGREE = 24


@dataclass
class OperatorMatrix:
    """Matrix of an operator P_{N-1} -> P_N in orthonormal bases, rows and columns labelled"""

    entries: np.ndarray
    basis: str
    domain_degree: int
    codomain_degree: int
    row_degrees: np.ndarray
    col_degrees: np.ndarray
    row_summands: Optional[np.ndarray] = None
    col_summands: Optional[np.ndarray] = None

    def grading_defect(self) -> float:
        """Largest entry with row degree != column degree + 1"""
        off = self.row_degrees[:, None] != self.col_degrees[None, :] + 1
        return float(np.max(np.abs(self.entries[off]), initial=0.0))

    def block(self, n: int, m: int) -> np.ndarray:
        if self.row_summands is None:
            raise SpaceError("summand blocks need the summand basis")
        return self.entries[np.ix_(self.row_summands == n, self.col_summands == m)]


def _check_coordinate(space: TensorSpace, i: int):
    if not 1 <= i <= space.d:
        raise SpaceError(f"coordinate must lie in 1..{space.d}, got {i}")


def _restricted(space: TensorSpace, N: Optional[int]) -> TensorSpace:
    if N is None or N == space.degree_bound:
        return space
    if N > space.degree_bound:
        raise SpaceError(f"degree {N} exceeds the space's degree bound {space.degree_bound}")
    if space.is_tensor:
        return TensorSpace(space.lambdas, N)
    return TensorSpace(space.lambdas, N, tuple(space.gram[: TensorSpace(space.lambdas, N).dim]))


def multiplication_matrix(space: TensorSpace, i: int, N: Optional[int] = None, basis: str = "monomial") -> OperatorMatrix:
    """
    Matrix of f -> z_i f from P_{N-1} to P_N (i is 1-based).

    basis="monomial" uses z^alpha/||z^alpha||; basis="summand" uses the union
    of the orthonormal summand bases, ordered by summand then degree.
    """
    space = _restricted(space, N)
    _check_coordinate(space, i)
    if basis not in BASES:
        raise SpaceError(f"basis must be one of {BASES}, got {basis!r}")
    N = space.degree_bound
    shift = to_orthonormal(space, space.coordinate_shift(i - 1))
    domain = space.degrees <= N - 1

    if basis == "monomial":
        return OperatorMatrix(shift[:, domain], basis, N - 1, N, space.degrees, space.degrees[domain])

    bases = summand_bases(space)
    vectors = np.column_stack([b.matrix for b in bases if not b.is_empty])
    summands = np.concatenate([[b.m] * len(b) for b in bases]).astype(int)
    degrees = np.concatenate([b.degrees for b in bases]).astype(int)
    # orthonormal coordinates of the summand vectors
    change = np.sqrt(space.gram)[:, None] * vectors
    entries = change.conj().T @ shift @ change
    cols = degrees <= N - 1
    return OperatorMatrix(entries[:, cols], basis, N - 1, N, degrees, degrees[cols], summands, summands[cols])


def filtration_defect(f: PolyFunction, k: int) -> float:
    """
    Largest remainder met while dividing f by (x_1 - x_2)^k.

    Every torus-weight piece of f is a binary form in (x_1, x_2); setting
    t = x_1/x_2 turns division by x_1 - x_2 into synthetic division by t - 1.
    Integer coefficients give exact remainders.
    """
    pieces: Dict[Tuple[int, ...], Dict[int, complex]] = defaultdict(dict)
    for alpha, c in f.terms().items():
        pieces[torus_weight(alpha)][alpha[0]] = c
    worst = 0.0
    for weight, coeffs in pieces.items():
        poly = np.array([coeffs.get(j, 0) for j in range(weight[0] + 1)], dtype=complex)
        for _ in range(k):
            poly, remainder = P.polydiv(poly, [-1.0, 1.0])
            worst = max(worst, float(np.max(np.abs(remainder))))
    return worst


def filtration_invariance_check(space: TensorSpace, n: int, N: Optional[int] = None) -> float:
    """max over i and the spanning set of M_n cap P_{N-1} of the divisibility defect of z_i f by (x_1 - x_2)^{n+1}"""
    space = _restricted(space, N)
    N = space.degree_bound
    if not 0 <= n <= N - 2:
        raise SpaceError(f"filtration index {n} outside [0, {N - 2}]")
    worst = 0.0
    for f in vanishing_filtration_basis(space, n + 1, N - 1):
        for i in range(space.d):
            worst = max(worst, filtration_defect(f.times({tuple(int(j == i) for j in range(space.d)): 1}), n + 1))
    return worst


def block_structure_report(space: TensorSpace, N: Optional[int] = None, i: Optional[int] = None) -> np.ndarray:
    """
    Spectral norms ||P_n M_{z_i} P_m|| for n, m <= N; with i=None the larger of
    the two coordinates. Blocks above the diagonal (n < m) vanish.
    """
    coordinates = [i] if i is not None else list(range(1, space.d + 1))
    size = (N if N is not None else space.degree_bound) + 1
    norms = np.zeros((size, size))
    for coordinate in coordinates:
        op = multiplication_matrix(space, coordinate, N, basis="summand")
        for n in range(size):
            for m in range(size):
                block = op.block(n, m)
                if block.size:
                    norms[n, m] = max(norms[n, m], float(np.linalg.norm(block, 2)))
    return norms


def diagonal_block_weights(space: TensorSpace, n: int, N: Optional[int] = None, i: int = 1) -> np.ndarray:
    """Weight moduli |<z_i u_d, u_{d+1}>| of the compression of M_{z_i} to S_n, d = n..N-1"""
    op = multiplication_matrix(space, i, N, basis="summand")
    if not 0 <= n <= op.codomain_degree - 3:
        raise SpaceError(f"summand {n} outside [0, {op.codomain_degree - 3}]")
    block = op.block(n, n)
    if block.size == 0:
        raise SpaceError(f"summand {n} is empty")
    rows = op.row_degrees[op.row_summands == n]
    cols = op.col_degrees[op.col_summands == n]
    weights = [abs(block[np.nonzero(rows == d + 1)[0][0], k]) for k, d in enumerate(cols)]
    return np.asarray(weights)


def shift_equivalence_check(weights: Sequence[float], lambda_prime: float, length: Optional[int] = None) -> float:
    """max_k |weights[k] - sqrt((k+1)/(lambda' + k))|"""
    weights = np.asarray(weights, dtype=float)
    if length is not None and length != len(weights):
        raise SpaceError(f"expected {length} weights, got {len(weights)}")
    return float(np.max(np.abs(weights - shift_weights(lambda_prime, len(weights)))))


def identify_shift_parameter(weights: Sequence[float]) -> float:
    """
    Least-squares lambda' from weights w_k ~ sqrt((k+1)/(lambda' + k)): every
    weight gives (k+1)/w_k^2 - k, and the estimate is their mean.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.size == 0 or np.any(weights <= 0):
        raise SpaceError("need positive weights to identify a shift parameter")
    k = np.arange(weights.size)
    return float(np.mean((k + 1) / weights ** 2 - k))


def _functional_calculus(phi: MoebiusTransform, shift: np.ndarray, degree: int) -> np.ndarray:
    """phi(M) for the nilpotent-plus-scalar truncated shift, by the Taylor series of phi"""
    result = np.zeros_like(shift, dtype=complex)
    power = np.eye(shift.shape[0], dtype=complex)
    for c in phi.taylor_coefficients(degree):
        result += c * power
        power = power @ shift
    return result


def intertwining_check(space: TensorSpace, phi: MoebiusTransform, N: Optional[int] = None) -> float:
    """
    max_i ||(Pi(phi) M_{z_i} - phi(M_{z_i}) Pi(phi)) restricted to degrees <= N/2||
    in orthonormal coordinates, Pi(phi) f = c(phi, .)(f o phi).
    """
    space = _restricted(space, N)
    N = space.degree_bound
    operator = multiplier_matrix(space, phi)
    leading = space.degrees <= N // 2
    worst = 0.0
    for i in range(space.d):
        shift = space.coordinate_shift(i)
        difference = operator @ shift - _functional_calculus(phi, shift, N) @ operator
        difference = to_orthonormal(space, difference)[:, leading]
        worst = max(worst, float(np.linalg.norm(difference, 2)))
    logger.debug("intertwining residual for phi=(%.4f, %s): %.3e", phi.theta, phi.a, worst)
    return worst


def _kernel_coordinates(space: TensorSpace, w: Sequence[complex]) -> np.ndarray:
    """Coordinates of K_N(., w) in the orthonormal monomial basis"""
    return space.kernel_section(w).coeffs * np.sqrt(space.gram)


def joint_eigenspace_check(space: TensorSpace, w: Sequence[complex], N: Optional[int] = None) -> Dict[str, float]:
    """
    Solutions v in P_N of M_{z_i}^* v = conj(w_i) v|_{P_{N-1}} for all i, where
    M_{z_i} maps P_{N-1} into P_N. Reports the dimension of the solution space
    and the distance of K_N(., w) from it.
    """
    space = _restricted(space, N)
    w = space._check_point(w)
    ops = [multiplication_matrix(space, i + 1).entries for i in range(space.d)]
    restriction = np.eye(ops[0].shape[1], ops[0].shape[0])
    system = np.vstack([op.conj().T - np.conj(wi) * restriction for op, wi in zip(ops, w)])
    solutions = null_space(system, rcond=1e-10)
    kernel = _kernel_coordinates(space, w)
    kernel = kernel / np.linalg.norm(kernel)
    if solutions.shape[1] == 0:
        return {"dimension": 0, "residual": 1.0, "equation_residual": float(np.linalg.norm(system @ kernel))}
    inside = solutions @ (solutions.conj().T @ kernel)
    return {
        "dimension": int(solutions.shape[1]),
        "residual": float(np.linalg.norm(kernel - inside)),
        "equation_residual": float(np.linalg.norm(system @ kernel)),
    }


def kernel_covariance_check(space: TensorSpace, phi: MoebiusTransform, w: Sequence[complex],
                            N: Optional[int] = None) -> Dict[str, float]:
    """
    Pi(phi) K(., w) against K(., phi^{-1}(w)) on degrees <= N/2: the relative
    deviation from proportionality and the gap between the modulus of the
    constant and |c(phi^{-1}, w)|.

    Tensor spaces are evaluated at degree max(N, COVARIANCE_DEGREE) so the
    kernel tail stays out of the compared degrees; other Grams are used as given.
    """
    space = _restricted(space, N)
    N = space.degree_bound
    w = space._check_point(w)
    work = TensorSpace(space.lambdas, max(N, COVARIANCE_DEGREE)) if space.is_tensor else space
    target = np.array([phi.inverse()(wi) for wi in w])
    leading = work.degrees <= N // 2
    image = to_orthonormal(work, multiplier_matrix(work, phi)) @ _kernel_coordinates(work, w)
    image, expected = image[leading], _kernel_coordinates(work, target)[leading]
    constant = np.vdot(expected, image) / np.vdot(expected, expected)
    modulus = abs(np.prod([cocycle_eval(lam, phi.inverse(), wi) for lam, wi in zip(space.lambdas, w)]))
    return {
        "deviation": float(np.linalg.norm(image - constant * expected) / np.linalg.norm(image)),
        "constant_gap": abs(abs(constant) - modulus),
    }


def homogeneous_report(space: TensorSpace, phis: Sequence[MoebiusTransform], n_max: int = 3,
                       lambda_hat: Optional[float] = None) -> HomogeneousReport:
    """
    Block norms, diagonal weight deviations and intertwining residuals in one
    report. Without lambda_hat the base parameter is identified from the
    compression of M_{z_1} to S_0.
    """
    N = space.degree_bound
    base = lambda_hat if lambda_hat is not None else identify_shift_parameter(diagonal_block_weights(space, 0))
    diagonal = []
    for n in range(min(n_max, N - 3) + 1):
        first = diagonal_block_weights(space, n, i=1)
        second = diagonal_block_weights(space, n, i=2)
        diagonal.append(DiagonalRecord(
            n=n,
            lambda_prime=base + 2 * n,
            max_weight_dev=max(shift_equivalence_check(first, base + 2 * n),
                               shift_equivalence_check(second, base + 2 * n)),
            coordinate_dev=float(np.max(np.abs(first - second))),
        ))
    intertwining = [
        IntertwiningRecord(phi_params=(phi.theta, phi.a.real, phi.a.imag), residual=intertwining_check(space, phi))
        for phi in phis
    ]
    return HomogeneousReport(
        lambdas=list(space.lambdas),
        degree_bound=N,
        lambda_hat=base,
        blocks=block_structure_report(space).tolist(),
        diagonal=diagonal,
        intertwining=intertwining,
    )
