"""
Full decomposition pipelines: the bidisc ladder, its symmetric and
antisymmetric refinements, and the two-stage polydisc split.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from decompose.filtration import (
    SubspaceBasis,
    SummandError,
    completeness_check,
    expected_dimension,
    summand_bases,
    summand_basis,
    summand_nonempty,
)
from decompose.kernels import (
    DEFAULT_GRID,
    KERNEL_GRID,
    LADDER_GRID,
    cocycle_parameter,
    f_factor,
    identify_lambda,
    restricted_kernel,
    summand_diagonal,
    two_route_agreement,
    verify_summand_kernel,
)
from reports.models import (
    ComplexSample,
    DecompositionReport,
    MultiplicityRow,
    StageRecord,
    SummandRecord,
)
from spaces.polyspace import TensorSpace

logger = logging.getLogger(__name__)

LADDER_HEADROOM = 8
RESIDUAL_HEADROOM = 4
POLYDISC_HEADROOM = 6
BIN_TOL = 1e-3

DECOMPOSITION_TOLERANCES = {
    "orthonormality": 1e-12,
    "ladder": 1e-4,
    "summand_kernel": 1e-7,
    "two_route": 1e-7,
}


def degree_scaled(tolerance: float, N: int) -> float:
    """tolerance * N for defects accumulated over the graded pieces of P_N"""
    return tolerance * max(1, N)


def _expected_graded_dims(m: int, N: int, allowed: bool) -> List[int]:
    if not allowed:
        return [0] * (N + 1)
    return [1 if d >= m else 0 for d in range(N + 1)]


def _parity_allows(parity: Optional[str], m: int) -> bool:
    if parity == "symmetric":
        return m % 2 == 0
    if parity == "antisymmetric":
        return m % 2 == 1
    return True


def decompose_space(
    space: TensorSpace,
    N: Optional[int] = None,
    parity: Optional[str] = None,
    tolerances: Optional[Dict[str, float]] = None,
) -> DecompositionReport:
    """
    Run the bidisc pipeline: summand bases for every m <= N, identified
    parameters for m <= N - LADDER_HEADROOM and kernel-law residuals for
    m <= N - RESIDUAL_HEADROOM.
    """
    if space.d != 2:
        raise SummandError(f"decompose_space handles the bidisc, got d={space.d}")
    tol = {**DECOMPOSITION_TOLERANCES, **(tolerances or {})}
    N = space.degree_bound if N is None else N
    bases = summand_bases(space, N, parity)
    report = DecompositionReport(lambdas=list(space.lambdas), degree_bound=N, parity=parity)

    total, defect = completeness_check(bases)
    report.total_dim, report.expected_dim, report.orthonormality_defect = total, expected_dimension(space, N, parity), defect
    if total != report.expected_dim:
        report.violations.append(f"summands span {total} dimensions, expected {report.expected_dim}")
    if defect > degree_scaled(tol["orthonormality"], N):
        report.violations.append(f"union of summand bases is not orthonormal (defect {defect:.3e})")

    nonempty = [b for b in bases if not b.is_empty]
    if not nonempty:
        report.violations.append("every summand is empty")
        return report
    reference = nonempty[0]
    m_low = reference.m
    report.lambda_hat = identify_lambda(summand_diagonal(space, m_low, reference), DEFAULT_GRID) - 2 * m_low
    logger.info("lambda_hat = %.10f from summand %d", report.lambda_hat, m_low)
    report.cocycle_parameter = cocycle_parameter(space)

    for basis in bases:
        report.summands.append(_summand_record(space, basis, reference, report, tol))

    report.f_samples = [ComplexSample.of(z, f_factor(space, z, reference)) for z in KERNEL_GRID]
    logger.info("decomposition of %s at N=%d (parity=%s): %d violations",
                space.lambdas, N, parity, len(report.violations))
    return report


def _summand_record(
    space: TensorSpace,
    basis: SubspaceBasis,
    reference: SubspaceBasis,
    report: DecompositionReport,
    tol: Dict[str, float],
) -> SummandRecord:
    m, N, parity = basis.m, basis.degree_bound, basis.parity
    record = SummandRecord(m=m, dim=len(basis), graded_dims=basis.graded_dims, empty=basis.is_empty)

    allowed = _parity_allows(parity, m)
    if space.is_tensor and record.graded_dims != _expected_graded_dims(m, N, allowed):
        report.violations.append(f"summand {m}: graded dims {record.graded_dims}")

    criterion = summand_nonempty(space, m, basis, points=(0.2 + 0j, 0.1j))
    if criterion["disagreement"]:
        report.nonempty_disagreement.append(m)
    if not criterion["agrees_with_basis"]:
        report.violations.append(f"summand {m}: non-emptiness criterion disagrees with the basis")
    if basis.is_empty:
        return record

    record.k00 = restricted_kernel(space, m, 0j, 0j, basis=basis).real
    if m <= N - LADDER_HEADROOM:
        record.parameter = identify_lambda(summand_diagonal(space, m, basis), LADDER_GRID)
        expected = report.lambda_hat + 2 * m
        if abs(record.parameter - expected) > tol["ladder"]:
            report.violations.append(f"summand {m}: parameter {record.parameter:.6f}, expected {expected:.6f}")
    if m <= N - RESIDUAL_HEADROOM:
        record.residual = verify_summand_kernel(space, m, lambda_hat=report.cocycle_parameter,
                                               basis=basis, basis0=reference)
        record.two_route = two_route_agreement(space, m, basis)
        # absolute residuals grow with K_m(0,0)
        scale = max(1.0, record.k00)
        if record.residual > tol["summand_kernel"] * scale:
            report.violations.append(f"summand {m}: kernel residual {record.residual:.3e}")
        if record.two_route > tol["two_route"] * scale:
            report.violations.append(f"summand {m}: kernel routes disagree by {record.two_route:.3e}")
    logger.debug("summand %d: dim %d, K(0,0) %.12f, parameter %s", m, len(basis), record.k00, record.parameter)
    return record


def symmetric_decomposition(lam: float, N: int, parity: str,
                            tolerances: Optional[Dict[str, float]] = None) -> DecompositionReport:
    """Decomposition of the symmetric or antisymmetric part of A^(lam) x A^(lam)"""
    return decompose_space(TensorSpace((lam, lam), N), N, parity, tolerances)


def equivalent_tensor_parameters(report: DecompositionReport) -> Tuple[float, float]:
    """
    A pair (lambda_1, lambda_2) with lambda_1 + lambda_2 = lambda_hat.

    With the full ladder, K_1(0,0)/K_0(0,0) = lambda_1 lambda_2/(lambda_1 + lambda_2)
    pins the pair down; otherwise the symmetric split is returned.
    """
    if report.lambda_hat is None:
        raise SummandError("report has no identified parameter")
    total = report.lambda_hat
    records = {s.m: s for s in report.summands if s.k00 is not None}
    if report.parity is None and 0 in records and 1 in records:
        product = total * records[1].k00 / records[0].k00
        discriminant = total * total - 4 * product
        if discriminant >= -1e-9:
            root = math.sqrt(max(discriminant, 0.0))
            return (total - root) / 2, (total + root) / 2
        logger.warning("no real tensor pair matches K_1(0,0)/K_0(0,0); using the symmetric split")
    return total / 2, total / 2


def _stage_space(basis: SubspaceBasis, lambdas: Sequence[float]) -> Tuple[TensorSpace, TensorSpace]:
    """Image of Gamma_k on (x_1, x_3) as a diagonal-Gram space, and the tensor space it should match"""
    k = basis.m
    degree = basis.degree_bound - k
    gram = {}
    for image in basis.gamma_images:
        (alpha, gamma), = image.items()
        gram[tuple(int(a) for a in alpha)] = 1.0 / abs(gamma) ** 2
    tensor_lambdas = (lambdas[0] + lambdas[1] + 2 * k, lambdas[2])
    return TensorSpace.from_gram(tensor_lambdas, degree, gram), TensorSpace(tensor_lambdas, degree)


def proportionality_deviation(space: TensorSpace, model: TensorSpace) -> float:
    ratio = space.gram / model.gram
    return float(np.max(np.abs(ratio / ratio[0] - 1.0)))


def _bin_parameters(parameters: Sequence[float], tol: float) -> List[Tuple[float, int]]:
    bins: List[List[float]] = []
    for p in sorted(parameters):
        if bins and abs(p - bins[-1][0]) <= tol:
            bins[-1].append(p)
        else:
            bins.append([p])
    return [(float(np.mean(b)), len(b)) for b in bins]


def polydisc_report(lambdas: Sequence[float], N: int) -> DecompositionReport:
    """
    Two-stage decomposition on the tridisc: split along x_1 = x_2 into summands
    k3, re-embed each Gamma_k3 image as a space on the bidisc and run the bidisc
    ladder on it for k2 <= K_max - k3, K_max = N - POLYDISC_HEADROOM.
    """
    if len(lambdas) != 3:
        raise SummandError(f"polydisc decomposition is implemented for three factors, got {len(lambdas)}")
    if N < POLYDISC_HEADROOM:
        raise SummandError(f"polydisc decomposition needs N >= {POLYDISC_HEADROOM}, got {N}")
    space = TensorSpace(tuple(lambdas), N)
    k_max = N - POLYDISC_HEADROOM
    report = DecompositionReport(lambdas=list(space.lambdas), degree_bound=N, stages=[])
    total_lambda = sum(space.lambdas)

    parameters = []
    for k3 in range(k_max + 1):
        first = summand_basis(space, k3, N)
        stage, model = _stage_space(first, space.lambdas)
        deviation = proportionality_deviation(stage, model)
        found = []
        for k2 in range(k_max - k3 + 1):
            basis = summand_basis(stage, k2)
            if basis.is_empty:
                report.violations.append(f"stage {k3}: summand {k2} is empty")
                continue
            found.append(identify_lambda(summand_diagonal(stage, k2, basis), LADDER_GRID))
        report.stages.append(StageRecord(k3=k3, tensor_parameters=model.lambdas,
                                         proportionality_deviation=deviation, parameters=found))
        logger.info("stage %d: re-embedded as %s (deviation %.2e), parameters %s",
                    k3, model.lambdas, deviation, [round(p, 6) for p in found])
        parameters.extend(found)

    report.lambda_hat = min(parameters) if parameters else None
    report.multiplicities = []
    for parameter, multiplicity in _bin_parameters(parameters, BIN_TOL):
        K = int(round((parameter - total_lambda) / 2))
        row = MultiplicityRow(K=K, parameter=parameter, multiplicity=multiplicity, expected=K + 1)
        report.multiplicities.append(row)
        if abs(parameter - (total_lambda + 2 * K)) > BIN_TOL or multiplicity != K + 1:
            report.violations.append(f"parameter {parameter:.6f}: multiplicity {multiplicity}, expected {K + 1}")
    if len(report.multiplicities) != k_max + 1:
        report.violations.append(f"found {len(report.multiplicities)} distinct parameters, expected {k_max + 1}")
    return report


def polydisc_decompose(lambdas: Sequence[float], N: int) -> List[Tuple[float, int]]:
    """(parameter, multiplicity) pairs of the tridisc tensor product"""
    return polydisc_report(lambdas, N).pairs()
