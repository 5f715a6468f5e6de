import json
import logging
import os
import uuid
from datetime import datetime
from typing import Dict, List, Optional, Sequence

import numpy as np

from decompose.kernels import cocycle_identity_check
from decompose.refinements import DECOMPOSITION_TOLERANCES, decompose_space, degree_scaled, polydisc_report
from homogeneous.operators import (
    block_structure_report,
    diagonal_block_weights,
    filtration_invariance_check,
    homogeneous_report,
    identify_shift_parameter,
    intertwining_check,
    joint_eigenspace_check,
    kernel_covariance_check,
    shift_equivalence_check,
)
from moebius.transforms import MoebiusTransform, involution_at
from reports.models import DEFAULT_SEED, CheckRow, DecompositionReport, HomogeneousReport
from spaces.discspace import kernel_transform_check
from spaces.polyspace import TensorSpace

DEFAULT_TOLERANCES = {
    "cocycle_identity": 1e-9,
    "kernel_transformation": 1e-9,
    "filtration_invariance": 1e-12,
    "block_structure": 1e-12,
    "shift_equivalence": 1e-9,
    "intertwining": 1e-6,
    "joint_eigenspace": 1e-8,
    "kernel_covariance": 1e-6,
    "polydisc_multiplicity": 0.5,
    **DECOMPOSITION_TOLERANCES,
}

BIDISC_CHECKS = (
    "cocycle_identity",
    "kernel_transformation",
    "filtration_invariance",
    "block_structure",
    "shift_equivalence",
    "intertwining",
    "joint_eigenspace",
    "kernel_covariance",
)

KERNEL_SAMPLES = 1000
SHIFT_SUMMANDS = 3

# residuals that accumulate over the graded pieces of P_N
DEGREE_SCALED_CHECKS = ("block_structure",)


class ToleranceError(ValueError):
    """Unknown tolerance names in a run configuration"""


def merge_tolerances(tolerances: Optional[Dict[str, float]] = None) -> Dict[str, float]:
    unknown = set(tolerances or {}) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise ToleranceError(f"unknown tolerance names: {sorted(unknown)}")
    return {**DEFAULT_TOLERANCES, **(tolerances or {})}


class VerificationSuite:
    def __init__(
        self,
        lambdas: Sequence[float],
        degree: int = 12,
        tolerances: Optional[Dict[str, float]] = None,
        seed: int = DEFAULT_SEED,
        noise: Optional[float] = None,
        session_id: Optional[str] = None,
    ):
        self.tolerances = merge_tolerances(tolerances)
        self.seed = seed
        self.session_id = session_id or str(uuid.uuid4())[:8]
        self.space = TensorSpace(tuple(lambdas), degree)
        if noise:
            self.space = self.space.with_noise(noise, seed)

        # Setup logging
        self._setup_logging()
        self.session_logger.info(f"Space lambdas={self.space.lambdas} N={degree} noise={noise} seed={seed}")

    def _setup_logging(self):
        """Setup logging for the verification session and errors"""
        log_dir = os.getenv("MOB_RKHS_LOG_DIR", "logs")
        os.makedirs(log_dir, exist_ok=True)

        # Session log file
        session_log_file = os.path.join(
            log_dir, f"verify_session_{self.session_id}_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"
        )
        self.session_logger = logging.getLogger(f"session_{self.session_id}")
        self.session_logger.handlers.clear()
        session_handler = logging.FileHandler(session_log_file)
        session_handler.setFormatter(logging.Formatter("%(asctime)s - %(levelname)s - %(message)s"))
        self.session_logger.addHandler(session_handler)
        self.session_logger.setLevel(logging.INFO)
        self.session_logger.propagate = False

        # Error log file
        error_log_file = os.path.join(log_dir, f"errors_{datetime.now().strftime('%Y%m%d')}.log")
        self.error_logger = logging.getLogger(f"errors_{self.session_id}")
        self.error_logger.handlers.clear()
        error_handler = logging.FileHandler(error_log_file)
        error_handler.setFormatter(logging.Formatter("%(asctime)s - %(levelname)s - %(message)s"))
        self.error_logger.addHandler(error_handler)
        self.error_logger.setLevel(logging.ERROR)
        self.error_logger.propagate = False

        self.session_logger.info(f"=== NEW VERIFICATION SESSION STARTED: {self.session_id} ===")

    def _rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def _random_transform(self, rng: np.random.Generator, radius: float = 0.7) -> MoebiusTransform:
        r, t = radius * np.sqrt(rng.uniform()), rng.uniform(0, 2 * np.pi)
        return MoebiusTransform(rng.uniform(0, 2 * np.pi), r * np.exp(1j * t))

    def _random_points(self, rng: np.random.Generator, count: int, radius: float = 0.7) -> np.ndarray:
        r = radius * np.sqrt(rng.uniform(size=count))
        return r * np.exp(1j * rng.uniform(0, 2 * np.pi, size=count))

    def _test_transforms(self) -> List[MoebiusTransform]:
        rng = self._rng()
        return [MoebiusTransform.rotation(0.7), involution_at(0.3), self._random_transform(rng, 0.5)]

    def _row(self, check: str, residual: float, message: str = "") -> CheckRow:
        tolerance = self.tolerances[check]
        if check in DEGREE_SCALED_CHECKS:
            tolerance = degree_scaled(tolerance, self.space.degree_bound)
        return CheckRow(check=check, residual=float(residual), tolerance=tolerance,
                        passed=bool(residual <= tolerance), message=message)

    def _result(self, row: CheckRow) -> Dict:
        return {
            "success": row.passed,
            "data": row,
            "message": f"{row.check}: residual {row.residual:.3e} (tolerance {row.tolerance:.1e})",
        }

    # Suites

    def run_cocycle_identity(self) -> Dict:
        rng = self._rng()
        points = [self._random_points(rng, self.space.d, 0.6) for _ in range(8)]
        worst = 0.0
        for _ in range(20):
            phi, psi = self._random_transform(rng), self._random_transform(rng)
            worst = max(worst, cocycle_identity_check(self.space.cocycle, phi, psi, points))
        return self._result(self._row("cocycle_identity", worst))

    def run_kernel_transformation(self) -> Dict:
        rng = self._rng()
        worst = 0.0
        for _ in range(KERNEL_SAMPLES):
            lam = rng.uniform(0.5, 5.0)
            z, w = self._random_points(rng, 2)
            worst = max(worst, kernel_transform_check(lam, self._random_transform(rng), z, w))
        return self._result(self._row("kernel_transformation", worst, f"{KERNEL_SAMPLES} samples"))

    def run_filtration_invariance(self) -> Dict:
        N = self.space.degree_bound
        worst = max(filtration_invariance_check(self.space, n) for n in range(N - 1))
        return self._result(self._row("filtration_invariance", worst))

    def run_block_structure(self) -> Dict:
        norms = block_structure_report(self.space)
        upper = norms[np.triu_indices_from(norms, k=1)]
        return self._result(self._row("block_structure", float(upper.max(initial=0.0)), "largest block above the diagonal"))

    def run_shift_equivalence(self) -> Dict:
        if self.space.d != 2:
            return {"success": False, "data": None, "message": "shift equivalence needs a bidisc space"}
        base = identify_shift_parameter(diagonal_block_weights(self.space, 0, i=1))
        self.session_logger.info(f"lambda_hat from the compression to S_0: {base:.12f}")
        worst = 0.0
        for n in range(min(SHIFT_SUMMANDS, self.space.degree_bound - 3) + 1):
            first = diagonal_block_weights(self.space, n, i=1)
            second = diagonal_block_weights(self.space, n, i=2)
            worst = max(
                worst,
                shift_equivalence_check(first, base + 2 * n),
                shift_equivalence_check(second, base + 2 * n),
                float(np.max(np.abs(first - second))),
            )
            self.session_logger.info(f"summand {n}: weights {np.round(first, 12).tolist()}")
        return self._result(self._row("shift_equivalence", worst, f"against lambda' = {base:.10g} + 2n"))

    def run_intertwining(self) -> Dict:
        worst = max(intertwining_check(self.space, phi) for phi in self._test_transforms())
        return self._result(self._row("intertwining", worst))

    def run_joint_eigenspace(self) -> Dict:
        rng = self._rng()
        worst, message = 0.0, ""
        for _ in range(4):
            w = self._random_points(rng, self.space.d, 0.5)
            result = joint_eigenspace_check(self.space, w)
            if result["dimension"] != 1:
                worst, message = 1.0, f"eigenspace at {w.tolist()} has dimension {result['dimension']}"
                break
            worst = max(worst, result["residual"], result["equation_residual"])
        return self._result(self._row("joint_eigenspace", worst, message))

    def run_kernel_covariance(self) -> Dict:
        rng = self._rng()
        worst = 0.0
        for phi in self._test_transforms():
            w = self._random_points(rng, self.space.d, 0.2)
            result = kernel_covariance_check(self.space, phi, w)
            worst = max(worst, result["deviation"], result["constant_gap"])
        return self._result(self._row("kernel_covariance", worst))

    def run_check(self, name: str) -> Dict:
        """Run one named check"""
        try:
            self.session_logger.info(f"Running check: {name}")
            runner = getattr(self, f"run_{name}", None) if name in BIDISC_CHECKS else None
            if runner is None:
                result = {"success": False, "data": None, "message": f"Unknown check: {name}"}
            else:
                result = runner()
            self.session_logger.info(f"Check result: {result['message']}")
            return result

        except Exception as e:
            error_msg = f"Check {name} failed with error: {str(e)}"
            self.error_logger.error(error_msg, exc_info=True)
            return {
                "success": False,
                "data": CheckRow(check=name, residual=float("inf"), tolerance=self.tolerances.get(name, 1.0),
                                 passed=False, message=error_msg),
                "message": error_msg,
            }

    def run_all(self, names: Sequence[str] = BIDISC_CHECKS) -> List[CheckRow]:
        rows = []
        for name in names:
            result = self.run_check(name)
            rows.append(result["data"] if result["data"] is not None else
                        CheckRow(check=name, residual=float("inf"), tolerance=self.tolerances[name],
                                 passed=False, message=result["message"]))
        failed = [row.check for row in rows if not row.passed]
        self.session_logger.info(f"Suite finished: {len(rows) - len(failed)}/{len(rows)} passed, failing {failed}")
        return rows

    def run_decomposition(self, parity: Optional[str] = None) -> Dict:
        try:
            report = decompose_space(self.space, parity=parity, tolerances=self.tolerances)
            self.session_logger.info(f"Decomposition ladder: {json.dumps(report.ladder)}")
            for violation in report.violations:
                self.error_logger.error(f"Contract violation: {violation}")
            return {
                "success": report.passed,
                "data": report,
                "message": "all contracts hold" if report.passed else f"{len(report.violations)} contract violations",
            }
        except Exception as e:
            error_msg = f"Decomposition error: {str(e)}"
            self.error_logger.error(error_msg, exc_info=True)
            return {"success": False, "data": None, "message": error_msg}

    def run_homogeneous_report(self) -> Dict:
        """Block norms, shift weights and intertwining residuals of the homogeneous pair"""
        try:
            report: HomogeneousReport = homogeneous_report(self.space, self._test_transforms(), SHIFT_SUMMANDS)
            self.session_logger.info(f"Homogeneous report: lambda_hat={report.lambda_hat:.12f}")
            return {"success": True, "data": report, "message": "homogeneous pair report built"}
        except Exception as e:
            error_msg = f"Homogeneous report error: {str(e)}"
            self.error_logger.error(error_msg, exc_info=True)
            return {"success": False, "data": None, "message": error_msg}


def run_polydisc(lambdas: Sequence[float], degree: int, tolerances: Optional[Dict[str, float]] = None) -> Dict:
    """Polydisc multiplicities as a report plus one check row"""
    tolerance = merge_tolerances(tolerances)["polydisc_multiplicity"]
    try:
        report: DecompositionReport = polydisc_report(lambdas, degree)
    except Exception as e:
        logging.getLogger(__name__).error("Polydisc decomposition error: %s", e, exc_info=True)
        return {"success": False, "data": None, "message": f"Polydisc decomposition error: {str(e)}"}
    gap = max((abs(row.multiplicity - row.expected) for row in report.multiplicities), default=float("inf"))
    if len(report.violations):
        gap = max(gap, 1.0)
    row = CheckRow(check="polydisc_multiplicity", residual=float(gap), tolerance=tolerance,
                   passed=gap <= tolerance, message="; ".join(report.violations))
    return {"success": row.passed, "data": {"report": report, "row": row}, "message": row.message or "multiplicities K+1"}
