import json
import os
import sys
import time
from datetime import datetime
from typing import Callable, Dict, List

import numpy as np

sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))
from decompose.filtration import summand_basis
from decompose.kernels import (
    cocycle_identity_check,
    identify_lambda,
    k00_oracle,
    projection_oracle,
    restricted_kernel,
    two_route_agreement,
    verify_summand_kernel,
)
from decompose.refinements import decompose_space, degree_scaled, polydisc_report, symmetric_decomposition
from homogeneous.operators import (
    block_structure_report,
    diagonal_block_weights,
    filtration_invariance_check,
    intertwining_check,
    shift_equivalence_check,
)
from moebius.transforms import MoebiusTransform, involution_at
from reports.models import DEFAULT_SEED
from spaces.discspace import kernel_eval, kernel_transform_check
from spaces.polyspace import TensorSpace

LADDER_PAIRS = [(1.0, 1.0), (1.0, 2.0), (0.5, 1.5)]


class AcceptanceExperiment:
    def __init__(self, degree: int = 12, seed: int = DEFAULT_SEED):
        self.degree = degree
        self.seed = seed
        self.results = []

    def run_all(self):
        """Run every acceptance criterion with timings"""
        print("ACCEPTANCE EXPERIMENT")
        print("=" * 60)
        criteria = self._define_criteria()
        print(f"Running {len(criteria)} criteria at N={self.degree}...")
        print("=" * 60)

        for i, (name, budget, check) in enumerate(criteria, 1):
            print(f"\n Criterion {i}/{len(criteria)}: {name}")
            result = self._evaluate_criterion(name, budget, check)
            self.results.append(result)
            self._print_criterion_result(result)

        self._generate_report()

    def _define_criteria(self) -> List:
        return [
            ("Clebsch-Gordan ladder", 5.0, self.ladder),
            ("Summand kernel law", None, self.summand_kernels),
            ("Derived constants", None, self.derived_constants),
            ("Kernel transformation and cocycles", None, self.transformation_rules),
            ("Parity refinement", 5.0, self.parity_refinement),
            ("Polydisc multiplicities", 30.0, self.polydisc),
            ("Homogeneous pair structure", None, self.homogeneous_pair),
            ("Curvature identification", None, self.curvature),
        ]

    def _evaluate_criterion(self, name: str, budget, check: Callable[[], Dict]) -> Dict:
        start = time.time()
        try:
            details = check()
            error = None
        except Exception as e:
            details, error = {"passed": False}, str(e)
        elapsed = time.time() - start
        within_budget = budget is None or elapsed / details.get("runs", 1) < budget
        return {
            "name": name,
            "passed": bool(details.pop("passed")) and within_budget and error is None,
            "runtime": elapsed,
            "budget": budget,
            "error": error,
            "details": details,
        }

    def ladder(self) -> Dict:
        worst, dims_ok = 0.0, True
        for lambdas in LADDER_PAIRS:
            report = decompose_space(TensorSpace(lambdas, self.degree))
            for s in report.summands:
                if s.parameter is not None:
                    worst = max(worst, abs(s.parameter - (sum(lambdas) + 2 * s.m)))
                dims_ok &= s.graded_dims == [1 if d >= s.m else 0 for d in range(self.degree + 1)]
        return {"passed": worst <= 1e-4 and dims_ok, "max_parameter_error": worst, "graded_dims_ok": dims_ok,
                "runs": len(LADDER_PAIRS)}

    def summand_kernels(self) -> Dict:
        residual, routes = 0.0, 0.0
        for lambdas in LADDER_PAIRS:
            space = TensorSpace(lambdas, self.degree)
            basis0 = summand_basis(space, 0)
            for m in range(4):
                basis = summand_basis(space, m)
                residual = max(residual, verify_summand_kernel(space, m, basis=basis, basis0=basis0))
                routes = max(routes, two_route_agreement(space, m, basis))
        return {"passed": residual <= 1e-7 and routes <= 1e-7, "max_residual": residual, "max_route_gap": routes}

    def derived_constants(self) -> Dict:
        gaps = {}
        for lambdas, expected in (((1.0, 1.0), 0.5), ((1.0, 2.0), 2.0 / 3.0)):
            space = TensorSpace(lambdas, self.degree)
            computed = restricted_kernel(space, 1, 0j, 0j).real
            gaps[str(lambdas)] = max(abs(computed - expected), abs(k00_oracle(lambdas, 1) - expected),
                                     abs(projection_oracle(space, 1) - expected))
        return {"passed": max(gaps.values()) <= 1e-10, "gaps": gaps}

    def transformation_rules(self) -> Dict:
        rng = np.random.default_rng(self.seed)

        def transform():
            return MoebiusTransform(rng.uniform(0, 2 * np.pi), 0.7 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform()))

        def point(radius=0.7):
            return radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())

        kernel = max(kernel_transform_check(rng.uniform(0.5, 5.0), transform(), point(), point()) for _ in range(1000))
        space = TensorSpace((1.0, 2.0), 4)
        samples = [(point(0.6), point(0.6)) for _ in range(8)]
        phi, psi = transform(), transform()
        cocycle = cocycle_identity_check(space.cocycle, phi, psi, samples)

        def perturbed(g, x):
            return space.cocycle(g, x) * (1 + 0.01 * x[0])

        control = cocycle_identity_check(perturbed, phi, psi, samples)
        return {"passed": kernel <= 1e-9 and cocycle <= 1e-9 and control > 1e-4,
                "kernel_residual": kernel, "cocycle_deviation": cocycle, "negative_control": control}

    def parity_refinement(self) -> Dict:
        symmetric = symmetric_decomposition(1.0, self.degree, "symmetric")
        antisymmetric = symmetric_decomposition(1.0, self.degree, "antisymmetric")
        sym_ladder = [round(p) for _, p in symmetric.ladder]
        anti_ladder = [round(p) for _, p in antisymmetric.ladder]
        empty_ok = all(s.empty == (s.m % 2 == 1) for s in symmetric.summands) and \
            all(s.empty == (s.m % 2 == 0) for s in antisymmetric.summands)
        return {"passed": symmetric.passed and antisymmetric.passed and empty_ok and sym_ladder[:3] == [2, 6, 10]
                and anti_ladder[:2] == [4, 8],
                "symmetric_ladder": symmetric.ladder, "antisymmetric_ladder": antisymmetric.ladder, "runs": 2}

    def polydisc(self) -> Dict:
        report = polydisc_report((1.0, 1.0, 1.0), 8)
        return {"passed": report.passed, "multiplicities": report.pairs(), "violations": report.violations}

    def homogeneous_pair(self) -> Dict:
        space = TensorSpace((1.0, 2.0), self.degree)
        invariance = max(filtration_invariance_check(space, n) for n in range(self.degree - 1))
        norms = block_structure_report(space)
        upper = float(norms[np.triu_indices_from(norms, k=1)].max())
        weights = max(
            shift_equivalence_check(diagonal_block_weights(space, n, i=i)[:7], 3.0 + 2 * n)
            for n in range(4) for i in (1, 2)
        )
        rotation = intertwining_check(space, MoebiusTransform.rotation(0.9))
        general = intertwining_check(TensorSpace((1.0, 1.0), 16), involution_at(0.3))
        passed = (invariance == 0 and upper <= degree_scaled(1e-12, self.degree) and weights <= 1e-9
                  and rotation <= 1e-12 and general <= 1e-6)
        return {"passed": passed,
                "filtration_invariance": invariance, "upper_blocks": upper, "weight_deviation": weights,
                "rotation_intertwining": rotation, "intertwining": general}

    def curvature(self) -> Dict:
        errors = {}
        for lam in (1.0, 2.0, 3.0, 5.5):
            errors[lam] = abs(identify_lambda(lambda z: kernel_eval(lam, z, z).real) - lam)
        lam = 3.0
        twisted = identify_lambda(lambda z: abs(1 + z / 3) ** 2 * kernel_eval(lam, z, z).real)
        errors["|F|^2 B^(3)"] = abs(twisted - lam)
        return {"passed": max(errors.values()) <= 1e-5, "errors": {str(k): v for k, v in errors.items()}}

    def _print_criterion_result(self, result: Dict):
        status = "PASS" if result["passed"] else "FAIL"
        print(f"   {status} in {result['runtime']:.2f}s")
        if result["error"]:
            print(f"   Error: {result['error']}")
        for key, value in result["details"].items():
            print(f"   • {key}: {value}")

    def _generate_report(self):
        print("\n" + "=" * 60)
        print("ACCEPTANCE REPORT")
        print("=" * 60)
        passed = sum(r["passed"] for r in self.results)
        print(f"\n   • Criteria passed: {passed}/{len(self.results)}")
        print(f"   • Total runtime: {sum(r['runtime'] for r in self.results):.2f}s")
        self._save_results()

    def _save_results(self):
        os.makedirs("logs", exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        filename = f"logs/acceptance_results_{timestamp}.json"
        with open(filename, "w") as f:
            json.dump({
                "timestamp": timestamp,
                "degree": self.degree,
                "seed": self.seed,
                "results": self.results,
            }, f, indent=2, default=str)
        print(f"\nResults saved to: {filename}")


if __name__ == "__main__":
    AcceptanceExperiment().run_all()
