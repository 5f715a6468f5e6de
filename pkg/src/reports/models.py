from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

SCHEMA_VERSION = 1
DEFAULT_SEED = 20240331


class RunConfig(BaseModel):
    command: Literal["decompose", "verify"]
    lambdas: Optional[List[float]] = None
    degree: int = 12
    parity: Optional[Literal["symmetric", "antisymmetric"]] = None
    polydisc: Optional[List[float]] = None
    out: Optional[str] = None
    tolerances: Dict[str, float] = Field(default_factory=dict)
    inject_noise: Optional[float] = None
    seed: int = DEFAULT_SEED

    @field_validator("lambdas", "polydisc")
    @classmethod
    def positive_parameters(cls, value):
        if value is not None and any(not lam > 0 for lam in value):
            raise ValueError(f"every lambda must be positive, got {value}")
        return value

    @field_validator("lambdas")
    @classmethod
    def two_or_three_lambdas(cls, value):
        if value is not None and len(value) not in (2, 3):
            raise ValueError("--lambdas takes two values (bidisc) or three (polydisc)")
        return value

    @field_validator("polydisc")
    @classmethod
    def three_polydisc_lambdas(cls, value):
        if value is not None and len(value) != 3:
            raise ValueError("--polydisc takes exactly three values")
        return value

    @field_validator("degree")
    @classmethod
    def degree_in_range(cls, value):
        if not 4 <= value <= 24:
            raise ValueError(f"degree must lie in [4, 24], got {value}")
        return value

    @field_validator("tolerances")
    @classmethod
    def positive_tolerances(cls, value):
        bad = {name: tol for name, tol in value.items() if not tol > 0}
        if bad:
            raise ValueError(f"tolerances must be positive: {bad}")
        return value

    @field_validator("inject_noise")
    @classmethod
    def noise_in_range(cls, value):
        if value is not None and not 0 < value < 1:
            raise ValueError(f"noise level must lie in (0, 1), got {value}")
        return value

    @model_validator(mode="after")
    def consistent_geometry(self):
        if self.lambdas is None and self.polydisc is None:
            raise ValueError("give --lambdas or --polydisc")
        if self.lambdas is not None and len(self.lambdas) == 3 and self.polydisc is None:
            self.polydisc, self.lambdas = self.lambdas, None
        if self.polydisc is not None and self.degree < 6:
            raise ValueError("the polydisc decomposition needs degree >= 6")
        if self.parity is not None:
            if self.lambdas is None or len(self.lambdas) != 2 or self.lambdas[0] != self.lambdas[1]:
                raise ValueError("--parity needs two equal lambdas")
        return self


class SummandRecord(BaseModel):
    m: int
    dim: int
    graded_dims: List[int]
    empty: bool
    k00: Optional[float] = None
    parameter: Optional[float] = None
    residual: Optional[float] = None
    two_route: Optional[float] = None


class ComplexSample(BaseModel):
    point: Tuple[float, float]
    value: Tuple[float, float]

    @classmethod
    def of(cls, z: complex, value: complex) -> "ComplexSample":
        return cls(point=(z.real, z.imag), value=(value.real, value.imag))


class MultiplicityRow(BaseModel):
    K: int
    parameter: float
    multiplicity: int
    expected: int


class StageRecord(BaseModel):
    """One first-stage summand of the polydisc split along x1 = x2"""

    k3: int
    tensor_parameters: Tuple[float, float]
    proportionality_deviation: float
    parameters: List[float]


class DecompositionReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    lambdas: List[float]
    degree_bound: int
    parity: Optional[str] = None
    lambda_hat: Optional[float] = None
    cocycle_parameter: Optional[float] = None
    summands: List[SummandRecord] = Field(default_factory=list)
    f_samples: List[ComplexSample] = Field(default_factory=list)
    total_dim: int = 0
    expected_dim: int = 0
    orthonormality_defect: float = 0.0
    nonempty_disagreement: List[int] = Field(default_factory=list)
    multiplicities: Optional[List[MultiplicityRow]] = None
    stages: Optional[List[StageRecord]] = None
    violations: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def ladder(self) -> List[Tuple[int, float]]:
        return [(s.m, s.parameter) for s in self.summands if s.parameter is not None]

    def pairs(self) -> List[Tuple[float, int]]:
        return [(row.parameter, row.multiplicity) for row in self.multiplicities or []]


class DiagonalRecord(BaseModel):
    n: int
    lambda_prime: float
    max_weight_dev: float
    coordinate_dev: float


class IntertwiningRecord(BaseModel):
    phi_params: Tuple[float, float, float]
    residual: float


class HomogeneousReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    lambdas: List[float]
    degree_bound: int
    lambda_hat: float
    blocks: List[List[float]]
    diagonal: List[DiagonalRecord]
    intertwining: List[IntertwiningRecord]


class CheckRow(BaseModel):
    check: str
    residual: float
    tolerance: float
    passed: bool = Field(serialization_alias="pass")
    message: str = ""
