"""Request/response models for the service API.

Models carry types and defaults only; domain validation (probability
sums, count ranges, regime requirements) lives in the core modules, so
the service and the in-process client reject inputs identically.
"""

from __future__ import annotations

from pydantic import BaseModel

from .branching import SurvivalParams
from .combinatorics import DEFAULT_ENUMERATION_CAP, Decomposition
from .inference import (
    DEFAULT_MAX_SHELLS,
    DEFAULT_MGF_MAX_ITERATIONS,
    DEFAULT_MGF_TOLERANCE,
    DEFAULT_SHELL_TOLERANCE,
    McReport,
)
from .verification import DEFAULT_VERIFY_SEED, CheckResult


class ModelParams(BaseModel):
    """The six survival-model probabilities."""

    p0: float
    p1: float = 0.0
    p2: float
    q0: float
    q1: float = 0.0
    q2: float

    def to_core(self) -> SurvivalParams:
        return SurvivalParams(self.p0, self.p1, self.p2, self.q0, self.q1, self.q2)


class NarayanaRequest(BaseModel):
    n: int
    k: int


class NarayanaResponse(BaseModel):
    n: int
    k: int
    value: int


class GfCoefficientsRequest(BaseModel):
    d: int
    c: int


class GfCoefficientsResponse(BaseModel):
    d: int
    c: int
    coefficients: list[int]


class DecompositionModel(BaseModel):
    top: list[int]
    bottom: list[int]
    weight: int

    @classmethod
    def from_core(cls, dec: Decomposition) -> "DecompositionModel":
        return cls(top=list(dec.top), bottom=list(dec.bottom), weight=dec.weight)


class EnumerateDecompositionsRequest(BaseModel):
    d: int
    c: int
    max_count: int = DEFAULT_ENUMERATION_CAP


class EnumerateDecompositionsResponse(BaseModel):
    d: int
    c: int
    count: int
    decompositions: list[DecompositionModel]


class EnumerateTreesRequest(BaseModel):
    n: int
    m: int
    max_count: int = DEFAULT_ENUMERATION_CAP


class EnumerateTreesResponse(BaseModel):
    n: int
    m: int
    count: int
    encodings: list[str]


class TreeToMatrixRequest(BaseModel):
    encoding: str


class MatrixResponse(BaseModel):
    d: int
    c: int
    top: list[int]
    bottom: list[int]
    weight: int


class MatrixToTreeRequest(BaseModel):
    d: int
    c: int
    top: list[int]
    bottom: list[int]


class TreeResponse(BaseModel):
    encoding: str


class SampleRequest(BaseModel):
    params: ModelParams
    root_type: int = 1
    seed: int
    count: int = 1
    max_vertices: int = 1_000_000
    threads: int = 1
    include_trees: bool = False


class SampleRecordModel(BaseModel):
    replicate: int
    status: str
    vertex_count: int
    edge_count: int
    d1: int
    d2: int
    s1: int
    s2: int


class SampleResponse(BaseModel):
    seed: int
    records: list[SampleRecordModel]
    trees: list[str] | None = None


class ContourRequest(BaseModel):
    tree: str  # address<TAB>type lines, as produced by the tree serializer


class ContourResponse(BaseModel):
    heights: list[int]


class ExtinctionRequest(BaseModel):
    params: ModelParams


class ExtinctionResponse(BaseModel):
    criticality: str
    eta1: float
    eta2: float


class MgfRequest(BaseModel):
    params: ModelParams
    s_values: list[float]
    tolerance: float = DEFAULT_MGF_TOLERANCE
    max_iterations: int = DEFAULT_MGF_MAX_ITERATIONS


class MgfRowModel(BaseModel):
    s: float
    f1: float
    f2: float
    iterations: int


class MgfResponse(BaseModel):
    rows: list[MgfRowModel]


class FatherPmfRequest(BaseModel):
    params: ModelParams
    max_n: int = 10
    max_m: int = 10


class FatherCellModel(BaseModel):
    n: int
    m: int
    probability: float


class FatherPmfResponse(BaseModel):
    atom: float  # mass of the fatherless outcome (n, m) = (0, 0)
    cells: list[FatherCellModel]


class LikelihoodRequest(BaseModel):
    P: float
    Q: float
    n: int
    m: int


class LikelihoodResponse(BaseModel):
    likelihood: float
    log_likelihood: float


class TotalMassRequest(BaseModel):
    P: float
    Q: float
    shell_tolerance: float = DEFAULT_SHELL_TOLERANCE
    max_shells: int = DEFAULT_MAX_SHELLS


class TotalMassResponse(BaseModel):
    total: float
    shells: int


class EstimateRequest(BaseModel):
    n: int
    m: int


class EstimateResponse(BaseModel):
    P: float
    Q: float
    p2_over_p0: float
    q2_over_q0: float


class McCompareRequest(BaseModel):
    params: ModelParams
    replicates: int
    seed: int
    root_type: int = 1
    max_vertices: int = 1000
    s_values: list[float] = [-0.05, -0.2]
    mass_threshold: float = 0.01
    threads: int = 1


class CellRowModel(BaseModel):
    cell: list[int]
    theoretical: float
    empirical: float
    z: float


class MgfCheckRowModel(BaseModel):
    s: float
    theoretical: float
    empirical: float
    z: float


class McCompareResponse(BaseModel):
    replicates: int
    seed: int
    root_type: int
    max_vertices: int
    truncated_count: int
    finite_fraction: CellRowModel
    father_cells: list[CellRowModel]
    joint_cells: list[CellRowModel]
    mgf_rows: list[MgfCheckRowModel]
    tv_distance: float
    max_abs_z: float

    @classmethod
    def from_core(cls, report: McReport) -> "McCompareResponse":
        def cell(row) -> CellRowModel:
            return CellRowModel(
                cell=list(row.cell),
                theoretical=row.theoretical,
                empirical=row.empirical,
                z=row.z,
            )

        return cls(
            replicates=report.replicates,
            seed=report.seed,
            root_type=report.root_type,
            max_vertices=report.max_vertices,
            truncated_count=report.truncated_count,
            finite_fraction=cell(report.finite_fraction),
            father_cells=[cell(row) for row in report.father_cells],
            joint_cells=[cell(row) for row in report.joint_cells],
            mgf_rows=[
                MgfCheckRowModel(
                    s=row.s, theoretical=row.theoretical, empirical=row.empirical, z=row.z
                )
                for row in report.mgf_rows
            ],
            tv_distance=report.tv_distance,
            max_abs_z=report.max_abs_z,
        )


class VerifyRequest(BaseModel):
    level: str = "full"
    seed: int = DEFAULT_VERIFY_SEED


class CheckResultModel(BaseModel):
    name: str
    passed: bool
    detail: str
    duration: float

    @classmethod
    def from_core(cls, result: CheckResult) -> "CheckResultModel":
        return cls(
            name=result.name,
            passed=result.passed,
            detail=result.detail,
            duration=result.duration,
        )


class VerifyResponse(BaseModel):
    passed: bool
    checks: list[CheckResultModel]


class HealthResponse(BaseModel):
    status: str
    version: str
