"""HTTP service exposing the package's operations.

Every operation is registered in ``ENDPOINTS`` (name -> path, handler,
models).  Handlers are plain functions from request model to response
model, so the in-process client can call them directly while the HTTP
app serves them at their paths.  Run with::

    uvicorn gwtrees.service:app

Domain errors map to status 400 with a body ``{"kind", "detail"}`` where
kind is "argument", "resource", or "convergence"; malformed requests get
FastAPI's standard 422.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, TypeVar

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__, schemas
from .branching import (
    classify,
    count_fathers_survivals,
    sample_batch,
    sample_survival_stats,
    survival_distribution,
)
from .combinatorics import (
    Decomposition,
    enumerate_decompositions,
    gf_coefficients,
    narayana,
)
from .errors import ConvergenceError, ResourceLimitError
from .inference import (
    extinction_probability,
    father_pmf,
    likelihood,
    likelihood_total_mass,
    log_likelihood,
    mc_compare,
    mgf_fixed_point,
    mle,
)
from .trees import (
    contour,
    decode_parens,
    decomposition_to_tree,
    encode_parens,
    enumerate_full_binary_trees,
    tree_from_records,
    tree_to_decomposition,
    tree_to_records,
)
from .verification import run_checks

app = FastAPI(
    title="gwtrees",
    version=__version__,
    description="Binary trees with survivals: combinatorics, sampling, inference.",
)


@dataclass(frozen=True)
class Endpoint:
    name: str
    path: str
    handler: Callable[[BaseModel], BaseModel]
    request_model: type[BaseModel]
    response_model: type[BaseModel]


ENDPOINTS: dict[str, Endpoint] = {}

_Handler = TypeVar("_Handler", bound=Callable)


def _endpoint(
    name: str,
    path: str,
    request_model: type[BaseModel],
    response_model: type[BaseModel],
) -> Callable[[_Handler], _Handler]:
    def register(handler: _Handler) -> _Handler:
        ENDPOINTS[name] = Endpoint(name, path, handler, request_model, response_model)
        app.post(path, response_model=response_model)(handler)
        return handler

    return register


@app.exception_handler(ValueError)
async def _argument_error(_: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"kind": "argument", "detail": str(exc)})


@app.exception_handler(ResourceLimitError)
async def _resource_error(_: Request, exc: ResourceLimitError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"kind": "resource", "detail": str(exc)})


@app.exception_handler(ConvergenceError)
async def _convergence_error(_: Request, exc: ConvergenceError) -> JSONResponse:
    return JSONResponse(
        status_code=400, content={"kind": "convergence", "detail": str(exc)}
    )


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


@_endpoint("narayana", "/narayana", schemas.NarayanaRequest, schemas.NarayanaResponse)
def narayana_value(request: schemas.NarayanaRequest) -> schemas.NarayanaResponse:
    return schemas.NarayanaResponse(n=request.n, k=request.k, value=narayana(request.n, request.k))


@_endpoint(
    "gf_coefficients",
    "/gf-coefficients",
    schemas.GfCoefficientsRequest,
    schemas.GfCoefficientsResponse,
)
def gf_coefficients_value(
    request: schemas.GfCoefficientsRequest,
) -> schemas.GfCoefficientsResponse:
    return schemas.GfCoefficientsResponse(
        d=request.d, c=request.c, coefficients=gf_coefficients(request.d, request.c)
    )


@_endpoint(
    "enumerate_decompositions",
    "/decompositions",
    schemas.EnumerateDecompositionsRequest,
    schemas.EnumerateDecompositionsResponse,
)
def enumerate_decompositions_list(
    request: schemas.EnumerateDecompositionsRequest,
) -> schemas.EnumerateDecompositionsResponse:
    decs = enumerate_decompositions(request.d, request.c, max_count=request.max_count)
    return schemas.EnumerateDecompositionsResponse(
        d=request.d,
        c=request.c,
        count=len(decs),
        decompositions=[schemas.DecompositionModel.from_core(dec) for dec in decs],
    )


@_endpoint(
    "enumerate_trees",
    "/trees",
    schemas.EnumerateTreesRequest,
    schemas.EnumerateTreesResponse,
)
def enumerate_trees_list(
    request: schemas.EnumerateTreesRequest,
) -> schemas.EnumerateTreesResponse:
    trees = enumerate_full_binary_trees(request.n, request.m, max_count=request.max_count)
    return schemas.EnumerateTreesResponse(
        n=request.n,
        m=request.m,
        count=len(trees),
        encodings=[encode_parens(tree) for tree in trees],
    )


@_endpoint(
    "tree_to_matrix", "/bijection/to-matrix", schemas.TreeToMatrixRequest, schemas.MatrixResponse
)
def tree_to_matrix(request: schemas.TreeToMatrixRequest) -> schemas.MatrixResponse:
    dec = tree_to_decomposition(decode_parens(request.encoding))
    return schemas.MatrixResponse(
        d=dec.d, c=dec.c, top=list(dec.top), bottom=list(dec.bottom), weight=dec.weight
    )


@_endpoint(
    "matrix_to_tree", "/bijection/to-tree", schemas.MatrixToTreeRequest, schemas.TreeResponse
)
def matrix_to_tree(request: schemas.MatrixToTreeRequest) -> schemas.TreeResponse:
    dec = Decomposition(request.d, request.c, tuple(request.top), tuple(request.bottom))
    return schemas.TreeResponse(encoding=encode_parens(decomposition_to_tree(dec)))


@_endpoint("sample", "/sample", schemas.SampleRequest, schemas.SampleResponse)
def sample(request: schemas.SampleRequest) -> schemas.SampleResponse:
    params = request.params.to_core()
    trees: list[str] | None = None
    if request.include_trees:
        outcomes = sample_batch(
            survival_distribution(params),
            request.root_type,
            request.seed,
            request.count,
            request.max_vertices,
            threads=request.threads,
        )
        records = []
        trees = []
        for replicate, outcome in enumerate(outcomes):
            counts = count_fathers_survivals(outcome.tree)
            records.append(
                schemas.SampleRecordModel(
                    replicate=replicate,
                    status=outcome.status.value,
                    vertex_count=outcome.vertex_count,
                    edge_count=outcome.edge_count,
                    d1=counts.d1,
                    d2=counts.d2,
                    s1=counts.s1,
                    s2=counts.s2,
                )
            )
            trees.append(tree_to_records(outcome.tree))
    else:
        records = [
            schemas.SampleRecordModel(
                replicate=rec.replicate,
                status=rec.status.value,
                vertex_count=rec.vertex_count,
                edge_count=rec.edge_count,
                d1=rec.d1,
                d2=rec.d2,
                s1=rec.s1,
                s2=rec.s2,
            )
            for rec in sample_survival_stats(
                params,
                request.root_type,
                request.seed,
                request.count,
                request.max_vertices,
                threads=request.threads,
            )
        ]
    return schemas.SampleResponse(seed=request.seed, records=records, trees=trees)


@_endpoint("contour", "/contour", schemas.ContourRequest, schemas.ContourResponse)
def contour_heights(request: schemas.ContourRequest) -> schemas.ContourResponse:
    return schemas.ContourResponse(heights=contour(tree_from_records(request.tree)))


@_endpoint(
    "extinction", "/extinction", schemas.ExtinctionRequest, schemas.ExtinctionResponse
)
def extinction(request: schemas.ExtinctionRequest) -> schemas.ExtinctionResponse:
    params = request.params.to_core()
    eta1, eta2 = extinction_probability(params)
    return schemas.ExtinctionResponse(
        criticality=classify(params).value, eta1=eta1, eta2=eta2
    )


@_endpoint("mgf", "/mgf", schemas.MgfRequest, schemas.MgfResponse)
def mgf(request: schemas.MgfRequest) -> schemas.MgfResponse:
    dist = survival_distribution(request.params.to_core())
    rows = []
    for s in request.s_values:
        solution = mgf_fixed_point(
            dist, s, tolerance=request.tolerance, max_iterations=request.max_iterations
        )
        rows.append(
            schemas.MgfRowModel(
                s=s,
                f1=solution.values[0],
                f2=solution.values[1],
                iterations=solution.iterations,
            )
        )
    return schemas.MgfResponse(rows=rows)


@_endpoint(
    "father_pmf", "/father-pmf", schemas.FatherPmfRequest, schemas.FatherPmfResponse
)
def father_pmf_table(request: schemas.FatherPmfRequest) -> schemas.FatherPmfResponse:
    if request.max_n < 1:
        raise ValueError(f"max_n must be at least 1, got {request.max_n}")
    if request.max_m < 0:
        raise ValueError(f"max_m must be nonnegative, got {request.max_m}")
    params = request.params.to_core()
    cells = [
        schemas.FatherCellModel(n=n, m=m, probability=father_pmf(params, n, m))
        for n in range(1, request.max_n + 1)
        for m in range(request.max_m + 1)
    ]
    return schemas.FatherPmfResponse(atom=params.P, cells=cells)


@_endpoint(
    "likelihood", "/likelihood", schemas.LikelihoodRequest, schemas.LikelihoodResponse
)
def likelihood_value(request: schemas.LikelihoodRequest) -> schemas.LikelihoodResponse:
    return schemas.LikelihoodResponse(
        likelihood=likelihood(request.P, request.Q, request.n, request.m),
        log_likelihood=log_likelihood(request.P, request.Q, request.n, request.m),
    )


@_endpoint(
    "total_mass", "/total-mass", schemas.TotalMassRequest, schemas.TotalMassResponse
)
def total_mass(request: schemas.TotalMassRequest) -> schemas.TotalMassResponse:
    total, shells = likelihood_total_mass(
        request.P,
        request.Q,
        shell_tolerance=request.shell_tolerance,
        max_shells=request.max_shells,
    )
    return schemas.TotalMassResponse(total=total, shells=shells)


@_endpoint("estimate", "/estimate", schemas.EstimateRequest, schemas.EstimateResponse)
def estimate(request: schemas.EstimateRequest) -> schemas.EstimateResponse:
    estimates = mle(request.n, request.m)
    return schemas.EstimateResponse(
        P=estimates.P,
        Q=estimates.Q,
        p2_over_p0=estimates.p2_over_p0,
        q2_over_q0=estimates.q2_over_q0,
    )


@_endpoint(
    "mc_compare", "/mc-compare", schemas.McCompareRequest, schemas.McCompareResponse
)
def mc_compare_report(request: schemas.McCompareRequest) -> schemas.McCompareResponse:
    report = mc_compare(
        request.params.to_core(),
        request.replicates,
        request.seed,
        root_type=request.root_type,
        max_vertices=request.max_vertices,
        s_values=tuple(request.s_values),
        mass_threshold=request.mass_threshold,
        threads=request.threads,
    )
    return schemas.McCompareResponse.from_core(report)


@_endpoint("verify", "/verify", schemas.VerifyRequest, schemas.VerifyResponse)
def verify(request: schemas.VerifyRequest) -> schemas.VerifyResponse:
    results = run_checks(request.level, request.seed)
    return schemas.VerifyResponse(
        passed=all(result.passed for result in results),
        checks=[schemas.CheckResultModel.from_core(result) for result in results],
    )
