"""Command-line front end.

Every subcommand builds a request model and dispatches it through a
backend: in-process by default, or a running service when --service URL
is given — output is byte-identical either way.  Exit codes: 0 success,
1 argument errors, 2 verification failure, 3 convergence/resource/
transport errors.  Errors go to stderr; results go to stdout or -o PATH.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

import httpx

from . import __version__, schemas
from .client import HttpBackend, LocalBackend
from .combinatorics import Decomposition
from .errors import ConvergenceError, ResourceLimitError
from .trees import decode_parens, tree_to_records
from .verification import DEFAULT_VERIFY_SEED

ENV_MGF_TOLERANCE = "GWTREES_MGF_TOLERANCE"
ENV_MGF_MAX_ITERATIONS = "GWTREES_MGF_MAX_ITERATIONS"
ENV_SHELL_TOLERANCE = "GWTREES_SHELL_TOLERANCE"

_EPILOG = (
    "environment variables: GWTREES_MGF_TOLERANCE, GWTREES_MGF_MAX_ITERATIONS, "
    "and GWTREES_SHELL_TOLERANCE override the matching defaults when the flags "
    "are absent.  Exit codes: 0 success, 1 argument error, 2 verification "
    "failure, 3 convergence/resource error."
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage problems instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(f"{self.prog}: error: {message}")


def _seed(text: str) -> int:
    return int(text, 0)  # accepts decimal, hex (0x...), and underscores


def _params(text: str) -> schemas.ModelParams:
    parts = text.split(",")
    if len(parts) != 6:
        raise argparse.ArgumentTypeError(
            "expected six comma-separated probabilities p0,p1,p2,q0,q1,q2"
        )
    p0, p1, p2, q0, q1, q2 = (float(part) for part in parts)
    return schemas.ModelParams(p0=p0, p1=p1, p2=p2, q0=q0, q1=q1, q2=q2)


def _float_list(text: str) -> list[float]:
    values = [float(part) for part in text.split(",") if part.strip()]
    if not values:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers")
    return values


def _resolve(flag_value, env_name: str, default, convert):
    if flag_value is not None:
        return flag_value
    raw = os.environ.get(env_name)
    if raw is None:
        return default
    try:
        return convert(raw)
    except ValueError:
        raise ValueError(f"environment variable {env_name}={raw!r} is not a valid value")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _write(args: argparse.Namespace, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _emit_lines(args: argparse.Namespace, lines: Sequence[str]) -> None:
    _write(args, "".join(line + "\n" for line in lines))


def _emit_json(args: argparse.Namespace, objects: Sequence[dict]) -> None:
    _emit_lines(args, [json.dumps(obj) for obj in objects])


def _matrix_text(d: int, c: int, top: Sequence[int], bottom: Sequence[int]) -> str:
    return Decomposition(d, c, tuple(top), tuple(bottom)).to_text()


def _cmd_narayana(args, backend) -> int:
    response = backend.call("narayana", schemas.NarayanaRequest(n=args.n, k=args.k))
    if args.json:
        _emit_json(args, [response.model_dump()])
    else:
        _emit_lines(args, [str(response.value)])
    return 0


def _cmd_gf_coeffs(args, backend) -> int:
    response = backend.call("gf_coefficients", schemas.GfCoefficientsRequest(d=args.d, c=args.c))
    if args.json:
        _emit_json(args, [response.model_dump()])
    else:
        _emit_lines(args, [" ".join(str(value) for value in response.coefficients)])
    return 0


def _cmd_enum_decomp(args, backend) -> int:
    request = schemas.EnumerateDecompositionsRequest(d=args.d, c=args.c, max_count=args.max_count)
    response = backend.call("enumerate_decompositions", request)
    if args.json:
        _emit_json(args, [dec.model_dump() for dec in response.decompositions])
    else:
        blocks = [
            _matrix_text(response.d, response.c, dec.top, dec.bottom)
            for dec in response.decompositions
        ]
        _write(args, "\n".join(blocks))
    return 0


def _cmd_enum_trees(args, backend) -> int:
    request = schemas.EnumerateTreesRequest(n=args.n, m=args.m, max_count=args.max_count)
    response = backend.call("enumerate_trees", request)
    if args.format == "parens":
        if args.json:
            _emit_json(args, [{"encoding": enc} for enc in response.encodings])
        else:
            _emit_lines(args, response.encodings)
        return 0
    trees = [decode_parens(encoding) for encoding in response.encodings]
    if args.json:
        objects = []
        for encoding, tree in zip(response.encodings, trees):
            vertices = [
                {"address": ".".join(str(i) for i in addr), "type": vtype}
                for addr, vtype in zip(tree.addresses, tree.types)
            ]
            objects.append({"encoding": encoding, "vertices": vertices})
        _emit_json(args, objects)
    else:
        _write(args, "\n".join(tree_to_records(tree) for tree in trees))
    return 0


def _cmd_bijection(args, backend) -> int:
    if args.to_matrix is not None:
        response = backend.call(
            "tree_to_matrix", schemas.TreeToMatrixRequest(encoding=args.to_matrix)
        )
        if args.json:
            _emit_json(args, [response.model_dump()])
        else:
            _write(args, _matrix_text(response.d, response.c, response.top, response.bottom))
        return 0
    dec = Decomposition.from_text(_read_text(args.to_tree))
    request = schemas.MatrixToTreeRequest(
        d=dec.d, c=dec.c, top=list(dec.top), bottom=list(dec.bottom)
    )
    response = backend.call("matrix_to_tree", request)
    if args.json:
        _emit_json(args, [response.model_dump()])
    else:
        _emit_lines(args, [response.encoding])
    return 0


def _cmd_sample(args, backend) -> int:
    params = schemas.ModelParams(
        p0=args.p0, p1=args.p1, p2=args.p2, q0=args.q0, q1=args.q1, q2=args.q2
    )
    request = schemas.SampleRequest(
        params=params,
        root_type=args.root_type,
        seed=args.seed,
        count=args.count,
        max_vertices=args.max_vertices,
        threads=args.threads,
        include_trees=args.trees_out is not None,
    )
    response = backend.call("sample", request)
    if args.json:
        _emit_json(
            args,
            [{"seed": response.seed, **record.model_dump()} for record in response.records],
        )
    else:
        lines = ["seed,replicate,status,vertex_count,edge_count,D1,D2,S1,S2"]
        lines.extend(
            f"{response.seed},{r.replicate},{r.status},{r.vertex_count},{r.edge_count},"
            f"{r.d1},{r.d2},{r.s1},{r.s2}"
            for r in response.records
        )
        _emit_lines(args, lines)
    if args.trees_out is not None:
        with open(args.trees_out, "w", encoding="utf-8") as handle:
            handle.write("\n".join(response.trees))
    return 0


def _cmd_contour(args, backend) -> int:
    request = schemas.ContourRequest(tree=_read_text(args.tree_file))
    response = backend.call("contour", request)
    if args.json:
        _emit_json(args, [{"heights": response.heights}])
    else:
        lines = ["step,height"]
        lines.extend(f"{i},{h}" for i, h in enumerate(response.heights))
        _emit_lines(args, lines)
    return 0


def _cmd_extinction(args, backend) -> int:
    response = backend.call("extinction", schemas.ExtinctionRequest(params=args.params))
    if args.json:
        _emit_json(args, [response.model_dump()])
    else:
        _emit_lines(
            args,
            [
                f"criticality: {response.criticality}",
                f"eta1: {response.eta1!r}",
                f"eta2: {response.eta2!r}",
            ],
        )
    return 0


def _cmd_mgf(args, backend) -> int:
    request = schemas.MgfRequest(
        params=args.params,
        s_values=args.s,
        tolerance=_resolve(args.tolerance, ENV_MGF_TOLERANCE, schemas.MgfRequest.model_fields["tolerance"].default, float),
        max_iterations=_resolve(
            args.max_iterations,
            ENV_MGF_MAX_ITERATIONS,
            schemas.MgfRequest.model_fields["max_iterations"].default,
            int,
        ),
    )
    response = backend.call("mgf", request)
    if args.json:
        _emit_json(args, [row.model_dump() for row in response.rows])
    else:
        lines = ["s,f1,f2,iterations"]
        lines.extend(
            f"{row.s!r},{row.f1!r},{row.f2!r},{row.iterations}" for row in response.rows
        )
        _emit_lines(args, lines)
    return 0


def _cmd_father_pmf(args, backend) -> int:
    request = schemas.FatherPmfRequest(params=args.params, max_n=args.max_n, max_m=args.max_m)
    response = backend.call("father_pmf", request)
    rows = [{"n": 0, "m": 0, "probability": response.atom}]
    rows.extend(cell.model_dump() for cell in response.cells)
    if args.json:
        _emit_json(args, rows)
    else:
        lines = ["n,m,probability"]
        lines.extend(f"{row['n']},{row['m']},{row['probability']!r}" for row in rows)
        _emit_lines(args, lines)
    return 0


def _cmd_likelihood(args, backend) -> int:
    request = schemas.LikelihoodRequest(P=args.P, Q=args.Q, n=args.n, m=args.m)
    response = backend.call("likelihood", request)
    if args.json:
        _emit_json(args, [response.model_dump()])
    else:
        _emit_lines(
            args,
            [
                f"likelihood: {response.likelihood!r}",
                f"log_likelihood: {response.log_likelihood!r}",
            ],
        )
    return 0


def _cmd_total_mass(args, backend) -> int:
    request = schemas.TotalMassRequest(
        P=args.P,
        Q=args.Q,
        shell_tolerance=_resolve(
            args.shell_tolerance,
            ENV_SHELL_TOLERANCE,
            schemas.TotalMassRequest.model_fields["shell_tolerance"].default,
            float,
        ),
        max_shells=args.max_shells,
    )
    response = backend.call("total_mass", request)
    if args.json:
        _emit_json(args, [response.model_dump()])
    else:
        _emit_lines(args, [f"total: {response.total!r}", f"shells: {response.shells}"])
    return 0


def _cmd_estimate(args, backend) -> int:
    response = backend.call("estimate", schemas.EstimateRequest(n=args.n, m=args.m))
    if args.json:
        _emit_json(args, [response.model_dump()])
    else:
        _emit_lines(
            args,
            [
                f"P: {response.P!r}",
                f"Q: {response.Q!r}",
                f"p2_over_p0: {response.p2_over_p0!r}",
                f"q2_over_q0: {response.q2_over_q0!r}",
            ],
        )
    return 0


def _cmd_mc_compare(args, backend) -> int:
    request = schemas.McCompareRequest(
        params=args.params,
        replicates=args.replicates,
        seed=args.seed,
        root_type=args.root_type,
        max_vertices=args.max_vertices,
        s_values=args.s_values,
        mass_threshold=args.mass_threshold,
        threads=args.threads,
    )
    response = backend.call("mc_compare", request)
    sections = [
        ("finite", [response.finite_fraction]),
        ("father", response.father_cells),
        ("joint", response.joint_cells),
    ]
    if args.json:
        objects = []
        for section, rows in sections:
            for row in rows:
                objects.append({"section": section, **row.model_dump()})
        for row in response.mgf_rows:
            objects.append({"section": "mgf", **row.model_dump()})
        objects.append(
            {
                "section": "summary",
                "replicates": response.replicates,
                "truncated_count": response.truncated_count,
                "tv_distance": response.tv_distance,
                "max_abs_z": response.max_abs_z,
            }
        )
        _emit_json(args, objects)
    else:
        lines = ["section,cell,theoretical,empirical,z"]
        for section, rows in sections:
            for row in rows:
                cell = ":".join(str(i) for i in row.cell)
                lines.append(
                    f"{section},{cell},{row.theoretical!r},{row.empirical!r},{row.z!r}"
                )
        for row in response.mgf_rows:
            lines.append(f"mgf,{row.s!r},{row.theoretical!r},{row.empirical!r},{row.z!r}")
        _emit_lines(args, lines)
    print(
        f"replicates={response.replicates} truncated={response.truncated_count} "
        f"tv_distance={response.tv_distance:.6f} max_abs_z={response.max_abs_z:.3f}",
        file=sys.stderr,
    )
    return 0


def _cmd_verify(args, backend) -> int:
    response = backend.call("verify", schemas.VerifyRequest(level=args.level, seed=args.seed))
    failures = sum(1 for check in response.checks if not check.passed)
    if args.json:
        objects = [check.model_dump() for check in response.checks]
        objects.append(
            {"passed": response.passed, "checks": len(response.checks), "failures": failures}
        )
        _emit_json(args, objects)
    else:
        lines = []
        for check in response.checks:
            status = "PASS" if check.passed else "FAIL"
            lines.append(f"{status}  {check.name:<28} {check.detail} [{check.duration:.2f}s]")
        lines.append(
            f"{'passed' if response.passed else 'FAILED'}: "
            f"{len(response.checks) - failures}/{len(response.checks)} checks"
        )
        _emit_lines(args, lines)
    return 0 if response.passed else 2


def _cmd_serve(args, backend) -> int:
    del backend
    try:
        import uvicorn
    except ImportError:
        print(
            "error: serving requires uvicorn (pip install 'gwtrees[serve]')",
            file=sys.stderr,
        )
        return 1
    uvicorn.run("gwtrees.service:app", host=args.host, port=args.port)
    return 0


def _add_params_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--params",
        type=_params,
        required=True,
        metavar="p0,p1,p2,q0,q1,q2",
        help="the six model probabilities (two unit-sum triples)",
    )


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--service",
        metavar="URL",
        help="send this command to a running service instead of computing in-process",
    )
    common.add_argument(
        "--json", action="store_true", help="emit one JSON object per output row"
    )
    common.add_argument(
        "-o", "--output", metavar="PATH", help="write results to PATH instead of stdout"
    )

    parser = _Parser(
        prog="gwtrees",
        description="Binary trees with survivals: combinatorics, sampling, inference.",
        epilog=_EPILOG,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    sp = sub.add_parser("narayana", parents=[common], help="Narayana number N(n, k)")
    sp.add_argument("n", type=int)
    sp.add_argument("k", type=int)
    sp.set_defaults(func=_cmd_narayana)

    sp = sub.add_parser(
        "gf-coeffs",
        parents=[common],
        help="weight generating function over 2 x d decompositions bounded by c",
    )
    sp.add_argument("d", type=int)
    sp.add_argument("c", type=int)
    sp.set_defaults(func=_cmd_gf_coeffs)

    sp = sub.add_parser(
        "enum-decomp", parents=[common], help="list all 2 x d decompositions bounded by c"
    )
    sp.add_argument("d", type=int)
    sp.add_argument("c", type=int)
    sp.add_argument("--max-count", type=int, default=1_000_000, help="enumeration cap")
    sp.set_defaults(func=_cmd_enum_decomp)

    sp = sub.add_parser(
        "enum-trees",
        parents=[common],
        help="list all full binary trees with n type-1 and m type-2 fathers",
    )
    sp.add_argument("n", type=int)
    sp.add_argument("m", type=int)
    sp.add_argument(
        "--format",
        choices=("parens", "records"),
        default="parens",
        help="parenthesis encodings (one per line) or address/type records (blank-line separated)",
    )
    sp.add_argument("--max-count", type=int, default=1_000_000, help="enumeration cap")
    sp.set_defaults(func=_cmd_enum_trees)

    sp = sub.add_parser(
        "bijection",
        parents=[common],
        help="map a tree encoding to its decomposition matrix, or back",
    )
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--to-matrix", metavar="ENCODING", help="parenthesis encoding of a full binary tree"
    )
    group.add_argument(
        "--to-tree", metavar="FILE", help="matrix file in the serialized format ('-' reads stdin)"
    )
    sp.set_defaults(func=_cmd_bijection)

    sp = sub.add_parser(
        "sample",
        parents=[common],
        help="sample survival-model trees (CSV of per-replicate statistics)",
    )
    sp.add_argument("--p0", type=float, default=0.5, help="type-1 death probability")
    sp.add_argument("--p1", type=float, default=0.2, help="type-1 survival probability")
    sp.add_argument("--p2", type=float, default=0.3, help="type-1 father probability")
    sp.add_argument("--q0", type=float, default=0.5, help="type-2 death probability")
    sp.add_argument("--q1", type=float, default=0.2, help="type-2 survival probability")
    sp.add_argument("--q2", type=float, default=0.3, help="type-2 father probability")
    sp.add_argument("--root-type", type=int, choices=(1, 2), default=1)
    sp.add_argument("--seed", type=_seed, required=True, help="master seed (decimal or 0x hex)")
    sp.add_argument("--count", type=int, default=1, help="number of replicates")
    sp.add_argument("--max-vertices", type=int, default=1_000_000)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument(
        "--trees-out",
        metavar="PATH",
        help="also write the sampled trees (blank-line-separated address/type records)",
    )
    sp.set_defaults(func=_cmd_sample)

    sp = sub.add_parser(
        "contour", parents=[common], help="depth-first contour heights of a tree"
    )
    sp.add_argument(
        "--tree-file",
        required=True,
        metavar="FILE",
        help="address/type records file ('-' reads stdin)",
    )
    sp.set_defaults(func=_cmd_contour)

    sp = sub.add_parser(
        "extinction", parents=[common], help="criticality and extinction probabilities"
    )
    _add_params_flag(sp)
    sp.set_defaults(func=_cmd_extinction)

    sp = sub.add_parser(
        "mgf",
        parents=[common],
        help="edge-count moment generating function values (CSV: s,f1,f2,iterations)",
    )
    _add_params_flag(sp)
    sp.add_argument(
        "--s",
        type=_float_list,
        required=True,
        metavar="LIST",
        help="comma-separated nonpositive values; write --s=-0.05,-0.2",
    )
    sp.add_argument("--tolerance", type=float, help=f"sup-norm stop (env {ENV_MGF_TOLERANCE})")
    sp.add_argument(
        "--max-iterations", type=int, help=f"iteration cap (env {ENV_MGF_MAX_ITERATIONS})"
    )
    sp.set_defaults(func=_cmd_mgf)

    sp = sub.add_parser(
        "father-pmf",
        parents=[common],
        help="father-count probabilities (CSV: n,m,probability; first row is the (0,0) atom)",
    )
    _add_params_flag(sp)
    sp.add_argument("--max-n", type=int, default=10)
    sp.add_argument("--max-m", type=int, default=10)
    sp.set_defaults(func=_cmd_father_pmf)

    sp = sub.add_parser(
        "likelihood", parents=[common], help="Narayana likelihood of father counts (n, m)"
    )
    sp.add_argument("--P", type=float, required=True, help="type-1 line death chance, in (0,1)")
    sp.add_argument("--Q", type=float, required=True, help="type-2 line death chance, in (0,1)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.set_defaults(func=_cmd_likelihood)

    sp = sub.add_parser(
        "total-mass",
        parents=[common],
        help="sum the father-count law over its support (sanity: 1 when P+Q >= 1)",
    )
    sp.add_argument("--P", type=float, required=True)
    sp.add_argument("--Q", type=float, required=True)
    sp.add_argument(
        "--shell-tolerance", type=float, help=f"stop threshold (env {ENV_SHELL_TOLERANCE})"
    )
    sp.add_argument("--max-shells", type=int, default=2000)
    sp.set_defaults(func=_cmd_total_mass)

    sp = sub.add_parser(
        "estimate", parents=[common], help="maximum-likelihood estimates from father counts"
    )
    sp.add_argument("--n", type=int, required=True, help="observed type-1 fathers (>= 1)")
    sp.add_argument("--m", type=int, required=True, help="observed type-2 fathers (>= 0)")
    sp.set_defaults(func=_cmd_estimate)

    sp = sub.add_parser(
        "mc-compare",
        parents=[common],
        help="Monte-Carlo comparison against the exact laws (CSV + stderr summary)",
    )
    _add_params_flag(sp)
    sp.add_argument("--replicates", type=int, required=True)
    sp.add_argument("--seed", type=_seed, required=True)
    sp.add_argument("--root-type", type=int, choices=(1, 2), default=1)
    sp.add_argument("--max-vertices", type=int, default=1000)
    sp.add_argument(
        "--s-values",
        type=_float_list,
        default=[-0.05, -0.2],
        metavar="LIST",
        help="transform points; write --s-values=-0.05,-0.2",
    )
    sp.add_argument(
        "--mass-threshold", type=float, default=0.01, help="report cells above this mass"
    )
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=_cmd_mc_compare)

    sp = sub.add_parser(
        "verify", parents=[common], help="run the verification battery (exit 2 on failure)"
    )
    sp.add_argument("--level", choices=("quick", "full"), default="full")
    sp.add_argument(
        "--seed",
        type=_seed,
        default=DEFAULT_VERIFY_SEED,
        help=f"master seed for the Monte-Carlo checks (default 0x{DEFAULT_VERIFY_SEED:X})",
    )
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("serve", parents=[common], help="run the HTTP service with uvicorn")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    backend = HttpBackend(args.service) if args.service else LocalBackend()
    try:
        return args.func(args, backend)
    except (ResourceLimitError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except httpx.HTTPError as exc:
        print(f"service error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        backend.close()


if __name__ == "__main__":
    sys.exit(main())
