"""Self-contained verification battery cross-checking every layer.

Each check function is independent, raises on failure, and returns a
one-line summary on success; :func:`run_checks` runs the whole battery
without fail-fast and reports per-check results.  Monte-Carlo checks are
deterministic given their seed (default ``DEFAULT_VERIFY_SEED``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from time import perf_counter
from typing import Callable, Sequence

from .branching import (
    SurvivalParams,
    count_fathers_survivals,
    sample_batch,
    sample_survival_stats,
    survival_distribution,
)
from .combinatorics import enumerate_decompositions, gf_coefficients, narayana, weight_histogram
from .inference import (
    McReport,
    extinction_probability,
    likelihood,
    likelihood_total_mass,
    mc_compare,
    mgf_fixed_point,
    mle,
)
from .trees import (
    MultitypeTree,
    contour,
    decode_parens,
    decomposition_to_tree,
    encode_parens,
    enumerate_full_binary_trees,
    fathers_leaves,
    tree_to_decomposition,
    validate,
)

DEFAULT_VERIFY_SEED = 0x5EED_0001

_STANDARD = SurvivalParams(p0=0.5, p1=0.2, p2=0.3, q0=0.5, q1=0.2, q2=0.3)
_SUBCRITICAL_PURE = SurvivalParams(p0=0.7, p1=0.0, p2=0.3, q0=0.7, q1=0.0, q2=0.3)
_SUPERCRITICAL = SurvivalParams(p0=0.2, p1=0.0, p2=0.8, q0=0.2, q1=0.0, q2=0.8)

REFERENCE_ENCODING = "((())()())(()(()))"
REFERENCE_CONTOUR = [0, 1, 2, 1, 2, 1, 0, 1, 2, 3, 2, 3, 2, 3, 2, 1, 0, 1, 0]
REFERENCE_CONTOUR_TREE = (
    ((), 1), ((1,), 1), ((1, 1), 1), ((1, 2), 1), ((2,), 1),
    ((2, 1), 1), ((2, 1, 1), 1), ((2, 1, 2), 1), ((2, 1, 3), 1), ((3,), 1),
)

# Six hand-checked (encoding, matrix, weight) triples for d = 2, c = 1.
REFERENCE_CATALOG = (
    ("(())()()", ((0, 0), (0, 0)), 0),
    ("(()())()", ((1, 0), (0, 0)), 1),
    ("(()()())", ((1, 1), (0, 0)), 2),
    ("()()(())", ((1, 1), (1, 1)), 4),
    ("()(())()", ((1, 0), (1, 0)), 2),
    ("()(()())", ((1, 1), (1, 0)), 3),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    duration: float


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise AssertionError(message)


def check_gf_narayana(d_max: int = 6, c_max: int = 6) -> str:
    """Generating-function coefficients: length, symmetry, Narayana totals."""
    pairs = 0
    for d in range(d_max + 1):
        for c in range(c_max + 1):
            coeffs = gf_coefficients(d, c)
            _require(len(coeffs) == 2 * d * c + 1, f"({d}, {c}): degree {len(coeffs) - 1}")
            _require(coeffs == coeffs[::-1], f"({d}, {c}): not palindromic")
            expected = narayana(c + d + 1, d + 1)
            _require(sum(coeffs) == expected, f"({d}, {c}): sum {sum(coeffs)} != {expected}")
            pairs += 1
    return f"{pairs} (d, c) pairs: palindromic, degree 2dc, Narayana totals"


def check_weight_histograms(d_max: int = 5, c_max: int = 4) -> str:
    """Enumerated weight histograms match the generating function exactly."""
    pinned = gf_coefficients(2, 1)
    _require(pinned == [1, 1, 2, 1, 1], f"gf(2, 1) = {pinned}")
    pairs = 0
    for d in range(d_max + 1):
        for c in range(c_max + 1):
            histogram = weight_histogram(enumerate_decompositions(d, c))
            coeffs = gf_coefficients(d, c)
            _require(histogram == coeffs, f"({d}, {c}): {histogram} != {coeffs}")
            pairs += 1
    return f"{pairs} (d, c) pairs: enumerated histograms equal gf coefficients"


def check_tree_counts(total_max: int = 9) -> str:
    """Enumerated tree families have Narayana sizes."""
    families = 0
    for total in range(1, total_max + 1):
        for m in range(total):
            n = total - m
            trees = enumerate_full_binary_trees(n, m)
            expected = narayana(n + m, m + 1)
            _require(len(trees) == expected, f"(n={n}, m={m}): {len(trees)} != {expected}")
            for tree in trees[:: max(1, len(trees) // 8)]:
                counts = fathers_leaves(tree)
                _require(
                    (counts.left_fathers, counts.right_fathers) == (n, m),
                    f"(n={n}, m={m}): enumerated tree has counts {counts}",
                )
            families += 1
    return f"{families} (n, m) families counted, sizes all Narayana numbers"


def check_reference_catalog() -> str:
    """The six hand-checked tree/matrix/weight triples map both ways."""
    for encoding, (top, bottom), weight in REFERENCE_CATALOG:
        tree = decode_parens(encoding)
        dec = tree_to_decomposition(tree)
        _require(
            (dec.top, dec.bottom) == (top, bottom),
            f"{encoding}: got matrix {(dec.top, dec.bottom)}, want {(top, bottom)}",
        )
        _require(dec.weight == weight, f"{encoding}: weight {dec.weight} != {weight}")
        back = encode_parens(decomposition_to_tree(dec))
        _require(back == encoding, f"{encoding}: inverse gave {back}")
    return f"{len(REFERENCE_CATALOG)} catalog triples verified in both directions"


def check_tree_matrix_roundtrips(
    tree_total_max: int = 8, d_max: int = 5, c_max: int = 4
) -> str:
    """Tree -> matrix -> tree and matrix -> tree -> matrix are identities."""
    trees_checked = 0
    for total in range(1, tree_total_max + 1):
        for m in range(total):
            n = total - m
            for tree in enumerate_full_binary_trees(n, m):
                dec = tree_to_decomposition(tree)
                _require(
                    (dec.d, dec.c) == (m, n - 1),
                    f"(n={n}, m={m}): matrix dimensions ({dec.d}, {dec.c})",
                )
                back = decomposition_to_tree(dec)
                _require(
                    back.addresses == tree.addresses and back.types == tree.types,
                    f"tree {encode_parens(tree)} did not roundtrip",
                )
                trees_checked += 1
    matrices_checked = 0
    for d in range(d_max + 1):
        for c in range(c_max + 1):
            for dec in enumerate_decompositions(d, c):
                tree = decomposition_to_tree(dec)
                _require(bool(validate(tree)), f"{dec}: image fails validation")
                _require(tree_to_decomposition(tree) == dec, f"{dec} did not roundtrip")
                matrices_checked += 1
    return f"{trees_checked} trees and {matrices_checked} matrices roundtrip exactly"


def check_contour_reference() -> str:
    """The ten-vertex reference tree walks its pinned contour."""
    tree = MultitypeTree.from_nodes(1, list(REFERENCE_CONTOUR_TREE))
    walk = contour(tree)
    _require(walk == REFERENCE_CONTOUR, f"contour {walk}")
    return f"reference contour of {len(walk)} heights matches"


def check_contour_sampled(samples: int = 10_000, seed: int = DEFAULT_VERIFY_SEED) -> str:
    """Contours of sampled trees satisfy the walk invariants."""
    outcomes = sample_batch(
        survival_distribution(_STANDARD), 1, seed, samples, max_vertices=100_000
    )
    checked = 0
    for outcome in outcomes:
        if outcome.status.value != "complete":
            continue
        tree = outcome.tree
        walk = contour(tree)
        edges = len(tree) - 1
        _require(len(walk) == 2 * edges + 1, f"length {len(walk)} != {2 * edges + 1}")
        _require(walk[0] == 0 and walk[-1] == 0, "walk does not start and end at 0")
        _require(min(walk) == 0, "walk dips below 0")
        _require(
            all(abs(b - a) == 1 for a, b in zip(walk, walk[1:])),
            "walk has a step that is not +-1",
        )
        _require(max(walk) == max(len(a) for a in tree.addresses), "max height wrong")
        root_children = len(tree.children[0])
        _require(walk.count(0) == root_children + 1, "zero count != root degree + 1")
        checked += 1
    _require(checked > samples // 2, f"only {checked} complete samples")
    return f"{checked} sampled contours satisfy all walk invariants"


def check_extinction_closed_form(tolerance: float = 1e-12) -> str:
    """Closed-form extinction probabilities solve the fixed-point system
    and agree with the transform as s -> 0-."""
    grids = []
    for p0 in (0.05, 0.1, 0.2):
        for p1 in (0.0, 0.1):
            p2 = 1.0 - p0 - p1
            for q0 in (0.05, 0.15):
                for q1 in (0.0, 0.2):
                    q2 = 1.0 - q0 - q1
                    grids.append(SurvivalParams(p0, p1, p2, q0, q1, q2))
    checked = 0
    for params in grids:
        e1, e2 = extinction_probability(params)
        _require(0.0 < e1 <= 1.0 and 0.0 < e2 <= 1.0, f"{params}: ({e1}, {e2})")
        r1 = params.p0 + params.p1 * e1 + params.p2 * e1 * e2 - e1
        r2 = params.q0 + params.q1 * e2 + params.q2 * e1 * e2 - e2
        _require(abs(r1) < tolerance and abs(r2) < tolerance, f"{params}: residual ({r1}, {r2})")
        checked += 1
    limit = mgf_fixed_point(survival_distribution(_SUPERCRITICAL), -1e-6).values
    exact = extinction_probability(_SUPERCRITICAL)
    _require(exact == (0.25, 0.25), f"pinned extinction {exact}")
    gap = max(abs(a - b) for a, b in zip(limit, exact))
    _require(gap < 1e-3, f"transform limit off by {gap}")
    return f"{checked} parameter points: residuals < {tolerance}, transform limit gap {gap:.2e}"


def check_extinction_monte_carlo(
    replicates: int = 100_000,
    seed: int = DEFAULT_VERIFY_SEED,
    z_bound: float = 3.0,
    max_vertices: int = 500,
) -> str:
    """Finite fraction of sampled supercritical trees matches the closed form."""
    eta = extinction_probability(_SUPERCRITICAL)[0]
    records = sample_survival_stats(_SUPERCRITICAL, 1, seed, replicates, max_vertices)
    finite = sum(1 for rec in records if rec.status.value == "complete")
    fraction = finite / replicates
    spread = math.sqrt(eta * (1.0 - eta) / replicates)
    z = (fraction - eta) / spread
    _require(abs(z) <= z_bound, f"fraction {fraction} vs {eta}: z = {z:.2f}")
    return f"finite fraction {fraction:.4f} vs {eta} (z = {z:+.2f} within {z_bound})"


@lru_cache(maxsize=4)
def _cached_report(
    params: SurvivalParams, replicates: int, seed: int, threads: int
) -> McReport:
    return mc_compare(params, replicates, seed, max_vertices=1000, threads=threads)


def check_mgf_monte_carlo(
    replicates: int = 100_000,
    seed: int = DEFAULT_VERIFY_SEED,
    z_bound: float = 3.0,
    threads: int = 1,
) -> str:
    """Empirical edge-count transform matches the fixed point at each s,
    and the fixed point near s = 0 matches the extinction probability."""
    report = _cached_report(_SUBCRITICAL_PURE, replicates, seed, threads)
    for row in report.mgf_rows:
        _require(
            abs(row.z) <= z_bound,
            f"s={row.s}: empirical {row.empirical} vs {row.theoretical} (z = {row.z:.2f})",
        )
    limit = mgf_fixed_point(survival_distribution(_SUBCRITICAL_PURE), -1e-6).values
    exact = extinction_probability(_SUBCRITICAL_PURE)
    gap = max(abs(a - b) for a, b in zip(limit, exact))
    _require(gap < 1e-3, f"transform at s=-1e-6 off extinction by {gap}")
    worst = max(abs(row.z) for row in report.mgf_rows)
    return (
        f"{len(report.mgf_rows)} transform points within {z_bound} spreads "
        f"(worst z {worst:.2f}); limit gap {gap:.2e}"
    )


def check_father_pmf_monte_carlo(
    replicates: int = 100_000,
    seed: int = DEFAULT_VERIFY_SEED,
    z_bound: float = 3.0,
    tv_bound: float = 0.01,
    threads: int = 1,
) -> str:
    """Empirical father/survival cells match the exact laws cell by cell."""
    report = _cached_report(_STANDARD, replicates, seed, threads)
    for row in (report.finite_fraction, *report.father_cells, *report.joint_cells):
        _require(
            abs(row.z) <= z_bound,
            f"cell {row.cell}: empirical {row.empirical} vs {row.theoretical} (z = {row.z:.2f})",
        )
    _require(
        report.tv_distance <= tv_bound,
        f"father-count TV distance {report.tv_distance} above {tv_bound}",
    )
    cells = 1 + len(report.father_cells) + len(report.joint_cells)
    return (
        f"{cells} cells within {z_bound} spreads, "
        f"TV distance {report.tv_distance:.4f} <= {tv_bound}"
    )


def check_mle_grid(
    cases: Sequence[tuple[int, int]] = ((1, 0), (3, 2), (5, 5), (2, 7)),
    grid_step: float = 0.01,
) -> str:
    """Closed-form estimates sit within one grid step of the likelihood's
    maximum over the grid {grid_step, 2*grid_step, ..., 1 - grid_step}."""
    steps = round(1.0 / grid_step) - 1
    grid = [grid_step * i for i in range(1, steps + 1)]
    tolerance = grid_step + 1e-9
    for n, m in cases:
        estimates = mle(n, m)
        best, best_pq = -1.0, (0.0, 0.0)
        for P in grid:
            for Q in grid:
                value = likelihood(P, Q, n, m)
                if value > best:
                    best, best_pq = value, (P, Q)
        _require(
            abs(best_pq[0] - estimates.P) <= tolerance
            and abs(best_pq[1] - estimates.Q) <= tolerance,
            f"(n={n}, m={m}): grid argmax {best_pq} vs closed form "
            f"({estimates.P}, {estimates.Q})",
        )
    return f"{len(cases)} cases: grid argmax within {grid_step} of closed form"


def check_total_mass(P: float = 0.625, Q: float = 0.625, tolerance: float = 1e-6) -> str:
    """The father-count law plus its atom carries total mass 1."""
    total, shells = likelihood_total_mass(P, Q)
    _require(abs(total - 1.0) <= tolerance, f"total mass {total} (after {shells} shells)")
    return f"total mass {total:.12f} within {tolerance} of 1 after {shells} shells"


def check_sampler_determinism(seed: int = DEFAULT_VERIFY_SEED, count: int = 200) -> str:
    """Same seed means same results, across reruns, thread counts, and
    the tree-building versus statistics-only sampling paths."""
    first = sample_survival_stats(_STANDARD, 1, seed, count, max_vertices=500)
    again = sample_survival_stats(_STANDARD, 1, seed, count, max_vertices=500)
    _require(first == again, "rerun with the same seed differed")
    threaded = sample_survival_stats(_STANDARD, 1, seed, count, max_vertices=500, threads=3)
    _require(first == threaded, "thread count changed the results")
    outcomes = sample_batch(
        survival_distribution(_STANDARD), 1, seed, count, max_vertices=500
    )
    for record, outcome in zip(first, outcomes):
        _require(
            record.status == outcome.status
            and record.vertex_count == outcome.vertex_count
            and record.edge_count == outcome.edge_count,
            f"replicate {record.replicate}: paths disagree on size",
        )
        if outcome.status.value == "complete":
            counts = count_fathers_survivals(outcome.tree)
            _require(
                (record.d1, record.d2, record.s1, record.s2) == tuple(counts),
                f"replicate {record.replicate}: paths disagree on counts",
            )
    return f"{count} replicates identical across reruns, threads, and sampling paths"


_Check = tuple[str, Callable[[], str]]


def _battery(level: str, seed: int) -> list[_Check]:
    if level == "full":
        replicates, samples = 100_000, 10_000
        z_bound, tv_bound = 3.0, 0.01
    elif level == "quick":
        replicates, samples = 2_000, 500
        z_bound, tv_bound = 4.0, 0.06
    else:
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    return [
        ("generating-function-counts", check_gf_narayana),
        ("weight-histograms", check_weight_histograms),
        ("tree-counts", check_tree_counts),
        ("reference-catalog", check_reference_catalog),
        ("tree-matrix-roundtrips", check_tree_matrix_roundtrips),
        ("contour-reference", check_contour_reference),
        ("contour-sampled", lambda: check_contour_sampled(samples, seed)),
        ("extinction-closed-form", check_extinction_closed_form),
        (
            "extinction-monte-carlo",
            lambda: check_extinction_monte_carlo(replicates, seed, z_bound),
        ),
        ("mgf-monte-carlo", lambda: check_mgf_monte_carlo(replicates, seed, z_bound)),
        (
            "father-counts-monte-carlo",
            lambda: check_father_pmf_monte_carlo(replicates, seed, z_bound, tv_bound),
        ),
        ("mle-grid", check_mle_grid),
        ("total-mass", check_total_mass),
        ("sampler-determinism", lambda: check_sampler_determinism(seed)),
    ]


def run_checks(level: str = "full", seed: int = DEFAULT_VERIFY_SEED) -> list[CheckResult]:
    """Run the whole battery (never fail-fast) and report each check."""
    results = []
    for name, fn in _battery(level, seed):
        start = perf_counter()
        try:
            detail = fn()
            passed = True
        except Exception as exc:  # noqa: BLE001 - battery must report, not raise
            detail = f"{type(exc).__name__}: {exc}"
            passed = False
        results.append(CheckResult(name, passed, detail, perf_counter() - start))
    return results
