"""Exact laws, transforms, and estimators for the survival model.

Conventions: ``n`` counts type-1 fathers, ``m`` counts type-2 fathers,
``s1``/``s2`` count type-1/type-2 survivals, always for a tree rooted at
a type-1 vertex.  ``P = p0/(p0+p2)`` and ``Q = q0/(q0+q2)`` are the
death chances of a type-1 and type-2 line; the father counts depend on
the parameters only through (P, Q).
"""

from __future__ import annotations

import math
import operator
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .branching import (
    Criticality,
    OffspringDistribution,
    SurvivalParams,
    classify,
    sample_survival_stats,
    survival_distribution,
)
from .combinatorics import binomial, narayana
from .errors import ConvergenceError, ModelError

DEFAULT_MGF_TOLERANCE = 1e-12
DEFAULT_MGF_MAX_ITERATIONS = 1_000_000
DEFAULT_SHELL_TOLERANCE = 1e-12
DEFAULT_MAX_SHELLS = 2000

# Largest n + m (+ survivals) evaluated by exact integer arithmetic;
# larger arguments switch to the log-gamma route, which cannot overflow.
_EXACT_SIZE = 250

_FATHER_SCAN_MAX = 30
_JOINT_SCAN_FATHERS = 12
_JOINT_SCAN_SURVIVALS = 24


class MgfSolution(NamedTuple):
    """Fixed-point values per root type, and iterations used to reach them."""

    values: tuple[float, ...]
    iterations: int


def mgf_fixed_point(
    dist: OffspringDistribution,
    s: float,
    *,
    tolerance: float = DEFAULT_MGF_TOLERANCE,
    max_iterations: int = DEFAULT_MGF_MAX_ITERATIONS,
) -> MgfSolution:
    """Edge-count moment generating functions F_i(s) = E[exp(2 s |tree|)].

    Solves the system F_i = sum_alpha mu_i(alpha) exp(2 s |alpha|)
    prod_k F_k^alpha_k for s <= 0 by monotone iteration from zero, which
    converges to the smallest fixed point in [0, 1]^r.  At s -> 0- the
    values approach the extinction probabilities.  Stops once an
    iteration moves every component by less than ``tolerance``; raises
    ConvergenceError after ``max_iterations``.
    """
    if not math.isfinite(s):
        raise ValueError(f"s must be finite, got {s}")
    if s > 0:
        raise ValueError(f"s must be nonpositive, got {s}")
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    if max_iterations < 1:
        raise ValueError(f"max_iterations must be at least 1, got {max_iterations}")
    rows_by_type = [
        [(p * math.exp(2.0 * s * sum(alpha)), alpha) for alpha, p in table]
        for table in dist.tables
    ]
    values = [0.0] * dist.r
    for iteration in range(1, max_iterations + 1):
        new = []
        for rows in rows_by_type:
            acc = 0.0
            for weight, alpha in rows:
                term = weight
                for k, a in enumerate(alpha):
                    for _ in range(a):
                        term *= values[k]
                acc += term
            new.append(acc)
        delta = 0.0
        for nv, ov in zip(new, values):
            assert nv >= ov, "monotone iteration decreased"
            delta = max(delta, nv - ov)
        values = new
        if delta < tolerance:
            return MgfSolution(tuple(values), iteration)
    raise ConvergenceError(
        f"fixed-point iteration at s={s} still moving by more than "
        f"{tolerance} after {max_iterations} iterations"
    )


def extinction_probability(params: SurvivalParams) -> tuple[float, float]:
    """Chance the tree is finite, per root type.

    (1, 1) when p0*q0 >= p2*q2; otherwise the closed form
    (p0(q0+q2)/(q2(p0+p2)), q0(p0+p2)/(p2(q0+q2))).
    """
    if classify(params) is Criticality.ALMOST_SURELY_FINITE:
        return (1.0, 1.0)
    eta1 = params.p0 * (params.q0 + params.q2) / (params.q2 * (params.p0 + params.p2))
    eta2 = params.q0 * (params.p0 + params.p2) / (params.p2 * (params.q0 + params.q2))
    return (eta1, eta2)


def _check_counts(n: int, m: int) -> tuple[int, int]:
    n = operator.index(n)
    m = operator.index(m)
    if n < 1:
        raise ValueError(f"n (type-1 fathers) must be at least 1, got {n}")
    if m < 0:
        raise ValueError(f"m (type-2 fathers) must be nonnegative, got {m}")
    return n, m


def _check_finite_regime(params: SurvivalParams, what: str) -> None:
    if classify(params) is Criticality.POSSIBLY_INFINITE:
        raise ModelError(
            f"{what} is defined for almost-surely-finite trees; "
            "these parameters have p0*q0 < p2*q2"
        )


def _log_binomial(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def _log_narayana(n: int, k: int) -> float:
    return _log_binomial(n, k) + _log_binomial(n, k - 1) - math.log(n)


def joint_pmf(params: SurvivalParams, n: int, m: int, s1: int, s2: int) -> float:
    """P(N=n, M=m, S1=s1, S2=s2): fathers and survivals of both types.

    narayana(n+m, m+1) C(m+n+s1, s1) C(m+n+s2-1, s2)
    p0^{m+1} p1^{s1} p2^n q0^n q1^{s2} q2^m.
    """
    _check_finite_regime(params, "the joint father/survival law")
    n, m = _check_counts(n, m)
    s1 = operator.index(s1)
    s2 = operator.index(s2)
    if s1 < 0 or s2 < 0:
        raise ValueError(f"survival counts must be nonnegative, got ({s1}, {s2})")
    if n + m + s1 + s2 <= _EXACT_SIZE:
        shapes = narayana(n + m, m + 1) * binomial(m + n + s1, s1) * binomial(m + n + s2 - 1, s2)
        return (
            shapes
            * params.p0 ** (m + 1)
            * params.p1**s1
            * params.p2**n
            * params.q0**n
            * params.q1**s2
            * params.q2**m
        )
    log_p = log_joint_pmf(params, n, m, s1, s2)
    return math.exp(log_p) if log_p > -math.inf else 0.0


def log_joint_pmf(params: SurvivalParams, n: int, m: int, s1: int, s2: int) -> float:
    """log joint_pmf via log-gamma, safe for large counts (-inf off-support)."""
    _check_finite_regime(params, "the joint father/survival law")
    n, m = _check_counts(n, m)
    s1 = operator.index(s1)
    s2 = operator.index(s2)
    if s1 < 0 or s2 < 0:
        raise ValueError(f"survival counts must be nonnegative, got ({s1}, {s2})")
    if (params.p1 == 0 and s1 > 0) or (params.q1 == 0 and s2 > 0):
        return -math.inf
    total = _log_narayana(n + m, m + 1)
    total += _log_binomial(m + n + s1, s1) + _log_binomial(m + n + s2 - 1, s2)
    total += (m + 1) * math.log(params.p0) + n * math.log(params.p2)
    total += n * math.log(params.q0) + m * math.log(params.q2)
    if s1:
        total += s1 * math.log(params.p1)
    if s2:
        total += s2 * math.log(params.q1)
    return total


def father_pmf(params: SurvivalParams, n: int, m: int) -> float:
    """P(N=n, M=m): the father counts, marginalized over survivals.

    Summing the joint law over survivals in closed form leaves
    narayana(n+m, m+1) p0^{m+1} p2^n q0^n q2^m
    / ((p0+p2)^{m+n+1} (q0+q2)^{m+n}); the distribution depends on the
    parameters only through P and Q.  The remaining mass P sits on the
    fatherless atom (N, M) = (0, 0), outside this function's domain.
    """
    _check_finite_regime(params, "the father-count law")
    n, m = _check_counts(n, m)
    if n + m <= _EXACT_SIZE:
        return (
            narayana(n + m, m + 1)
            * params.p0 ** (m + 1)
            * params.p2**n
            * params.q0**n
            * params.q2**m
            / ((params.p0 + params.p2) ** (m + n + 1) * (params.q0 + params.q2) ** (m + n))
        )
    return math.exp(log_father_pmf(params, n, m))


def log_father_pmf(params: SurvivalParams, n: int, m: int) -> float:
    """log father_pmf via log-gamma, safe for large counts."""
    _check_finite_regime(params, "the father-count law")
    n, m = _check_counts(n, m)
    return (
        _log_narayana(n + m, m + 1)
        + (m + 1) * math.log(params.p0)
        + n * math.log(params.p2)
        + n * math.log(params.q0)
        + m * math.log(params.q2)
        - (m + n + 1) * math.log(params.p0 + params.p2)
        - (m + n) * math.log(params.q0 + params.q2)
    )


def _check_death_chances(P: float, Q: float) -> None:
    if not 0.0 < P < 1.0:
        raise ValueError(f"P must lie strictly between 0 and 1, got {P}")
    if not 0.0 < Q < 1.0:
        raise ValueError(f"Q must lie strictly between 0 and 1, got {Q}")


def likelihood(P: float, Q: float, n: int, m: int) -> float:
    """narayana(n+m, m+1) P^{m+1} (1-P)^n Q^n (1-Q)^m.

    The chance of observing n type-1 and m type-2 fathers when the two
    line-death chances are P and Q; as a function of (P, Q) for fixed
    observed counts, the likelihood to maximize.
    """
    _check_death_chances(P, Q)
    n, m = _check_counts(n, m)
    if n + m <= _EXACT_SIZE:
        return narayana(n + m, m + 1) * P ** (m + 1) * (1.0 - P) ** n * Q**n * (1.0 - Q) ** m
    return math.exp(log_likelihood(P, Q, n, m))


def log_likelihood(P: float, Q: float, n: int, m: int) -> float:
    """log likelihood via log-gamma, safe for large counts."""
    _check_death_chances(P, Q)
    n, m = _check_counts(n, m)
    return (
        _log_narayana(n + m, m + 1)
        + (m + 1) * math.log(P)
        + n * math.log1p(-P)
        + n * math.log(Q)
        + m * math.log1p(-Q)
    )


def likelihood_total_mass(
    P: float,
    Q: float,
    *,
    shell_tolerance: float = DEFAULT_SHELL_TOLERANCE,
    max_shells: int = DEFAULT_MAX_SHELLS,
) -> tuple[float, int]:
    """Sum the father-count law over its whole support, plus the atom P.

    Accumulates diagonal shells n + m = t until a shell contributes less
    than ``shell_tolerance``; returns (total, shells used).  The total is
    1 when P + Q >= 1 and the extinction mass of the father line
    otherwise.  Raises ConvergenceError if ``max_shells`` is not enough.
    """
    _check_death_chances(P, Q)
    if shell_tolerance <= 0:
        raise ValueError(f"shell_tolerance must be positive, got {shell_tolerance}")
    if max_shells < 1:
        raise ValueError(f"max_shells must be at least 1, got {max_shells}")
    terms = [P]
    for t in range(1, max_shells + 1):
        shell = [likelihood(P, Q, n, t - n) for n in range(1, t + 1)]
        terms.extend(shell)
        if math.fsum(shell) < shell_tolerance:
            return math.fsum(terms), t
    raise ConvergenceError(
        f"shell sums still above {shell_tolerance} after {max_shells} shells"
    )


class Estimates(NamedTuple):
    """Maximum-likelihood estimates from observed father counts."""

    P: float
    Q: float
    p2_over_p0: float  # (1 - P) / P, the type-1 father/death odds
    q2_over_q0: float  # (1 - Q) / Q, the type-2 father/death odds


def mle(n: int, m: int) -> Estimates:
    """Maximizers of likelihood(P, Q, n, m): P = (m+1)/(m+n+1), Q = n/(m+n)."""
    n, m = _check_counts(n, m)
    return Estimates(
        P=(m + 1) / (m + n + 1),
        Q=n / (m + n),
        p2_over_p0=n / (m + 1),
        q2_over_q0=m / n,
    )


@dataclass(frozen=True)
class CellComparison:
    """Theory-versus-simulation for one support cell of a discrete law."""

    cell: tuple[int, ...]
    theoretical: float
    empirical: float
    z: float


@dataclass(frozen=True)
class MgfComparison:
    """Theory-versus-simulation for one moment-generating-function point."""

    s: float
    theoretical: float
    empirical: float
    z: float


@dataclass(frozen=True)
class McReport:
    """Monte-Carlo comparison of sampled trees against the exact laws."""

    replicates: int
    seed: int
    root_type: int
    max_vertices: int
    truncated_count: int
    finite_fraction: CellComparison
    father_cells: tuple[CellComparison, ...]
    joint_cells: tuple[CellComparison, ...]
    mgf_rows: tuple[MgfComparison, ...]
    tv_distance: float
    max_abs_z: float


def _binomial_z(empirical: float, theoretical: float, replicates: int) -> float:
    spread = math.sqrt(theoretical * (1.0 - theoretical) / replicates)
    if spread == 0.0:
        return 0.0 if empirical == theoretical else math.inf
    return (empirical - theoretical) / spread


def _swap(params: SurvivalParams) -> SurvivalParams:
    return SurvivalParams(
        p0=params.q0, p1=params.q1, p2=params.q2,
        q0=params.p0, q1=params.p1, q2=params.p2,
    )


def _father_theory(params: SurvivalParams, root_type: int, threshold: float):
    """Cells of the father-count law with mass above threshold, in the
    tree's own (type-1 fathers, type-2 fathers) coordinates.

    A type-2-rooted tree is the type-swap image of a type-1-rooted tree
    under swapped parameters, so its cell (a, b) carries the swapped
    law's mass at (b, a).
    """
    base = params if root_type == 1 else _swap(params)
    cells: list[tuple[tuple[int, int], float]] = []
    atom = base.P
    if atom > threshold:
        cells.append(((0, 0), atom))
    for n in range(1, _FATHER_SCAN_MAX + 1):
        for m in range(_FATHER_SCAN_MAX + 1):
            mass = father_pmf(base, n, m)
            if mass > threshold:
                cell = (n, m) if root_type == 1 else (m, n)
                cells.append((cell, mass))
    cells.sort(key=lambda item: item[0])
    return cells


def _joint_theory(params: SurvivalParams, root_type: int, threshold: float):
    """Cells of the joint law above threshold, in the tree's own
    (type-1 fathers, type-2 fathers, type-1 survivals, type-2 survivals)
    coordinates."""
    base = params if root_type == 1 else _swap(params)
    cells: list[tuple[tuple[int, int, int, int], float]] = []
    for k in range(_JOINT_SCAN_SURVIVALS + 1):
        mass = base.p0 * base.p1**k
        if mass > threshold:
            cell = (0, 0, k, 0) if root_type == 1 else (0, 0, 0, k)
            cells.append((cell, mass))
    for n in range(1, _JOINT_SCAN_FATHERS + 1):
        for m in range(_JOINT_SCAN_FATHERS + 1):
            for s1 in range(_JOINT_SCAN_SURVIVALS + 1):
                for s2 in range(_JOINT_SCAN_SURVIVALS + 1):
                    mass = joint_pmf(base, n, m, s1, s2)
                    if mass > threshold:
                        cell = (n, m, s1, s2) if root_type == 1 else (m, n, s2, s1)
                        cells.append((cell, mass))
    cells.sort(key=lambda item: item[0])
    return cells


def mc_compare(
    params: SurvivalParams,
    replicates: int,
    seed: int,
    *,
    root_type: int = 1,
    max_vertices: int = 1000,
    s_values: Sequence[float] = (-0.05, -0.2),
    mass_threshold: float = 0.01,
    threads: int = 1,
) -> McReport:
    """Sample the survival model and compare it against the exact laws.

    Checks, over ``replicates`` independent trees: the fraction that
    finish (against 1, this regime being almost surely finite), every
    father-count and joint father/survival cell of mass above
    ``mass_threshold`` (binomial z-scores), the edge-count moment
    generating function at each s in ``s_values`` (sample-spread
    z-scores; truncated replicates contribute 0), and the total
    variation distance between the empirical and exact father-count law
    over the listed cells plus a pooled tail.
    """
    if replicates < 2:
        raise ValueError(f"need at least 2 replicates, got {replicates}")
    if root_type not in (1, 2):
        raise ValueError(f"root_type {root_type} outside 1..2")
    if not 0.0 < mass_threshold < 1.0:
        raise ValueError(f"mass_threshold must lie in (0, 1), got {mass_threshold}")
    _check_finite_regime(params, "mc_compare")

    records = sample_survival_stats(
        params, root_type, seed, replicates, max_vertices, threads=threads
    )
    complete = [rec for rec in records if rec.status.value == "complete"]
    truncated_count = replicates - len(complete)

    finite_emp = len(complete) / replicates
    finite_row = CellComparison(
        cell=(),
        theoretical=1.0,
        empirical=finite_emp,
        z=_binomial_z(finite_emp, 1.0, replicates),
    )

    father_counts = Counter((rec.d1, rec.d2) for rec in complete)
    joint_counts = Counter((rec.d1, rec.d2, rec.s1, rec.s2) for rec in complete)

    father_rows = []
    for cell, mass in _father_theory(params, root_type, mass_threshold):
        emp = father_counts.get(cell, 0) / replicates
        father_rows.append(CellComparison(cell, mass, emp, _binomial_z(emp, mass, replicates)))

    joint_rows = []
    for cell, mass in _joint_theory(params, root_type, mass_threshold):
        emp = joint_counts.get(cell, 0) / replicates
        joint_rows.append(CellComparison(cell, mass, emp, _binomial_z(emp, mass, replicates)))

    dist = survival_distribution(params)
    mgf_rows = []
    for s in s_values:
        theoretical = mgf_fixed_point(dist, s).values[root_type - 1]
        values = [
            math.exp(2.0 * s * rec.edge_count) if rec.status.value == "complete" else 0.0
            for rec in records
        ]
        mean = math.fsum(values) / replicates
        variance = math.fsum((v - mean) ** 2 for v in values) / (replicates - 1)
        spread = math.sqrt(variance / replicates)
        if spread == 0.0:
            z = 0.0 if mean == theoretical else math.inf
        else:
            z = (mean - theoretical) / spread
        mgf_rows.append(MgfComparison(s, theoretical, mean, z))

    theo_tail = 1.0 - math.fsum(row.theoretical for row in father_rows)
    emp_tail = 1.0 - math.fsum(row.empirical for row in father_rows)
    tv = 0.5 * (
        math.fsum(abs(row.empirical - row.theoretical) for row in father_rows)
        + abs(emp_tail - theo_tail)
    )

    all_z = [finite_row.z]
    all_z.extend(row.z for row in father_rows)
    all_z.extend(row.z for row in joint_rows)
    all_z.extend(row.z for row in mgf_rows)

    return McReport(
        replicates=replicates,
        seed=seed,
        root_type=root_type,
        max_vertices=max_vertices,
        truncated_count=truncated_count,
        finite_fraction=finite_row,
        father_cells=tuple(father_rows),
        joint_cells=tuple(joint_rows),
        mgf_rows=tuple(mgf_rows),
        tv_distance=tv,
        max_abs_z=max(abs(z) for z in all_z),
    )
