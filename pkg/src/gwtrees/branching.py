"""Two-type branching-process samplers for binary trees with survivals.

The survival model has offspring laws

    type 1:  ()     with p0      type 2:  ()     with q0
             (1,)   with p1               (2,)   with q1
             (1, 2) with p2               (1, 2) with q2

i.e. a vertex dies, survives (one child of its own type), or fathers a
type-1 plus a type-2 child.  p1 = q1 = 0 recovers full binary trees.

Reproducibility contract: replicate j of master seed S draws from
``Philox(key=S, counter=j * 2**128)``, and uniforms are consumed in
depth-first vertex order through one shared block-escalation scheme
(64 values, then x4 growth up to 2**20).  Any sampler given the same
(seed, replicate) therefore sees the same stream, replicates are
reproducible in isolation, and thread scheduling cannot change results.
"""

from __future__ import annotations

from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .trees import MultitypeTree

DEFAULT_MAX_VERTICES = 1_000_000
PROBABILITY_TOLERANCE = 1e-9

_BLOCK_START = 64
_BLOCK_GROWTH = 4
_BLOCK_CAP = 1 << 20


class Status(str, Enum):
    COMPLETE = "complete"
    TRUNCATED = "truncated"


class Criticality(str, Enum):
    ALMOST_SURELY_FINITE = "almost_surely_finite"
    POSSIBLY_INFINITE = "possibly_infinite"


@dataclass(frozen=True)
class OffspringDistribution:
    """Offspring laws for types 1..r over child-count vectors.

    ``tables[i]`` lists (alpha, probability) pairs for type i + 1, sorted
    by alpha; alpha[k] is the number of type-(k+1) children.  Each
    table's probabilities must sum to 1 within 1e-9 — distributions that
    do not are rejected, never renormalized.
    """

    r: int
    tables: tuple[tuple[tuple[tuple[int, ...], float], ...], ...]

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError(f"r must be at least 1, got {self.r}")
        if len(self.tables) != self.r:
            raise ValueError(f"expected {self.r} offspring tables, got {len(self.tables)}")
        for i, table in enumerate(self.tables):
            if not table:
                raise ValueError(f"type {i + 1} has an empty offspring table")
            total = 0.0
            for alpha, p in table:
                if len(alpha) != self.r:
                    raise ValueError(
                        f"type {i + 1}: count vector {alpha} has length {len(alpha)}, "
                        f"expected {self.r}"
                    )
                if any(a < 0 for a in alpha):
                    raise ValueError(f"type {i + 1}: negative child count in {alpha}")
                if not 0.0 <= p <= 1.0 + PROBABILITY_TOLERANCE:
                    raise ValueError(f"type {i + 1}: probability {p} outside [0, 1]")
                total += p
            if abs(total - 1.0) > PROBABILITY_TOLERANCE:
                raise ValueError(f"type {i + 1}: probabilities sum to {total}, not 1")
            alphas = [alpha for alpha, _ in table]
            if alphas != sorted(alphas) or len(set(alphas)) != len(alphas):
                raise ValueError(f"type {i + 1}: support must be sorted and duplicate-free")

    @classmethod
    def from_maps(
        cls, maps: Sequence[Mapping[Sequence[int], float]]
    ) -> "OffspringDistribution":
        tables = []
        for table in maps:
            entries = sorted(
                (tuple(int(a) for a in alpha), float(p)) for alpha, p in table.items()
            )
            tables.append(tuple(entries))
        return cls(len(tables), tuple(tables))

    def pmf(self, vertex_type: int, alpha: Sequence[int]) -> float:
        """Probability of the count vector alpha for the given type (0 off-support)."""
        if not 1 <= vertex_type <= self.r:
            raise ValueError(f"type {vertex_type} outside 1..{self.r}")
        return self._maps[vertex_type - 1].get(tuple(alpha), 0.0)

    @cached_property
    def _maps(self) -> tuple[dict[tuple[int, ...], float], ...]:
        return tuple(dict(table) for table in self.tables)

    @cached_property
    def _samplers(self) -> tuple[tuple[list[float], list[tuple[int, ...]]], ...]:
        """Per type: inverse-CDF thresholds over the sorted support, and each
        support point expanded to its child-type sequence (type-ordered)."""
        out = []
        for table in self.tables:
            cdf: list[float] = []
            expansions: list[tuple[int, ...]] = []
            acc = 0.0
            for alpha, p in table:
                acc += p
                cdf.append(acc)
                children: list[int] = []
                for k, count in enumerate(alpha):
                    children.extend([k + 1] * count)
                expansions.append(tuple(children))
            out.append((cdf, expansions))
        return tuple(out)


@dataclass(frozen=True)
class SurvivalParams:
    """Parameters (p0, p1, p2, q0, q1, q2) of the survival model."""

    p0: float
    p1: float
    p2: float
    q0: float
    q1: float
    q2: float

    def __post_init__(self) -> None:
        for name in ("p0", "p2", "q0", "q2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("p1", "q1"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        psum = self.p0 + self.p1 + self.p2
        qsum = self.q0 + self.q1 + self.q2
        if abs(psum - 1.0) > PROBABILITY_TOLERANCE:
            raise ValueError(f"p0 + p1 + p2 must equal 1, got {psum}")
        if abs(qsum - 1.0) > PROBABILITY_TOLERANCE:
            raise ValueError(f"q0 + q1 + q2 must equal 1, got {qsum}")

    @property
    def P(self) -> float:
        """p0 / (p0 + p2): chance a type-1 line dies before fathering."""
        return self.p0 / (self.p0 + self.p2)

    @property
    def Q(self) -> float:
        """q0 / (q0 + q2): chance a type-2 line dies before fathering."""
        return self.q0 / (self.q0 + self.q2)


def survival_distribution(params: SurvivalParams) -> OffspringDistribution:
    """The two-type offspring distribution of the survival model.

    Zero-probability entries (e.g. survivals when p1 = 0) are omitted
    from the support.
    """
    mu1 = {(0, 0): params.p0, (1, 0): params.p1, (1, 1): params.p2}
    mu2 = {(0, 0): params.q0, (0, 1): params.q1, (1, 1): params.q2}
    return OffspringDistribution.from_maps(
        [
            {alpha: p for alpha, p in mu1.items() if p > 0},
            {alpha: p for alpha, p in mu2.items() if p > 0},
        ]
    )


def classify(params: SurvivalParams) -> Criticality:
    """Almost-surely-finite trees iff p0*q0 - p2*q2 >= 0."""
    if params.p0 * params.q0 - params.p2 * params.q2 >= 0:
        return Criticality.ALMOST_SURELY_FINITE
    return Criticality.POSSIBLY_INFINITE


@dataclass(frozen=True)
class SampleOutcome:
    tree: MultitypeTree
    status: Status
    rng_seed: int
    vertex_count: int
    edge_count: int


class FatherSurvivalCounts(NamedTuple):
    d1: int  # type-1 fathers
    d2: int  # type-2 fathers
    s1: int  # type-1 survivals
    s2: int  # type-2 survivals


@dataclass(frozen=True)
class SurvivalRecord:
    """Per-replicate statistics from the survival-model batch sampler."""

    replicate: int
    status: Status
    vertex_count: int
    edge_count: int
    d1: int
    d2: int
    s1: int
    s2: int


def _substream(seed: int, replicate: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    if replicate < 0:
        raise ValueError(f"replicate index must be nonnegative, got {replicate}")
    return np.random.Generator(np.random.Philox(key=seed, counter=replicate << 128))


class _UniformStream:
    """Blocked uniform draws; block sizes are part of the determinism contract."""

    __slots__ = ("_rng", "_block", "_pos", "_next_size")

    def __init__(self, rng: np.random.Generator) -> None:
        self._rng = rng
        self._block: Sequence[float] = ()
        self._pos = 0
        self._next_size = _BLOCK_START

    def next(self) -> float:
        if self._pos >= len(self._block):
            self._block = self._rng.random(self._next_size)
            self._pos = 0
            self._next_size = min(self._next_size * _BLOCK_GROWTH, _BLOCK_CAP)
        u = self._block[self._pos]
        self._pos += 1
        return u


def sample_tree(
    dist: OffspringDistribution,
    root_type: int,
    seed: int,
    max_vertices: int = DEFAULT_MAX_VERTICES,
    *,
    replicate: int = 0,
) -> SampleOutcome:
    """Sample one tree by depth-first generation.

    Each vertex, in depth-first order, draws a child-count vector by
    inverse CDF over the sorted support and receives its type-1 children
    first, then type-2, and so on.  If realizing a draw would push the
    vertex count above ``max_vertices``, generation stops and the
    partially built tree is returned with status Truncated (pending
    vertices stay as leaves); otherwise the tree is Complete and every
    leaf really drew zero offspring.
    """
    if not 1 <= root_type <= dist.r:
        raise ValueError(f"root_type {root_type} outside 1..{dist.r}")
    if max_vertices < 1:
        raise ValueError(f"max_vertices must be at least 1, got {max_vertices}")
    stream = _UniformStream(_substream(seed, replicate))
    samplers = dist._samplers
    nodes: list[tuple[tuple[int, ...], int]] = [((), root_type)]
    stack = [0]  # positions into nodes, top = next vertex in DFS order
    status = Status.COMPLETE
    while stack:
        pos = stack.pop()
        addr, vtype = nodes[pos]
        cdf, expansions = samplers[vtype - 1]
        k = bisect_right(cdf, stream.next())
        if k >= len(cdf):
            k = len(cdf) - 1
        children = expansions[k]
        if children:
            if len(nodes) + len(children) > max_vertices:
                status = Status.TRUNCATED
                break
            base = len(nodes)
            for offset, ctype in enumerate(children, start=1):
                nodes.append((addr + (offset,), ctype))
            stack.extend(range(base + len(children) - 1, base - 1, -1))
    tree = MultitypeTree.from_nodes(dist.r, nodes)
    return SampleOutcome(
        tree=tree,
        status=status,
        rng_seed=seed,
        vertex_count=len(nodes),
        edge_count=len(nodes) - 1,
    )


def sample_batch(
    dist: OffspringDistribution,
    root_type: int,
    seed: int,
    count: int,
    max_vertices: int = DEFAULT_MAX_VERTICES,
    *,
    threads: int = 1,
) -> list[SampleOutcome]:
    """Sample ``count`` trees on independent substreams; replicate j of the
    batch equals ``sample_tree(..., replicate=j)`` regardless of threads."""
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    results: list[SampleOutcome | None] = [None] * count

    def run(lo: int, hi: int) -> None:
        for j in range(lo, hi):
            results[j] = sample_tree(dist, root_type, seed, max_vertices, replicate=j)

    _run_chunked(run, count, threads)
    return results  # type: ignore[return-value]


def _run_chunked(run, count: int, threads: int) -> None:
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    if threads == 1 or count <= 1:
        run(0, count)
        return
    bounds = [count * i // threads for i in range(threads + 1)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(run, lo, hi) for lo, hi in zip(bounds, bounds[1:]) if lo < hi
        ]
        for f in futures:
            f.result()


def _survival_kinds(dist: OffspringDistribution) -> tuple[list[float], list[int], list[float], list[int]]:
    """Collapse a survival-shaped distribution's samplers into outcome kinds.

    Kind 0 = no children, 1 = one child of the parent's own type,
    2 = father (type-1 then type-2 child).  Raises if the support does
    not have that shape.
    """
    kinds_by_type = []
    for vertex_type, (cdf, expansions) in enumerate(dist._samplers, start=1):
        kinds = []
        for children in expansions:
            if children == ():
                kinds.append(0)
            elif children == (vertex_type,):
                kinds.append(1)
            elif children == (1, 2):
                kinds.append(2)
            else:
                raise ValueError(
                    f"type {vertex_type} support entry {children} is not survival-shaped"
                )
        kinds_by_type.append((cdf, kinds))
    (cdf1, kinds1), (cdf2, kinds2) = kinds_by_type
    return cdf1, kinds1, cdf2, kinds2


def _survival_tally(
    rng: np.random.Generator,
    root_type: int,
    cdf1: list[float],
    kinds1: list[int],
    cdf2: list[float],
    kinds2: list[int],
    max_vertices: int,
) -> tuple[int, bool, int, int, int, int]:
    """Statistics-only twin of :func:`sample_tree` for the survival model.

    Consumes the identical uniform stream (same block sizes, same
    inverse-CDF choices, same depth-first pop order) but tallies counts
    instead of materializing vertices.
    """
    block = rng.random(_BLOCK_START)
    block_len = _BLOCK_START
    next_size = _BLOCK_START * _BLOCK_GROWTH
    pos = 0
    stack = [root_type]
    created = 1
    truncated = False
    d1 = d2 = s1 = s2 = 0
    len1 = len(cdf1)
    len2 = len(cdf2)
    while stack:
        t = stack.pop()
        if pos >= block_len:
            block = rng.random(next_size)
            block_len = next_size
            next_size = min(next_size * _BLOCK_GROWTH, _BLOCK_CAP)
            pos = 0
        u = block[pos]
        pos += 1
        if t == 1:
            cdf, kinds, size = cdf1, kinds1, len1
        else:
            cdf, kinds, size = cdf2, kinds2, len2
        k = bisect_right(cdf, u)
        if k >= size:
            k = size - 1
        kind = kinds[k]
        if kind == 2:
            if created + 2 > max_vertices:
                truncated = True
                break
            created += 2
            if t == 1:
                d1 += 1
            else:
                d2 += 1
            stack.append(2)
            stack.append(1)
        elif kind == 1:
            if created + 1 > max_vertices:
                truncated = True
                break
            created += 1
            if t == 1:
                s1 += 1
            else:
                s2 += 1
            stack.append(t)
    return created, truncated, d1, d2, s1, s2


def sample_survival_stats(
    params: SurvivalParams,
    root_type: int,
    seed: int,
    count: int,
    max_vertices: int = DEFAULT_MAX_VERTICES,
    *,
    threads: int = 1,
) -> list[SurvivalRecord]:
    """Batch-sample the survival model, keeping per-replicate statistics only.

    Record j matches the statistics of ``sample_tree`` on replicate j
    exactly (same substream, same truncation point); use this for large
    Monte Carlo runs where materializing trees would dominate.
    """
    if not 1 <= root_type <= 2:
        raise ValueError(f"root_type {root_type} outside 1..2")
    if max_vertices < 1:
        raise ValueError(f"max_vertices must be at least 1, got {max_vertices}")
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    cdf1, kinds1, cdf2, kinds2 = _survival_kinds(survival_distribution(params))
    records: list[SurvivalRecord | None] = [None] * count

    def run(lo: int, hi: int) -> None:
        for j in range(lo, hi):
            created, truncated, d1, d2, s1, s2 = _survival_tally(
                _substream(seed, j), root_type, cdf1, kinds1, cdf2, kinds2, max_vertices
            )
            records[j] = SurvivalRecord(
                replicate=j,
                status=Status.TRUNCATED if truncated else Status.COMPLETE,
                vertex_count=created,
                edge_count=created - 1,
                d1=d1,
                d2=d2,
                s1=s1,
                s2=s2,
            )

    _run_chunked(run, count, threads)
    return records  # type: ignore[return-value]


def edge_count(tree: MultitypeTree) -> int:
    return len(tree) - 1


def generation_counts(tree: MultitypeTree) -> list[tuple[int, ...]]:
    """Vertex counts per generation: entry g is the type histogram at depth g."""
    depth_max = max(len(a) for a in tree.addresses)
    counts = [[0] * tree.r for _ in range(depth_max + 1)]
    for addr, t in zip(tree.addresses, tree.types):
        counts[len(addr)][t - 1] += 1
    return [tuple(row) for row in counts]


def count_fathers_survivals(tree: MultitypeTree) -> FatherSurvivalCounts:
    """Father and survival counts (D1, D2, S1, S2) of a survival-model tree.

    Raises ValueError on any vertex that does not conform to the model:
    more than two children, a single child of a different type, or two
    children that are not a type-1 followed by a type-2.
    """
    d1 = d2 = s1 = s2 = 0
    for pos, kids in enumerate(tree.children):
        t = tree.types[pos]
        if t not in (1, 2):
            raise ValueError(f"vertex {tree.addresses[pos]} has type {t}, expected 1 or 2")
        if len(kids) == 0:
            continue
        if len(kids) == 1:
            ctype = tree.types[kids[0]]
            if ctype != t:
                raise ValueError(
                    f"vertex {tree.addresses[pos]} of type {t} has a single child "
                    f"of type {ctype}; survivals keep their own type"
                )
            if t == 1:
                s1 += 1
            else:
                s2 += 1
        elif len(kids) == 2:
            got = (tree.types[kids[0]], tree.types[kids[1]])
            if got != (1, 2):
                raise ValueError(
                    f"vertex {tree.addresses[pos]} has child types {got}, expected (1, 2)"
                )
            if t == 1:
                d1 += 1
            else:
                d2 += 1
        else:
            raise ValueError(
                f"vertex {tree.addresses[pos]} has {len(kids)} children; "
                "the survival model allows at most 2"
            )
    return FatherSurvivalCounts(d1, d2, s1, s2)
