"""Planar trees with typed vertices: validation, encodings, bijections.

A vertex is addressed by a tuple of positive child indices (the root is
the empty tuple) and carries a type in 1..r.  A tree stores its vertices
in depth-first order, which for these addresses is plain tuple order.

Full binary trees — every vertex has zero or exactly two children, a
type-1 child at index 1 followed by a type-2 child at index 2, with a
type-1 root that has children — admit a parenthesis encoding (one symbol
per non-root vertex in depth-first order: type 1 -> '(', type 2 -> ')')
and a weight-preserving bijection onto the bounded two-row
decompositions of :mod:`gwtrees.combinatorics`.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple, Sequence

from .combinatorics import DEFAULT_ENUMERATION_CAP, Decomposition, narayana
from .errors import ResourceLimitError

Address = tuple[int, ...]


@dataclass(frozen=True)
class MultitypeTree:
    """A planar tree over types 1..r, vertices listed in depth-first order."""

    r: int
    addresses: tuple[Address, ...]
    types: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "addresses", tuple(tuple(int(i) for i in a) for a in self.addresses)
        )
        object.__setattr__(self, "types", tuple(int(t) for t in self.types))
        if len(self.addresses) != len(self.types):
            raise ValueError("need exactly one type per address")

    @classmethod
    def from_nodes(cls, r: int, nodes: Iterable[tuple[Sequence[int], int]]) -> "MultitypeTree":
        """Build from (address, type) pairs in any order; sorts into DFS order."""
        pairs = sorted((tuple(a), int(t)) for a, t in nodes)
        return cls(r, tuple(a for a, _ in pairs), tuple(t for _, t in pairs))

    def __len__(self) -> int:
        return len(self.addresses)

    @cached_property
    def index(self) -> dict[Address, int]:
        return {addr: i for i, addr in enumerate(self.addresses)}

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        """Positions of each vertex's children, in sibling order."""
        kids: list[list[int]] = [[] for _ in self.addresses]
        index = self.index
        for pos, addr in enumerate(self.addresses):
            if addr:
                kids[index[addr[:-1]]].append(pos)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def child_counts(self) -> tuple[int, ...]:
        return tuple(len(k) for k in self.children)


class ValidationResult(NamedTuple):
    ok: bool
    problem: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate(tree: MultitypeTree) -> ValidationResult:
    """Check the tree invariants, reporting the first violation found."""
    if tree.r < 1:
        return ValidationResult(False, f"r must be at least 1, got {tree.r}")
    if not tree.addresses:
        return ValidationResult(False, "a tree needs at least the root vertex")
    present = set(tree.addresses)
    if len(present) != len(tree.addresses):
        return ValidationResult(False, "duplicate addresses")
    if () not in present:
        return ValidationResult(False, "the root address () is missing")
    for addr in tree.addresses:
        if any(i < 1 for i in addr):
            return ValidationResult(False, f"address {addr} has a child index below 1")
    for addr in tree.addresses:
        if addr and addr[:-1] not in present:
            return ValidationResult(False, f"address {addr} has no parent (not prefix-closed)")
    for addr in tree.addresses:
        if addr and addr[-1] > 1 and addr[:-1] + (addr[-1] - 1,) not in present:
            return ValidationResult(
                False, f"address {addr} is present without its sibling (not sibling-complete)"
            )
    for addr, t in zip(tree.addresses, tree.types):
        if not 1 <= t <= tree.r:
            return ValidationResult(False, f"vertex {addr} has type {t} outside 1..{tree.r}")
    if tree.addresses != tuple(sorted(tree.addresses)):
        return ValidationResult(False, "vertices are not in depth-first order")
    return ValidationResult(True, None)


def counter_map(w: Sequence[int], r: int) -> tuple[int, ...]:
    """Count occurrences of each type 1..r in the word w."""
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}")
    counts = [0] * r
    for t in w:
        if not 1 <= t <= r:
            raise ValueError(f"type {t} outside 1..{r}")
        counts[t - 1] += 1
    return tuple(counts)


def is_type_ordered(tree: MultitypeTree) -> bool:
    """True when every vertex's children have weakly increasing types."""
    for kids in tree.children:
        types = [tree.types[k] for k in kids]
        if any(types[i] > types[i + 1] for i in range(len(types) - 1)):
            return False
    return True


def contour(tree: MultitypeTree) -> list[int]:
    """Height sequence of the depth-first edge walk around the tree.

    The walk has 2 * edge_count + 1 values, starts and ends at height 0,
    and moves by exactly +-1 between consecutive values.
    """
    kids = tree.children
    heights = [0]
    h = 0
    stack: list[tuple[int, int]] = [(0, 0)]  # (vertex position, next child slot)
    while stack:
        pos, slot = stack.pop()
        if slot < len(kids[pos]):
            stack.append((pos, slot + 1))
            stack.append((kids[pos][slot], 0))
            h += 1
            heights.append(h)
        elif stack:
            h -= 1
            heights.append(h)
    return heights


def _require_full_binary(tree: MultitypeTree) -> None:
    """Raise ValueError unless the tree is full binary and type-ordered."""
    if tree.types[0] != 1:
        raise ValueError(f"the root must have type 1, got type {tree.types[0]}")
    if tree.child_counts[0] != 2:
        if tree.child_counts[0] == 0:
            raise ValueError("the root is a leaf; a full binary tree needs a fathering root")
        raise ValueError(f"the root has {tree.child_counts[0]} children, expected 2")
    for pos, kids in enumerate(tree.children):
        if len(kids) not in (0, 2):
            raise ValueError(
                f"vertex {tree.addresses[pos]} has {len(kids)} children; "
                "a full binary tree allows only 0 or 2"
            )
        if kids:
            got = (tree.types[kids[0]], tree.types[kids[1]])
            if got != (1, 2):
                raise ValueError(
                    f"vertex {tree.addresses[pos]} has child types {got}, expected (1, 2)"
                )


def encode_parens(tree: MultitypeTree) -> str:
    """Parenthesis encoding of a full binary tree.

    One symbol per non-root vertex in depth-first order: '(' for type 1,
    ')' for type 2.  Equivalently, a father encodes as
    "(" + encoding(left child) + ")" + encoding(right child).
    """
    _require_full_binary(tree)
    return "".join("(" if t == 1 else ")" for t in tree.types[1:])


def decode_parens(s: str) -> MultitypeTree:
    """Inverse of :func:`encode_parens`; rejects empty or unbalanced input."""
    if not s:
        raise ValueError("cannot decode an empty encoding")
    depth = 0
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ValueError("unbalanced encoding: a ')' closes nothing")
        else:
            raise ValueError(f"invalid character {ch!r} in encoding")
    if depth:
        raise ValueError("unbalanced encoding: unclosed '('")

    nodes: list[tuple[Address, int]] = [((), 1)]
    pending: list[Address] = []  # fathers inside their left subtree, ')' still to come
    cur: Address = ()  # father currently receiving children
    n = len(s)
    i = 0
    while i < n:
        if s[i] == "(":
            left = cur + (1,)
            nodes.append((left, 1))
            i += 1
            if i < n and s[i] == "(":  # left child fathers in turn
                pending.append(cur)
                cur = left
        else:
            right = cur + (2,)
            nodes.append((right, 2))
            i += 1
            if i < n and s[i] == "(":  # right child fathers in turn
                cur = right
            elif pending:  # subtree of cur finished; resume the ancestor
                cur = pending.pop()
    return MultitypeTree.from_nodes(2, nodes)


class FatherLeafCounts(NamedTuple):
    left_fathers: int
    right_fathers: int
    left_leaves: int
    right_leaves: int


def fathers_leaves(tree: MultitypeTree) -> FatherLeafCounts:
    """Father and leaf counts by type for a full binary tree."""
    _require_full_binary(tree)
    n = m = left = right = 0
    for t, cc in zip(tree.types, tree.child_counts):
        if cc == 2:
            if t == 1:
                n += 1
            else:
                m += 1
        else:
            if t == 1:
                left += 1
            else:
                right += 1
    return FatherLeafCounts(n, m, left, right)


def _matched_pairs(s: str) -> list[tuple[int, int]]:
    """Matched (open, close) positions of a balanced string, by open position."""
    pairs = []
    stack: list[int] = []
    for pos, ch in enumerate(s):
        if ch == "(":
            stack.append(pos)
        else:
            pairs.append((stack.pop(), pos))
    pairs.sort()
    return pairs


def tree_to_decomposition(tree: MultitypeTree) -> Decomposition:
    """Map a full binary tree to its two-row decomposition.

    With d + 1 adjacent "()" pairs (nestings) and c separated pairs in
    the encoding, entry top[i] counts the separated ')' symbols after the
    (i+2)-th nesting and bottom[i] the separated '(' symbols after the
    (i+1)-th nesting.  A tree whose encoding has a single nesting (no
    right fathers) maps to the empty decomposition with c = n - 1.
    """
    s = encode_parens(tree)
    pairs = _matched_pairs(s)
    nests = [(o, c) for o, c in pairs if c == o + 1]
    sep_opens = sorted(o for o, c in pairs if c > o + 1)
    sep_closes = sorted(c for o, c in pairs if c > o + 1)
    d = len(nests) - 1
    c = len(sep_opens)
    top = tuple(
        len(sep_closes) - bisect_right(sep_closes, nests[i + 1][1]) for i in range(d)
    )
    bottom = tuple(
        len(sep_opens) - bisect_right(sep_opens, nests[i][1]) for i in range(d)
    )
    return Decomposition(d, c, top, bottom)


def decomposition_to_tree(dec: Decomposition) -> MultitypeTree:
    """Inverse of :func:`tree_to_decomposition`.

    Lays out d + 1 nesting pairs with the separated symbols distributed
    in the gaps (closers first, then openers, within each gap); the row
    monotonicity and column dominance of the decomposition make every
    gap count nonnegative and the result balanced.
    """
    d, c = dec.d, dec.c
    closes_after = [c, *dec.top, 0]  # after nesting k: closes_after[k-1], k = 1..d+2
    opens_after = [*dec.bottom, 0]  # after nesting k: opens_after[k-1], k = 1..d+1
    pieces = ["(" * (c - opens_after[0])]
    for k in range(1, d + 2):
        pieces.append("()")
        pieces.append(")" * (closes_after[k - 1] - closes_after[k]))
        if k <= d:
            pieces.append("(" * (opens_after[k - 1] - opens_after[k]))
    return decode_parens("".join(pieces))


@lru_cache(maxsize=None)
def _subtree_encodings(n: int, m: int, left_rooted: bool) -> tuple[str, ...]:
    """Encodings of father-rooted subtrees with the given father counts.

    ``left_rooted`` selects whether the subtree root occupies a type-1 or
    a type-2 slot; the root itself is counted in n or m accordingly.
    """
    if left_rooted:
        if n < 1:
            return ()
        budget_n, budget_m = n - 1, m
    else:
        if m < 1:
            return ()
        budget_n, budget_m = n, m - 1
    out = []
    for nl in range(budget_n + 1):
        for ml in range(budget_m + 1):
            nr, mr = budget_n - nl, budget_m - ml
            lefts = ("",) if (nl, ml) == (0, 0) else _subtree_encodings(nl, ml, True)
            rights = ("",) if (nr, mr) == (0, 0) else _subtree_encodings(nr, mr, False)
            for el in lefts:
                for er in rights:
                    out.append("(" + el + ")" + er)
    return tuple(sorted(out))


def enumerate_full_binary_trees(
    n: int, m: int, *, max_count: int = DEFAULT_ENUMERATION_CAP
) -> list[MultitypeTree]:
    """All full binary trees with n left fathers (root included) and m right fathers.

    Returned in lexicographic order of their parenthesis encodings; the
    count is narayana(n + m, m + 1).
    """
    if n < 1 or m < 0:
        raise ValueError(f"need n >= 1 and m >= 0, got (n={n}, m={m})")
    total = narayana(n + m, m + 1)
    if total > max_count:
        raise ResourceLimitError(
            f"(n={n}, m={m}) has {total} trees, above the cap of {max_count}"
        )
    encodings = _subtree_encodings(n, m, True)
    if len(encodings) != total:  # pragma: no cover - internal consistency
        raise ArithmeticError("tree enumeration disagrees with the Narayana count")
    return [decode_parens(s) for s in encodings]


def tree_to_records(tree: MultitypeTree) -> str:
    """One "address<TAB>type" line per vertex in depth-first order.

    Addresses render as dot-separated child indices; the root is the
    empty string.
    """
    lines = []
    for addr, t in zip(tree.addresses, tree.types):
        lines.append(f"{'.'.join(map(str, addr))}\t{t}")
    return "\n".join(lines) + "\n"


def tree_from_records(text: str) -> MultitypeTree:
    """Parse :func:`tree_to_records` output; validates the resulting tree."""
    nodes: list[tuple[Address, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        parts = raw.split("\t")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'address<TAB>type', got {raw!r}")
        addr_text, type_text = parts
        try:
            addr = tuple(int(x) for x in addr_text.split(".")) if addr_text else ()
            vtype = int(type_text)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad record {raw!r}") from exc
        nodes.append((addr, vtype))
    if not nodes:
        raise ValueError("no tree records found")
    tree = MultitypeTree.from_nodes(max(t for _, t in nodes), nodes)
    result = validate(tree)
    if not result:
        raise ValueError(f"invalid tree records: {result.problem}")
    return tree
