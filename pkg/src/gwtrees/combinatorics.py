"""Exact combinatorics for counting binary trees by father type.

Narayana numbers, two-row bounded decompositions (2 x d matrices with
entries in {0..c} that decrease weakly along rows and columns), and the
closed-form generating function of their weight statistic.  Everything
here is exact integer arithmetic: the generating function is produced by
multiplying geometric factors and performing one polynomial long
division, which must leave a zero remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import ResourceLimitError

DEFAULT_ENUMERATION_CAP = 1_000_000


def binomial(n: int, k: int) -> int:
    """Binomial coefficient C(n, k), defined as 0 when k exceeds n."""
    if n < 0 or k < 0:
        raise ValueError(f"binomial needs nonnegative arguments, got ({n}, {k})")
    if k > n:
        return 0
    return math.comb(n, k)


def narayana(n: int, k: int) -> int:
    """Narayana number N(n, k) = C(n, k) * C(n, k-1) / n.

    Counts, among other classical families, the balanced strings of n
    parenthesis pairs that contain exactly k adjacent "()" pairs.
    """
    if n < 1 or k < 1 or k > n:
        raise ValueError(f"narayana requires 1 <= k <= n, got (n={n}, k={k})")
    value, rem = divmod(binomial(n, k) * binomial(n, k - 1), n)
    if rem:  # pragma: no cover - exact by a classical identity
        raise ArithmeticError(f"narayana({n}, {k}) division left a remainder")
    return value


@dataclass(frozen=True)
class Polynomial:
    """Dense integer polynomial; coefficients in ascending degree order."""

    coefficients: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))
        if not self.coefficients:
            raise ValueError("a polynomial needs at least one coefficient")
        if len(self.coefficients) > 1 and self.coefficients[-1] == 0:
            raise ValueError("the trailing coefficient must be nonzero")

    @classmethod
    def one(cls) -> "Polynomial":
        return cls((1,))

    @classmethod
    def geometric(cls, k: int) -> "Polynomial":
        """1 + x + ... + x**k."""
        if k < 0:
            raise ValueError("geometric polynomial needs k >= 0")
        return cls((1,) * (k + 1))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def coefficient_sum(self) -> int:
        """Value at x = 1."""
        return sum(self.coefficients)

    def is_palindromic(self) -> bool:
        return self.coefficients == self.coefficients[::-1]

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coefficients, other.coefficients
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return Polynomial(tuple(out))

    def exact_div(self, divisor: "Polynomial") -> "Polynomial":
        """Long division over the integers; raises if any remainder is left."""
        a = list(self.coefficients)
        b = divisor.coefficients
        if len(a) < len(b):
            raise ArithmeticError("dividend degree is smaller than divisor degree")
        lead = b[-1]
        quotient = [0] * (len(a) - len(b) + 1)
        for i in range(len(quotient) - 1, -1, -1):
            coeff, rem = divmod(a[i + len(b) - 1], lead)
            if rem:
                raise ArithmeticError("polynomial division left a remainder")
            quotient[i] = coeff
            if coeff:
                for j, bj in enumerate(b):
                    a[i + j] -= coeff * bj
        if any(a[: len(b) - 1]):
            raise ArithmeticError("polynomial division left a remainder")
        return Polynomial(tuple(quotient))


def gf_coefficients(d: int, c: int) -> list[int]:
    """Coefficients of the weight generating function over 2 x d
    decompositions bounded by c, in ascending order of weight.

    Product of geometric factors (1 + ... + x**(c+i)) for i in 1..d and
    i in 0..d-1, divided exactly by the same factors with c = 0.  The
    list has length 2*d*c + 1 and its entries sum to
    narayana(c + d + 1, d + 1).
    """
    if d < 0 or c < 0:
        raise ValueError(f"d and c must be nonnegative, got ({d}, {c})")
    numerator = Polynomial.one()
    denominator = Polynomial.one()
    for i in range(1, d + 1):
        numerator *= Polynomial.geometric(c + i)
        denominator *= Polynomial.geometric(i)
    for i in range(d):
        numerator *= Polynomial.geometric(c + i)
        denominator *= Polynomial.geometric(i)
    return list(numerator.exact_div(denominator).coefficients)


@dataclass(frozen=True)
class Decomposition:
    """A 2 x d matrix with entries in {0..c}, weakly decreasing rows and columns."""

    d: int
    c: int
    top: tuple[int, ...]
    bottom: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.d < 0 or self.c < 0:
            raise ValueError(f"d and c must be nonnegative, got ({self.d}, {self.c})")
        object.__setattr__(self, "top", tuple(int(x) for x in self.top))
        object.__setattr__(self, "bottom", tuple(int(x) for x in self.bottom))
        if len(self.top) != self.d or len(self.bottom) != self.d:
            raise ValueError(f"both rows must have length d={self.d}")
        for label, row in (("top", self.top), ("bottom", self.bottom)):
            for entry in row:
                if not 0 <= entry <= self.c:
                    raise ValueError(f"{label} row entry {entry} outside 0..{self.c}")
            if any(row[i] < row[i + 1] for i in range(len(row) - 1)):
                raise ValueError(f"{label} row must be weakly decreasing")
        if any(t < b for t, b in zip(self.top, self.bottom)):
            raise ValueError("columns must be weakly decreasing (top >= bottom)")

    @property
    def weight(self) -> int:
        return sum(self.top) + sum(self.bottom)

    def to_text(self) -> str:
        """Header line "d c", then the two rows as space-separated integers."""
        return "\n".join(
            [
                f"{self.d} {self.c}",
                " ".join(map(str, self.top)),
                " ".join(map(str, self.bottom)),
            ]
        ) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Decomposition":
        lines = text.splitlines()
        if len(lines) < 3:
            raise ValueError("decomposition text needs a header line and two rows")
        try:
            d, c = (int(x) for x in lines[0].split())
        except ValueError as exc:
            raise ValueError(f"bad decomposition header {lines[0]!r}") from exc
        rows = []
        for raw in lines[1:3]:
            try:
                rows.append(tuple(int(x) for x in raw.split()))
            except ValueError as exc:
                raise ValueError(f"bad decomposition row {raw!r}") from exc
        return cls(d, c, rows[0], rows[1])


def _weakly_decreasing_rows(
    limits: Sequence[int], start_max: int
) -> Iterator[tuple[int, ...]]:
    """All rows with row[j] <= min(row[j-1], limits[j]), ascending lexicographically."""
    row: list[int] = []

    def extend(j: int, maximum: int) -> Iterator[tuple[int, ...]]:
        if j == len(limits):
            yield tuple(row)
            return
        for v in range(min(maximum, limits[j]) + 1):
            row.append(v)
            yield from extend(j + 1, v)
            row.pop()

    yield from extend(0, start_max)


def enumerate_decompositions(
    d: int, c: int, *, max_count: int = DEFAULT_ENUMERATION_CAP
) -> list[Decomposition]:
    """All decompositions for (d, c), ascending in the flattened (top, bottom) order.

    The count is narayana(c + d + 1, d + 1); a count above ``max_count``
    raises ResourceLimitError before any work is done.
    """
    if d < 0 or c < 0:
        raise ValueError(f"d and c must be nonnegative, got ({d}, {c})")
    total = narayana(c + d + 1, d + 1)
    if total > max_count:
        raise ResourceLimitError(
            f"(d={d}, c={c}) has {total} decompositions, above the cap of {max_count}"
        )
    out = []
    for top in _weakly_decreasing_rows([c] * d, c):
        for bottom in _weakly_decreasing_rows(top, c):
            out.append(Decomposition(d, c, top, bottom))
    return out


def weight_histogram(decompositions: Sequence[Decomposition]) -> list[int]:
    """Histogram of weights 0..2*d*c over decompositions sharing one (d, c)."""
    if not decompositions:
        raise ValueError("cannot infer (d, c) from an empty collection")
    d, c = decompositions[0].d, decompositions[0].c
    counts = [0] * (2 * d * c + 1)
    for dec in decompositions:
        if (dec.d, dec.c) != (d, c):
            raise ValueError(
                f"mixed shapes: expected (d={d}, c={c}), got (d={dec.d}, c={dec.c})"
            )
        counts[dec.weight] += 1
    return counts
