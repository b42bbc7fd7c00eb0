"""Exact combinatorics: Narayana numbers, decompositions, generating functions.

Reference values come from independent brute-force oracles built here
from first principles (balanced-string enumeration and raw cartesian
filtering), never from the code under test.
"""

import math
from functools import lru_cache
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gwtrees.combinatorics import (
    DEFAULT_ENUMERATION_CAP,
    Decomposition,
    Polynomial,
    binomial,
    enumerate_decompositions,
    gf_coefficients,
    narayana,
    weight_histogram,
)
from gwtrees.errors import ResourceLimitError

# Six hand-checked (top row, bottom row, weight) matrices for d = 2, c = 1,
# in the order the enumerator must produce them.
CATALOG_MATRICES = [
    ((0, 0), (0, 0), 0),
    ((1, 0), (0, 0), 1),
    ((1, 0), (1, 0), 2),
    ((1, 1), (0, 0), 2),
    ((1, 1), (1, 0), 3),
    ((1, 1), (1, 1), 4),
]


@lru_cache(maxsize=None)
def balanced_strings(pairs: int) -> tuple[str, ...]:
    """All balanced parenthesis strings with the given number of pairs."""
    if pairs == 0:
        return ("",)
    out = []
    for inner in range(pairs):
        for a in balanced_strings(inner):
            for b in balanced_strings(pairs - 1 - inner):
                out.append(f"({a}){b}")
    return tuple(out)


def brute_force_decompositions(d: int, c: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Filter the full cartesian grid down to valid 2 x d decompositions."""
    out = []
    for top in product(range(c + 1), repeat=d):
        if any(top[i] < top[i + 1] for i in range(d - 1)):
            continue
        for bottom in product(range(c + 1), repeat=d):
            if any(bottom[i] < bottom[i + 1] for i in range(d - 1)):
                continue
            if any(b > t for t, b in zip(top, bottom)):
                continue
            out.append((top, bottom))
    return out


class TestBinomial:
    @given(st.integers(0, 300), st.integers(0, 300))
    def test_matches_math_comb(self, n, k):
        assert binomial(n, k) == (math.comb(n, k) if k <= n else 0)

    def test_rejects_negative_arguments(self):
        with pytest.raises(ValueError):
            binomial(-1, 0)
        with pytest.raises(ValueError):
            binomial(3, -2)


class TestNarayana:
    def test_counts_nestings_of_balanced_strings(self):
        for n in range(1, 8):
            strings = balanced_strings(n)
            for k in range(1, n + 1):
                oracle = sum(1 for s in strings if s.count("()") == k)
                assert narayana(n, k) == oracle

    def test_pinned_row(self):
        assert [narayana(4, k) for k in range(1, 5)] == [1, 6, 6, 1]

    @given(st.integers(1, 80), st.data())
    def test_symmetry(self, n, data):
        k = data.draw(st.integers(1, n))
        assert narayana(n, k) == narayana(n, n + 1 - k)

    @given(st.integers(1, 80))
    def test_row_sums_to_catalan(self, n):
        assert sum(narayana(n, k) for k in range(1, n + 1)) == math.comb(2 * n, n) // (n + 1)

    def test_rejects_out_of_range(self):
        for n, k in [(0, 1), (3, 0), (3, 4), (-2, 1)]:
            with pytest.raises(ValueError):
                narayana(n, k)


class TestPolynomial:
    def test_geometric_and_one(self):
        assert Polynomial.one().coefficients == (1,)
        assert Polynomial.geometric(3).coefficients == (1, 1, 1, 1)

    def test_rejects_empty_and_trailing_zero(self):
        with pytest.raises(ValueError):
            Polynomial(())
        with pytest.raises(ValueError):
            Polynomial((1, 0))

    @given(
        st.lists(st.integers(-9, 9), min_size=1, max_size=6),
        st.lists(st.integers(-9, 9), min_size=1, max_size=6),
    )
    def test_product_quotient_roundtrip(self, a_coeffs, b_coeffs):
        a_coeffs[-1] = a_coeffs[-1] or 1
        b_coeffs[-1] = b_coeffs[-1] or 1
        a, b = Polynomial(tuple(a_coeffs)), Polynomial(tuple(b_coeffs))
        assert (a * b).exact_div(b) == a
        assert (a * b).exact_div(a) == b

    def test_inexact_division_raises(self):
        with pytest.raises(ArithmeticError):
            Polynomial((1, 1)).exact_div(Polynomial((1, 2)))
        with pytest.raises(ArithmeticError):
            Polynomial((0, 1, 1)).exact_div(Polynomial((1, 1, 1)))
        with pytest.raises(ArithmeticError):
            Polynomial((1,)).exact_div(Polynomial((1, 1)))


class TestGfCoefficients:
    def test_pinned_small_cases(self):
        assert gf_coefficients(2, 1) == [1, 1, 2, 1, 1]
        assert gf_coefficients(1, 1) == [1, 1, 1]
        assert gf_coefficients(0, 5) == [1]
        assert gf_coefficients(4, 0) == [1]

    def test_matches_brute_force_histogram(self):
        for d in range(4):
            for c in range(4):
                oracle = [0] * (2 * d * c + 1)
                for top, bottom in brute_force_decompositions(d, c):
                    oracle[sum(top) + sum(bottom)] += 1
                assert gf_coefficients(d, c) == oracle

    def test_shape_palindrome_and_total(self):
        for d in range(7):
            for c in range(7):
                coeffs = gf_coefficients(d, c)
                assert len(coeffs) == 2 * d * c + 1
                assert coeffs == coeffs[::-1]
                assert sum(coeffs) == narayana(c + d + 1, d + 1)

    def test_rejects_negative_dimensions(self):
        with pytest.raises(ValueError):
            gf_coefficients(-1, 2)
        with pytest.raises(ValueError):
            gf_coefficients(2, -1)


class TestDecomposition:
    def test_weight_and_text_format(self):
        dec = Decomposition(2, 1, (1, 1), (1, 0))
        assert dec.weight == 3
        assert dec.to_text() == "2 1\n1 1\n1 0\n"
        assert Decomposition.from_text(dec.to_text()) == dec

    def test_catalog_matrices_are_valid(self):
        for top, bottom, weight in CATALOG_MATRICES:
            assert Decomposition(2, 1, top, bottom).weight == weight

    def test_rejects_invalid_matrices(self):
        with pytest.raises(ValueError):
            Decomposition(2, 1, (1,), (0, 0))  # wrong row length
        with pytest.raises(ValueError):
            Decomposition(2, 1, (2, 0), (0, 0))  # entry above c
        with pytest.raises(ValueError):
            Decomposition(2, 1, (0, 1), (0, 0))  # increasing row
        with pytest.raises(ValueError):
            Decomposition(2, 1, (1, 0), (1, 1))  # bottom row increasing
        with pytest.raises(ValueError):
            Decomposition(2, 1, (0, 0), (1, 0))  # column dominance broken
        with pytest.raises(ValueError):
            Decomposition(-1, 1, (), ())

    def test_from_text_rejects_malformed_input(self):
        with pytest.raises(ValueError):
            Decomposition.from_text("2 1\n1 1\n")  # missing a row
        with pytest.raises(ValueError):
            Decomposition.from_text("x y\n1 1\n1 0\n")
        with pytest.raises(ValueError):
            Decomposition.from_text("2 1\na b\n1 0\n")

    def test_text_roundtrip_over_enumeration(self):
        for d in range(4):
            for c in range(3):
                for dec in enumerate_decompositions(d, c):
                    assert Decomposition.from_text(dec.to_text()) == dec


class TestEnumerateDecompositions:
    def test_catalog_order_and_content(self):
        got = [(dec.top, dec.bottom, dec.weight) for dec in enumerate_decompositions(2, 1)]
        assert got == CATALOG_MATRICES

    def test_matches_brute_force(self):
        for d in range(4):
            for c in range(4):
                got = [(dec.top, dec.bottom) for dec in enumerate_decompositions(d, c)]
                assert sorted(got) == sorted(brute_force_decompositions(d, c))
                assert len(got) == len(set(got))

    def test_count_is_narayana(self):
        for d in range(5):
            for c in range(5):
                assert len(enumerate_decompositions(d, c)) == narayana(c + d + 1, d + 1)

    def test_ascending_flattened_order(self):
        decs = enumerate_decompositions(3, 2)
        flat = [dec.top + dec.bottom for dec in decs]
        assert flat == sorted(flat)

    def test_cap_raises_before_enumerating(self):
        with pytest.raises(ResourceLimitError):
            enumerate_decompositions(9, 9, max_count=10)
        assert DEFAULT_ENUMERATION_CAP >= narayana(5 + 4 + 1, 5 + 1)

    def test_rejects_negative_dimensions(self):
        with pytest.raises(ValueError):
            enumerate_decompositions(-1, 1)


class TestWeightHistogram:
    def test_equals_generating_function(self):
        for d in range(4):
            for c in range(4):
                histogram = weight_histogram(enumerate_decompositions(d, c))
                assert histogram == gf_coefficients(d, c)

    def test_rejects_empty_and_mixed_shapes(self):
        with pytest.raises(ValueError):
            weight_histogram([])
        mixed = [Decomposition(1, 1, (0,), (0,)), Decomposition(1, 2, (0,), (0,))]
        with pytest.raises(ValueError):
            weight_histogram(mixed)
