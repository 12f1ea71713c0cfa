import random
from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from embedlens.errors import ValidationError
from embedlens.intlattice import (
    IntMatrix,
    lattice_is_full,
    rational_kernel_vector,
    row_basis,
    smith_normal_form,
)


def check_certificates(a: IntMatrix):
    snf = smith_normal_form(a)
    assert (snf.U @ a @ snf.V).entries == snf.D.entries
    assert abs(snf.U.det()) == 1
    assert abs(snf.V.det()) == 1
    divs = snf.divisors
    assert all(d >= 0 for d in divs)
    nz = [d for d in divs if d != 0]
    assert len(nz) == snf.rank
    assert divs[:snf.rank] == tuple(nz)  # trailing zeros only
    for d1, d2 in zip(nz, nz[1:]):
        assert d2 % d1 == 0
    # D is diagonal
    for i in range(snf.D.rows):
        for j in range(snf.D.cols):
            if i != j:
                assert snf.D.entry(i, j) == 0
    return snf


def test_identity_already_snf():
    snf = check_certificates(IntMatrix.identity(2))
    assert snf.divisors == (1, 1)


def test_diagonal_already_snf():
    snf = check_certificates(IntMatrix.from_rows([[2, 0], [0, 4]]))
    assert snf.divisors == (2, 4)


def test_2x2_divisors_from_det_and_gcd():
    # gcd of entries 1, determinant 3, so the chain is (1, 3)
    snf = check_certificates(IntMatrix.from_rows([[2, 1], [1, 2]]))
    assert snf.divisors == (1, 3)


def test_snf_deterministic():
    a = IntMatrix.from_rows([[6, 4, 2], [2, 8, 4], [0, 2, 6]])
    s1 = smith_normal_form(a)
    s2 = smith_normal_form(a)
    assert s1.U.entries == s2.U.entries
    assert s1.V.entries == s2.V.entries
    assert s1.divisors == s2.divisors


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_certificates_hold_for_any_matrix(r, c, data):
    entries = data.draw(st.lists(st.integers(-9, 9), min_size=r * c, max_size=r * c))
    check_certificates(IntMatrix(r, c, tuple(entries)))


def test_random_certificates_small():
    rng = random.Random(2024)
    for _ in range(120):
        r = rng.randrange(1, 6)
        c = rng.randrange(1, 6)
        a = IntMatrix.from_rows([[rng.randrange(-9, 10) for _ in range(c)] for _ in range(r)])
        check_certificates(a)


def minor_gcd(a: IntMatrix, r: int) -> int:
    from math import gcd

    g = 0
    for rows in combinations(range(a.rows), r):
        for cols in combinations(range(a.cols), r):
            sub = IntMatrix.from_rows([[a.entry(i, j) for j in cols] for i in rows])
            g = gcd(g, sub.det())
    return g


def test_divisor_products_match_minor_gcds():
    rng = random.Random(99)
    for _ in range(40):
        n = rng.randrange(1, 5)
        m = rng.randrange(1, 5)
        a = IntMatrix.from_rows([[rng.randrange(-4, 5) for _ in range(m)] for _ in range(n)])
        snf = smith_normal_form(a)
        prod = 1
        for r, d in enumerate(snf.divisors[:snf.rank], start=1):
            prod *= d
            assert prod == minor_gcd(a, r)


def test_lattice_is_full_basics():
    assert lattice_is_full(IntMatrix.from_rows([[1, 0], [0, 1]]))
    assert not lattice_is_full(IntMatrix.from_rows([[2, 0], [0, 2]]))
    assert not lattice_is_full(IntMatrix.from_rows([[1, 1]]))


def brute_force_full(gens: list[list[int]], cols: int, bound: int) -> bool:
    # Every standard basis vector must be an integer combination of the
    # generators with coefficients in [-bound, bound]. Sound in one direction
    # only; the seeded instances below keep entries small enough (Cramer-type
    # coefficient bounds) that the bound never truncates a true witness.
    targets = [tuple(1 if i == j else 0 for j in range(cols)) for i in range(cols)]
    found = set()
    for coeffs in product(range(-bound, bound + 1), repeat=len(gens)):
        vec = tuple(sum(c * g[j] for c, g in zip(coeffs, gens)) for j in range(cols))
        if vec in targets:
            found.add(vec)
            if len(found) == cols:
                return True
    return False


def test_lattice_is_full_agrees_with_bounded_oracle():
    rng = random.Random(31337)
    for _ in range(60):
        cols = rng.randrange(1, 4)
        nrows = rng.randrange(1, 4)
        gens = [[rng.randrange(-2, 3) for _ in range(cols)] for _ in range(nrows)]
        got = lattice_is_full(IntMatrix.from_rows(gens))
        assert got == brute_force_full(gens, cols, bound=10)


def test_rational_kernel_vector_simple():
    a = IntMatrix.from_rows([[1, 1]])
    v = rational_kernel_vector(a)
    assert v is not None and any(v)
    assert sum(x * y for x, y in zip(a.row(0), v)) == 0


def test_rational_kernel_vector_full_rank_none():
    assert rational_kernel_vector(IntMatrix.from_rows([[2, 1], [1, 1]])) is None


def test_rational_kernel_vector_zero_matrix():
    v = rational_kernel_vector(IntMatrix.from_rows([[0, 0]]))
    assert v is not None and any(v)


def test_rational_kernel_vector_random():
    rng = random.Random(4)
    for _ in range(50):
        cols = rng.randrange(2, 6)
        nrows = rng.randrange(1, cols)  # rank-deficient by construction
        a = IntMatrix.from_rows([[rng.randrange(-5, 6) for _ in range(cols)] for _ in range(nrows)])
        v = rational_kernel_vector(a)
        assert v is not None and any(v)
        for i in range(nrows):
            assert sum(x * y for x, y in zip(a.row(i), v)) == 0


def test_row_basis_preserves_lattice():
    rng = random.Random(11)
    for _ in range(60):
        cols = rng.randrange(1, 6)
        nrows = rng.randrange(1, 9)
        rows = [[rng.randrange(-6, 7) for _ in range(cols)] for _ in range(nrows)]
        basis = row_basis(rows, cols)
        a = smith_normal_form(IntMatrix.from_rows(rows))
        if basis:
            b = smith_normal_form(IntMatrix.from_rows(basis))
            assert a.divisors[:a.rank] == b.divisors[:b.rank]
            assert a.rank == b.rank
        else:
            assert a.rank == 0


def test_invariant_factors_match_sympy():
    sympy = pytest.importorskip("sympy")
    from sympy.matrices.normalforms import invariant_factors

    rng = random.Random(606)
    for _ in range(60):
        r = rng.randrange(1, 7)
        c = rng.randrange(1, 7)
        rows = [[rng.randrange(-9, 10) for _ in range(c)] for _ in range(r)]
        snf = smith_normal_form(IntMatrix.from_rows(rows))
        reference = [int(f) for f in invariant_factors(sympy.Matrix(rows)) if int(f) != 0]
        assert list(snf.divisors[:snf.rank]) == reference


def test_bareiss_det_matches_numpy_sign_pattern():
    a = IntMatrix.from_rows([[3, 1], [4, 2]])
    assert a.det() == 2
    assert IntMatrix.from_rows([[0, 1], [1, 0]]).det() == -1
    with pytest.raises(ValidationError):
        IntMatrix.from_rows([[1, 2]]).det()
