"""Exact integer matrix normal forms over arbitrary-precision integers.

The Smith normal form here is the workhorse behind the Abelian-embedding
decision: the constraint lattice equals Z^S exactly when the decomposition
has full rank and all invariant factors equal 1. Entry growth during
elimination is accepted (desk-scale matrices); the pivot rule picks the
minimal-absolute-value nonzero entry, tie-broken by smallest (row, col)
lexicographically, so decompositions are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]  # row-major

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValidationError("matrix dimensions must be positive")
        if len(self.entries) != self.rows * self.cols:
            raise ValidationError("entry count does not match dimensions")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        r = len(rows)
        c = len(rows[0])
        if any(len(row) != c for row in rows):
            raise ValidationError("ragged rows")
        return cls(r, c, tuple(int(v) for row in rows for v in row))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    def entry(self, i: int, j: int) -> int:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_lists(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValidationError("dimension mismatch in matrix product")
        out = []
        ocols = [[other.entry(i, j) for i in range(other.rows)] for j in range(other.cols)]
        for i in range(self.rows):
            r = self.row(i)
            out.append([sum(a * b for a, b in zip(r, col)) for col in ocols])
        return IntMatrix.from_rows(out)

    def det(self) -> int:
        """Exact determinant via fraction-free Bareiss elimination."""
        if self.rows != self.cols:
            raise ValidationError("determinant of non-square matrix")
        n = self.rows
        m = self.to_lists()
        sign = 1
        prev = 1
        for t in range(n - 1):
            if m[t][t] == 0:
                for i in range(t + 1, n):
                    if m[i][t] != 0:
                        m[t], m[i] = m[i], m[t]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(t + 1, n):
                for j in range(t + 1, n):
                    m[i][j] = (m[i][j] * m[t][t] - m[i][t] * m[t][j]) // prev
                m[i][t] = 0
            prev = m[t][t]
        return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class SNFDecomposition:
    """U @ A @ V = D with unimodular U, V and divisor chain d1 | d2 | ...

    `divisors` lists the full diagonal of D (trailing zeros included, all
    nonnegative); `rank` counts the nonzero ones.
    """

    U: IntMatrix
    V: IntMatrix
    D: IntMatrix
    divisors: tuple[int, ...]
    rank: int


def _min_pivot(m, t, nrows, ncols):
    # Minimal |value| among nonzero entries of the trailing block; first hit
    # in (row, col) order wins ties.
    best = None
    pos = None
    for i in range(t, nrows):
        mi = m[i]
        for j in range(t, ncols):
            v = mi[j]
            if v != 0:
                a = -v if v < 0 else v
                if best is None or a < best:
                    best = a
                    pos = (i, j)
    return pos


def smith_normal_form(a: IntMatrix) -> SNFDecomposition:
    """Deterministic Smith normal form with unimodular certificates."""
    nr, nc = a.rows, a.cols
    m = a.to_lists()
    u = IntMatrix.identity(nr).to_lists()
    v = IntMatrix.identity(nc).to_lists()

    def row_sub(i, t, q):
        if q:
            mt, ut = m[t], u[t]
            m[i] = [x - q * y for x, y in zip(m[i], mt)]
            u[i] = [x - q * y for x, y in zip(u[i], ut)]

    def col_sub(j, t, q):
        if q:
            for r in m:
                r[j] -= q * r[t]
            for r in v:
                r[j] -= q * r[t]

    def swap_rows(i, t):
        if i != t:
            m[i], m[t] = m[t], m[i]
            u[i], u[t] = u[t], u[i]

    def swap_cols(j, t):
        if j != t:
            for r in m:
                r[j], r[t] = r[t], r[j]
            for r in v:
                r[j], r[t] = r[t], r[j]

    def negate_row(t):
        m[t] = [-x for x in m[t]]
        u[t] = [-x for x in u[t]]

    rank = 0
    for t in range(min(nr, nc)):
        pos = _min_pivot(m, t, nr, nc)
        if pos is None:
            break
        swap_rows(pos[0], t)
        swap_cols(pos[1], t)
        while True:
            # Clear column t, re-pivoting on the smallest remainder.
            while True:
                if m[t][t] < 0:
                    negate_row(t)
                dirty = False
                for i in range(t + 1, nr):
                    if m[i][t]:
                        row_sub(i, t, m[i][t] // m[t][t])
                        if m[i][t]:
                            swap_rows(i, t)
                            dirty = True
                if not dirty:
                    break
            # Clear row t; nonzero remainders become the new pivot.
            while True:
                if m[t][t] < 0:
                    negate_row(t)
                dirty = False
                for j in range(t + 1, nc):
                    if m[t][j]:
                        q = m[t][j] // m[t][t]
                        col_sub(j, t, q)
                        if m[t][j]:
                            swap_cols(j, t)
                            dirty = True
                if not dirty:
                    break
            if any(m[i][t] for i in range(t + 1, nr)):
                continue  # row clearing disturbed the column
            # Enforce divisibility of the trailing block by the pivot.
            fixed = True
            for i in range(t + 1, nr):
                bad = next((j for j in range(t + 1, nc) if m[i][j] % m[t][t]), None)
                if bad is not None:
                    row_sub(t, i, -1)  # add row i to row t, then re-clear
                    fixed = False
                    break
            if fixed:
                break
        if m[t][t] < 0:
            negate_row(t)
        rank = t + 1

    divisors = tuple(m[t][t] for t in range(min(nr, nc)))
    return SNFDecomposition(
        U=IntMatrix.from_rows(u),
        V=IntMatrix.from_rows(v),
        D=IntMatrix.from_rows(m),
        divisors=divisors,
        rank=rank,
    )


def lattice_is_full(generators: IntMatrix) -> bool:
    """True iff the row lattice of `generators` equals Z^cols."""
    snf = smith_normal_form(generators)
    return snf.rank == generators.cols and all(d == 1 for d in snf.divisors[:snf.rank])


def _normalize_vector(v: list[int]) -> tuple[int, ...]:
    g = 0
    for x in v:
        g = gcd(g, x)
    if g > 1:
        v = [x // g for x in v]
    first = next((x for x in v if x != 0), 0)
    if first < 0:
        v = [-x for x in v]
    return tuple(v)


def rational_kernel_vector(generators: IntMatrix) -> tuple[int, ...] | None:
    """Nonzero integer v with generators @ v = 0, or None at full column rank.

    Taken from the columns of V past the rank: A (V e_c) = U^-1 (D e_c) = 0.
    The result is gcd-normalized with positive leading entry.
    """
    snf = smith_normal_form(generators)
    if snf.rank >= generators.cols:
        return None
    c = snf.rank
    v = [snf.V.entry(i, c) for i in range(generators.cols)]
    return _normalize_vector(v)


def row_basis(rows: Sequence[Sequence[int]], cols: int) -> list[list[int]]:
    """Echelon basis of the integer row span (span-preserving reduction).

    Large row sets are reduced before any SNF with certificates is run;
    only elementary unimodular row operations are used, so the lattice is
    unchanged. Tries int64 numpy rows first and falls back to exact Python
    integers if entries threaten to overflow.
    """
    try:
        return _row_basis_numpy(rows, cols)
    except OverflowError:
        return _row_basis_python(rows, cols)


_INT64_GUARD = 2 ** 59


def _row_basis_numpy(rows, cols):
    basis: dict[int, np.ndarray] = {}
    for src in rows:
        r = np.asarray(src, dtype=np.int64)
        if r.shape != (cols,):
            raise ValidationError("row length mismatch")
        while True:
            nz = np.flatnonzero(r)
            if nz.size == 0:
                break
            l = int(nz[0])
            if l not in basis:
                if r[l] < 0:
                    r = -r
                basis[l] = r
                break
            b = basis[l]
            rl, bl = int(r[l]), int(b[l])
            bmax = int(np.abs(b).max())
            rmax = int(np.abs(r).max())
            if rl % bl == 0:
                q = rl // bl
                # bound the combination before numpy touches it: int64 wraps silently
                if rmax + abs(q) * bmax > _INT64_GUARD:
                    raise OverflowError
                r = r - q * b
            else:
                g, s, t = _ext_gcd(bl, rl)
                qb, qr = rl // g, bl // g
                bound = max((abs(s) + abs(t)), (abs(qb) + abs(qr))) * max(bmax, rmax)
                if bound > _INT64_GUARD:
                    raise OverflowError
                new = s * b + t * r
                basis[l] = new
                r = qb * b - qr * r
    return [[int(x) for x in basis[l]] for l in sorted(basis)]


def _row_basis_python(rows, cols):
    basis: dict[int, list[int]] = {}
    for src in rows:
        r = [int(x) for x in src]
        if len(r) != cols:
            raise ValidationError("row length mismatch")
        while True:
            l = next((j for j, x in enumerate(r) if x), None)
            if l is None:
                break
            if l not in basis:
                if r[l] < 0:
                    r = [-x for x in r]
                basis[l] = r
                break
            b = basis[l]
            rl, bl = r[l], b[l]
            if rl % bl == 0:
                q = rl // bl
                r = [x - q * y for x, y in zip(r, b)]
            else:
                g, s, t = _ext_gcd(bl, rl)
                basis[l] = [s * x + t * y for x, y in zip(b, r)]
                qb, qr = rl // g, bl // g
                r = [qb * x - qr * y for x, y in zip(b, r)]
    return [basis[l] for l in sorted(basis)]


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, s, t) with s*a + t*b = g = gcd(a, b), g > 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t
