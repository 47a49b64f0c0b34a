"""Exact integer linear algebra for exponent vectors.

Everything here runs on arbitrary-precision Python ints; no floating point.
Lattices are row lattices: a list of exponent vectors spans the subgroup of
Z^n generated by them.  The two workhorses are Smith normal form (with the
left/right transforms tracked) and the index of a sublattice, computed from
the invariant factors of the coordinate matrix of the sublattice generators
in a basis of the ambient lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

from .errors import NotASublattice

ExpVec = tuple[int, ...]


def apply_sub(vec: Sequence[int], sub: Sequence[Sequence[int]]) -> ExpVec:
    """Transform an exponent vector by a substitution matrix (row vector
    times matrix): entry j of the result is sum_i vec[i] * sub[i][j]."""
    n = len(sub[0])
    return tuple(sum(vec[i] * sub[i][j] for i in range(len(vec))) for j in range(n))


def mat_mul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    return tuple(apply_sub(row, b) for row in a)


@dataclass(frozen=True)
class SnfResult:
    """U @ M @ V == D with U, V unimodular and D diagonal, each diagonal
    entry nonnegative and dividing the next."""

    d: tuple[tuple[int, ...], ...]
    u: tuple[tuple[int, ...], ...]
    v: tuple[tuple[int, ...], ...]
    v_inv: tuple[tuple[int, ...], ...]

    @property
    def diagonal(self) -> tuple[int, ...]:
        n = min(len(self.d), len(self.d[0]) if self.d else 0)
        return tuple(self.d[i][i] for i in range(n))

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        return tuple(x for x in self.diagonal if x != 0)

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)


def smith_normal_form(m: Sequence[Sequence[int]]) -> SnfResult:
    """Smith normal form of an integer matrix, with transforms tracked.

    Total on nonempty integer matrices of any shape.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    if rows == 0 or cols == 0:
        raise ValueError("empty matrix")
    a = [[int(x) for x in row] for row in m]
    for row in a:
        if len(row) != cols:
            raise ValueError("ragged matrix")
    u = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    v = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]
    v_inv = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]
        v_inv[i], v_inv[j] = v_inv[j], v_inv[i]

    def add_row(src, dst, k):
        # row[dst] += k * row[src]
        a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + k * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, k):
        # col[dst] += k * col[src]; v_inv takes the inverse op on rows.
        for row in a:
            row[dst] += k * row[src]
        for row in v:
            row[dst] += k * row[src]
        v_inv[src] = [x - k * y for x, y in zip(v_inv[src], v_inv[dst])]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    n = min(rows, cols)
    t = 0
    while t < n:
        pivot = None
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < best):
                    best = abs(a[i][j])
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        while True:
            # Clear column t, then row t; repeat until both are clean.
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t] != 0:
                    add_row(t, i, -(a[i][t] // a[t][t]))
                    if a[i][t] != 0:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if a[t][j] != 0:
                    add_col(t, j, -(a[t][j] // a[t][t]))
                    if a[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
            if not dirty:
                break
        if a[t][t] < 0:
            negate_row(t)
        # Divisibility: a pivot failing to divide a trailing entry absorbs
        # that row and the step restarts.
        offender = None
        for i in range(t + 1, rows):
            if any(a[i][j] % a[t][t] != 0 for j in range(t + 1, cols)):
                offender = i
                break
        if offender is not None:
            add_row(offender, t, 1)
            continue
        t += 1
    for s in range(n):
        if a[s][s] < 0:
            negate_row(s)
    return SnfResult(
        d=tuple(tuple(row) for row in a),
        u=tuple(tuple(row) for row in u),
        v=tuple(tuple(row) for row in v),
        v_inv=tuple(tuple(row) for row in v_inv),
    )


def rank_of(vectors: Sequence[Sequence[int]]) -> int:
    """Rank over the integers of the matrix whose rows are the vectors."""
    vecs = [list(v) for v in vectors]
    if not vecs:
        return 0
    if all(all(x == 0 for x in row) for row in vecs):
        return 0
    return smith_normal_form(vecs).rank


def det2(m: Sequence[Sequence[int]]) -> int:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def det3(m: Sequence[Sequence[int]]) -> int:
    """Determinant of a 3x3 integer matrix by cofactor expansion."""
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def det(m: Sequence[Sequence[int]]) -> int:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return det2(m)
    if n == 3:
        return det3(m)
    raise ValueError("det supports sizes 1..3")


def is_unimodular(m: Sequence[Sequence[int]]) -> bool:
    return len(m) == len(m[0]) and det(m) in (1, -1)


def row_basis(gens: Sequence[Sequence[int]]) -> list[list[int]]:
    """A basis (as rows) of the lattice spanned by the generators, read off
    from D @ V^{-1} in the Smith decomposition of the generator matrix."""
    snf = smith_normal_form([list(g) for g in gens])
    basis = []
    for i, d in enumerate(snf.diagonal):
        if d != 0:
            basis.append([d * x for x in snf.v_inv[i]])
    return basis


def _solve_exact(basis: list[list[int]], target: Sequence[int]) -> list[Fraction] | None:
    """Solve x @ basis == target over Q; None when inconsistent."""
    r = len(basis)
    n = len(basis[0])
    aug = [[Fraction(basis[i][j]) for i in range(r)] + [Fraction(target[j])] for j in range(n)]
    pivots = []
    row = 0
    for col in range(r):
        sel = next((i for i in range(row, n) if aug[i][col] != 0), None)
        if sel is None:
            continue
        aug[row], aug[sel] = aug[sel], aug[row]
        pv = aug[row][col]
        aug[row] = [x / pv for x in aug[row]]
        for i in range(n):
            if i != row and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[row])]
        pivots.append(col)
        row += 1
    for i in range(row, n):
        if aug[i][r] != 0:
            return None
    x = [Fraction(0)] * r
    for i, col in enumerate(pivots):
        x[col] = aug[i][r]
    return x


def lattice_index(h_gens: Sequence[Sequence[int]], a_gens: Sequence[Sequence[int]]) -> int | None:
    """Order of the quotient (lattice of h_gens)/(lattice of a_gens).

    Returns None when the quotient is infinite (the ranks differ).  Raises
    NotASublattice when some generator of A is not an integer combination
    of the generators of H.
    """
    gens = [list(g) for g in h_gens]
    if not gens or all(all(x == 0 for x in g) for g in gens):
        if any(any(x != 0 for x in a) for a in a_gens):
            raise NotASublattice("ambient lattice is zero")
        return 1
    h_basis = row_basis(gens)
    coords = []
    for a in a_gens:
        x = _solve_exact(h_basis, a)
        if x is None:
            raise NotASublattice(f"{tuple(a)} is not in the rational span")
        if any(c.denominator != 1 for c in x):
            raise NotASublattice(f"{tuple(a)} is not an integer combination")
        coords.append([int(c) for c in x])
    r = len(h_basis)
    if not coords or all(all(x == 0 for x in c) for c in coords):
        return None if r > 0 else 1
    factors = smith_normal_form(coords).invariant_factors
    if len(factors) < r:
        return None
    idx = 1
    for f in factors:
        idx *= f
    return idx


def content(vec: Sequence[int]) -> int:
    """gcd of the entries (0 for the zero vector)."""
    g = 0
    for x in vec:
        g = gcd(g, abs(x))
    return g
