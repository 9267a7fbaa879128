"""Exact linear algebra: Gaussian elimination over F_p, rational solving,
and integer Smith normal form with transformation matrices.

All routines are deterministic: pivots are chosen left-to-right, rows
top-to-bottom, so repeated runs (and different thread counts upstream)
produce identical output.
"""

from fractions import Fraction

import numpy as np


def _as_mod_array(mat, p):
    a = np.array(mat, dtype=np.int64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    return np.mod(a, p)


def rref(mat, p):
    """Reduced row echelon form over F_p.  Returns (R, pivot_columns)."""
    a = _as_mod_array(mat, p)
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        pivot_row = None
        for i in range(r, rows):
            if a[i, c] % p:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        if pivot_row != r:
            a[[r, pivot_row]] = a[[pivot_row, r]]
        inv = pow(int(a[r, c]), p - 2, p) if p > 2 else int(a[r, c])
        a[r] = np.mod(a[r] * inv, p)
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] = np.mod(a[i] - a[i, c] * a[r], p)
        pivots.append(c)
        r += 1
    return a, pivots


def rank(mat, p):
    a = np.atleast_2d(np.array(mat, dtype=np.int64))
    if a.size == 0 or a.shape[0] == 0 or a.shape[1] == 0:
        return 0
    return len(rref(a, p)[1])


def nullspace(mat, p):
    """Canonical basis of the right kernel over F_p (one row per vector)."""
    a = np.atleast_2d(np.array(mat, dtype=np.int64))
    rows, cols = a.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if rows == 0:
        return np.eye(cols, dtype=np.int64)
    r, pivots = rref(a, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, fc in enumerate(free):
        basis[k, fc] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = (-r[i, fc]) % p
    return basis


def solve(mat, rhs, p):
    """One solution x of mat @ x = rhs over F_p, or None."""
    a = np.atleast_2d(np.array(mat, dtype=np.int64))
    b = np.array(rhs, dtype=np.int64).reshape(-1)
    rows, cols = a.shape
    aug = np.concatenate([a, b.reshape(-1, 1)], axis=1)
    r, pivots = rref(aug, p)
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = r[i, cols]
    return x


def row_space_contains(space_rows, vec, p):
    """Whether vec lies in the F_p row space of space_rows."""
    space = np.atleast_2d(np.array(space_rows, dtype=np.int64))
    v = np.array(vec, dtype=np.int64).reshape(1, -1)
    if space.shape[0] == 0:
        return not np.any(v % p)
    return rank(space, p) == rank(np.concatenate([space, v]), p)


def quotient_basis(sub_rows, all_rows, p):
    """Rows of all_rows forming a basis of span(all)/span(sub), greedily."""
    chosen = []
    current = (
        np.atleast_2d(np.array(sub_rows, dtype=np.int64))
        if len(sub_rows)
        else np.zeros((0, np.atleast_2d(all_rows).shape[1]), dtype=np.int64)
    )
    base_rank = rank(current, p) if current.shape[0] else 0
    for i, row in enumerate(np.atleast_2d(np.array(all_rows, dtype=np.int64))):
        cand = np.concatenate([current, row.reshape(1, -1)])
        if rank(cand, p) > base_rank:
            current = cand
            base_rank += 1
            chosen.append(i)
    return chosen


def solve_rational(mat, rhs):
    """Exact solution of a square integer system via Fraction elimination.

    Raises ValueError when the matrix is singular.
    """
    n = len(mat)
    a = [[Fraction(mat[i][j]) for j in range(n)] + [Fraction(rhs[i])] for i in range(n)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if a[i][col] != 0), None)
        if pivot is None:
            raise ValueError("singular matrix")
        a[col], a[pivot] = a[pivot], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return [a[i][n] for i in range(n)]


def smith_normal_form(mat):
    """Smith normal form of an integer matrix.

    Returns (D, U, V) with U @ mat @ V = D, U and V unimodular, and the
    diagonal of D satisfying d_1 | d_2 | ... .  Plain-python integers are
    used throughout, so there is no overflow.
    """
    a = [list(map(int, row)) for row in mat]
    m = len(a)
    n = len(a[0]) if m else 0
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, q):
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    while t < min(m, n):
        # find a nonzero pivot in the remaining block
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] != 0:
                    if pivot is None or abs(a[i][j]) < abs(a[pivot[0]][pivot[1]]):
                        pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        while True:
            dirty = False
            for i in range(t + 1, m):
                if a[i][t]:
                    q = -(a[i][t] // a[t][t])
                    add_row(t, i, q)
                    if a[i][t]:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, n):
                if a[t][j]:
                    q = -(a[t][j] // a[t][t])
                    add_col(t, j, q)
                    if a[t][j]:
                        swap_cols(t, j)
                        dirty = True
            if not dirty:
                break
        # enforce divisibility d_t | a[i][j] for the rest of the block
        recheck = False
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if a[i][j] % a[t][t]:
                    add_row(i, t, 1)
                    recheck = True
                    break
            if recheck:
                break
        if recheck:
            continue
        if a[t][t] < 0:
            negate_row(t)
        t += 1
    return a, u, v


def invariant_factors(mat):
    """Nonzero diagonal entries of the Smith normal form."""
    d, _, _ = smith_normal_form(mat)
    out = []
    for i in range(min(len(d), len(d[0]) if d else 0)):
        if d[i][i]:
            out.append(abs(d[i][i]))
    return out
