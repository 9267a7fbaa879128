from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extcat import linalg


def int_matrix(max_dim=4, lo=-6, hi=6):
    return st.integers(1, max_dim).flatmap(
        lambda r: st.integers(1, max_dim).flatmap(
            lambda c: st.lists(
                st.lists(st.integers(lo, hi), min_size=c, max_size=c),
                min_size=r,
                max_size=r,
            )
        )
    )


def det_fraction(mat):
    n = len(mat)
    a = [[Fraction(x) for x in row] for row in mat]
    det = Fraction(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if a[i][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        inv = a[col][col]
        for i in range(col + 1, n):
            f = a[i][col] / inv
            a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return det


@pytest.mark.parametrize("p", [2, 3, 5])
def test_rref_rank_nullspace(p):
    mat = np.array([[1, 2, 3], [2, 4, 6], [0, 1, 1]])
    r = linalg.rank(mat, p)
    ns = linalg.nullspace(mat, p)
    assert r + ns.shape[0] == 3
    for v in ns:
        assert not np.any((mat @ v) % p)


@pytest.mark.parametrize("p", [2, 3])
def test_solve_mod_p(p):
    mat = np.array([[1, 1], [0, 1]])
    rhs = np.array([1, 1])
    x = linalg.solve(mat, rhs, p)
    assert x is not None
    assert not np.any((mat @ x - rhs) % p)
    assert linalg.solve(np.array([[1, 1], [1, 1]]), np.array([1, 0]), p) is None


@settings(max_examples=60, deadline=None)
@given(int_matrix())
def test_smith_normal_form_properties(mat):
    d, u, v = linalg.smith_normal_form(mat)
    a = np.array(mat, dtype=object)
    un = np.array(u, dtype=object)
    vn = np.array(v, dtype=object)
    dn = np.array(d, dtype=object)
    assert np.array_equal(un @ a @ vn, dn)
    # diagonal, divisibility chain, nonnegative pivots
    rows, cols = dn.shape
    diag = [dn[i][i] for i in range(min(rows, cols))]
    for i in range(rows):
        for j in range(cols):
            if i != j:
                assert dn[i][j] == 0
    nz = [x for x in diag if x != 0]
    for i in range(len(nz) - 1):
        assert nz[i + 1] % nz[i] == 0
        assert nz[i] > 0
    # transforms unimodular
    assert abs(det_fraction(u)) == 1
    assert abs(det_fraction(v)) == 1


def test_solve_rational_exact():
    sol = linalg.solve_rational([[1, 0, 0], [0, 1, 0], [1, 1, 1]], [1, 1, 2])
    assert sol == [Fraction(1), Fraction(1), Fraction(0)]
    with pytest.raises(ValueError):
        linalg.solve_rational([[1, 1], [1, 1]], [1, 0])


def test_invariant_factors():
    assert linalg.invariant_factors([[2, 0], [0, 4]]) == [2, 4]
    assert linalg.invariant_factors([[1, 0], [0, 1]]) == [1, 1]
