"""Independent oracles used by the tests only.

The interval hom/ext dimension formula is combinatorial and shares no code
with the chain-map engine; the endomorphism-idempotent splitter decomposes
small quiver representations by brute force.
"""

import itertools

import numpy as np

from extcat import linalg
from extcat.quiver import QuiverRep


def interval_hom_formula(src, dst):
    """dim Hom of shifted intervals (shift, a, b) -> (shift, c, d)."""
    (s, a, b), (t, c, d) = src, dst
    k = t - s
    if k == 0:
        return 1 if c <= a <= d <= b else 0
    if k == 1:
        return 1 if a + 1 <= c <= b + 1 <= d else 0
    return 0


def interval_ext_formula(c_iv, a_iv):
    """dim E(C, A) = dim Hom(C, A[1])."""
    (s, a, b) = a_iv
    return interval_hom_formula(c_iv, (s + 1, a, b))


def endomorphism_basis(rep: QuiverRep):
    """Basis of End(rep) as tuples of per-vertex matrices."""
    p = rep.p
    shapes = [(d, d) for d in rep.dims]
    sizes = [r * c for r, c in shapes]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = int(offsets[-1])
    rows = []
    for v in range(rep.n - 1):
        m = rep.maps[v]
        rv, cv = rep.dims[v + 1], rep.dims[v]
        # f_{v+1} M_v - M_v f_v = 0, entrywise
        for i in range(rv):
            for j in range(cv):
                row = np.zeros(total, dtype=np.int64)
                for k in range(rv):
                    row[offsets[v + 1] + i * rv + k] += m[k, j]
                for k in range(cv):
                    row[offsets[v] + k * cv + j] -= m[i, k]
                rows.append(row)
    if rows:
        basis_vecs = linalg.nullspace(np.array(rows), p)
    else:
        basis_vecs = np.eye(total, dtype=np.int64)

    def unflatten(vec):
        mats = []
        for v in range(rep.n):
            d = rep.dims[v]
            block = vec[offsets[v] : offsets[v] + d * d].reshape(d, d)
            mats.append(np.mod(block, p))
        return mats

    return [unflatten(v) for v in basis_vecs]


def _is_idempotent(mats, rep):
    return all(
        np.array_equal(np.mod(m @ m, rep.p), np.mod(m, rep.p)) for m in mats
    )


def _split_along(rep, mats):
    """V = im(e) (+) ker(e) for an idempotent e, as two representations."""
    p = rep.p
    pieces = []
    for part in ("im", "ker"):
        bases = []
        for v in range(rep.n):
            e = mats[v]
            if part == "im":
                d = e.shape[0]
                cols = [e[:, j] for j in range(d)]
                basis = []
                for colv in cols:
                    cand = np.array(basis + [colv], dtype=np.int64)
                    if linalg.rank(cand, p) > len(basis):
                        basis.append(colv)
                bases.append(np.array(basis, dtype=np.int64).reshape(len(basis), -1))
            else:
                bases.append(linalg.nullspace(mats[v], p))
        dims = tuple(b.shape[0] for b in bases)
        maps = []
        for v in range(rep.n - 1):
            src_b, dst_b = bases[v], bases[v + 1]
            mat = np.zeros((dims[v + 1], dims[v]), dtype=np.int64)
            for j in range(dims[v]):
                moved = np.mod(rep.maps[v] @ src_b[j], p)
                if dst_b.shape[0]:
                    sol = linalg.solve(dst_b.T, moved, p)
                    assert sol is not None
                    mat[:, j] = sol
                else:
                    assert not np.any(moved % p)
            maps.append(mat)
        pieces.append(QuiverRep(dims, tuple(maps), p))
    return pieces


def brute_force_decompose(rep: QuiverRep, element_cap=4096):
    """Interval multiplicities by recursively splitting idempotents."""
    if rep.total_dim() == 0:
        return {}
    basis = endomorphism_basis(rep)
    d = len(basis)
    assert rep.p**d <= element_cap, "endomorphism algebra too big for brute force"
    identity = [np.eye(dim, dtype=np.int64) for dim in rep.dims]
    for coeffs in itertools.product(range(rep.p), repeat=d):
        mats = [np.zeros((dim, dim), dtype=np.int64) for dim in rep.dims]
        for c, b in zip(coeffs, basis):
            for v in range(rep.n):
                mats[v] = np.mod(mats[v] + c * b[v], rep.p)
        if not _is_idempotent(mats, rep):
            continue
        if all(not np.any(m % rep.p) for m in mats):
            continue
        if all(np.array_equal(np.mod(m, rep.p), i) for m, i in zip(mats, identity)):
            continue
        out = {}
        for piece in _split_along(rep, mats):
            for iv, mult in brute_force_decompose(piece, element_cap).items():
                out[iv] = out.get(iv, 0) + mult
        return out
    # indecomposable: must be an interval for valid A_n input
    support = [v + 1 for v in range(rep.n) if rep.dims[v]]
    assert all(x == 1 for x in rep.dims if x), "indecomposable but not an interval"
    assert support == list(range(support[0], support[-1] + 1))
    return {(support[0], support[-1]): 1}
