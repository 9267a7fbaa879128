"""Representations of the linearly oriented A_n quiver over a prime field.

A representation assigns a vector space to each vertex 1..n and a matrix to
each arrow i -> i+1.  Every representation decomposes into interval modules
[a, b]; the multiplicities are recovered from ranks of composite arrow maps
by inclusion-exclusion, which is exact and needs no randomization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg


@dataclass(frozen=True)
class QuiverRep:
    """dims[v] for v = 0..n-1; maps[v]: dims[v+1] x dims[v] matrix over F_p."""

    dims: tuple
    maps: tuple
    p: int

    def __post_init__(self):
        n = len(self.dims)
        assert len(self.maps) == max(n - 1, 0)
        for v, m in enumerate(self.maps):
            assert m.shape == (self.dims[v + 1], self.dims[v]), (v, m.shape)

    @property
    def n(self) -> int:
        return len(self.dims)

    def composite(self, a: int, b: int) -> np.ndarray:
        """Map V_a -> V_b for 1 <= a <= b <= n (1-based vertices)."""
        mat = np.eye(self.dims[a - 1], dtype=np.int64)
        for v in range(a - 1, b - 1):
            mat = np.mod(self.maps[v] @ mat, self.p)
        return mat

    def total_dim(self) -> int:
        return int(sum(self.dims))


def interval_rep(a: int, b: int, n: int, p: int) -> QuiverRep:
    dims = tuple(1 if a <= v <= b else 0 for v in range(1, n + 1))
    maps = []
    for v in range(1, n):
        m = np.zeros((dims[v], dims[v - 1]), dtype=np.int64)
        if dims[v - 1] and dims[v]:
            m[0, 0] = 1
        maps.append(m)
    return QuiverRep(dims, tuple(maps), p)


def direct_sum(reps) -> QuiverRep:
    reps = list(reps)
    assert reps
    n, p = reps[0].n, reps[0].p
    dims = tuple(sum(r.dims[v] for r in reps) for v in range(n))
    maps = []
    for v in range(n - 1):
        blocks = [r.maps[v] for r in reps]
        maps.append(_block_diag(blocks))
    return QuiverRep(dims, tuple(maps), p)


def _block_diag(blocks):
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=np.int64)
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def rep_decompose(rep: QuiverRep) -> dict:
    """Multiplicity of each interval [a, b] in rep, as {(a, b): m}.

    m[a,b] = r(a,b) - r(a-1,b) - r(a,b+1) + r(a-1,b+1) where r(a,b) is the
    rank of the composite map V_a -> V_b, with r = 0 outside 1..n.
    """
    n = rep.n
    r = {}
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            r[(a, b)] = linalg.rank(rep.composite(a, b), rep.p) if rep.dims[a - 1] else 0

    def rr(a, b):
        if a < 1 or b > n or a > b:
            return 0
        return r[(a, b)]

    out = {}
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            m = rr(a, b) - rr(a - 1, b) - rr(a, b + 1) + rr(a - 1, b + 1)
            if m < 0:
                raise AssertionError(f"negative multiplicity at [{a},{b}]")
            if m:
                out[(a, b)] = m
    total = sum(m * (b - a + 1) for (a, b), m in out.items())
    if total != rep.total_dim():
        raise AssertionError("decomposition does not conserve dimension")
    return out
