"""Bounded complexes of projectives over the linear A_n path algebra.

The additive category of projectives is a poset category: Hom(P_i, P_j) is
one-dimensional when j <= i (spanned by a canonical generator) and zero
otherwise, and canonical generators compose to canonical generators.  A
morphism between sums of projectives is therefore just a scalar matrix with
a support constraint, and all homotopy-category computations (chain maps
modulo null-homotopy, cones, cohomology) reduce to small exact linear
algebra over F_p.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import EnumerationCapExceeded
from .quiver import QuiverRep, rep_decompose


@dataclass(frozen=True)
class PComplex:
    """comps[k]: tuple of projective indices (P_i encoded as i, 1-based).

    diffs[k]: matrix comps[k+1] x comps[k]; entry (r, c) scales the canonical
    generator P_{comps[k][c]} -> P_{comps[k+1][r]} and must vanish unless
    comps[k+1][r] <= comps[k][c].
    """

    n: int
    p: int
    comps: dict = field(default_factory=dict)
    diffs: dict = field(default_factory=dict)

    def degrees(self):
        return sorted(self.comps.keys())

    def comp(self, k):
        return self.comps.get(k, ())

    def diff(self, k):
        src, dst = self.comp(k), self.comp(k + 1)
        if k in self.diffs:
            return self.diffs[k]
        return np.zeros((len(dst), len(src)), dtype=np.int64)

    @property
    def is_zero(self):
        return not self.comps

    def total_components(self):
        return sum(len(c) for c in self.comps.values())


def allowed_mask(src, dst):
    """Support constraint for morphisms between sums of projectives."""
    return np.array([[1 if d <= s else 0 for s in src] for d in dst], dtype=np.int64)


def zero_complex(n, p):
    return PComplex(n, p, {}, {})


def interval_complex(a, b, shift, n, p):
    """Projective resolution of the interval module [a, b], shifted.

    [a, b] sits in degree 0 as P_{b+1} -> P_a (the P_{b+1} term is dropped
    when b = n); shifting by s moves everything to degrees -s-1, -s.
    """
    comps = {-shift: (a,)}
    diffs = {}
    if b < n:
        comps[-shift - 1] = (b + 1,)
        diffs[-shift - 1] = np.array([[1]], dtype=np.int64)
    return PComplex(n, p, comps, diffs)


def sum_complexes(parts, n, p):
    """Direct sum; returns (complex, offsets) with per-part component offsets."""
    comps = {}
    offsets = []
    for part in parts:
        off = {}
        for k in part.degrees():
            cur = comps.setdefault(k, [])
            off[k] = len(cur)
            cur.extend(part.comp(k))
        offsets.append(off)
    comps = {k: tuple(v) for k, v in comps.items()}
    diffs = {}
    for k in comps:
        if k + 1 not in comps:
            continue
        mat = np.zeros((len(comps[k + 1]), len(comps[k])), dtype=np.int64)
        for part, off in zip(parts, offsets):
            if k in part.comps and k + 1 in part.comps:
                d = part.diff(k)
                r0 = off.get(k + 1, 0)
                c0 = off.get(k, 0)
                mat[r0 : r0 + d.shape[0], c0 : c0 + d.shape[1]] = d
        diffs[k] = mat
    return PComplex(n, p, comps, diffs), offsets


def shift_complex(x: PComplex, s: int) -> PComplex:
    """X[s]: degree k of the result is degree k + s of x, differential (-1)^s d."""
    sign = 1 if s % 2 == 0 else -1
    comps = {k - s: v for k, v in x.comps.items()}
    diffs = {k - s: np.mod(sign * v, x.p) for k, v in x.diffs.items()}
    return PComplex(x.n, x.p, comps, diffs)


@dataclass(frozen=True)
class ChainMap:
    src: PComplex
    dst: PComplex
    mats: dict  # degree -> dst.comp(k) x src.comp(k)

    def mat(self, k):
        a, b = self.src.comp(k), self.dst.comp(k)
        if k in self.mats:
            return self.mats[k]
        return np.zeros((len(b), len(a)), dtype=np.int64)

    def verify(self):
        p = self.src.p
        for k in set(self.src.degrees()) | set(self.dst.degrees()):
            lhs = np.mod(self.mat(k + 1) @ self.src.diff(k), p)
            rhs = np.mod(self.dst.diff(k) @ self.mat(k), p)
            if lhs.shape != rhs.shape or np.any((lhs - rhs) % p):
                return False
            mask = allowed_mask(self.src.comp(k), self.dst.comp(k))
            if np.any(self.mat(k) * (1 - mask) % p):
                return False
        return True

    def compose(self, earlier: "ChainMap") -> "ChainMap":
        """self after earlier: earlier.src -> self.dst."""
        p = self.src.p
        mats = {}
        for k in earlier.src.degrees():
            m = np.mod(self.mat(k) @ earlier.mat(k), p)
            if m.size and np.any(m):
                mats[k] = m
        return ChainMap(earlier.src, self.dst, mats)

    def shifted(self, s: int) -> "ChainMap":
        return ChainMap(
            shift_complex(self.src, s),
            shift_complex(self.dst, s),
            {k - s: v for k, v in self.mats.items()},
        )

    def is_zero_map(self):
        return all(not np.any(m % self.src.p) for m in self.mats.values())


def identity_map(x: PComplex) -> ChainMap:
    return ChainMap(x, x, {k: np.eye(len(x.comp(k)), dtype=np.int64) for k in x.degrees()})


def cone(f: ChainMap):
    """Mapping cone with its canonical triangle maps.

    Returns (Z, incl, proj): Z^k = dst^k + src^{k+1}, incl: dst -> Z,
    proj: Z -> src[1].
    """
    x, y = f.src, f.dst
    p = x.p
    comps = {}
    for k in set(y.degrees()) | {k - 1 for k in x.degrees()}:
        c = tuple(y.comp(k)) + tuple(x.comp(k + 1))
        if c:
            comps[k] = c
    diffs = {}
    for k in comps:
        if k + 1 not in comps:
            continue
        ny0, nx0 = len(y.comp(k)), len(x.comp(k + 1))
        ny1, nx1 = len(y.comp(k + 1)), len(x.comp(k + 2))
        mat = np.zeros((ny1 + nx1, ny0 + nx0), dtype=np.int64)
        mat[:ny1, :ny0] = y.diff(k)
        mat[:ny1, ny0:] = f.mat(k + 1)
        mat[ny1:, ny0:] = np.mod(-x.diff(k + 1), p)
        diffs[k] = mat
    z = PComplex(x.n, p, comps, diffs)
    incl_mats = {}
    for k in y.degrees():
        m = np.zeros((len(z.comp(k)), len(y.comp(k))), dtype=np.int64)
        m[: len(y.comp(k))] = np.eye(len(y.comp(k)), dtype=np.int64)
        incl_mats[k] = m
    x1 = shift_complex(x, 1)
    proj_mats = {}
    for k in x1.degrees():
        m = np.zeros((len(x1.comp(k)), len(z.comp(k))), dtype=np.int64)
        m[:, len(y.comp(k)) :] = np.eye(len(x1.comp(k)), dtype=np.int64)
        proj_mats[k] = m
    return z, ChainMap(y, z, incl_mats), ChainMap(z, x1, proj_mats)


class HomSpace:
    """Hom in the homotopy category: chain maps modulo null-homotopies.

    Entries of all degreewise matrices (at allowed positions) are flattened
    into one coordinate vector; the space of chain maps and the subspace of
    boundaries are computed once, and a canonical basis of the quotient is
    chosen deterministically.
    """

    def __init__(self, x: PComplex, y: PComplex):
        assert x.p == y.p and x.n == y.n
        self.x, self.y, self.p = x, y, x.p
        self.positions = []
        for k in sorted(set(x.degrees()) & set(y.degrees())):
            mask = allowed_mask(x.comp(k), y.comp(k))
            for r in range(mask.shape[0]):
                for c in range(mask.shape[1]):
                    if mask[r, c]:
                        self.positions.append((k, r, c))
        self._index = {pos: i for i, pos in enumerate(self.positions)}
        n_unknowns = len(self.positions)

        rows = []
        degrees = sorted(set(x.degrees()) | set(y.degrees()))
        for k in degrees:
            dx, dy = x.diff(k), y.diff(k)
            n_out_rows = len(y.comp(k + 1))
            n_out_cols = len(x.comp(k))
            for r in range(n_out_rows):
                for c in range(n_out_cols):
                    row = np.zeros(n_unknowns, dtype=np.int64)
                    for m in range(len(x.comp(k + 1))):
                        if dx[m, c]:
                            j = self._index.get((k + 1, r, m))
                            if j is not None:
                                row[j] += dx[m, c]
                    for m in range(len(y.comp(k))):
                        if dy[r, m]:
                            j = self._index.get((k, m, c))
                            if j is not None:
                                row[j] -= dy[r, m]
                    if np.any(row % self.p):
                        rows.append(row)
        if rows:
            self.cycles = linalg.nullspace(np.array(rows), self.p)
        else:
            self.cycles = np.eye(n_unknowns, dtype=np.int64)

        boundary_rows = []
        for k in degrees:
            # homotopy component h^k: X^k -> Y^{k-1}
            mask = allowed_mask(x.comp(k), y.comp(k - 1))
            for r in range(mask.shape[0]):
                for c in range(mask.shape[1]):
                    if not mask[r, c]:
                        continue
                    vec = np.zeros(n_unknowns, dtype=np.int64)
                    dy = y.diff(k - 1)
                    for m in range(len(y.comp(k))):
                        j = self._index.get((k, m, c))
                        if j is not None and dy[m, r]:
                            vec[j] += dy[m, r]
                    dx = x.diff(k - 1)
                    for m in range(len(x.comp(k - 1))):
                        j = self._index.get((k - 1, r, m))
                        if j is not None and dx[c, m]:
                            vec[j] += dx[c, m]
                    if np.any(vec % self.p):
                        boundary_rows.append(vec)
        self.boundaries = (
            np.array(boundary_rows)
            if boundary_rows
            else np.zeros((0, n_unknowns), dtype=np.int64)
        )
        chosen = linalg.quotient_basis(self.boundaries, self.cycles, self.p)
        self.basis_vectors = [self.cycles[i] for i in chosen]

    @property
    def dim(self):
        return len(self.basis_vectors)

    def vector_to_map(self, vec) -> ChainMap:
        mats = {}
        for (k, r, c), val in zip(self.positions, vec):
            if val % self.p:
                m = mats.setdefault(
                    k,
                    np.zeros((len(self.y.comp(k)), len(self.x.comp(k))), dtype=np.int64),
                )
                m[r, c] = val % self.p
        return ChainMap(self.x, self.y, mats)

    def basis_maps(self):
        return [self.vector_to_map(v) for v in self.basis_vectors]

    def map_to_vector(self, f: ChainMap):
        vec = np.zeros(len(self.positions), dtype=np.int64)
        for k in f.mats:
            mat = f.mats[k]
            for r in range(mat.shape[0]):
                for c in range(mat.shape[1]):
                    if mat[r, c] % self.p:
                        j = self._index.get((k, r, c))
                        if j is None:
                            raise AssertionError("map not supported on allowed positions")
                        vec[j] = mat[r, c] % self.p
        return vec

    def class_coords(self, f: ChainMap):
        """Coordinates of [f] in the canonical quotient basis."""
        if not self.positions:
            return np.zeros(0, dtype=np.int64)
        vec = self.map_to_vector(f)
        cols = list(self.basis_vectors) + list(self.boundaries)
        if not cols:
            if np.any(vec % self.p):
                raise AssertionError("nonzero map in zero hom space")
            return np.zeros(0, dtype=np.int64)
        mat = np.array(cols, dtype=np.int64).T
        sol = linalg.solve(mat, vec, self.p)
        if sol is None:
            raise AssertionError("map is not a cycle")
        return np.mod(sol[: self.dim], self.p)

    def element(self, coords) -> ChainMap:
        vec = np.zeros(len(self.positions), dtype=np.int64)
        for coef, basis_vec in zip(coords, self.basis_vectors):
            vec = np.mod(vec + int(coef) * basis_vec, self.p)
        return self.vector_to_map(vec)

    def all_elements(self, cap=256, include_zero=True):
        """Every homotopy class, as coordinate tuples in deterministic order."""
        total = self.p**self.dim
        if total > cap:
            raise EnumerationCapExceeded(
                f"{total} classes exceed enumeration cap {cap}"
            )
        coords = [()]
        for _ in range(self.dim):
            coords = [c + (v,) for c in coords for v in range(self.p)]
        out = [c for c in coords if include_zero or any(c)]
        return out


def normalized_orbits(dim, p, cap=256):
    """Projective representatives: coordinate tuples with first nonzero = 1."""
    total = p**dim
    if total > cap:
        raise EnumerationCapExceeded(f"{total} vectors exceed enumeration cap {cap}")
    reps = []
    vecs = [()]
    for _ in range(dim):
        vecs = [c + (v,) for c in vecs for v in range(p)]
    for v in vecs:
        nz = next((i for i, x in enumerate(v) if x), None)
        if nz is not None and v[nz] == 1:
            reps.append(v)
    return reps


def cohomology(x: PComplex) -> dict:
    """H^k(x) as quiver representations, one per degree with nonzero comps."""
    out = {}
    p, n = x.p, x.n
    for k in x.degrees():
        comp = x.comp(k)
        # vertex-level dimensions/bases of the projective sum
        vert_basis = {v: [t for t, i in enumerate(comp) if i <= v] for v in range(1, n + 1)}

        def vertex_matrix(mat, src_comp, dst_comp, v):
            sb = [t for t, i in enumerate(src_comp) if i <= v]
            db = [t for t, i in enumerate(dst_comp) if i <= v]
            out_m = np.zeros((len(db), len(sb)), dtype=np.int64)
            for ri, rt in enumerate(db):
                for ci, ct in enumerate(sb):
                    out_m[ri, ci] = mat[rt, ct] % p
            return out_m

        h_dims = []
        h_reps = {}  # vertex -> rows spanning chosen representatives in X^k_v
        kernel_data = {}
        for v in range(1, n + 1):
            d_out = vertex_matrix(x.diff(k), comp, x.comp(k + 1), v)
            d_in = vertex_matrix(x.diff(k - 1), x.comp(k - 1), comp, v)
            nv = len(vert_basis[v])
            ker = (
                linalg.nullspace(d_out, p)
                if d_out.shape[0]
                else np.eye(nv, dtype=np.int64)
            )
            img = d_in.T if d_in.shape[1] else np.zeros((0, nv), dtype=np.int64)
            chosen = linalg.quotient_basis(img, ker, p)
            if chosen:
                reps = np.array([ker[i] for i in chosen], dtype=np.int64)
            else:
                reps = np.zeros((0, nv), dtype=np.int64)
            h_dims.append(len(chosen))
            h_reps[v] = reps
            kernel_data[v] = (ker, img)

        maps = []
        for v in range(1, n):
            src_reps = h_reps[v]
            dst_reps = h_reps[v + 1]
            nv1 = len(vert_basis[v + 1])
            mat = np.zeros((dst_reps.shape[0], src_reps.shape[0]), dtype=np.int64)
            if src_reps.shape[0] and nv1:
                # arrow action: component t alive at v stays component t at v+1
                lift = np.zeros((nv1, len(vert_basis[v])), dtype=np.int64)
                for ci, t in enumerate(vert_basis[v]):
                    lift[vert_basis[v + 1].index(t), ci] = 1
                _, img = kernel_data[v + 1]
                basis_cols = (
                    np.concatenate([dst_reps, img]) if img.shape[0] else dst_reps
                )
                for ci in range(src_reps.shape[0]):
                    moved = np.mod(lift @ src_reps[ci], p)
                    if basis_cols.shape[0]:
                        sol = linalg.solve(basis_cols.T, moved, p)
                        if sol is None:
                            raise AssertionError("cohomology arrow map escaped kernel")
                        mat[:, ci] = sol[: dst_reps.shape[0]]
                    elif np.any(moved % p):
                        raise AssertionError("nonzero image in zero cohomology")
            elif src_reps.shape[0]:
                pass
            maps.append(mat)
        if any(h_dims):
            out[k] = QuiverRep(tuple(h_dims), tuple(maps), p)
    return out


def decompose_complex(x: PComplex) -> dict:
    """Krull-Schmidt decomposition: {(a, b, shift): multiplicity}.

    Uses the hereditary splitting X = sum of H^k(X)[-k] and interval
    decomposition of each cohomology representation.
    """
    out = {}
    for k, rep in cohomology(x).items():
        for (a, b), m in rep_decompose(rep).items():
            out[(a, b, -k)] = out.get((a, b, -k), 0) + m
    return out
