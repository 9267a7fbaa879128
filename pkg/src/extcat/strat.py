"""Stratifying systems: axiom checking, filtered closures, filtration
enumeration and reordering, relative projective covers, and the
multiplicity-matrix method for filtration factor counts.

An ordered system phi = (Phi_1, ..., Phi_n) is given by model indices.  All
position bookkeeping below is 1-based to match the usual ordering talk
("whenever j > i"); vectors returned to callers are 0-based lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import CategoryModel, Extriangle, Obj, split_extriangle, star
from .errors import (
    AnnotationMissing,
    ConsistencyError,
    NonIntegralSolution,
    NonTermination,
    SingularMatrix,
    UnknownIndec,
)
from .linalg import solve_rational


@dataclass(frozen=True)
class StratSystem:
    """phi: ordered indec indices; q/etas optional aligned cover data."""

    phi: tuple
    q: Optional[tuple] = None          # Obj per position (zero allowed)
    etas: Optional[tuple] = None       # Extriangle (K_i, Q_i, Phi_i) per position

    def __post_init__(self):
        if len(set(self.phi)) != len(self.phi):
            raise ValueError("system entries must be pairwise non-isomorphic")
        if self.q is not None and len(self.q) != len(self.phi):
            raise ValueError("q must align with phi")
        if self.etas is not None and len(self.etas) != len(self.phi):
            raise ValueError("etas must align with phi")

    @property
    def size(self) -> int:
        return len(self.phi)


@dataclass
class Verdict:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def system_from_names(model: CategoryModel, names, q_names=None) -> StratSystem:
    phi = tuple(model.index_of(nm) for nm in names)
    q = None
    if q_names is not None:
        q = tuple(model.parse_obj(nm) for nm in q_names)
    return StratSystem(phi, q)


def check_stratifying(phi, model: CategoryModel) -> Verdict:
    """Hom-orthogonality below the diagonal, ext-orthogonality on and below."""
    for idx in phi:
        if idx < 0 or idx >= model.n_indecs():
            raise UnknownIndec(idx)
    failures = []
    n = len(phi)
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            pj, pi = Obj.of(phi[j - 1]), Obj.of(phi[i - 1])
            if j > i and model.hom_dim(pj, pi) != 0:
                failures.append(("S1", j, i))
            if j >= i and model.ext_dim(pj, pi) != 0:
                failures.append(("S2", j, i))
    return Verdict(not failures, failures)


@dataclass
class Closure:
    objects: list            # bounded explicit member list, 0 included
    indec_members: list      # indices of indec members, sorted
    route: str               # "star" or "fixed-point"
    summand_closed: bool
    mult_cap: int

    def member_names(self, model):
        return [model.name_of(i) for i in self.indec_members]

    def contains_obj(self, obj: Obj) -> bool:
        """Additive membership: every summand an indec member."""
        return all(i in set(self.indec_members) for i in obj.support())


def _add_closure_sets(index: int, mult_cap: int):
    return [Obj.from_dict({index: k}) for k in range(mult_cap + 1)]


def _cap_filter(objs, mult_cap):
    return [o for o in objs if all(m <= mult_cap for _, m in o.items)]


def filtered_closure(
    phi,
    model: CategoryModel,
    mult_cap: int = 2,
    force_generic: bool = False,
    iteration_cap: int = 64,
) -> Closure:
    """Members of the filtered subcategory within the window.

    When the system axioms hold the closure is computed by the descending
    star product of the add-closures (and verified closed under direct
    summands); otherwise a fixed-point iteration of star is used.  Member
    objects are truncated to the multiplicity cap; indecomposable members
    are exact.
    """
    if not phi:
        return Closure([Obj.zero()], [], "star", True, mult_cap)
    axioms = check_stratifying(phi, model)
    if axioms.ok and not force_generic:
        acc = _add_closure_sets(phi[-1], mult_cap)
        for pos in range(len(phi) - 2, -1, -1):
            acc = star(acc, _add_closure_sets(phi[pos], mult_cap), model)
            acc = _cap_filter(acc, mult_cap)
        route = "star"
    else:
        acc = {Obj.zero()}
        for idx in phi:
            acc.add(Obj.of(idx))
        for _ in range(iteration_cap):
            new = set(star(sorted(acc, key=Obj.sort_key), sorted(acc, key=Obj.sort_key), model))
            new = set(_cap_filter(new, mult_cap)) | acc
            if new == acc:
                break
            acc = new
        else:
            raise NonTermination("filtered closure failed to stabilise")
        acc = sorted(acc, key=Obj.sort_key)
        route = "fixed-point"
    objects = sorted(set(acc) | {Obj.zero()}, key=Obj.sort_key)
    members = sorted({i for o in objects for i in o.support()})
    summand_closed = all(Obj.of(i) in set(objects) for i in members)
    if axioms.ok and not summand_closed:
        raise ConsistencyError("closure of a valid system not summand-closed")
    return Closure(objects, members, route, summand_closed, mult_cap)


@dataclass(frozen=True)
class Filtration:
    """Bottom-up chain 0 = M_0 -> M_1 -> ... -> M_t = target.

    steps[i] is the extriangle (M_i, M_{i+1}, factor); factors are model
    indec indices, positions are 1-based indices into phi.
    """

    target: Obj
    steps: tuple
    factor_indices: tuple
    positions: tuple

    @property
    def length(self) -> int:
        return len(self.steps)

    def factor_multiset(self):
        return tuple(sorted(self.factor_indices))


def _deflation_steps(model, m: Obj, c_index: int):
    return model.backend.nonzero_deflation_orbits(model, m, c_index)


def enumerate_filtrations(m: Obj, phi, model: CategoryModel, cap: int = None):
    """All phi-filtrations of m up to the length cap, canonically ordered.

    Returns (filtrations, truncated).  Truncation is a flag, not an error:
    windows that are not zero-simple-like admit unboundedly long
    filtrations.
    """
    if cap is None:
        cap = 2 * m.total() + 4
    results = []
    truncated = [False]

    def peel(current: Obj, tail):
        if current.is_zero:
            results.append(tail)
            return
        if len(tail) >= cap:
            truncated[0] = True
            return
        for pos in range(1, len(phi) + 1):
            c_index = phi[pos - 1]
            for k_obj, xi in _deflation_steps(model, current, c_index):
                peel(k_obj, tail + ((xi, c_index, pos),))

    peel(m, ())
    filtrations = []
    seen = set()
    for tail in results:
        steps = tuple(x for x, _, _ in reversed(tail))
        factors = tuple(i for _, i, _ in reversed(tail))
        positions = tuple(p for _, _, p in reversed(tail))
        key = (tuple((s.a_end.items, s.ext_id) for s in steps), factors)
        if key in seen:
            continue
        seen.add(key)
        filtrations.append(Filtration(m, steps, factors, positions))
    filtrations.sort(key=lambda f: (f.length, f.positions, f.factor_indices))
    return filtrations, truncated[0]


def filtration_factor_profiles(m: Obj, phi, model: CategoryModel, cap: int = None, memo: dict = None):
    """Position-count vectors of all complete phi-filtrations of m.

    Memoised on (object, budget): the set of count vectors is computed
    without materialising the exponentially many chains.  Returns
    (set of tuples, truncated flag).
    """
    if cap is None:
        cap = 2 * m.total() + 4
    if memo is None:
        memo = {}
    n = len(phi)

    def rec(current: Obj, budget: int):
        key = (current.items, budget)
        if key in memo:
            return memo[key]
        if current.is_zero:
            memo[key] = ({tuple([0] * n)}, False)
            return memo[key]
        if budget <= 0:
            memo[key] = (set(), True)
            return memo[key]
        profiles = set()
        truncated = False
        for pos in range(1, n + 1):
            for k_obj, _ in _deflation_steps(model, current, phi[pos - 1]):
                sub, sub_trunc = rec(k_obj, budget - 1)
                truncated = truncated or sub_trunc
                for s in sub:
                    bumped = list(s)
                    bumped[pos - 1] += 1
                    profiles.add(tuple(bumped))
        memo[key] = (profiles, truncated)
        return memo[key]

    return rec(m, cap)


def reorder_filtration(f: Filtration, phi, model: CategoryModel) -> Filtration:
    """Same target, length and factor multiset, positions non-increasing.

    Existence is guaranteed for a valid system; the reordered chain is found
    by bounded search and failure flags inconsistent backend data.
    """
    want = tuple(sorted(f.positions, reverse=True))
    if f.positions == want:
        return f

    def build(current: Obj, remaining, acc):
        if not remaining:
            return acc if current.is_zero else None
        pos = remaining[-1]
        c_index = phi[pos - 1]
        for k_obj, xi in _deflation_steps(model, current, c_index):
            found = build(k_obj, remaining[:-1], acc + ((xi, c_index, pos),))
            if found is not None:
                return found
        return None

    tail = build(f.target, want, ())
    if tail is None:
        raise ConsistencyError("no non-increasing reordering exists; model data inconsistent")
    steps = tuple(x for x, _, _ in reversed(tail))
    factors = tuple(i for _, i, _ in reversed(tail))
    positions = tuple(p for _, _, p in reversed(tail))
    return Filtration(f.target, steps, factors, positions)


def _eta_sanity(sys: StratSystem, model):
    if sys.q is None or sys.etas is None:
        raise AnnotationMissing("projective-system checks need q and etas")
    for pos, (q_obj, eta) in enumerate(zip(sys.q, sys.etas), start=1):
        if eta.mid != q_obj or eta.c_end != Obj.of(sys.phi[pos - 1]):
            raise ConsistencyError(f"eta_{pos} does not match (K, Q_{pos}, Phi_{pos})")


def check_projective_system(sys: StratSystem, model: CategoryModel) -> dict:
    """PS1/PS2, right minimality per position, the forced iso at the top
    position, and relative projectivity of each cover inside the closure."""
    _eta_sanity(sys, model)
    n = sys.size
    closure = filtered_closure(sys.phi, model)
    ps1_failures = []
    for i in range(n):
        for j in range(n):
            if model.ext_dim(sys.q[i], Obj.of(sys.phi[j])) != 0:
                ps1_failures.append((i + 1, j + 1))
    ps2_failures = []
    tails = {}
    for pos in range(1, n + 1):
        tail = sys.phi[pos:]
        tails[pos] = filtered_closure(tail, model) if tail else Closure(
            [Obj.zero()], [], "star", True, closure.mult_cap
        )
        if not tails[pos].contains_obj(sys.etas[pos - 1].a_end):
            ps2_failures.append(pos)
    minimal = []
    for pos in range(1, n + 1):
        q_obj, eta = sys.q[pos - 1], sys.etas[pos - 1]
        try:
            reduced_q, _ = model.backend.right_minimal_reduce(
                model, q_obj, sys.phi[pos - 1], eta
            )
            minimal.append(reduced_q == q_obj)
        except AnnotationMissing:
            minimal.append(None)
    top_iso = sys.etas[-1].a_end.is_zero
    rel_proj_failures = [
        (i + 1, model.name_of(member))
        for i in range(n)
        for member in closure.indec_members
        if model.ext_dim(sys.q[i], Obj.of(member)) != 0
    ]
    ok = (
        not ps1_failures
        and not ps2_failures
        and all(m is True for m in minimal)
        and top_iso
        and not rel_proj_failures
    )
    return {
        "ps1": not ps1_failures,
        "ps1_failures": ps1_failures,
        "ps2": not ps2_failures,
        "ps2_failures": ps2_failures,
        "minimal": minimal,
        "top_iso": top_iso,
        "relative_projective": not rel_proj_failures,
        "relative_projective_failures": rel_proj_failures,
        "ok": ok,
    }


def build_projective_system(phi, model: CategoryModel) -> StratSystem:
    """Complete a stratifying system to its minimal relative-projective one.

    Iterates universal extensions against the least position with a nonzero
    extension group, composes the deflations, and right-minimal-reduces the
    result; the kernel of each cover is asserted to lie in the closure of
    the strictly higher positions.
    """
    axioms = check_stratifying(phi, model)
    if not axioms.ok:
        raise ConsistencyError(f"not a stratifying system: {axioms.failures}")
    backend = model.backend
    derived_route = hasattr(backend, "universal_from_complex")
    q_list, eta_list = [], []
    for pos in range(1, len(phi) + 1):
        phi_obj = Obj.of(phi[pos - 1])
        if derived_route:
            q_obj, eta = _build_cover_derived(model, phi, pos)
        else:
            q_obj, eta = _build_cover_table(model, phi, pos)
        q_obj, eta = backend.right_minimal_reduce(model, q_obj, phi[pos - 1], eta)
        tail = phi[pos:]
        tail_closure = filtered_closure(tail, model) if tail else None
        k_obj = eta.a_end
        if tail:
            if not tail_closure.contains_obj(k_obj):
                raise ConsistencyError(
                    f"kernel at position {pos} escapes the higher-position closure"
                )
        elif not k_obj.is_zero:
            raise ConsistencyError("top-position kernel must vanish")
        q_list.append(q_obj)
        eta_list.append(eta)
    return StratSystem(tuple(phi), tuple(q_list), tuple(eta_list))


def _build_cover_derived(model, phi, pos):
    backend = model.backend
    phi_index = phi[pos - 1]
    phi_obj = Obj.of(phi_index)
    x_cx = backend.obj_complex(phi_obj)
    x_obj = phi_obj
    composite = None
    last_a = 0
    while True:
        a_pos = next(
            (
                a
                for a in range(1, len(phi) + 1)
                if model.ext_dim(x_obj, Obj.of(phi[a - 1])) > 0
            ),
            None,
        )
        if a_pos is None:
            break
        if a_pos <= last_a:
            raise ConsistencyError("universal extension positions failed to increase")
        last_a = a_pos
        _, (b_cx, defl) = backend.universal_from_complex(model, x_cx, x_obj, phi[a_pos - 1])
        composite = defl if composite is None else composite.compose(defl)
        x_cx = b_cx
        x_obj = backend.key_obj(backend.engine.decompose(b_cx))
        if x_obj is None:
            raise ConsistencyError("construction escaped the window")
    if composite is None:
        return phi_obj, split_extriangle(Obj.zero(), phi_obj)
    from . import complexes as cxm

    z, _, _ = cxm.cone(composite)
    k_cx = cxm.shift_complex(z, -1)
    k_obj = backend.key_obj(backend.engine.decompose(k_cx))
    if k_obj is None:
        raise ConsistencyError("cover kernel escaped the window")
    token = ("cover", len(backend._realizations))
    from .derived import _cocone_inclusion

    backend._realizations[token] = (
        k_cx,
        x_cx,
        backend.obj_complex(phi_obj),
        _cocone_inclusion(k_cx, x_cx),
        composite,
        None,
    )
    eta = Extriangle(k_obj, x_obj, phi_obj, "e:cover", {"_rkey": token})
    return x_obj, eta


def _build_cover_table(model, phi, pos):
    phi_index = phi[pos - 1]
    phi_obj = Obj.of(phi_index)
    x_obj = phi_obj
    stepped = False
    while True:
        a_pos = next(
            (
                a
                for a in range(1, len(phi) + 1)
                if model.ext_dim(x_obj, Obj.of(phi[a - 1])) > 0
            ),
            None,
        )
        if a_pos is None:
            break
        xi = model.backend.universal_extension(model, x_obj, phi[a_pos - 1])
        x_obj = xi.mid
        stepped = True
    if not stepped:
        return phi_obj, split_extriangle(Obj.zero(), phi_obj)
    candidates = [
        (k, xi)
        for k, xi in model.backend.nonzero_deflation_orbits(model, x_obj, phi_index)
        if not (xi.is_split and not k.is_zero)
    ]
    candidates = [c for c in candidates if not c[1].is_split]
    if len(candidates) != 1:
        raise AnnotationMissing("cover extriangle not determined by stored records")
    k_obj, xi = candidates[0]
    return x_obj, xi


def complete_system(model: CategoryModel, phi, q_objs) -> StratSystem:
    """Attach cover extriangles (K_i, Q_i, Phi_i) to a supplied Q.

    For each position the deflation-orbit enumeration onto Phi_i is searched
    for a record with middle Q_i whose kernel lies in the closure of the
    strictly higher positions; ties break canonically.
    """
    etas = []
    for pos in range(1, len(phi) + 1):
        q_obj = q_objs[pos - 1]
        phi_obj = Obj.of(phi[pos - 1])
        tail = phi[pos:]
        tail_closure = filtered_closure(tail, model) if tail else None
        candidates = []
        for k_obj, xi in _deflation_steps(model, q_obj, phi[pos - 1]):
            in_tail = tail_closure.contains_obj(k_obj) if tail else k_obj.is_zero
            if in_tail:
                candidates.append((k_obj.sort_key(), xi.ext_id, xi))
        if not candidates:
            raise ConsistencyError(
                f"no cover extriangle onto {model.label(phi_obj)} "
                f"with kernel in the higher-position closure"
            )
        candidates.sort(key=lambda t: (t[0], t[1]))
        etas.append(candidates[0][2])
    return StratSystem(tuple(phi), tuple(q_objs), tuple(etas))


def check_left_exact(sys: StratSystem, model: CategoryModel) -> dict:
    """Per position: vanishing defect of Hom(Q_i, -) on every nonsplit record
    of the window, plus whether each structural deflation is nonzero."""
    _eta_sanity(sys, model)
    records = model.extriangle_records(include_split=False)
    left_exact = []
    for q_obj in sys.q:
        defects = [model.backend.left_exact_defect(model, q_obj, xi) for xi in records]
        left_exact.append(all(d == 0 for d in defects))
    q_nonzero = []
    for eta in sys.etas:
        backend = model.backend
        if hasattr(backend, "deflation_nonzero"):
            try:
                q_nonzero.append(bool(backend.deflation_nonzero(model, eta)))
                continue
            except AnnotationMissing:
                q_nonzero.append(None)
                continue
        q_nonzero.append(_deflation_nonzero_derived(model, eta))
    return {"left_exact": left_exact, "q_nonzero": q_nonzero}


def _deflation_nonzero_derived(model, eta: Extriangle) -> bool:
    if eta.c_end.is_zero or eta.mid.is_zero:
        return False
    if eta.is_split or eta.a_end.is_zero:
        return True
    from .complexes import ChainMap, HomSpace

    backend = model.backend
    _, b_cx, c_cx, _, defl, _ = backend.realization(model, eta)
    space = HomSpace(b_cx, c_cx)
    return bool(np.any(space.class_coords(ChainMap(b_cx, c_cx, defl.mats)) % backend.p))


def multiplicity_matrix(sys: StratSystem, model: CategoryModel) -> dict:
    """d_ij = dim Hom(Q_i, Phi_j) plus shape diagnostics."""
    if sys.q is None:
        raise AnnotationMissing("multiplicity matrix needs the covers q")
    n = sys.size
    d = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            d[i, j] = model.hom_dim(sys.q[i], Obj.of(sys.phi[j]))
    lower_nonzero = [(i + 1, j + 1) for i in range(n) for j in range(n) if i > j and d[i, j]]
    diag_zero = [i + 1 for i in range(n) if d[i, i] == 0]
    return {
        "D": d,
        "upper_triangular": not lower_nonzero,
        "lower_nonzero": lower_nonzero,
        "diagonal_nonzero": not diag_zero,
        "diagonal_zeros": diag_zero,
    }


def multiplicities(
    m: Obj,
    sys: StratSystem,
    model: CategoryModel,
    cross_validate: bool = True,
    cap: int = None,
):
    """Factor-count vector via the matrix route: solve D mult = c exactly.

    The solution is asserted integral and nonnegative.  When the filtration
    enumeration completes below the cap, the vector is checked against the
    actual factor counts; a mismatch raises ConsistencyError (the
    left-exactness hypothesis of the matrix route failed for this object).
    """
    data = multiplicity_matrix(sys, model)
    d = data["D"]
    n = sys.size
    c = [model.hom_dim(sys.q[i], m) for i in range(n)]
    try:
        sol = solve_rational(d.tolist(), c)
    except ValueError as exc:
        raise SingularMatrix(str(exc)) from exc
    if any(x.denominator != 1 or x < 0 for x in sol):
        raise NonIntegralSolution(f"D m = c solved by non-admissible {sol}")
    vec = [int(x) for x in sol]
    if cross_validate:
        profiles, truncated = filtration_factor_profiles(m, sys.phi, model, cap=cap)
        if not truncated:
            for counts in sorted(profiles):
                if list(counts) != vec:
                    raise ConsistencyError(
                        f"matrix-route counts {vec} disagree with an enumerated "
                        f"filtration profile {list(counts)} for {model.label(m)}"
                    )
    return vec


def strat_report(model: CategoryModel, sys: StratSystem, constructed: bool) -> dict:
    """JSON-ready report for the CLI strat subcommand."""
    axioms = check_stratifying(sys.phi, model)
    out = {
        "system": {
            "phi": [model.name_of(i) for i in sys.phi],
            "q": [model.label(q) for q in sys.q] if sys.q else None,
            "constructed": constructed,
        },
        "s1s2": axioms.ok,
        "s1s2_failures": axioms.failures,
    }
    if sys.q is not None and sys.etas is not None:
        proj = check_projective_system(sys, model)
        lex = check_left_exact(sys, model)
        mat = multiplicity_matrix(sys, model)
        out.update(
            {
                "ps1": proj["ps1"],
                "ps2": proj["ps2"],
                "minimal": proj["minimal"],
                "left_exact": lex["left_exact"],
                "q_nonzero": lex["q_nonzero"],
                "D": mat["D"].tolist(),
                "verdict": bool(proj["ok"]),
            }
        )
    return out
