"""Object-level data model for a finite window of an extriangulated category.

A model consists of a canonically ordered list of indecomposables, dense
hom/ext dimension tables over those indecomposables, and a backend providing
the morphism-level oracle operations (extension enumeration, universal
extensions, exactness defects, minimal reductions).  Objects are multisets
of indecomposables; the zero object is the empty multiset.

Models are immutable after construction and all operations here are pure
functions of (model, arguments), so concurrent readers are safe.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import UnknownIndec, WindowOverflow


@dataclass(frozen=True, order=True)
class IndecId:
    """An indecomposable object of the window, identified by build index."""

    index: int
    name: str = field(compare=False)


@dataclass(frozen=True)
class Obj:
    """Multiset of indecomposables (Krull-Schmidt decomposition up to iso).

    items is a tuple of (indec index, positive multiplicity) pairs sorted by
    index; the empty tuple is the zero object.
    """

    items: tuple = ()

    @staticmethod
    def zero() -> "Obj":
        return Obj(())

    @staticmethod
    def of(*indices: int) -> "Obj":
        counts = {}
        for i in indices:
            counts[i] = counts.get(i, 0) + 1
        return Obj.from_dict(counts)

    @staticmethod
    def from_dict(mults) -> "Obj":
        items = tuple(sorted((int(i), int(m)) for i, m in mults.items() if m))
        if any(m < 0 for _, m in items):
            raise ValueError("negative multiplicity")
        return Obj(items)

    @property
    def is_zero(self) -> bool:
        return not self.items

    def mult(self, index: int) -> int:
        for i, m in self.items:
            if i == index:
                return m
        return 0

    def support(self) -> tuple:
        return tuple(i for i, _ in self.items)

    def total(self) -> int:
        return sum(m for _, m in self.items)

    def expand(self) -> list:
        """Indices with multiplicity, e.g. {P2:2, S1:1} -> [P2, P2, S1]."""
        out = []
        for i, m in self.items:
            out.extend([i] * m)
        return out

    def __add__(self, other: "Obj") -> "Obj":
        counts = dict(self.items)
        for i, m in other.items:
            counts[i] = counts.get(i, 0) + m
        return Obj.from_dict(counts)

    def __sub__(self, other: "Obj") -> "Obj":
        counts = dict(self.items)
        for i, m in other.items:
            counts[i] = counts.get(i, 0) - m
            if counts[i] < 0:
                raise ValueError(f"{other} is not a sub-multiset of {self}")
        return Obj.from_dict(counts)

    def contains(self, other: "Obj") -> bool:
        return all(self.mult(i) >= m for i, m in other.items)

    def scaled(self, n: int) -> "Obj":
        return Obj.from_dict({i: m * n for i, m in self.items})

    def sort_key(self):
        return self.items


def obj_sum(x: Obj, y: Obj) -> Obj:
    """Direct sum as multiset union; commutative, associative, zero-identity."""
    return x + y


@dataclass(frozen=True)
class Extriangle:
    """A realized extriangle a_end -> mid -> c_end up to equivalence.

    ext_id distinguishes inequivalent extensions with equal end data: "split"
    for the zero extension, otherwise an opaque token naming the scalar orbit
    of the extension class chosen by the backend.
    """

    a_end: Obj
    mid: Obj
    c_end: Obj
    ext_id: str = "split"
    annotations: Optional[dict] = field(default=None, compare=False)

    @property
    def is_split(self) -> bool:
        return self.ext_id == "split"

    def reversed(self) -> "Extriangle":
        return Extriangle(self.c_end, self.mid, self.a_end, self.ext_id)


def split_extriangle(a: Obj, c: Obj) -> Extriangle:
    return Extriangle(a, a + c, c, "split")


class BackendContract:
    """Morphism-level oracle a concrete engine must provide.

    All object arguments are Objs in the owning model's index space.  The
    realization data behind an Extriangle is private to the backend; ops
    that need morphisms receive the Extriangle record and look it up.
    """

    def middle_terms(self, model, c: Obj, a: Obj, on_overflow="raise"):
        raise NotImplementedError

    def universal_extension(self, model, c: Obj, a_index: int) -> Extriangle:
        raise NotImplementedError

    def left_exact_defect(self, model, q: Obj, xi: Extriangle) -> int:
        raise NotImplementedError

    def co_defect(self, model, t: Obj, xi: Extriangle) -> int:
        """dim ker(Hom(c_end, t) -> Hom(mid, t)) along the deflation."""
        raise NotImplementedError

    def mono_defect(self, model, t: Obj, xi: Extriangle) -> int:
        """dim ker(Hom(t, a_end) -> Hom(t, mid)) along the inflation."""
        raise NotImplementedError

    def is_epi(self, model, xi: Extriangle, window=None) -> bool:
        window = model.indec_objs() if window is None else window
        return all(self.co_defect(model, t, xi) == 0 for t in window)

    def is_mono(self, model, xi: Extriangle, window=None) -> bool:
        window = model.indec_objs() if window is None else window
        return all(self.mono_defect(model, t, xi) == 0 for t in window)

    def right_minimal_reduce(self, model, q: Obj, target_index: int, xi: Extriangle):
        raise NotImplementedError

    def connecting_rank(self, model, q: Obj, xi: Extriangle) -> int:
        """rank of Hom(q, c_end) -> E(q, a_end); optional."""
        raise NotImplementedError

    def nonzero_deflation_orbits(self, model, m: Obj, c_index: int):
        """(kernel Obj, Extriangle) per scalar orbit of deflations m -> c."""
        raise NotImplementedError


_NAME_RE = re.compile(r"^(?:(\d+)\*)?(.+)$")


@dataclass(frozen=True)
class CategoryModel:
    """A finite window: indecomposables, hom/ext tables, backend, flags.

    hom_table[i, j] = dim Hom(indec_i, indec_j) and ext_table[c, a] =
    dim E(indec_c, indec_a); both extend additively to Objs.
    """

    indecs: tuple
    hom_table: np.ndarray
    ext_table: np.ndarray
    backend: BackendContract
    meta: dict

    # -- naming ------------------------------------------------------------
    def index_of(self, name: str) -> int:
        for ind in self.indecs:
            if ind.name == name:
                return ind.index
        raise UnknownIndec(name)

    def name_of(self, index: int) -> str:
        return self.indecs[index].name

    def n_indecs(self) -> int:
        return len(self.indecs)

    def indec_objs(self) -> list:
        return [Obj.of(i.index) for i in self.indecs]

    def parse_obj(self, text: str) -> Obj:
        text = text.strip()
        if text in ("0", ""):
            return Obj.zero()
        counts = {}
        for part in text.split("+"):
            m = _NAME_RE.match(part.strip())
            if not m:
                raise UnknownIndec(part)
            mult = int(m.group(1)) if m.group(1) else 1
            idx = self.index_of(m.group(2).strip())
            counts[idx] = counts.get(idx, 0) + mult
        return Obj.from_dict(counts)

    def label(self, obj: Obj) -> str:
        if obj.is_zero:
            return "0"
        parts = []
        for i, m in obj.items:
            parts.append(self.name_of(i) if m == 1 else f"{m}*{self.name_of(i)}")
        return "+".join(parts)

    # -- dimension tables ---------------------------------------------------
    def hom_dim(self, x: Obj, y: Obj) -> int:
        return int(
            sum(
                mx * my * int(self.hom_table[ix, iy])
                for ix, mx in x.items
                for iy, my in y.items
            )
        )

    def ext_dim(self, c: Obj, a: Obj) -> int:
        return int(
            sum(
                mc * ma * int(self.ext_table[ic, ia])
                for ic, mc in c.items
                for ia, ma in a.items
            )
        )

    # -- backend pass-throughs ----------------------------------------------
    def middle_terms(self, c: Obj, a: Obj, on_overflow="raise"):
        return self.backend.middle_terms(self, c, a, on_overflow=on_overflow)

    def extriangle_records(self, include_split=False):
        """Canonical in-window extriangle records over indecomposable ends.

        Records whose middle leaves the window are skipped: they are not
        extriangles *of this window category*.
        """
        out = []
        for c in self.indec_objs():
            for a in self.indec_objs():
                for xi in self.middle_terms(c, a, on_overflow="skip"):
                    if include_split or not xi.is_split:
                        out.append(xi)
        return out

    @property
    def is_exact_mode(self) -> bool:
        return bool(self.meta.get("is_exact_mode", False))

    @property
    def window_label(self) -> str:
        return str(self.meta.get("window_label", ""))

    @property
    def characteristic(self) -> int:
        return int(self.meta.get("field_characteristic", 2))


def star(xs: Iterable[Obj], ys: Iterable[Obj], model: CategoryModel) -> list:
    """All middle terms of extriangles x -> m -> y with x in xs, y in ys.

    Always contains the split sums x + y.  Raises WindowOverflow when a
    middle term leaves the declared window.
    """
    out = set()
    for x in sorted(set(xs), key=Obj.sort_key):
        for y in sorted(set(ys), key=Obj.sort_key):
            for xi in model.middle_terms(y, x, on_overflow="raise"):
                out.add(xi.mid)
    return sorted(out, key=Obj.sort_key)


class OppositeBackend(BackendContract):
    """Serves the opposite window by delegating with reversed roles."""

    def __init__(self, base: BackendContract):
        self.base = base

    def middle_terms(self, model, c, a, on_overflow="raise"):
        base_model = model.meta["opposite_of"]
        return [
            xi.reversed()
            for xi in self.base.middle_terms(base_model, a, c, on_overflow=on_overflow)
        ]

    def universal_extension(self, model, c, a_index):
        raise NotImplementedError("universal extensions are not served on opposites")

    def left_exact_defect(self, model, q, xi):
        return self.base.co_defect(model.meta["opposite_of"], q, xi.reversed())

    def co_defect(self, model, t, xi):
        return self.base.left_exact_defect(model.meta["opposite_of"], t, xi.reversed())

    def mono_defect(self, model, t, xi):
        base_model = model.meta["opposite_of"]
        base_xi = xi.reversed()
        # epi-ness of the base deflation tested against t only
        return self.base.co_defect(base_model, t, base_xi)

    def is_epi(self, model, xi, window=None):
        base_model = model.meta["opposite_of"]
        return self.base.is_mono(base_model, xi.reversed(), window)

    def is_mono(self, model, xi, window=None):
        base_model = model.meta["opposite_of"]
        return self.base.is_epi(base_model, xi.reversed(), window)

    def nonzero_deflation_orbits(self, model, m, c_index):
        raise NotImplementedError("filtration search is not served on opposites")


def opposite(model: CategoryModel) -> CategoryModel:
    """The opposite window: hom transposed, extriangles reversed.

    Morphism-level answers are recomputed through the base backend where a
    dual operation exists; the rest is flagged via meta['is_opposite'].
    """
    if isinstance(model.backend, OppositeBackend) and "opposite_of" in model.meta:
        # opposite of an opposite: unwrap to the original data
        return model.meta["opposite_of"]
    meta = dict(model.meta)
    meta["is_opposite"] = True
    meta["window_label"] = model.window_label + "^op"
    meta["opposite_of"] = model
    return CategoryModel(
        indecs=model.indecs,
        hom_table=model.hom_table.T.copy(),
        ext_table=model.ext_table.T.copy(),
        backend=OppositeBackend(model.backend),
        meta=meta,
    )


@dataclass
class ValidationFinding:
    code: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.message}"


@dataclass
class ValidationReport:
    findings: list

    @property
    def ok(self) -> bool:
        return not self.findings

    def __str__(self):
        return "\n".join(str(f) for f in self.findings) if self.findings else "ok"


def validate_model(model: CategoryModel, pair_budget: int = 40) -> ValidationReport:
    """Object-level consistency obligations of a window model.

    Checks: split presence per pair, table shape/additivity sanity,
    sum-closure of extriangle records, vanishing of E against 0, and
    functionality of the zero-middled pairing.
    """
    findings = []
    n = model.n_indecs()
    names = [i.name for i in model.indecs]
    if len(set(names)) != n:
        findings.append(ValidationFinding("names", "duplicate indecomposable names"))
    if model.hom_table.shape != (n, n) or model.ext_table.shape != (n, n):
        findings.append(ValidationFinding("tables", "table shape mismatch"))
        return ValidationReport(findings)
    if np.any(model.hom_table < 0) or np.any(model.ext_table < 0):
        findings.append(ValidationFinding("tables", "negative dimension entry"))
    for i in range(n):
        if model.hom_table[i, i] < 1:
            findings.append(
                ValidationFinding("hom-diagonal", f"hom_dim({names[i]},{names[i]}) = 0")
            )

    indec_objs = model.indec_objs()
    records = []
    for c in indec_objs:
        for a in indec_objs:
            try:
                mids = model.middle_terms(c, a, on_overflow="skip")
            except Exception as exc:  # enumeration failures are findings, not crashes
                findings.append(
                    ValidationFinding(
                        "enumeration",
                        f"middle_terms({model.label(c)},{model.label(a)}) failed: {exc}",
                    )
                )
                continue
            if not any(x.is_split for x in mids):
                findings.append(
                    ValidationFinding(
                        "split-presence",
                        f"split extriangle missing for (C={model.label(c)}, A={model.label(a)})",
                    )
                )
            if model.ext_dim(c, a) == 0 and any(not x.is_split for x in mids):
                findings.append(
                    ValidationFinding(
                        "ext-zero",
                        f"nonsplit extriangle with ext_dim = 0 at "
                        f"(C={model.label(c)}, A={model.label(a)})",
                    )
                )
            records.extend(x for x in mids if not x.is_split)

    # additivity of the tables against multiset doubling
    for obj in indec_objs[: min(n, 6)]:
        double = obj + obj
        for other in indec_objs[: min(n, 6)]:
            if model.hom_dim(double, other) != 2 * model.hom_dim(obj, other):
                findings.append(
                    ValidationFinding("hom-additivity", f"at ({model.label(obj)}, ...)")
                )
            if model.ext_dim(double, other) != 2 * model.ext_dim(obj, other):
                findings.append(
                    ValidationFinding("ext-additivity", f"at ({model.label(obj)}, ...)")
                )

    # E(C, 0) = 0 = E(0, A): enumeration against zero must be split-only
    zero = Obj.zero()
    for obj in indec_objs:
        for c, a in ((obj, zero), (zero, obj)):
            mids = model.middle_terms(c, a, on_overflow="skip")
            if any(not x.is_split for x in mids):
                findings.append(
                    ValidationFinding("zero-ext", f"E against 0 nonzero at {model.label(obj)}")
                )

    # sum-closure on a budget of record pairs
    checked = 0
    for i in range(len(records)):
        for j in range(i, len(records)):
            if checked >= pair_budget:
                break
            r1, r2 = records[i], records[j]
            c, a = r1.c_end + r2.c_end, r1.a_end + r2.a_end
            try:
                mids = model.middle_terms(c, a, on_overflow="skip")
            except Exception:
                continue
            checked += 1
            if not any(x.mid == r1.mid + r2.mid for x in mids):
                findings.append(
                    ValidationFinding(
                        "sum-closure",
                        f"sum of records not derivable at (C={model.label(c)}, A={model.label(a)})",
                    )
                )
        if checked >= pair_budget:
            break

    # zero-middled records must pair ends consistently in both directions
    a_to_c, c_to_a = {}, {}
    for r in records:
        if r.mid.is_zero and not r.a_end.is_zero:
            prev = a_to_c.setdefault(r.a_end, r.c_end)
            if prev != r.c_end:
                findings.append(
                    ValidationFinding(
                        "zero-mid", f"inconsistent pairing for A={model.label(r.a_end)}"
                    )
                )
            prev = c_to_a.setdefault(r.c_end, r.a_end)
            if prev != r.a_end:
                findings.append(
                    ValidationFinding(
                        "zero-mid", f"inconsistent pairing for C={model.label(r.c_end)}"
                    )
                )
    return ValidationReport(findings)
